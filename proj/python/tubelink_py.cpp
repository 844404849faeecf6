#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tubelink/errors.hpp"
#include "tubelink/evaluation.hpp"
#include "tubelink/io.hpp"
#include "tubelink/linker.hpp"
#include "tubelink/synthetic.hpp"

namespace py = pybind11;
using namespace tubelink;

namespace {

ClassVocabulary vocabulary(const std::vector<std::string>& names) {
  return ClassVocabulary(names, names.empty());
}

std::string box_repr(const BoundingBox& b) {
  return "BoundingBox(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
         std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
}

}  // namespace

PYBIND11_MODULE(_tubelink, m) {
  m.doc() = "Link per-frame region proposals into action tubes and evaluate them";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init(&BoundingBox::make), py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &BoundingBox::x_min)
      .def_readwrite("y_min", &BoundingBox::y_min)
      .def_readwrite("x_max", &BoundingBox::x_max)
      .def_readwrite("y_max", &BoundingBox::y_max)
      .def_property_readonly("width", &BoundingBox::width)
      .def_property_readonly("height", &BoundingBox::height)
      .def_property_readonly("area", &BoundingBox::area)
      .def(py::self == py::self)
      .def("__repr__", &box_repr);

  py::class_<PixelMask>(m, "PixelMask")
      .def_static("from_rle",
                  [](int w, int h, const std::vector<std::int64_t>& flat) { return PixelMask::from_rle(w, h, flat); },
                  py::arg("width"), py::arg("height"), py::arg("rle"))
      .def_static("from_box", &PixelMask::from_box, py::arg("width"), py::arg("height"), py::arg("box"))
      .def_property_readonly("width", &PixelMask::width)
      .def_property_readonly("height", &PixelMask::height)
      .def("to_rle", &PixelMask::to_rle)
      .def("pixel_count", &PixelMask::pixel_count)
      .def("bounding_box", &PixelMask::bounding_box)
      .def("contains", &PixelMask::contains, py::arg("x"), py::arg("y"));

  py::class_<Region>(m, "Region")
      .def(py::init(&Region::from_box), py::arg("box"))
      .def_static("from_mask", &Region::from_mask, py::arg("mask"))
      .def_readwrite("box", &Region::box)
      .def_readwrite("mask", &Region::mask);

  m.def("box_iou", &box_iou, py::arg("a"), py::arg("b"));
  m.def("region_overlap", &region_overlap, py::arg("a"), py::arg("b"));

  py::class_<RegionProposal>(m, "RegionProposal")
      .def(py::init([](int frame, const BoundingBox& box, ScoreVector scores) {
             return RegionProposal{frame, Region::from_box(box), std::move(scores), std::nullopt};
           }),
           py::arg("frame_index"), py::arg("box"), py::arg("scores"))
      .def_readwrite("frame_index", &RegionProposal::frame_index)
      .def_readwrite("region", &RegionProposal::region)
      .def_readwrite("scores", &RegionProposal::scores)
      .def_readwrite("actionness", &RegionProposal::actionness);

  py::class_<VideoProposals>(m, "VideoProposals")
      .def(py::init<>())
      .def_readwrite("video_id", &VideoProposals::video_id)
      .def_readwrite("frame_width", &VideoProposals::frame_width)
      .def_readwrite("frame_height", &VideoProposals::frame_height)
      .def_readwrite("class_names", &VideoProposals::class_names)
      .def_readwrite("frames", &VideoProposals::frames)
      .def_property_readonly("frame_count", &VideoProposals::frame_count)
      .def("validate", &VideoProposals::validate);

  py::class_<ActionPath>(m, "ActionPath")
      .def(py::init<>())
      .def_readwrite("class_id", &ActionPath::class_id)
      .def_readwrite("members", &ActionPath::members)
      .def_readwrite("energy", &ActionPath::energy);

  py::class_<ActionTube>(m, "ActionTube")
      .def(py::init<>())
      .def_readwrite("video_id", &ActionTube::video_id)
      .def_readwrite("class_id", &ActionTube::class_id)
      .def_readwrite("t_start", &ActionTube::t_start)
      .def_readwrite("t_end", &ActionTube::t_end)
      .def_readwrite("members", &ActionTube::members)
      .def_readwrite("score", &ActionTube::score)
      .def_property_readonly("length", &ActionTube::length)
      .def("boxes", [](const ActionTube& t) {
        std::vector<BoundingBox> out;
        for (const auto& m : t.members) out.push_back(m.region.box);
        return out;
      });

  py::class_<GroundTruthTube>(m, "GroundTruthTube")
      .def(py::init<>())
      .def_readwrite("video_id", &GroundTruthTube::video_id)
      .def_readwrite("tube_id", &GroundTruthTube::tube_id)
      .def_readwrite("class_id", &GroundTruthTube::class_id)
      .def_readwrite("t_start", &GroundTruthTube::t_start)
      .def_readwrite("t_end", &GroundTruthTube::t_end)
      .def_readwrite("extents", &GroundTruthTube::extents)
      .def_property_readonly("length", &GroundTruthTube::length);

  py::class_<LinkerConfig>(m, "LinkerConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &LinkerConfig::lambda)
      .def_readwrite("alpha", &LinkerConfig::alpha)
      .def_readwrite("max_paths", &LinkerConfig::max_paths)
      .def_readwrite("min_length", &LinkerConfig::min_length)
      .def_readwrite("area_divisor", &LinkerConfig::area_divisor)
      .def_readwrite("class_area", &LinkerConfig::class_area)
      .def_readwrite("nms_iou", &LinkerConfig::nms_iou)
      .def_readwrite("top_k_score", &LinkerConfig::top_k_score)
      .def_readwrite("placeholder_score", &LinkerConfig::placeholder_score)
      .def("validate", &LinkerConfig::validate);

  m.def("nms_indices",
        [](const std::vector<RegionProposal>& p, ClassId c, double iou) { return nms_indices(p, c, iou); },
        py::arg("proposals"), py::arg("class_id"), py::arg("iou_threshold"));
  m.def("best_path", py::overload_cast<const VideoProposals&, ClassId, double, double>(&best_path),
        py::arg("video"), py::arg("class_id"), py::arg("lambda_") = 1.0, py::arg("placeholder_score") = 0.0);
  m.def("path_energy", &path_energy, py::arg("video"), py::arg("path"), py::arg("lambda_") = 1.0,
        py::arg("placeholder_score") = 0.0);
  m.def("extract_paths",
        py::overload_cast<const VideoProposals&, ClassId, const LinkerConfig&>(&extract_paths), py::arg("video"),
        py::arg("class_id"), py::arg("config") = LinkerConfig{});
  m.def("temporal_label", &temporal_label, py::arg("path"), py::arg("video"), py::arg("alpha") = 3.0,
        py::arg("placeholder_score") = 0.0);
  m.def("extract_tubes", &extract_tubes, py::arg("path"), py::arg("labels"), py::arg("video"));
  m.def("tube_score", &tube_score, py::arg("tube"), py::arg("top_k") = 10);
  m.def("filter_tubes", &filter_tubes, py::arg("tubes"), py::arg("config") = LinkerConfig{});
  m.def("link_video", &link_video, py::arg("video"), py::arg("config") = LinkerConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<EvalThresholds>(m, "EvalThresholds")
      .def(py::init([](double sr, double tr, double sp, double tp, double eta, double step) {
             return EvalThresholds{sr, tr, sp, tp, eta, step};
           }),
           py::arg("spatial_recall") = 0.1, py::arg("temporal_recall") = 0.1, py::arg("spatial_precision") = 0.1,
           py::arg("temporal_precision") = 0.1, py::arg("eta") = 0.1, py::arg("grid_step") = 0.1)
      .def_readwrite("spatial_recall", &EvalThresholds::spatial_recall)
      .def_readwrite("temporal_recall", &EvalThresholds::temporal_recall)
      .def_readwrite("spatial_precision", &EvalThresholds::spatial_precision)
      .def_readwrite("temporal_precision", &EvalThresholds::temporal_precision)
      .def_readwrite("eta", &EvalThresholds::eta)
      .def_readwrite("grid_step", &EvalThresholds::grid_step);

  py::class_<OverlapProfile>(m, "OverlapProfile")
      .def_readonly("spatial_recall", &OverlapProfile::spatial_recall)
      .def_readonly("spatial_precision", &OverlapProfile::spatial_precision)
      .def_readonly("temporal_recall", &OverlapProfile::temporal_recall)
      .def_readonly("temporal_precision", &OverlapProfile::temporal_precision);

  py::class_<Assignment>(m, "Assignment")
      .def_readonly("detection", &Assignment::detection)
      .def_readonly("ground_truth", &Assignment::ground_truth)
      .def_readonly("iou", &Assignment::iou)
      .def_readonly("profile", &Assignment::profile);

  py::class_<MatchReport>(m, "MatchReport")
      .def_readonly("assignments", &MatchReport::assignments)
      .def_readonly("true_positives", &MatchReport::true_positives)
      .def_readonly("false_positives", &MatchReport::false_positives)
      .def_readonly("false_negatives", &MatchReport::false_negatives)
      .def_readonly("recall", &MatchReport::recall)
      .def_readonly("precision", &MatchReport::precision)
      .def_readonly("f1", &MatchReport::f1);

  py::class_<IntegratedScores>(m, "IntegratedScores")
      .def_readonly("spatial_recall", &IntegratedScores::spatial_recall)
      .def_readonly("spatial_precision", &IntegratedScores::spatial_precision)
      .def_readonly("temporal_recall", &IntegratedScores::temporal_recall)
      .def_readonly("temporal_precision", &IntegratedScores::temporal_precision)
      .def_readonly("overall", &IntegratedScores::overall);

  m.def("f1", &f1, py::arg("recall"), py::arg("precision"));
  m.def("overlap_profile", &overlap_profile, py::arg("detection"), py::arg("ground_truth"));
  m.def("spatiotemporal_iou", &spatiotemporal_iou, py::arg("detection"), py::arg("ground_truth"));
  m.def("match_tubes",
        [](const std::vector<ActionTube>& d, const std::vector<GroundTruthTube>& g) { return match_tubes(d, g); },
        py::arg("detections"), py::arg("ground_truth"));
  m.def(
      "detection_metrics",
      [](const std::vector<ActionTube>& d, const std::vector<GroundTruthTube>& g, const EvalThresholds& th) {
        return detection_metrics(d, g, th);
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("thresholds") = EvalThresholds{});
  m.def(
      "metric_curve",
      [](const std::vector<ActionTube>& d, const std::vector<GroundTruthTube>& g, const std::string& axis,
         double eta, double step) {
        const auto a = parse_axis(axis);
        if (!a) throw ValidationError("unknown axis '" + axis + "' (expected sr, sp, tr or tp)");
        std::vector<std::tuple<double, double, double, double>> out;
        for (const auto& p : metric_curve(d, g, *a, eta, step)) out.emplace_back(p.threshold, p.recall, p.precision, p.f1);
        return out;
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("axis"), py::arg("eta") = 0.1,
      py::arg("grid_step") = 0.1);
  m.def(
      "integrated_scores",
      [](const std::vector<ActionTube>& d, const std::vector<GroundTruthTube>& g, double eta, double step) {
        return integrated_scores(d, g, eta, step);
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("eta") = 0.1, py::arg("grid_step") = 0.1);

  m.def("load_proposals", &load_proposal_file, py::arg("path"));
  m.def(
      "save_proposals", [](const std::filesystem::path& p, const std::vector<VideoProposals>& v) { save_proposals(p, v); },
      py::arg("path"), py::arg("videos"));
  m.def(
      "load_ground_truth",
      [](const std::filesystem::path& p, const std::vector<std::string>& names) {
        auto vocab = vocabulary(names);
        auto tubes = load_ground_truth(p, vocab);
        return py::make_tuple(tubes, vocab.names());
      },
      py::arg("path"), py::arg("class_names") = std::vector<std::string>{},
      "Returns (tubes, class_names). An empty class_names list accepts any class name.");
  m.def(
      "save_ground_truth",
      [](const std::filesystem::path& p, const std::vector<GroundTruthTube>& t, const std::vector<std::string>& names) {
        save_ground_truth(p, t, ClassVocabulary(names));
      },
      py::arg("path"), py::arg("tubes"), py::arg("class_names"));
  m.def(
      "load_tubes",
      [](const std::filesystem::path& p, const std::vector<std::string>& names) {
        auto vocab = vocabulary(names);
        auto tubes = load_tubes(p, vocab);
        return py::make_tuple(tubes, vocab.names());
      },
      py::arg("path"), py::arg("class_names") = std::vector<std::string>{},
      "Returns (tubes, class_names). An empty class_names list accepts any class name.");
  m.def(
      "save_tubes",
      [](const std::filesystem::path& p, const std::vector<ActionTube>& t, const std::vector<std::string>& names) {
        save_tubes(p, t, ClassVocabulary(names));
      },
      py::arg("path"), py::arg("tubes"), py::arg("class_names"));

  py::class_<PlantedTube>(m, "PlantedTube")
      .def(py::init([](ClassId c, int t0, int t1, const BoundingBox& b0, const BoundingBox& b1, double margin) {
             return PlantedTube{c, t0, t1, b0, b1, margin};
           }),
           py::arg("class_id"), py::arg("t_start"), py::arg("t_end"), py::arg("box_start"), py::arg("box_end"),
           py::arg("margin") = 1.0)
      .def_readwrite("class_id", &PlantedTube::class_id)
      .def_readwrite("t_start", &PlantedTube::t_start)
      .def_readwrite("t_end", &PlantedTube::t_end)
      .def_readwrite("box_start", &PlantedTube::box_start)
      .def_readwrite("box_end", &PlantedTube::box_end)
      .def_readwrite("margin", &PlantedTube::margin);

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_readwrite("video_id", &ScenarioSpec::video_id)
      .def_readwrite("frame_width", &ScenarioSpec::frame_width)
      .def_readwrite("frame_height", &ScenarioSpec::frame_height)
      .def_readwrite("frame_count", &ScenarioSpec::frame_count)
      .def_readwrite("class_count", &ScenarioSpec::class_count)
      .def_readwrite("class_names", &ScenarioSpec::class_names)
      .def_readwrite("planted", &ScenarioSpec::planted)
      .def_readwrite("distractors_per_frame", &ScenarioSpec::distractors_per_frame)
      .def_readwrite("score_noise", &ScenarioSpec::score_noise)
      .def_readwrite("box_jitter", &ScenarioSpec::box_jitter)
      .def_readwrite("seed", &ScenarioSpec::seed);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("video", &Scenario::video)
      .def_readonly("ground_truth", &Scenario::ground_truth);

  m.def("generate_scenario", &generate_scenario, py::arg("spec"));
}
