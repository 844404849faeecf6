#include "tubelink/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include "json_lines.hpp"

namespace tubelink {

using detail::json;
using detail::LineContext;
using ordered_json = nlohmann::ordered_json;

namespace {

BoundingBox parse_box(const LineContext& ctx, const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 4) ctx.fail(field, "expected [x_min,y_min,x_max,y_max]");
  int c[4];
  for (int i = 0; i < 4; ++i) {
    if (!v[i].is_number_integer()) ctx.fail(field, "box coordinates must be integers");
    c[i] = v[i].get<int>();
  }
  BoundingBox b{c[0], c[1], c[2], c[3]};
  if (!b.valid()) ctx.fail(field, "box must satisfy x_min < x_max and y_min < y_max");
  return b;
}

PixelMask parse_mask(const LineContext& ctx, const json& v, const std::string& field, int width, int height) {
  if (!v.is_array()) ctx.fail(field, "expected a flat [start,len,...] array");
  if (width <= 0 || height <= 0) ctx.fail(field, "masks need positive width/height on the record");
  std::vector<std::int64_t> flat;
  flat.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number_integer()) ctx.fail(field, "run entries must be integers");
    flat.push_back(x.get<std::int64_t>());
  }
  try {
    return PixelMask::from_rle(width, height, flat);
  } catch (const ValidationError& e) {
    ctx.fail(field, e.what());
  }
}

/// box and/or mask_rle keys of `obj`. When both are present they must agree.
Region parse_region(const LineContext& ctx, const json& obj, const std::string& prefix, int width,
                    int height) {
  const auto box_it = obj.find("box");
  const auto mask_it = obj.find("mask_rle");
  if (mask_it != obj.end() && !mask_it->is_null()) {
    Region r = Region::from_mask(parse_mask(ctx, *mask_it, prefix + "mask_rle", width, height));
    if (box_it != obj.end() && parse_box(ctx, *box_it, prefix + "box") != r.box) {
      ctx.fail(prefix + "box", "does not equal the minimum bounding box of mask_rle");
    }
    return r;
  }
  if (box_it == obj.end()) ctx.fail(prefix + "box", "missing");
  return Region::from_box(parse_box(ctx, *box_it, prefix + "box"));
}

ClassId resolve_class(const LineContext& ctx, const json& cls, ClassVocabulary& vocabulary) {
  if (!cls.is_string() && !cls.is_number_integer()) ctx.fail("class", "expected a class name or 1-based ordinal");
  try {
    return cls.is_string() ? vocabulary.resolve(cls.get<std::string>())
                           : vocabulary.resolve_ordinal(cls.get<long long>());
  } catch (const ValidationError& e) {
    ctx.fail("class", e.what());
  }
}

ordered_json box_json(const BoundingBox& b) { return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

void check_in_frame(const LineContext& ctx, const Region& r, const std::string& field, int width, int height) {
  if (width > 0 && height > 0 && !r.box.within(width, height)) ctx.fail(field, "box lies outside the frame");
}

}  // namespace

std::vector<VideoProposals> read_proposals(std::istream& in, const std::string& source) {
  std::vector<VideoProposals> videos;
  std::vector<std::size_t> header_lines;
  std::set<int> seen;

  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    if (obj.contains("frame_count")) {
      VideoProposals v;
      v.video_id = ctx.string(obj, "video_id");
      const long long t = ctx.integer(obj, "frame_count");
      if (t < 0) ctx.fail("frame_count", "must be >= 0");
      for (const auto& name : ctx.array(obj, "class_names")) {
        if (!name.is_string()) ctx.fail("class_names", "entries must be strings");
        v.class_names.push_back(name.get<std::string>());
      }
      try {
        ClassVocabulary check(v.class_names);
      } catch (const ValidationError& e) {
        ctx.fail("class_names", e.what());
      }
      if (obj.contains("width")) v.frame_width = int(ctx.integer(obj, "width"));
      if (obj.contains("height")) v.frame_height = int(ctx.integer(obj, "height"));
      v.frames.resize(std::size_t(t));
      videos.push_back(std::move(v));
      header_lines.push_back(ctx.line);
      seen.clear();
      return;
    }

    if (videos.empty()) ctx.fail("<record>", "frame record before any video header");
    auto& v = videos.back();
    if (ctx.string(obj, "video_id") != v.video_id) ctx.fail("video_id", "does not match the preceding header");
    const long long frame = ctx.integer(obj, "frame");
    if (frame < 1 || frame > v.frame_count()) {
      ctx.fail("frame", "ordinal " + std::to_string(frame) + " outside 1.." + std::to_string(v.frame_count()));
    }
    if (!seen.insert(int(frame)).second) ctx.fail("frame", "duplicate record for frame " + std::to_string(frame));
    const int width = int(ctx.integer(obj, "width"));
    const int height = int(ctx.integer(obj, "height"));
    if (width <= 0 || height <= 0) ctx.fail("width", "frame size must be positive");
    if (v.frame_width == 0 && v.frame_height == 0) {
      v.frame_width = width;
      v.frame_height = height;
    } else if (v.frame_width != width || v.frame_height != height) {
      ctx.fail("width", "frame size differs from the video's");
    }

    const auto& props = ctx.array(obj, "proposals");
    auto& out = v.frames[std::size_t(frame - 1)];
    for (std::size_t i = 0; i < props.size(); ++i) {
      const auto& p = props[i];
      const std::string prefix = "proposals[" + std::to_string(i) + "].";
      if (!p.is_object()) ctx.fail(prefix, "expected an object");
      RegionProposal rp;
      rp.frame_index = int(frame);
      rp.region = parse_region(ctx, p, prefix, width, height);
      check_in_frame(ctx, rp.region, prefix + "box", width, height);
      const auto& scores = ctx.array(p, "scores");
      if (scores.size() != v.class_count()) {
        ctx.fail(prefix + "scores", "expected " + std::to_string(v.class_count()) + " values, got " +
                                        std::to_string(scores.size()));
      }
      for (const auto& s : scores) rp.scores.push_back(ctx.real_value(s, prefix + "scores"));
      if (p.contains("actionness")) {
        const double mu = ctx.real(p, "actionness");
        if (mu < 0 || mu > 1) ctx.fail(prefix + "actionness", "must lie in [0,1]");
        rp.actionness = mu;
      }
      out.push_back(std::move(rp));
    }
  });

  for (std::size_t i = 0; i < videos.size(); ++i) {
    auto& v = videos[i];
    if (v.frame_width <= 0 || v.frame_height <= 0) {
      throw ValidationError(source + ":" + std::to_string(header_lines[i]) +
                            ": width: frame size unknown (no header width/height and no frame records)");
    }
    v.validate();
  }
  return videos;
}

std::vector<VideoProposals> load_proposal_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  return read_proposals(in, path.string());
}

VideoProposals load_proposals(const std::filesystem::path& path) {
  auto videos = load_proposal_file(path);
  if (videos.size() != 1) {
    throw ValidationError(path.string() + ": expected exactly one video, found " + std::to_string(videos.size()));
  }
  return std::move(videos.front());
}

void write_proposals(std::ostream& out, const VideoProposals& video) {
  ordered_json header;
  header["video_id"] = video.video_id;
  header["frame_count"] = video.frame_count();
  header["class_names"] = video.class_names;
  header["width"] = video.frame_width;
  header["height"] = video.frame_height;
  out << header.dump() << '\n';

  for (int t = 1; t <= video.frame_count(); ++t) {
    ordered_json rec;
    rec["video_id"] = video.video_id;
    rec["frame"] = t;
    rec["width"] = video.frame_width;
    rec["height"] = video.frame_height;
    rec["proposals"] = ordered_json::array();
    for (const auto& p : video.frames[std::size_t(t - 1)]) {
      ordered_json j;
      j["box"] = box_json(p.region.box);
      j["scores"] = p.scores;
      if (p.region.mask) j["mask_rle"] = p.region.mask->to_rle();
      if (p.actionness) j["actionness"] = *p.actionness;
      rec["proposals"].push_back(std::move(j));
    }
    out << rec.dump() << '\n';
  }
}

void save_proposals(const std::filesystem::path& path, std::span<const VideoProposals> videos) {
  auto out = detail::open_output(path.string());
  for (const auto& v : videos) write_proposals(out, v);
}

std::vector<GroundTruthTube> read_ground_truth(std::istream& in, ClassVocabulary& vocabulary,
                                               const std::string& source) {
  std::vector<GroundTruthTube> tubes;
  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    GroundTruthTube g;
    g.video_id = ctx.string(obj, "video_id");
    g.tube_id = obj.contains("tube_id") ? ctx.string(obj, "tube_id") : g.video_id + "#" + std::to_string(tubes.size());
    g.class_id = resolve_class(ctx, ctx.require(obj, "class"), vocabulary);
    g.t_start = int(ctx.integer(obj, "t_start"));
    g.t_end = int(ctx.integer(obj, "t_end"));
    const std::string who = "tube '" + g.tube_id + "'";
    if (g.t_start < 1) ctx.fail("t_start", who + ": frames are 1-based");
    if (g.t_start > g.t_end) ctx.fail("t_end", who + ": t_start > t_end");
    const int width = obj.contains("width") ? int(ctx.integer(obj, "width")) : 0;
    const int height = obj.contains("height") ? int(ctx.integer(obj, "height")) : 0;
    const auto& extents = ctx.array(obj, "extents");
    if (int(extents.size()) != g.length()) {
      ctx.fail("extents", who + ": " + std::to_string(extents.size()) + " extents for a " +
                              std::to_string(g.length()) + "-frame interval");
    }
    for (std::size_t i = 0; i < extents.size(); ++i) {
      const std::string prefix = "extents[" + std::to_string(i) + "].";
      if (!extents[i].is_object()) ctx.fail(prefix, "expected an object");
      g.extents.push_back(parse_region(ctx, extents[i], prefix, width, height));
      check_in_frame(ctx, g.extents.back(), prefix + "box", width, height);
    }
    tubes.push_back(std::move(g));
  });
  return tubes;
}

std::vector<GroundTruthTube> load_ground_truth(const std::filesystem::path& path, ClassVocabulary& vocabulary) {
  auto in = detail::open_input(path.string());
  return read_ground_truth(in, vocabulary, path.string());
}

namespace {

/// Frame size implied by the first mask among `regions`, or nothing.
template <typename Range, typename Get>
void put_mask_dims(ordered_json& rec, const Range& range, Get get) {
  for (const auto& item : range) {
    const Region& r = get(item);
    if (r.mask) {
      rec["width"] = r.mask->width();
      rec["height"] = r.mask->height();
      return;
    }
  }
}

}  // namespace

void write_ground_truth(std::ostream& out, std::span<const GroundTruthTube> tubes,
                        const ClassVocabulary& vocabulary) {
  for (const auto& g : tubes) {
    ordered_json rec;
    rec["video_id"] = g.video_id;
    rec["tube_id"] = g.tube_id;
    rec["class"] = vocabulary.name(g.class_id);
    rec["t_start"] = g.t_start;
    rec["t_end"] = g.t_end;
    put_mask_dims(rec, g.extents, [](const Region& r) -> const Region& { return r; });
    rec["extents"] = ordered_json::array();
    for (const auto& e : g.extents) {
      ordered_json j;
      j["box"] = box_json(e.box);
      if (e.mask) j["mask_rle"] = e.mask->to_rle();
      rec["extents"].push_back(std::move(j));
    }
    out << rec.dump() << '\n';
  }
}

void save_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthTube> tubes,
                       const ClassVocabulary& vocabulary) {
  auto out = detail::open_output(path.string());
  write_ground_truth(out, tubes, vocabulary);
}

std::vector<ActionTube> read_tubes(std::istream& in, ClassVocabulary& vocabulary, const std::string& source) {
  std::vector<ActionTube> tubes;
  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    ActionTube tube;
    tube.video_id = ctx.string(obj, "video_id");
    tube.class_id = resolve_class(ctx, ctx.require(obj, "class"), vocabulary);
    tube.t_start = int(ctx.integer(obj, "t_start"));
    tube.t_end = int(ctx.integer(obj, "t_end"));
    if (tube.t_start < 1 || tube.t_start > tube.t_end) ctx.fail("t_start", "invalid frame interval");
    tube.score = ctx.real(obj, "score");
    const int width = obj.contains("width") ? int(ctx.integer(obj, "width")) : 0;
    const int height = obj.contains("height") ? int(ctx.integer(obj, "height")) : 0;
    const auto& boxes = ctx.array(obj, "boxes");
    if (int(boxes.size()) != tube.length()) ctx.fail("boxes", "count does not match the frame interval");
    const json* masks = nullptr;
    if (obj.contains("mask_rle")) {
      masks = &ctx.array(obj, "mask_rle");
      if (masks->size() != boxes.size()) ctx.fail("mask_rle", "count does not match the frame interval");
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      json extent = json::object();
      extent["box"] = boxes[i];
      if (masks) extent["mask_rle"] = (*masks)[i];
      RegionProposal p;
      p.frame_index = tube.t_start + int(i);
      p.region = parse_region(ctx, extent, "boxes[" + std::to_string(i) + "].", width, height);
      tube.members.push_back(std::move(p));
    }
    tubes.push_back(std::move(tube));
  });
  return tubes;
}

std::vector<ActionTube> load_tubes(const std::filesystem::path& path, ClassVocabulary& vocabulary) {
  auto in = detail::open_input(path.string());
  return read_tubes(in, vocabulary, path.string());
}

void write_tubes(std::ostream& out, std::span<const ActionTube> tubes, const ClassVocabulary& vocabulary) {
  for (const auto& tube : tubes) {
    ordered_json rec;
    rec["video_id"] = tube.video_id;
    rec["class"] = vocabulary.name(tube.class_id);
    rec["t_start"] = tube.t_start;
    rec["t_end"] = tube.t_end;
    rec["score"] = tube.score;
    rec["boxes"] = ordered_json::array();
    bool any_mask = false;
    for (const auto& m : tube.members) {
      rec["boxes"].push_back(box_json(m.region.box));
      any_mask = any_mask || m.region.mask.has_value();
    }
    if (any_mask) {
      put_mask_dims(rec, tube.members, [](const RegionProposal& p) -> const Region& { return p.region; });
      rec["mask_rle"] = ordered_json::array();
      for (const auto& m : tube.members) {
        rec["mask_rle"].push_back(m.region.mask ? ordered_json(m.region.mask->to_rle()) : ordered_json());
      }
    }
    out << rec.dump() << '\n';
  }
}

void save_tubes(const std::filesystem::path& path, std::span<const ActionTube> tubes,
                const ClassVocabulary& vocabulary) {
  auto out = detail::open_output(path.string());
  write_tubes(out, tubes, vocabulary);
}

std::vector<FlowMagnitudeMap> read_flow_json(std::istream& in, const std::string& source) {
  std::vector<FlowMagnitudeMap> maps;
  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    FlowMagnitudeMap m;
    m.frame = int(ctx.integer(obj, "frame"));
    m.width = int(ctx.integer(obj, "width"));
    m.height = int(ctx.integer(obj, "height"));
    const auto& values = ctx.array(obj, "magnitudes");
    m.magnitudes.reserve(values.size());
    for (const auto& v : values) m.magnitudes.push_back(ctx.real_value(v, "magnitudes"));
    try {
      m.validate();
    } catch (const ValidationError& e) {
      ctx.fail("magnitudes", e.what());
    }
    maps.push_back(std::move(m));
  });
  return maps;
}

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

bool read_u32(std::istream& in, std::uint32_t& v) {
  char buf[4];
  if (!in.read(buf, 4)) return false;
  std::memcpy(&v, buf, 4);
  v = to_little(v);
  return true;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

}  // namespace

std::vector<FlowMagnitudeMap> read_flow_binary(std::istream& in, const std::string& source) {
  std::vector<FlowMagnitudeMap> maps;
  std::uint32_t w = 0;
  while (read_u32(in, w)) {
    std::uint32_t h = 0, f = 0;
    const std::string where = source + ": record " + std::to_string(maps.size()) + ": ";
    if (!read_u32(in, h) || !read_u32(in, f)) throw ValidationError(where + "truncated header");
    FlowMagnitudeMap m;
    m.width = int(std::int32_t(w));
    m.height = int(std::int32_t(h));
    m.frame = int(std::int32_t(f));
    if (m.width <= 0 || m.height <= 0) throw ValidationError(where + "non-positive dimensions");
    m.magnitudes.resize(std::size_t(m.width) * m.height);
    for (auto& v : m.magnitudes) {
      std::uint32_t bits;
      if (!read_u32(in, bits)) throw ValidationError(where + "truncated magnitudes");
      v = double(std::bit_cast<float>(bits));
    }
    try {
      m.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

void write_flow_binary(std::ostream& out, std::span<const FlowMagnitudeMap> maps) {
  for (const auto& m : maps) {
    write_u32(out, std::uint32_t(m.width));
    write_u32(out, std::uint32_t(m.height));
    write_u32(out, std::uint32_t(m.frame));
    for (double v : m.magnitudes) write_u32(out, std::bit_cast<std::uint32_t>(float(v)));
  }
}

std::vector<FlowMagnitudeMap> load_flow_maps(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".flow") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
    return read_flow_binary(in, path.string());
  }
  auto in = detail::open_input(path.string());
  return read_flow_json(in, path.string());
}

std::vector<BinarySegmentation> read_segmentations(std::istream& in, const std::string& source) {
  std::vector<BinarySegmentation> out;
  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    BinarySegmentation s;
    s.frame = int(ctx.integer(obj, "frame"));
    s.width = int(ctx.integer(obj, "width"));
    s.height = int(ctx.integer(obj, "height"));
    if (s.width <= 0 || s.height <= 0) ctx.fail("width", "frame size must be positive");
    const auto& rle = ctx.array(obj, "mask_rle");
    if (!rle.empty()) s.foreground = parse_mask(ctx, rle, "mask_rle", s.width, s.height);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<BinarySegmentation> load_segmentations(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  return read_segmentations(in, path.string());
}

}  // namespace tubelink
