#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tubelink/evaluation.hpp"
#include "tubelink/types.hpp"

namespace tubelink {

/// Every tunable of a run. Defaults: alpha 3, delta 20, tau 2.2, eta 0.1,
/// max_paths 3, actionness threshold 0.003, thresholds at the 10% level.
struct RunSettings {
  LinkerConfig linker;
  EvalThresholds eval;
  double appearance_weight = 1.0;
  double flow_weight = 1.0;
  int threads = 1;
  /// gamma_c by class name; mapped onto linker.class_area per video.
  std::map<std::string, double, std::less<>> class_area;

  void validate() const;
};

/// Flat "key = value" text. Blank lines and '#' comments are ignored.
/// Keys: lambda alpha max_paths delta tau nms_iou actionness_threshold
/// top_k_score placeholder_score t_sr t_tr t_sp t_tp eta grid_step threads
/// appearance_weight flow_weight gamma.<class name>.
RunSettings read_config(std::istream& in, const std::string& source = "<stream>");
RunSettings load_config(const std::filesystem::path& path);

/// Sets one key. Throws ValidationError for unknown keys or values that do
/// not parse as the key's type.
void apply_setting(RunSettings& settings, std::string_view key, std::string_view value);

/// linker.class_area for one class vocabulary. Unknown names are ignored.
LinkerConfig linker_for(const RunSettings& settings, const std::vector<std::string>& class_names);

}  // namespace tubelink
