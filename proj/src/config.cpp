#include "tubelink/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "tubelink/errors.hpp"

namespace tubelink {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(std::string_view key, std::string_view value) {
  // std::from_chars for double is missing on older libstdc++; strtod is fine here.
  const std::string text(value);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ValidationError("setting '" + std::string(key) + "': '" + text + "' is not a number");
  }
  return v;
}

int to_int(std::string_view key, std::string_view value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("setting '" + std::string(key) + "': '" + std::string(value) + "' is not an integer");
  }
  return v;
}

}  // namespace

void RunSettings::validate() const {
  linker.validate();
  eval.validate();
  if (threads < 1) throw ValidationError("threads must be >= 1");
  for (const auto& [name, area] : class_area) {
    if (!(area >= 0)) throw ValidationError("gamma." + name + " must be >= 0");
  }
}

void apply_setting(RunSettings& s, std::string_view key, std::string_view value) {
  if (key == "lambda") s.linker.lambda = to_real(key, value);
  else if (key == "alpha") s.linker.alpha = to_real(key, value);
  else if (key == "max_paths") s.linker.max_paths = to_int(key, value);
  else if (key == "delta") s.linker.min_length = to_int(key, value);
  else if (key == "tau") s.linker.area_divisor = to_real(key, value);
  else if (key == "nms_iou") s.linker.nms_iou = to_real(key, value);
  else if (key == "actionness_threshold") s.linker.actionness_threshold = to_real(key, value);
  else if (key == "top_k_score") s.linker.top_k_score = to_int(key, value);
  else if (key == "placeholder_score") s.linker.placeholder_score = to_real(key, value);
  else if (key == "t_sr") s.eval.spatial_recall = to_real(key, value);
  else if (key == "t_tr") s.eval.temporal_recall = to_real(key, value);
  else if (key == "t_sp") s.eval.spatial_precision = to_real(key, value);
  else if (key == "t_tp") s.eval.temporal_precision = to_real(key, value);
  else if (key == "eta") s.eval.eta = to_real(key, value);
  else if (key == "grid_step") s.eval.grid_step = to_real(key, value);
  else if (key == "threads") s.threads = to_int(key, value);
  else if (key == "appearance_weight") s.appearance_weight = to_real(key, value);
  else if (key == "flow_weight") s.flow_weight = to_real(key, value);
  else if (key.starts_with("gamma.") && key.size() > 6) s.class_area[std::string(key.substr(6))] = to_real(key, value);
  else throw ValidationError("unknown setting '" + std::string(key) + "'");
}

RunSettings read_config(std::istream& in, const std::string& source) {
  RunSettings s;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(source + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    try {
      apply_setting(s, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError(source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return s;
}

RunSettings load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  return read_config(in, path.string());
}

LinkerConfig linker_for(const RunSettings& settings, const std::vector<std::string>& class_names) {
  LinkerConfig cfg = settings.linker;
  cfg.class_area.clear();
  for (ClassId c = 0; c < class_names.size(); ++c) {
    auto it = settings.class_area.find(class_names[c]);
    if (it != settings.class_area.end()) cfg.class_area[c] = it->second;
  }
  return cfg;
}

}  // namespace tubelink
