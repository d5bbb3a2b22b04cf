#include "netsketch/run_config.hpp"

#include <fstream>
#include <set>

#include "netsketch/error.hpp"

namespace netsketch {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, std::string_view where,
                    std::initializer_list<std::string_view> known) {
  if (!object.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

SyntheticProfile read_synthetic(const json& j, SyntheticProfile profile) {
  reject_unknown(j, "synthetic",
                 {"flows", "packets_per_flow", "duration_ns", "start_ns", "jitter", "anomaly",
                  "rate_multiplier", "window"});
  read(j, "flows", profile.flow_count);
  read(j, "packets_per_flow", profile.packets_per_flow);
  read(j, "duration_ns", profile.duration_ns);
  read(j, "start_ns", profile.start_ns);
  read(j, "jitter", profile.jitter);
  read(j, "rate_multiplier", profile.rate_multiplier);
  if (j.contains("anomaly")) {
    std::string name;
    read(j, "anomaly", name);
    const auto kind = parse_anomaly_kind(name);
    if (!kind) throw ConfigError("unknown anomaly kind '" + name + "'");
    profile.anomaly = *kind;
  }
  if (j.contains("window")) {
    std::vector<double> window;
    read(j, "window", window);
    if (window.size() != 2) throw ConfigError("synthetic window must be [begin, end]");
    profile.window_begin = window[0];
    profile.window_end = window[1];
  }
  return profile;
}

SketchConfig read_sketch(const json& j, SketchConfig config) {
  reject_unknown(j, "sketch", {"hash_width", "mem_stages", "epoch_ns", "key_spec"});
  read(j, "hash_width", config.hash_width);
  read(j, "mem_stages", config.mem_stages);
  read(j, "epoch_ns", config.epoch_ns);
  if (j.contains("key_spec")) {
    std::string spec;
    read(j, "key_spec", spec);
    config.key_spec = KeySpec::parse(spec);
  }
  return config;
}

SweepGrid read_grid(const json& j, SweepGrid grid) {
  reject_unknown(j, "sweep", {"hash_widths", "mem_stages", "epoch_ns", "key_specs", "detectors"});
  read(j, "hash_widths", grid.hash_widths);
  read(j, "mem_stages", grid.mem_stages);
  read(j, "epoch_ns", grid.epoch_ns);
  if (j.contains("key_specs")) {
    std::vector<std::string> specs;
    read(j, "key_specs", specs);
    grid.key_specs.clear();
    for (const auto& s : specs) grid.key_specs.push_back(KeySpec::parse(s));
  }
  if (j.contains("detectors")) {
    std::vector<std::string> specs;
    read(j, "detectors", specs);
    grid.detectors.clear();
    for (const auto& s : specs) grid.detectors.push_back(DetectorSpec::parse(s));
  }
  return grid;
}

}  // namespace

RunConfig apply_run_document(const json& doc, RunConfig base) {
  reject_unknown(doc, "run config",
                 {"trace", "synthetic", "seed", "sketch", "detector", "sweep", "bench",
                  "bench_repetitions", "threads", "output_dir"});
  if (doc.contains("trace")) {
    std::string path;
    read(doc, "trace", path);
    base.trace_path = path;
  }
  if (doc.contains("synthetic")) {
    base.synthetic = read_synthetic(doc.at("synthetic"), base.synthetic.value_or(SyntheticProfile{}));
  }
  read(doc, "seed", base.seed);
  if (doc.contains("sketch")) base.sketch = read_sketch(doc.at("sketch"), base.sketch);
  if (doc.contains("detector")) {
    std::string spec;
    read(doc, "detector", spec);
    base.detector = DetectorSpec::parse(spec);
  }
  if (doc.contains("sweep")) base.grid = read_grid(doc.at("sweep"), base.grid);
  read(doc, "bench", base.bench);
  read(doc, "bench_repetitions", base.bench_repetitions);
  read(doc, "threads", base.threads);
  read(doc, "output_dir", base.output_dir);
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config document '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config document '" + path + "': " + e.what());
  }
  return apply_run_document(doc, std::move(base));
}

json to_json(const RunConfig& config) {
  json j;
  if (config.trace_path) j["trace"] = *config.trace_path;
  if (config.synthetic) {
    const auto& s = *config.synthetic;
    j["synthetic"] = {{"flows", s.flow_count},
                      {"packets_per_flow", s.packets_per_flow},
                      {"duration_ns", s.duration_ns},
                      {"start_ns", s.start_ns},
                      {"jitter", s.jitter},
                      {"anomaly", std::string(to_string(s.anomaly))},
                      {"rate_multiplier", s.rate_multiplier},
                      {"window", {s.window_begin, s.window_end}}};
  }
  j["seed"] = config.seed;
  j["sketch"] = {{"hash_width", config.sketch.hash_width},
                 {"mem_stages", config.sketch.mem_stages},
                 {"epoch_ns", config.sketch.epoch_ns},
                 {"key_spec", config.sketch.key_spec.to_string()}};
  j["detector"] = config.detector.to_string();
  json key_specs = json::array();
  for (const auto& k : config.grid.key_specs) key_specs.push_back(k.to_string());
  json detectors = json::array();
  for (const auto& d : config.grid.detectors) detectors.push_back(d.to_string());
  j["sweep"] = {{"hash_widths", config.grid.hash_widths},
                {"mem_stages", config.grid.mem_stages},
                {"epoch_ns", config.grid.epoch_ns},
                {"key_specs", key_specs},
                {"detectors", detectors}};
  j["bench"] = config.bench;
  j["bench_repetitions"] = config.bench_repetitions;
  j["threads"] = config.threads;
  j["output_dir"] = config.output_dir;
  return j;
}

}  // namespace netsketch
