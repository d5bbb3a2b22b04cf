#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "netsketch/detectors.hpp"
#include "netsketch/sketch.hpp"
#include "netsketch/sweep.hpp"
#include "netsketch/synthetic.hpp"

namespace netsketch {

/// Declarative description of a run. Everything but the trace source has a default.
///
/// JSON document layout (every key optional, unknown keys rejected):
///
///   {
///     "trace": "path/to/trace.csv",
///     "synthetic": {"flows": 64, "packets_per_flow": 1000, "duration_ns": 10000000000,
///                   "start_ns": 0, "jitter": 0.0, "anomaly": "flood",
///                   "rate_multiplier": 50, "window": [0.4, 0.5]},
///     "seed": 1,
///     "sketch": {"hash_width": 5, "mem_stages": 1, "epoch_ns": 100000000,
///                "key_spec": "src_ip"},
///     "detector": "zscore:feature=pkt_count;k=3;train=20",
///     "sweep": {"hash_widths": [4, 5], "mem_stages": [1, 3], "epoch_ns": [100000000],
///               "key_specs": ["src_ip"], "detectors": ["zscore:k=2", "zscore:k=3"]},
///     "bench": false, "bench_repetitions": 3, "threads": 0,
///     "output_dir": "out"
///   }
struct RunConfig {
  std::optional<std::string> trace_path;
  std::optional<SyntheticProfile> synthetic;
  std::uint64_t seed = 1;
  SketchConfig sketch;
  DetectorSpec detector;
  SweepGrid grid;
  bool bench = false;
  std::size_t bench_repetitions = 3;
  std::size_t threads = 0;
  std::string output_dir = ".";

  bool has_trace_source() const noexcept { return trace_path || synthetic; }
};

/// Overlays the values present in `doc` onto `base`. Throws ConfigError on unknown keys
/// or ill-typed values.
RunConfig apply_run_document(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});
nlohmann::json to_json(const RunConfig& config);

}  // namespace netsketch
