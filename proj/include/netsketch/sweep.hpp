#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "netsketch/detectors.hpp"
#include "netsketch/evaluation.hpp"
#include "netsketch/sketch.hpp"

namespace netsketch {

/// Outcome of one (sketch config, detector) run over a trace.
struct RunOutcome {
  QualityScores quality;
  std::int64_t scored_epoch_begin = 0;
  std::int64_t scored_epoch_end = 0;
  std::uint64_t anomalous_cells = 0;
};

/// Replays `trace` through a fresh sketch and detector, scoring every complete epoch
/// after the detector's warmup against the bucket-epoch ground truth. The final,
/// still-open epoch is never scored. Throws DataError when no epoch is left to score.
RunOutcome evaluate_config(std::span<const PacketRecord> trace, const SketchConfig& config,
                           const DetectorSpec& detector);

/// Cartesian grid; cells enumerate hash width slowest and detector fastest.
struct SweepGrid {
  std::vector<unsigned> hash_widths{5};
  std::vector<unsigned> mem_stages{1};
  std::vector<std::int64_t> epoch_ns{100'000'000};
  std::vector<KeySpec> key_specs{KeySpec{{KeyField::src_ip}}};
  std::vector<DetectorSpec> detectors{DetectorSpec{}};

  std::size_t size() const noexcept;
  std::vector<std::pair<SketchConfig, DetectorSpec>> cells() const;
};

struct SweepOptions {
  bool bench = false;
  std::size_t bench_repetitions = 3;
  /// Worker threads for the detection runs; 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

struct SweepRow {
  std::string config_id;
  SketchConfig sketch;
  DetectorSpec detector;
  std::optional<QualityScores> quality;
  std::optional<ResourceCost> cost;
  bool on_front = false;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

struct SweepReport {
  std::vector<SweepRow> rows;

  bool complete() const noexcept;
  /// Successful rows as Pareto points, in row order.
  std::vector<ParetoPoint> points() const;
  /// Recomputes on_front for every row from the successful ones.
  void mark_front();
};

/// One independent run per grid cell. Detection runs may execute in parallel; benchmarks
/// (when enabled) run one at a time afterwards. A failing cell records its error and the
/// sweep carries on. Throws ConfigError on an empty grid.
SweepReport sweep(std::span<const PacketRecord> trace, const SweepGrid& grid,
                  const SweepOptions& options = {});

inline constexpr std::string_view kReportHeader =
    "config_id,hash_width,mem_stages,epoch_ns,key_spec,detector_id,detector_params,tp,fp,fn,"
    "tn,precision,recall,f1,memory_bytes,update_ops,measured_pps,on_front";

/// Failed rows leave the quality and cost columns empty.
void write_report_csv(std::ostream& out, const SweepReport& report);
/// Quality ratios are rebuilt from tp/fp/fn/tn and checked against the printed values.
SweepReport parse_report_csv(std::istream& in);

/// Same fields as the CSV, plus the error message of failed rows.
nlohmann::json report_to_json(const SweepReport& report);

}  // namespace netsketch
