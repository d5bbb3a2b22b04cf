#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netsketch/detectors.hpp"
#include "netsketch/oracle.hpp"
#include "netsketch/ratio.hpp"
#include "netsketch/sketch.hpp"

namespace netsketch {

/// Bucket-epoch labels: a cell is anomalous iff at least one anomalous packet hashed
/// there during that epoch. Covers buckets [0, bucket_count) x epochs [begin, end).
class GroundTruthGrid {
 public:
  GroundTruthGrid(std::size_t bucket_count, std::int64_t epoch_begin, std::int64_t epoch_end);

  std::size_t bucket_count() const noexcept { return bucket_count_; }
  std::int64_t epoch_begin() const noexcept { return epoch_begin_; }
  std::int64_t epoch_end() const noexcept { return epoch_end_; }
  std::size_t cell_count() const noexcept;
  bool contains(std::uint32_t bucket, std::int64_t epoch) const noexcept;

  void mark(std::uint32_t bucket, std::int64_t epoch);
  bool anomalous(std::uint32_t bucket, std::int64_t epoch) const;
  std::size_t anomalous_count() const noexcept { return anomalous_.size(); }
  const std::set<std::pair<std::int64_t, std::uint32_t>>& anomalous_cells() const noexcept {
    return anomalous_;
  }

 private:
  std::size_t bucket_count_;
  std::int64_t epoch_begin_;
  std::int64_t epoch_end_;
  std::set<std::pair<std::int64_t, std::uint32_t>> anomalous_;  // (epoch, bucket)
};

/// Grid for `config` over epochs [epoch_begin, epoch_end), labelled through the
/// oracle's key to bucket mapping.
GroundTruthGrid build_ground_truth(const Oracle& oracle, const SketchConfig& config,
                                   std::int64_t epoch_begin, std::int64_t epoch_end);

struct QualityScores {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  /// Each ratio is 0 when its denominator is 0.
  Ratio precision() const noexcept { return ratio_or_zero(tp, tp + fp); }
  Ratio recall() const noexcept { return ratio_or_zero(tp, tp + fn); }
  /// Harmonic mean of precision and recall, i.e. 2tp / (2tp + fp + fn).
  Ratio f1() const noexcept { return ratio_or_zero(2 * tp, 2 * tp + fp + fn); }

  void add(bool predicted, bool actual) noexcept;

  friend bool operator==(const QualityScores&, const QualityScores&) = default;
};

/// Confusion counts of `verdicts` against `grid`. Throws DataError unless the verdicts
/// cover every grid cell exactly once. Order of verdicts is irrelevant.
QualityScores score(std::span<const Verdict> verdicts, const GroundTruthGrid& grid);

struct ResourceCost {
  std::uint64_t memory_bytes = 0;
  unsigned update_ops = 0;
  std::optional<double> measured_pps;
};

/// memory_bytes = S * 2^W * Sketch::kCellBytes; update_ops = Sketch::kUpdateOps.
ResourceCost resource_model(const SketchConfig& config);

struct BenchResult {
  std::vector<double> runs_pps;
  double median_pps = 0.0;
  double mean_packet_bytes = 0.0;

  double bytes_per_second() const noexcept { return median_pps * mean_packet_bytes; }
  /// (max - min) / median over the runs.
  double spread() const;
};

inline constexpr std::size_t kMinBenchPackets = 10'000;

/// Times Sketch::update over the resident trace `repetitions` times (fresh sketch each
/// run, steady clock, one untimed warm-up pass first) and reports the median rate.
/// Throws DataError for traces shorter than kMinBenchPackets and ConfigError for fewer
/// than 3 repetitions.
BenchResult bench_throughput(const SketchConfig& config, std::span<const PacketRecord> trace,
                             std::size_t repetitions = 3);

/// Objectives: f1 (maximize), memory_bytes (minimize), measured_pps (maximize, only when
/// every point carries one).
struct ParetoPoint {
  std::string config_id;
  double f1 = 0.0;
  std::uint64_t memory_bytes = 0;
  std::optional<double> measured_pps;
  bool dominated = false;
};

struct ParetoPartition {
  std::vector<ParetoPoint> front;
  std::vector<ParetoPoint> dominated;
};

/// Whether `a` is at least as good as `b` everywhere and strictly better somewhere.
bool dominates(const ParetoPoint& a, const ParetoPoint& b, bool use_pps);

/// Exact non-dominated set. Points with identical objectives all stay on the front.
/// Both halves are sorted by f1 descending, then memory ascending. Throws ConfigError
/// on empty input.
ParetoPartition pareto_front(std::vector<ParetoPoint> points);

}  // namespace netsketch
