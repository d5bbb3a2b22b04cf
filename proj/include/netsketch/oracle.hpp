#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "netsketch/hashing.hpp"
#include "netsketch/packet.hpp"
#include "netsketch/sketch.hpp"

namespace netsketch {

/// Exact statistics of one flow key within one epoch.
struct FlowStats {
  FlowKey key;
  std::int64_t epoch_index = 0;
  StageCell metrics;
  std::uint64_t anomalous_count = 0;
};

/// Combines two cells as if their packets had been counted separately: counts and sums
/// add, extrema combine. Associative and commutative.
StageCell merge_cells(const StageCell& a, const StageCell& b);

/// Unbounded-memory, collision-free per-(key, epoch) tracker. Uses the same epoch
/// schedule as Sketch (epochs of epoch_ns starting at the first packet) but derives each
/// packet's epoch by division rather than by rotating.
class Oracle {
 public:
  /// Only epoch_ns and key_spec of `config` matter to the oracle.
  explicit Oracle(SketchConfig config);

  /// Throws TimestampRegression on a non-monotone stream.
  void update(const PacketRecord& packet);

  const SketchConfig& config() const noexcept { return config_; }
  std::int64_t epoch_of(std::int64_t timestamp_ns) const;
  /// Index of the epoch holding the latest packet, if any packet was seen.
  std::optional<std::int64_t> last_epoch() const noexcept { return last_epoch_; }

  const FlowStats* find(const FlowKey& key, std::int64_t epoch_index) const;
  std::vector<const FlowStats*> flows_in_epoch(std::int64_t epoch_index) const;
  std::uint64_t packets_in_epoch(std::int64_t epoch_index) const;
  std::size_t flow_count() const noexcept { return flows_.size(); }

  /// Merge of every flow of the epoch whose key hashes to `bucket` under `config`.
  /// config must share epoch_ns and key_spec with the oracle (ConfigError otherwise).
  /// IAT fields are per-flow merges and only comparable to a sketch cell when the bucket
  /// holds a single flow.
  StageCell expected_bucket(std::uint32_t bucket, std::int64_t epoch_index,
                            const SketchConfig& config) const;
  /// expected_bucket for all buckets at once.
  std::vector<StageCell> expected_stage(std::int64_t epoch_index, const SketchConfig& config) const;
  /// Distinct flows per bucket in the epoch.
  std::vector<std::uint32_t> flows_per_bucket(std::int64_t epoch_index,
                                              const SketchConfig& config) const;

  /// Snapshot-shaped dump with leading key and epoch columns.
  void write_csv(std::ostream& out) const;

 private:
  void check_compatible(const SketchConfig& config) const;

  SketchConfig config_;
  std::optional<std::int64_t> origin_ns_;
  std::optional<std::int64_t> last_ts_ns_;
  std::optional<std::int64_t> last_epoch_;
  std::map<std::pair<std::int64_t, FlowKey>, FlowStats> flows_;
};

inline constexpr std::string_view kOracleHeader =
    "key,epoch_index,pkt_count,byte_sum,byte_min,byte_max,iat_count,iat_sum_ns,iat_min_ns,"
    "iat_max_ns";

}  // namespace netsketch
