#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "netsketch/hashing.hpp"
#include "netsketch/packet.hpp"
#include "netsketch/ratio.hpp"

namespace netsketch {

struct SketchConfig {
  unsigned hash_width = 5;
  unsigned mem_stages = 1;
  std::int64_t epoch_ns = 100'000'000;
  KeySpec key_spec{{KeyField::src_ip}};

  std::size_t bucket_count() const noexcept { return std::size_t{1} << hash_width; }
  std::size_t cell_count() const noexcept { return bucket_count() * mem_stages; }

  /// Throws ConfigError for W outside [1, 24], zero stages or a non-positive epoch.
  void validate() const;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// Per-bucket, per-stage accumulator. Absent min/max/last_ts mean "no packet yet".
struct StageCell {
  std::uint64_t pkt_count = 0;
  std::uint64_t byte_sum = 0;
  std::optional<std::uint32_t> byte_min;
  std::optional<std::uint32_t> byte_max;
  std::optional<std::int64_t> last_ts_ns;
  std::uint64_t iat_sum_ns = 0;
  std::uint64_t iat_count = 0;
  std::optional<std::int64_t> iat_min_ns;
  std::optional<std::int64_t> iat_max_ns;

  bool empty() const noexcept { return pkt_count == 0; }

  friend bool operator==(const StageCell&, const StageCell&) = default;
};

/// Flow features derived from one cell; averages are exact and computed on demand.
struct FeatureVector {
  std::uint64_t pkt_count = 0;
  std::uint64_t byte_sum = 0;
  std::optional<Ratio> byte_avg;
  std::optional<std::uint32_t> byte_min;
  std::optional<std::uint32_t> byte_max;
  std::uint64_t iat_count = 0;
  std::optional<Ratio> iat_avg_ns;
  std::optional<std::int64_t> iat_min_ns;
  std::optional<std::int64_t> iat_max_ns;
  std::size_t stage = 0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector features_of(const StageCell& cell, std::size_t stage);

/// Dense copy of all cells, ordered by stage ascending then bucket ascending.
struct Snapshot {
  unsigned hash_width = 0;
  unsigned mem_stages = 0;
  std::int64_t epoch_index = 0;
  bool partial = false;
  std::vector<StageCell> cells;

  std::size_t bucket_count() const noexcept { return std::size_t{1} << hash_width; }
  const StageCell& at(std::size_t stage, std::uint32_t bucket) const {
    return cells[stage * bucket_count() + bucket];
  }
  std::size_t byte_size() const noexcept { return cells.size() * sizeof(StageCell); }
};

/// Fixed-size feature-extraction sketch: 2^W buckets times S memory stages.
///
/// Stage 0 accumulates the current epoch. Epochs are epoch_ns long and start at the
/// first packet's timestamp; update() rotates once per elapsed epoch boundary before
/// applying a packet, so stage s always holds the epoch s steps back. Single writer.
class Sketch {
 public:
  static constexpr std::size_t kDefaultMaxCells = std::size_t{1} << 26;
  /// Bytes one cell occupies; the unit of the memory cost model.
  static constexpr std::size_t kCellBytes = sizeof(StageCell);
  /// Metric fields a single update() can mutate (pkt_count, byte_sum, byte_min,
  /// byte_max, last_ts, iat_sum, iat_count, iat_min, iat_max).
  static constexpr unsigned kUpdateOps = 9;

  /// Throws ConfigError on an invalid config or when S * 2^W exceeds max_cells.
  explicit Sketch(SketchConfig config, std::size_t max_cells = kDefaultMaxCells);

  const SketchConfig& config() const noexcept { return config_; }
  std::size_t bucket_count() const noexcept { return bucket_count_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }

  /// Throws TimestampRegression if packet is older than the last update.
  void update(const PacketRecord& packet);

  /// Shifts stage s-1 into stage s for every s >= 1, drops the oldest stage and clears
  /// stage 0. new_epoch_start_ns must be later than the current epoch start.
  void rotate_epoch(std::int64_t new_epoch_start_ns);

  /// Epoch boundaries a packet at `timestamp_ns` would cross.
  std::uint64_t rotations_due(std::int64_t timestamp_ns) const noexcept;

  std::optional<std::int64_t> epoch_start() const noexcept { return epoch_start_; }
  /// Rotations performed so far, i.e. the index of the epoch stage 0 holds.
  std::int64_t epoch_index() const noexcept { return epoch_index_; }
  /// Packets applied since the last rotation.
  std::uint64_t packets_in_epoch() const noexcept { return packets_in_epoch_; }

  /// Throws ConfigError when stage >= S.
  FeatureVector query(const FlowKey& key, std::size_t stage) const;
  FeatureVector query_bucket(std::uint32_t bucket, std::size_t stage) const;
  const StageCell& cell(std::size_t stage, std::uint32_t bucket) const;

  std::uint32_t bucket_of(const PacketRecord& packet) const;

  Snapshot snapshot() const;

 private:
  std::size_t physical_stage(std::size_t stage) const noexcept {
    return (head_ + stage) % config_.mem_stages;
  }
  void check_stage(std::size_t stage) const;

  SketchConfig config_;
  std::size_t bucket_count_;
  std::vector<StageCell> cells_;
  std::size_t head_ = 0;  // physical slot of stage 0
  std::optional<std::int64_t> epoch_start_;
  std::optional<std::int64_t> last_update_ns_;
  std::int64_t epoch_index_ = 0;
  std::uint64_t packets_in_epoch_ = 0;
};

/// Called once per finished epoch with the sketch state right before it rotates, and a
/// last time with partial = true for the epoch still open when the records run out.
using EpochCallback = std::function<void(std::int64_t epoch_index, bool partial, const Sketch&)>;

/// Feeds `records` through `sketch`, reporting every epoch, empty ones included.
void replay(Sketch& sketch, std::span<const PacketRecord> records, const EpochCallback& on_epoch);

inline constexpr std::string_view kSnapshotHeader =
    "stage,bucket,pkt_count,byte_sum,byte_min,byte_max,iat_count,iat_sum_ns,iat_min_ns,"
    "iat_max_ns";

/// Absent values are written as empty fields. last_ts_ns is not part of the format.
void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot);
/// Rebuilds a snapshot from its CSV. Rows must be dense and in (stage, bucket) order;
/// W and S are inferred from the row layout. Parsed cells carry no last_ts_ns.
Snapshot parse_snapshot_csv(std::istream& in);

}  // namespace netsketch
