#include "netsketch/sketch.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <limits>
#include <ostream>

#include "netsketch/csv.hpp"
#include "netsketch/error.hpp"

namespace netsketch {

void SketchConfig::validate() const {
  if (hash_width < kMinHashWidth || hash_width > kMaxHashWidth) {
    throw ConfigError("hash_width " + std::to_string(hash_width) + " outside [" +
                      std::to_string(kMinHashWidth) + ", " + std::to_string(kMaxHashWidth) + "]");
  }
  if (mem_stages < 1) throw ConfigError("mem_stages must be at least 1");
  if (epoch_ns <= 0) throw ConfigError("epoch_ns must be positive");
}

FeatureVector features_of(const StageCell& cell, std::size_t stage) {
  FeatureVector f;
  f.stage = stage;
  f.pkt_count = cell.pkt_count;
  f.byte_sum = cell.byte_sum;
  f.byte_min = cell.byte_min;
  f.byte_max = cell.byte_max;
  if (cell.pkt_count > 0) f.byte_avg = Ratio{cell.byte_sum, cell.pkt_count};
  f.iat_count = cell.iat_count;
  f.iat_min_ns = cell.iat_min_ns;
  f.iat_max_ns = cell.iat_max_ns;
  if (cell.iat_count > 0) f.iat_avg_ns = Ratio{cell.iat_sum_ns, cell.iat_count};
  return f;
}

Sketch::Sketch(SketchConfig config, std::size_t max_cells) : config_(std::move(config)) {
  config_.validate();
  bucket_count_ = config_.bucket_count();
  if (bucket_count_ > max_cells / config_.mem_stages) {
    throw ConfigError("sketch of " + std::to_string(config_.mem_stages) + " x 2^" +
                      std::to_string(config_.hash_width) + " cells exceeds the budget of " +
                      std::to_string(max_cells) + " cells");
  }
  cells_.resize(bucket_count_ * config_.mem_stages);
}

std::uint32_t Sketch::bucket_of(const PacketRecord& packet) const {
  return shift_xor_hash(extract_key(packet, config_.key_spec), config_.hash_width);
}

std::uint64_t Sketch::rotations_due(std::int64_t timestamp_ns) const noexcept {
  if (!epoch_start_ || timestamp_ns < *epoch_start_) return 0;
  return static_cast<std::uint64_t>((timestamp_ns - *epoch_start_) / config_.epoch_ns);
}

void Sketch::update(const PacketRecord& packet) {
  const std::int64_t ts = packet.timestamp_ns;
  if (last_update_ns_ && ts < *last_update_ns_) {
    throw TimestampRegression("sketch update at " + std::to_string(ts) + " precedes " +
                              std::to_string(*last_update_ns_));
  }
  if (!epoch_start_) epoch_start_ = ts;

  if (const auto due = rotations_due(ts); due > 0) {
    // Past S rotations every stage is empty; the remaining ones only move the clock.
    const std::uint64_t performed = std::min<std::uint64_t>(due, config_.mem_stages);
    for (std::uint64_t i = 0; i < performed; ++i) rotate_epoch(*epoch_start_ + config_.epoch_ns);
    const auto skipped = static_cast<std::int64_t>(due - performed);
    *epoch_start_ += skipped * config_.epoch_ns;
    epoch_index_ += skipped;
  }

  StageCell& c = cells_[physical_stage(0) * bucket_count_ + bucket_of(packet)];
  const std::uint32_t len = packet.length_bytes;
  ++c.pkt_count;
  c.byte_sum += len;
  c.byte_min = c.byte_min ? std::min(*c.byte_min, len) : len;
  c.byte_max = c.byte_max ? std::max(*c.byte_max, len) : len;
  if (c.last_ts_ns) {
    const std::int64_t iat = ts - *c.last_ts_ns;
    c.iat_sum_ns += static_cast<std::uint64_t>(iat);
    ++c.iat_count;
    c.iat_min_ns = c.iat_min_ns ? std::min(*c.iat_min_ns, iat) : iat;
    c.iat_max_ns = c.iat_max_ns ? std::max(*c.iat_max_ns, iat) : iat;
  }
  c.last_ts_ns = ts;

  last_update_ns_ = ts;
  ++packets_in_epoch_;
}

void Sketch::rotate_epoch(std::int64_t new_epoch_start_ns) {
  if (epoch_start_ && new_epoch_start_ns <= *epoch_start_) {
    throw ConfigError("rotate_epoch: new epoch start " + std::to_string(new_epoch_start_ns) +
                      " is not after the current one (" + std::to_string(*epoch_start_) + ")");
  }
  const std::size_t stages = config_.mem_stages;
  head_ = (head_ + stages - 1) % stages;
  const auto first = cells_.begin() + static_cast<std::ptrdiff_t>(head_ * bucket_count_);
  std::fill(first, first + static_cast<std::ptrdiff_t>(bucket_count_), StageCell{});
  epoch_start_ = new_epoch_start_ns;
  ++epoch_index_;
  packets_in_epoch_ = 0;
}

void Sketch::check_stage(std::size_t stage) const {
  if (stage >= config_.mem_stages) {
    throw ConfigError("stage " + std::to_string(stage) + " out of range (S=" +
                      std::to_string(config_.mem_stages) + ")");
  }
}

const StageCell& Sketch::cell(std::size_t stage, std::uint32_t bucket) const {
  check_stage(stage);
  if (bucket >= bucket_count_) throw ConfigError("bucket " + std::to_string(bucket) + " out of range");
  return cells_[physical_stage(stage) * bucket_count_ + bucket];
}

FeatureVector Sketch::query_bucket(std::uint32_t bucket, std::size_t stage) const {
  return features_of(cell(stage, bucket), stage);
}

FeatureVector Sketch::query(const FlowKey& key, std::size_t stage) const {
  check_stage(stage);
  return query_bucket(shift_xor_hash(key, config_.hash_width), stage);
}

Snapshot Sketch::snapshot() const {
  Snapshot snap;
  snap.hash_width = config_.hash_width;
  snap.mem_stages = config_.mem_stages;
  snap.epoch_index = epoch_index_;
  snap.cells.reserve(cells_.size());
  for (std::size_t s = 0; s < config_.mem_stages; ++s) {
    const auto first = cells_.begin() + static_cast<std::ptrdiff_t>(physical_stage(s) * bucket_count_);
    snap.cells.insert(snap.cells.end(), first, first + static_cast<std::ptrdiff_t>(bucket_count_));
  }
  return snap;
}

void replay(Sketch& sketch, std::span<const PacketRecord> records, const EpochCallback& on_epoch) {
  constexpr std::uint64_t kMaxEpochsPerGap = 10'000'000;
  const std::int64_t epoch_ns = sketch.config().epoch_ns;
  for (const auto& packet : records) {
    const auto due = sketch.rotations_due(packet.timestamp_ns);
    if (due > kMaxEpochsPerGap) {
      throw DataError("timestamp gap spans more than " + std::to_string(kMaxEpochsPerGap) +
                      " epochs");
    }
    for (std::uint64_t i = 0; i < due; ++i) {
      if (on_epoch) on_epoch(sketch.epoch_index(), false, sketch);
      sketch.rotate_epoch(*sketch.epoch_start() + epoch_ns);
    }
    sketch.update(packet);
  }
  if (sketch.epoch_start() && on_epoch) on_epoch(sketch.epoch_index(), true, sketch);
}

namespace {

template <typename T>
void put_optional(std::ostream& out, const std::optional<T>& value) {
  if (value) out << *value;
}

const std::vector<std::string_view>& snapshot_columns() {
  static const auto names = csv::header_columns(kSnapshotHeader);
  return names;
}

}  // namespace

void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot) {
  out << kSnapshotHeader << '\n';
  const std::size_t buckets = snapshot.bucket_count();
  for (std::size_t i = 0; i < snapshot.cells.size(); ++i) {
    const StageCell& c = snapshot.cells[i];
    out << i / buckets << ',' << i % buckets << ',' << c.pkt_count << ',' << c.byte_sum << ',';
    put_optional(out, c.byte_min);
    out << ',';
    put_optional(out, c.byte_max);
    out << ',' << c.iat_count << ',' << c.iat_sum_ns << ',';
    put_optional(out, c.iat_min_ns);
    out << ',';
    put_optional(out, c.iat_max_ns);
    out << '\n';
  }
}

Snapshot parse_snapshot_csv(std::istream& in) {
  csv::LineReader lines(in);
  csv::expect_header(lines, kSnapshotHeader, "snapshot");
  Snapshot snap;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> coords;
  std::vector<std::size_t> line_numbers;
  std::size_t row_index = 0;
  while (const auto line = lines.next()) {
    ++row_index;
    const csv::RowParser row(*line, row_index, lines.line_number(), snapshot_columns());
    coords.emplace_back(row.u64(0), row.u64(1));
    line_numbers.push_back(row.line());

    StageCell c;
    c.pkt_count = row.u64(2);
    c.byte_sum = row.u64(3);
    if (const auto v = row.optional_u64(4)) c.byte_min = static_cast<std::uint32_t>(*v);
    if (const auto v = row.optional_u64(5)) c.byte_max = static_cast<std::uint32_t>(*v);
    c.iat_count = row.u64(6);
    c.iat_sum_ns = row.u64(7);
    c.iat_min_ns = row.optional_i64(8);
    c.iat_max_ns = row.optional_i64(9);
    const bool has_bytes = c.byte_min.has_value() && c.byte_max.has_value();
    if ((c.pkt_count > 0) != has_bytes || c.byte_min.has_value() != c.byte_max.has_value()) {
      row.fail(4, "byte_min/byte_max must be present exactly when pkt_count > 0");
    }
    snap.cells.push_back(c);
  }
  if (snap.cells.empty()) throw DataError("snapshot: no rows");

  const auto buckets = static_cast<std::uint64_t>(
      std::count_if(coords.begin(), coords.end(), [](const auto& c) { return c.first == 0; }));
  if (!std::has_single_bit(buckets) || buckets < 2 || snap.cells.size() % buckets != 0) {
    throw DataError("snapshot: " + std::to_string(buckets) +
                    " buckets per stage is not a power of two >= 2 covering every stage");
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] != std::pair<std::uint64_t, std::uint64_t>{i / buckets, i % buckets}) {
      throw DataError("snapshot: line " + std::to_string(line_numbers[i]) +
                          ": rows must be dense in (stage, bucket) order",
                      i + 1, line_numbers[i]);
    }
  }
  snap.hash_width = static_cast<unsigned>(std::countr_zero(buckets));
  snap.mem_stages = static_cast<unsigned>(snap.cells.size() / buckets);
  return snap;
}

}  // namespace netsketch
