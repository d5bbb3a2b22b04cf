#include "netsketch/oracle.hpp"

#include <algorithm>
#include <ostream>

#include "netsketch/error.hpp"

namespace netsketch {

namespace {

template <typename T, typename Pick>
std::optional<T> combine(const std::optional<T>& a, const std::optional<T>& b, Pick pick) {
  if (!a) return b;
  if (!b) return a;
  return pick(*a, *b);
}

constexpr auto kMin = [](auto x, auto y) { return std::min(x, y); };
constexpr auto kMax = [](auto x, auto y) { return std::max(x, y); };

template <typename T>
void put_optional(std::ostream& out, const std::optional<T>& value) {
  if (value) out << *value;
}

}  // namespace

StageCell merge_cells(const StageCell& a, const StageCell& b) {
  StageCell m;
  m.pkt_count = a.pkt_count + b.pkt_count;
  m.byte_sum = a.byte_sum + b.byte_sum;
  m.byte_min = combine(a.byte_min, b.byte_min, kMin);
  m.byte_max = combine(a.byte_max, b.byte_max, kMax);
  m.last_ts_ns = combine(a.last_ts_ns, b.last_ts_ns, kMax);
  m.iat_sum_ns = a.iat_sum_ns + b.iat_sum_ns;
  m.iat_count = a.iat_count + b.iat_count;
  m.iat_min_ns = combine(a.iat_min_ns, b.iat_min_ns, kMin);
  m.iat_max_ns = combine(a.iat_max_ns, b.iat_max_ns, kMax);
  return m;
}

Oracle::Oracle(SketchConfig config) : config_(std::move(config)) { config_.validate(); }

std::int64_t Oracle::epoch_of(std::int64_t timestamp_ns) const {
  if (!origin_ns_) return 0;
  return (timestamp_ns - *origin_ns_) / config_.epoch_ns;
}

void Oracle::update(const PacketRecord& packet) {
  const std::int64_t ts = packet.timestamp_ns;
  if (last_ts_ns_ && ts < *last_ts_ns_) {
    throw TimestampRegression("oracle update at " + std::to_string(ts) + " precedes " +
                              std::to_string(*last_ts_ns_));
  }
  if (!origin_ns_) origin_ns_ = ts;
  last_ts_ns_ = ts;
  const std::int64_t epoch = epoch_of(ts);
  last_epoch_ = epoch;

  FlowKey key = extract_key(packet, config_.key_spec);
  auto [it, inserted] = flows_.try_emplace({epoch, key});
  FlowStats& flow = it->second;
  if (inserted) {
    flow.key = key;
    flow.epoch_index = epoch;
  }

  // Written out independently of Sketch::update so the two can check each other.
  StageCell& m = flow.metrics;
  const std::uint32_t len = packet.length_bytes;
  if (m.pkt_count == 0) {
    m.byte_min = len;
    m.byte_max = len;
  } else {
    const std::int64_t gap = ts - *m.last_ts_ns;
    m.iat_count += 1;
    m.iat_sum_ns += static_cast<std::uint64_t>(gap);
    m.iat_min_ns = m.iat_min_ns ? std::min(*m.iat_min_ns, gap) : gap;
    m.iat_max_ns = m.iat_max_ns ? std::max(*m.iat_max_ns, gap) : gap;
    if (len < *m.byte_min) m.byte_min = len;
    if (len > *m.byte_max) m.byte_max = len;
  }
  m.pkt_count += 1;
  m.byte_sum += len;
  m.last_ts_ns = ts;
  if (packet.label == Label::anomalous) ++flow.anomalous_count;
}

const FlowStats* Oracle::find(const FlowKey& key, std::int64_t epoch_index) const {
  const auto it = flows_.find({epoch_index, key});
  return it == flows_.end() ? nullptr : &it->second;
}

std::vector<const FlowStats*> Oracle::flows_in_epoch(std::int64_t epoch_index) const {
  std::vector<const FlowStats*> out;
  for (auto it = flows_.lower_bound({epoch_index, FlowKey{}});
       it != flows_.end() && it->first.first == epoch_index; ++it) {
    out.push_back(&it->second);
  }
  return out;
}

std::uint64_t Oracle::packets_in_epoch(std::int64_t epoch_index) const {
  std::uint64_t total = 0;
  for (const auto* flow : flows_in_epoch(epoch_index)) total += flow->metrics.pkt_count;
  return total;
}

void Oracle::check_compatible(const SketchConfig& config) const {
  config.validate();
  if (config.epoch_ns != config_.epoch_ns || !(config.key_spec == config_.key_spec)) {
    throw ConfigError("sketch config does not share epoch_ns and key_spec with the oracle");
  }
}

StageCell Oracle::expected_bucket(std::uint32_t bucket, std::int64_t epoch_index,
                                  const SketchConfig& config) const {
  check_compatible(config);
  StageCell merged;
  for (const auto* flow : flows_in_epoch(epoch_index)) {
    if (shift_xor_hash(flow->key, config.hash_width) == bucket) {
      merged = merge_cells(merged, flow->metrics);
    }
  }
  return merged;
}

std::vector<StageCell> Oracle::expected_stage(std::int64_t epoch_index,
                                              const SketchConfig& config) const {
  check_compatible(config);
  std::vector<StageCell> cells(config.bucket_count());
  for (const auto* flow : flows_in_epoch(epoch_index)) {
    auto& cell = cells[shift_xor_hash(flow->key, config.hash_width)];
    cell = merge_cells(cell, flow->metrics);
  }
  return cells;
}

std::vector<std::uint32_t> Oracle::flows_per_bucket(std::int64_t epoch_index,
                                                    const SketchConfig& config) const {
  check_compatible(config);
  std::vector<std::uint32_t> counts(config.bucket_count());
  for (const auto* flow : flows_in_epoch(epoch_index)) {
    ++counts[shift_xor_hash(flow->key, config.hash_width)];
  }
  return counts;
}

void Oracle::write_csv(std::ostream& out) const {
  out << kOracleHeader << '\n';
  for (const auto& [id, flow] : flows_) {
    const StageCell& c = flow.metrics;
    out << flow.key.to_hex() << ',' << flow.epoch_index << ',' << c.pkt_count << ','
        << c.byte_sum << ',';
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

}  // namespace netsketch
