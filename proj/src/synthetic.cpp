#include "netsketch/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "netsketch/error.hpp"
#include "netsketch/rng.hpp"

namespace netsketch {

namespace {

constexpr std::uint32_t kBenignSourceNet = ipv4(10, 0, 0, 0);
constexpr std::uint32_t kServerNet = ipv4(10, 1, 0, 0);
constexpr std::uint32_t kServerCount = 16;
constexpr std::uint32_t kAttacker = ipv4(172, 16, 66, 6);

constexpr std::array<std::uint16_t, 4> kTcpServices{80, 443, 22, 8080};
constexpr std::array<std::uint16_t, 4> kUdpServices{53, 123, 514, 5060};

struct FlowTemplate {
  std::uint32_t src_ip;
  std::uint32_t dst_ip;
  std::uint16_t src_port;
  std::uint16_t dst_port;
  std::uint8_t protocol;
  std::uint32_t base_length;
  std::uint32_t seq;
};

FlowTemplate draw_flow(Rng& rng) {
  FlowTemplate f{};
  f.src_ip = kBenignSourceNet + 1 + static_cast<std::uint32_t>(rng.below(0xfffe));
  f.dst_ip = kServerNet + 1 + static_cast<std::uint32_t>(rng.below(kServerCount));
  const double kind = rng.unit();
  if (kind < 0.70) {
    f.protocol = kProtoTcp;
    f.dst_port = kTcpServices[rng.below(kTcpServices.size())];
  } else if (kind < 0.95) {
    f.protocol = kProtoUdp;
    f.dst_port = kUdpServices[rng.below(kUdpServices.size())];
  } else {
    f.protocol = kProtoIcmp;
  }
  if (f.protocol != kProtoIcmp) f.src_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
  f.base_length = f.protocol == kProtoIcmp ? 84 : static_cast<std::uint32_t>(rng.between(60, 1500));
  f.seq = f.protocol == kProtoTcp ? static_cast<std::uint32_t>(rng.bits()) : 0;
  return f;
}

std::uint32_t packet_length(const FlowTemplate& f, Rng& rng) {
  if (f.protocol == kProtoIcmp) return f.base_length;
  // +-20% around the flow's typical size, inside Ethernet bounds.
  const auto spread = static_cast<std::int64_t>(f.base_length / 5);
  const auto len = static_cast<std::int64_t>(f.base_length) + rng.between(-spread, spread);
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(len, 40, 1500));
}

}  // namespace

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::flood:
      return "flood";
    case AnomalyKind::port_scan:
      return "port_scan";
    case AnomalyKind::none:
      break;
  }
  return "none";
}

std::optional<AnomalyKind> parse_anomaly_kind(std::string_view text) {
  if (text == "none") return AnomalyKind::none;
  if (text == "flood") return AnomalyKind::flood;
  if (text == "port_scan" || text == "portscan" || text == "scan") return AnomalyKind::port_scan;
  return std::nullopt;
}

std::int64_t SyntheticProfile::period_ns() const {
  return packets_per_flow == 0 ? duration_ns : duration_ns / packets_per_flow;
}

std::int64_t SyntheticProfile::anomaly_interval_ns() const {
  const auto interval = std::llround(static_cast<double>(period_ns()) / rate_multiplier);
  return std::max<std::int64_t>(1, interval);
}

std::int64_t SyntheticProfile::window_begin_ns() const {
  return start_ns +
         static_cast<std::int64_t>(std::floor(window_begin * static_cast<double>(duration_ns)));
}

std::int64_t SyntheticProfile::window_end_ns() const {
  return start_ns +
         static_cast<std::int64_t>(std::floor(window_end * static_cast<double>(duration_ns)));
}

void SyntheticProfile::validate() const {
  if (duration_ns <= 0) throw ConfigError("synthetic profile: duration must be positive");
  if (start_ns < 0) throw ConfigError("synthetic profile: start_ns must be non-negative");
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw ConfigError("synthetic profile: jitter must lie in [0, 1)");
  }
  if (flow_count > 0) {
    if (packets_per_flow == 0) {
      throw ConfigError("synthetic profile: packets_per_flow must be positive");
    }
    if (period_ns() < 1) {
      throw ConfigError("synthetic profile: packets_per_flow exceeds duration in nanoseconds");
    }
  }
  if (anomaly == AnomalyKind::none) return;
  if (!(rate_multiplier > 0.0) || !std::isfinite(rate_multiplier)) {
    throw ConfigError("synthetic profile: rate_multiplier must be positive");
  }
  if (!(window_begin >= 0.0 && window_end <= 1.0 && window_begin < window_end)) {
    throw ConfigError("synthetic profile: anomaly window must satisfy 0 <= begin < end <= 1");
  }
  if (window_end_ns() <= window_begin_ns()) {
    throw ConfigError("synthetic profile: anomaly window is empty");
  }
}

std::vector<PacketRecord> generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed) {
  profile.validate();
  Rng rng(seed);
  std::vector<PacketRecord> records;
  records.reserve(std::size_t{profile.flow_count} * profile.packets_per_flow);

  const std::int64_t period = profile.period_ns();
  const auto jitter_span = static_cast<std::int64_t>(profile.jitter * static_cast<double>(period));
  const std::int64_t phase_span = std::max<std::int64_t>(1, period - jitter_span);

  std::vector<FlowTemplate> flows;
  flows.reserve(profile.flow_count);
  for (std::uint32_t i = 0; i < profile.flow_count; ++i) {
    auto flow = draw_flow(rng);
    const auto phase = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(phase_span)));
    for (std::uint32_t k = 0; k < profile.packets_per_flow; ++k) {
      PacketRecord p;
      p.timestamp_ns = profile.start_ns + phase + static_cast<std::int64_t>(k) * period;
      if (jitter_span > 0) p.timestamp_ns += static_cast<std::int64_t>(rng.below(jitter_span));
      p.src_ip = flow.src_ip;
      p.dst_ip = flow.dst_ip;
      p.src_port = flow.src_port;
      p.dst_port = flow.dst_port;
      p.protocol = flow.protocol;
      p.length_bytes = packet_length(flow, rng);
      p.tcp_seq = flow.seq;
      if (flow.protocol == kProtoTcp) flow.seq += p.length_bytes - 40;
      records.push_back(p);
    }
    flows.push_back(flow);
  }

  if (profile.anomaly != AnomalyKind::none) {
    const std::uint32_t target = flows.empty() ? kServerNet + 1 : flows.front().dst_ip;
    const auto attacker_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
    const std::int64_t interval = profile.anomaly_interval_ns();
    const std::int64_t stop = profile.window_end_ns();
    std::uint16_t scan_port = 1;
    for (std::int64_t t = profile.window_begin_ns(); t < stop; t += interval) {
      PacketRecord p;
      p.timestamp_ns = t;
      p.src_ip = kAttacker;
      p.dst_ip = target;
      p.src_port = attacker_port;
      p.protocol = kProtoTcp;
      p.length_bytes = 60;
      p.tcp_seq = static_cast<std::uint32_t>(rng.bits());
      p.label = Label::anomalous;
      if (profile.anomaly == AnomalyKind::flood) {
        p.dst_port = 80;
      } else {
        p.dst_port = scan_port;
        scan_port = scan_port == 65535 ? 1 : static_cast<std::uint16_t>(scan_port + 1);
      }
      records.push_back(p);
    }
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_ns < b.timestamp_ns;
                   });
  return records;
}

}  // namespace netsketch
