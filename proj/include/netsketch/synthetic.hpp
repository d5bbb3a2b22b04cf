#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "netsketch/packet.hpp"

namespace netsketch {

enum class AnomalyKind : std::uint8_t { none, flood, port_scan };

std::string_view to_string(AnomalyKind kind);
std::optional<AnomalyKind> parse_anomaly_kind(std::string_view text);

/// Parameters of a synthetic labeled trace.
///
/// Benign traffic: `flow_count` constant-rate flows, each emitting `packets_per_flow`
/// packets with period P = duration_ns / packets_per_flow (integer division) from a
/// random phase. With jitter j > 0 the phase is drawn from [0, (1-j)P) and every packet
/// gets an extra offset from [0, jP), so each packet stays inside its own period slot.
///
/// Anomaly: a single source outside the benign address pool sends packets every
/// max(1, round(P / rate_multiplier)) ns, starting at
///   start_ns + floor(window_begin * duration_ns)
/// and stopping before
///   start_ns + floor(window_end * duration_ns).
/// A flood hits one port of one benign server; a port scan walks the destination ports
/// of that server. Every attacker packet is labeled anomalous, every other benign.
struct SyntheticProfile {
  std::uint32_t flow_count = 64;
  std::uint32_t packets_per_flow = 1000;
  std::int64_t duration_ns = 10'000'000'000;
  std::int64_t start_ns = 0;
  double jitter = 0.0;

  AnomalyKind anomaly = AnomalyKind::none;
  double rate_multiplier = 50.0;
  double window_begin = 0.4;
  double window_end = 0.5;

  std::int64_t period_ns() const;
  std::int64_t anomaly_interval_ns() const;
  std::int64_t window_begin_ns() const;
  std::int64_t window_end_ns() const;

  /// Throws ConfigError on a zero duration, a window outside [0, 1] or an empty window,
  /// and other unusable combinations.
  void validate() const;
};

/// Pure function of (profile, seed): same inputs give the same record sequence on every
/// platform. Output is sorted by timestamp (ties keep generation order).
std::vector<PacketRecord> generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed);

}  // namespace netsketch
