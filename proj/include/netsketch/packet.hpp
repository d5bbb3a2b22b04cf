#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace netsketch {

enum class Label : std::uint8_t { benign, anomalous };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

/// One observed IPv4 packet. Immutable value; safe to hand across threads.
struct PacketRecord {
  std::int64_t timestamp_ns = 0;
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  std::uint32_t length_bytes = 0;
  std::uint32_t tcp_seq = 0;
  Label label = Label::benign;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

inline constexpr std::uint8_t kProtoIcmp = 1;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::uint32_t kMaxPacketLength = 65535;

/// True for IANA protocols that carry 16-bit ports (TCP, UDP, DCCP, SCTP, UDP-Lite).
bool protocol_has_ports(std::uint8_t protocol);

struct TraceMeta {
  std::uint64_t record_count = 0;
  std::int64_t first_ts_ns = 0;
  std::int64_t last_ts_ns = 0;
  std::uint64_t anomalous_count = 0;

  /// Folds one more record (already known to be in timestamp order) into the summary.
  void add(const PacketRecord& packet);

  friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

TraceMeta summarize(std::span<const PacketRecord> records);

std::string format_ipv4(std::uint32_t address);
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

constexpr std::uint32_t ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  return (std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) |
         std::uint32_t{d};
}

}  // namespace netsketch
