#include "netsketch/packet.hpp"

#include "netsketch/csv.hpp"

namespace netsketch {

std::string_view to_string(Label label) {
  return label == Label::anomalous ? "anomalous" : "benign";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "benign") return Label::benign;
  if (text == "anomalous") return Label::anomalous;
  return std::nullopt;
}

bool protocol_has_ports(std::uint8_t protocol) {
  switch (protocol) {
    case kProtoTcp:
    case kProtoUdp:
    case 33:   // DCCP
    case 132:  // SCTP
    case 136:  // UDP-Lite
      return true;
    default:
      return false;
  }
}

void TraceMeta::add(const PacketRecord& packet) {
  if (record_count == 0) first_ts_ns = packet.timestamp_ns;
  last_ts_ns = packet.timestamp_ns;
  ++record_count;
  if (packet.label == Label::anomalous) ++anomalous_count;
}

TraceMeta summarize(std::span<const PacketRecord> records) {
  TraceMeta meta;
  for (const auto& r : records) meta.add(r);
  return meta;
}

std::string format_ipv4(std::uint32_t address) {
  return std::to_string(address >> 24) + '.' + std::to_string((address >> 16) & 0xff) + '.' +
         std::to_string((address >> 8) & 0xff) + '.' + std::to_string(address & 0xff);
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  const auto parts = csv::split(text, '.');
  if (parts.size() != 4) return std::nullopt;
  std::uint32_t address = 0;
  for (auto part : parts) {
    // Leading zeros are rejected so that formatting round-trips.
    if (part.size() > 1 && part.front() == '0') return std::nullopt;
    const auto octet = csv::parse_u64(part);
    if (!octet || *octet > 255) return std::nullopt;
    address = (address << 8) | static_cast<std::uint32_t>(*octet);
  }
  return address;
}

}  // namespace netsketch
