#include "netsketch/hashing.hpp"

#include <algorithm>
#include <charconv>

#include "netsketch/csv.hpp"
#include "netsketch/error.hpp"

namespace netsketch {

std::string_view to_string(KeyField field) {
  switch (field) {
    case KeyField::src_ip:
      return "src_ip";
    case KeyField::dst_ip:
      return "dst_ip";
    case KeyField::src_port:
      return "src_port";
    case KeyField::dst_port:
      return "dst_port";
    case KeyField::protocol:
      return "protocol";
  }
  return "?";
}

std::optional<KeyField> parse_key_field(std::string_view text) {
  for (auto f : {KeyField::src_ip, KeyField::dst_ip, KeyField::src_port, KeyField::dst_port,
                 KeyField::protocol}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

unsigned field_width(KeyField field) {
  switch (field) {
    case KeyField::src_ip:
    case KeyField::dst_ip:
      return 32;
    case KeyField::src_port:
    case KeyField::dst_port:
      return 16;
    case KeyField::protocol:
      return 8;
  }
  return 0;
}

KeySpec::KeySpec(std::vector<KeyField> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw ConfigError("key spec must select at least one field");
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (std::find(fields_.begin(), fields_.begin() + static_cast<std::ptrdiff_t>(i),
                  fields_[i]) != fields_.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw ConfigError("key spec lists '" + std::string(netsketch::to_string(fields_[i])) +
                        "' twice");
    }
    bit_length_ += field_width(fields_[i]);
  }
}

KeySpec KeySpec::parse(std::string_view text) {
  if (text == "5tuple" || text == "five_tuple") return five_tuple();
  std::vector<KeyField> fields;
  for (auto part : csv::split(text, '+')) {
    const auto field = parse_key_field(part);
    if (!field) throw ConfigError("unknown key field '" + std::string(part) + "'");
    fields.push_back(*field);
  }
  return KeySpec(std::move(fields));
}

KeySpec KeySpec::five_tuple() {
  return KeySpec({KeyField::src_ip, KeyField::dst_ip, KeyField::src_port, KeyField::dst_port,
                  KeyField::protocol});
}

std::string KeySpec::to_string() const {
  std::string out;
  for (auto f : fields_) {
    if (!out.empty()) out += '+';
    out += netsketch::to_string(f);
  }
  return out;
}

FlowKey FlowKey::from_bits(std::uint64_t value, unsigned bit_count) {
  FlowKey key;
  key.append(value, bit_count);
  return key;
}

void FlowKey::append(std::uint64_t value, unsigned bit_count) {
  if (bit_count > 64 || bit_length_ + bit_count > kMaxBits) {
    throw ConfigError("flow key longer than " + std::to_string(kMaxBits) + " bits");
  }
  for (unsigned i = bit_count; i-- > 0;) {
    if ((value >> i) & 1u) {
      bytes_[bit_length_ / 8] |= static_cast<std::uint8_t>(0x80u >> (bit_length_ % 8));
    }
    ++bit_length_;
  }
}

std::string FlowKey::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  if (bit_length_ % 8 != 0) out = std::to_string(bit_length_) + ':';
  for (unsigned i = 0; i < (bit_length_ + 7) / 8; ++i) {
    out += kDigits[bytes_[i] >> 4];
    out += kDigits[bytes_[i] & 0xf];
  }
  return out;
}

FlowKey FlowKey::from_hex(std::string_view text) {
  FlowKey key;
  std::optional<unsigned> declared_bits;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    const auto bits = csv::parse_u64(text.substr(0, colon));
    if (!bits || *bits > kMaxBits) throw DataError("bad flow key bit length in '" + std::string(text) + "'");
    declared_bits = static_cast<unsigned>(*bits);
    text = text.substr(colon + 1);
  }
  if (text.size() % 2 != 0 || text.size() / 2 > kMaxBits / 8) {
    throw DataError("bad flow key hex '" + std::string(text) + "'");
  }
  for (std::size_t i = 0; i < text.size(); i += 2) {
    unsigned byte = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + i + 2, byte, 16);
    if (ec != std::errc{} || ptr != text.data() + i + 2) {
      throw DataError("bad flow key hex '" + std::string(text) + "'");
    }
    key.bytes_[i / 2] = static_cast<std::uint8_t>(byte);
  }
  key.bit_length_ = declared_bits.value_or(static_cast<unsigned>(text.size() * 4));
  if ((key.bit_length_ + 7) / 8 != text.size() / 2) {
    throw DataError("flow key bit length does not match its hex digits");
  }
  if (key.bit_length_ % 8 != 0) {
    const auto tail_mask = static_cast<std::uint8_t>(0xffu >> (key.bit_length_ % 8));
    if (key.bytes_[key.bit_length_ / 8] & tail_mask) {
      throw DataError("flow key has bits set past its length");
    }
  }
  return key;
}

FlowKey operator^(const FlowKey& a, const FlowKey& b) {
  if (a.bit_length_ != b.bit_length_) throw ConfigError("XOR of flow keys with different lengths");
  FlowKey out = a;
  for (std::size_t i = 0; i < out.bytes_.size(); ++i) out.bytes_[i] ^= b.bytes_[i];
  return out;
}

FlowKey extract_key(const PacketRecord& packet, const KeySpec& spec) {
  FlowKey key;
  for (auto field : spec.fields()) {
    switch (field) {
      case KeyField::src_ip:
        key.append(packet.src_ip, 32);
        break;
      case KeyField::dst_ip:
        key.append(packet.dst_ip, 32);
        break;
      case KeyField::src_port:
        key.append(packet.src_port, 16);
        break;
      case KeyField::dst_port:
        key.append(packet.dst_port, 16);
        break;
      case KeyField::protocol:
        key.append(packet.protocol, 8);
        break;
    }
  }
  return key;
}

std::uint32_t shift_xor_hash(const FlowKey& key, unsigned width_bits) {
  if (width_bits < kMinHashWidth || width_bits > kMaxHashWidth) {
    throw ConfigError("hash width " + std::to_string(width_bits) + " outside [" +
                      std::to_string(kMinHashWidth) + ", " + std::to_string(kMaxHashWidth) + "]");
  }
  const std::uint64_t mask = (std::uint64_t{1} << width_bits) - 1;
  std::uint64_t pending = 0;  // holds fewer than width_bits unconsumed bits between bytes
  unsigned pending_bits = 0;
  std::uint64_t folded = 0;
  unsigned remaining = key.bit_length();
  for (std::size_t i = 0; remaining > 0; ++i) {
    const unsigned take = std::min(8u, remaining);
    pending = (pending << take) | (key.bytes()[i] >> (8 - take));
    pending_bits += take;
    remaining -= take;
    while (pending_bits >= width_bits) {
      pending_bits -= width_bits;
      folded ^= (pending >> pending_bits) & mask;
    }
    pending &= (std::uint64_t{1} << pending_bits) - 1;
  }
  if (pending_bits > 0) folded ^= (pending << (width_bits - pending_bits)) & mask;
  return static_cast<std::uint32_t>(folded);
}

}  // namespace netsketch

std::size_t std::hash<netsketch::FlowKey>::operator()(const netsketch::FlowKey& key) const noexcept {
  // FNV-1a over the used bytes and the length; only used for in-memory tables.
  std::uint64_t h = 0xcbf29ce484222325ull ^ key.bit_length();
  for (unsigned i = 0; i < (key.bit_length() + 7) / 8; ++i) {
    h ^= key.bytes()[i];
    h *= 0x100000001b3ull;
  }
  return static_cast<std::size_t>(h);
}
