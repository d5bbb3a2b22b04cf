#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsketch/packet.hpp"

namespace netsketch {

enum class KeyField : std::uint8_t { src_ip, dst_ip, src_port, dst_port, protocol };

std::string_view to_string(KeyField field);
std::optional<KeyField> parse_key_field(std::string_view text);
/// Natural width in bits: 32 for addresses, 16 for ports, 8 for the protocol.
unsigned field_width(KeyField field);

/// Ordered, nonempty, duplicate-free selection of header fields forming a flow key.
class KeySpec {
 public:
  /// Throws ConfigError when `fields` is empty or has duplicates.
  explicit KeySpec(std::vector<KeyField> fields);

  /// Parses "src_ip+dst_port" style specs.
  static KeySpec parse(std::string_view text);
  static KeySpec five_tuple();

  const std::vector<KeyField>& fields() const noexcept { return fields_; }
  unsigned bit_length() const noexcept { return bit_length_; }
  std::string to_string() const;

  friend bool operator==(const KeySpec&, const KeySpec&) = default;

 private:
  std::vector<KeyField> fields_;
  unsigned bit_length_ = 0;
};

/// Bit string of up to kMaxBits bits, stored most-significant-bit first. Bits past
/// bit_length() are always zero, so equality and ordering are plain byte comparisons.
class FlowKey {
 public:
  static constexpr unsigned kMaxBits = 128;

  FlowKey() = default;

  /// The low `bit_count` bits of `value`, most significant first. bit_count <= 64.
  static FlowKey from_bits(std::uint64_t value, unsigned bit_count);
  /// Appends the low `bit_count` bits of `value`. Throws ConfigError past kMaxBits.
  void append(std::uint64_t value, unsigned bit_count);

  unsigned bit_length() const noexcept { return bit_length_; }
  bool bit(unsigned index) const noexcept {
    return (bytes_[index / 8] >> (7 - index % 8)) & 1u;
  }
  const std::array<std::uint8_t, kMaxBits / 8>& bytes() const noexcept { return bytes_; }

  /// Lowercase hex of the stored bytes (ceil(bit_length/8) bytes), prefixed by the bit
  /// length when it is not a multiple of 8: "0a000001", "10:b368".
  std::string to_hex() const;
  static FlowKey from_hex(std::string_view text);

  /// Bitwise XOR of two keys of equal length. Throws ConfigError on length mismatch.
  friend FlowKey operator^(const FlowKey& a, const FlowKey& b);

  friend bool operator==(const FlowKey&, const FlowKey&) = default;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;

 private:
  std::array<std::uint8_t, kMaxBits / 8> bytes_{};
  unsigned bit_length_ = 0;
};

/// Concatenates the spec's fields of `packet`, each big-endian at its natural width.
FlowKey extract_key(const PacketRecord& packet, const KeySpec& spec);

inline constexpr unsigned kMinHashWidth = 1;
inline constexpr unsigned kMaxHashWidth = 24;

/// XOR-fold hash onto `width_bits` bits.
///
/// The key is zero-padded on the right to a multiple of the width, cut into consecutive
/// width-bit windows from the left, and all windows are XORed together. Only shifts and
/// XORs are involved. Throws ConfigError when width_bits is outside [1, 24].
std::uint32_t shift_xor_hash(const FlowKey& key, unsigned width_bits);

}  // namespace netsketch

template <>
struct std::hash<netsketch::FlowKey> {
  std::size_t operator()(const netsketch::FlowKey& key) const noexcept;
};
