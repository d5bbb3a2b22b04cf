#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace netsketch {

__extension__ using uint128 = unsigned __int128;

/// Exact non-negative rational num/den with den > 0. Not normalized; comparisons
/// cross-multiply in 128 bits so 6/3 == 2/1.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Ratio& a, const Ratio& b) noexcept {
    return static_cast<uint128>(a.num) * b.den ==
           static_cast<uint128>(b.num) * a.den;
  }
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) noexcept {
    return static_cast<uint128>(a.num) * b.den <=>
           static_cast<uint128>(b.num) * a.den;
  }

  std::string to_string() const { return std::to_string(num) + '/' + std::to_string(den); }
};

/// num/den, or 0 when den is 0.
inline Ratio ratio_or_zero(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? Ratio{0, 1} : Ratio{num, den};
}

}  // namespace netsketch
