#pragma once

// Minimal CSV plumbing shared by every file format in the project. All formats are
// unquoted, comma separated, LF terminated.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netsketch::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::optional<std::uint64_t> parse_u64(std::string_view text);
std::optional<std::int64_t> parse_i64(std::string_view text);
/// Accepts everything std::from_chars does plus "inf", "-inf".
std::optional<double> parse_double(std::string_view text);
std::optional<bool> parse_bool(std::string_view text);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
inline std::string_view format_bool(bool value) { return value ? "true" : "false"; }

/// Line reader that tracks physical line numbers and rejects CR line endings.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(&in) {}

  /// Next line without its terminator, or nullopt at end of input.
  std::optional<std::string_view> next();
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream* in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

/// Reads the header line and checks it matches `expected` exactly.
void expect_header(LineReader& reader, std::string_view expected, std::string_view format_name);

/// Field accessor that turns parse failures into DataError with row/line/field context.
class RowParser {
 public:
  RowParser(std::string_view line, std::size_t row, std::size_t line_number,
            const std::vector<std::string_view>& column_names);

  std::string_view raw(std::size_t column) const { return fields_[column]; }
  std::uint64_t u64(std::size_t column, std::uint64_t max_value = UINT64_MAX) const;
  std::int64_t i64(std::size_t column) const;
  std::optional<std::uint64_t> optional_u64(std::size_t column) const;
  std::optional<std::int64_t> optional_i64(std::size_t column) const;
  double real(std::size_t column) const;
  std::optional<double> optional_real(std::size_t column) const;
  bool boolean(std::size_t column) const;

  [[noreturn]] void fail(std::size_t column, std::string_view reason) const;

  std::size_t row() const noexcept { return row_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::vector<std::string_view> fields_;
  std::size_t row_;
  std::size_t line_;
  const std::vector<std::string_view>* names_;
};

std::vector<std::string_view> header_columns(std::string_view header);

}  // namespace netsketch::csv
