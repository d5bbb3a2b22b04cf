#include "netsketch/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>

#include "netsketch/error.hpp"

namespace netsketch::csv {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::uint64_t> parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  if (text.empty() || text.front() == '+' || text.front() == '-') return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_i64(std::string_view text) {
  std::int64_t value = 0;
  if (text.empty() || text.front() == '+') return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text.empty() || text.front() == '+') return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<bool> parse_bool(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  return std::nullopt;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::optional<std::string_view> LineReader::next() {
  if (!std::getline(*in_, buffer_)) return std::nullopt;
  ++line_;
  if (!buffer_.empty() && buffer_.back() == '\r') {
    throw DataError("line " + std::to_string(line_) + ": CR line ending (expected LF)", 0, line_);
  }
  return std::string_view(buffer_);
}

void expect_header(LineReader& reader, std::string_view expected, std::string_view format_name) {
  const auto header = reader.next();
  if (!header) {
    throw DataError(std::string(format_name) + ": missing header line", 0, 1);
  }
  if (*header != expected) {
    throw DataError(std::string(format_name) + ": header mismatch, expected '" +
                        std::string(expected) + "'",
                    0, reader.line_number());
  }
}

std::vector<std::string_view> header_columns(std::string_view header) { return split(header); }

RowParser::RowParser(std::string_view line, std::size_t row, std::size_t line_number,
                     const std::vector<std::string_view>& column_names)
    : fields_(split(line)), row_(row), line_(line_number), names_(&column_names) {
  if (fields_.size() != column_names.size()) {
    throw DataError("line " + std::to_string(line_) + " (row " + std::to_string(row_) +
                        "): expected " + std::to_string(column_names.size()) + " fields, got " +
                        std::to_string(fields_.size()),
                    row_, line_);
  }
}

void RowParser::fail(std::size_t column, std::string_view reason) const {
  const std::string name((*names_)[column]);
  throw DataError("line " + std::to_string(line_) + " (row " + std::to_string(row_) +
                      "), field '" + name + "': " + std::string(reason) + " ('" +
                      std::string(fields_[column]) + "')",
                  row_, line_, name);
}

std::uint64_t RowParser::u64(std::size_t column, std::uint64_t max_value) const {
  const auto value = parse_u64(fields_[column]);
  if (!value) fail(column, "not a non-negative integer");
  if (*value > max_value) fail(column, "out of range (max " + std::to_string(max_value) + ")");
  return *value;
}

std::int64_t RowParser::i64(std::size_t column) const {
  const auto value = parse_i64(fields_[column]);
  if (!value) fail(column, "not an integer");
  return *value;
}

std::optional<std::uint64_t> RowParser::optional_u64(std::size_t column) const {
  if (fields_[column].empty()) return std::nullopt;
  return u64(column);
}

std::optional<std::int64_t> RowParser::optional_i64(std::size_t column) const {
  if (fields_[column].empty()) return std::nullopt;
  return i64(column);
}

double RowParser::real(std::size_t column) const {
  const auto value = parse_double(fields_[column]);
  if (!value) fail(column, "not a number");
  return *value;
}

std::optional<double> RowParser::optional_real(std::size_t column) const {
  if (fields_[column].empty()) return std::nullopt;
  return real(column);
}

bool RowParser::boolean(std::size_t column) const {
  const auto value = parse_bool(fields_[column]);
  if (!value) fail(column, "expected true or false");
  return *value;
}

}  // namespace netsketch::csv
