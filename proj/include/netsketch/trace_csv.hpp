#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "netsketch/csv.hpp"
#include "netsketch/packet.hpp"

namespace netsketch {

inline constexpr std::string_view kTraceHeader =
    "timestamp_ns,src_ip,dst_ip,src_port,dst_port,protocol,length_bytes,tcp_seq,label";

/// Streams PacketRecords out of a canonical trace CSV. Single consumer.
///
/// Rows are validated as they are read: malformed fields, out-of-range values and
/// timestamp regressions raise DataError (TimestampRegression for the latter) carrying
/// the 1-based data row and physical line number. Records are never reordered.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in);

  std::optional<PacketRecord> next();

  /// Summary of the records yielded so far.
  const TraceMeta& meta() const noexcept { return meta_; }

 private:
  csv::LineReader lines_;
  TraceMeta meta_;
  std::size_t row_ = 0;
};

struct ParsedTrace {
  std::vector<PacketRecord> records;
  TraceMeta meta;
};

ParsedTrace parse_trace(std::istream& in);
ParsedTrace load_trace(const std::string& path);

void write_trace(std::ostream& out, std::span<const PacketRecord> records);
void save_trace(const std::string& path, std::span<const PacketRecord> records);

}  // namespace netsketch
