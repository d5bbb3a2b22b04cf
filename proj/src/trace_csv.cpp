#include "netsketch/trace_csv.hpp"

#include <fstream>
#include <ostream>

#include "netsketch/error.hpp"

namespace netsketch {

namespace {

enum Column : std::size_t {
  kTimestamp,
  kSrcIp,
  kDstIp,
  kSrcPort,
  kDstPort,
  kProtocol,
  kLength,
  kTcpSeq,
  kLabel,
};

const std::vector<std::string_view>& columns() {
  static const auto names = csv::header_columns(kTraceHeader);
  return names;
}

PacketRecord parse_row(const csv::RowParser& row) {
  PacketRecord p;
  p.timestamp_ns = row.i64(kTimestamp);
  if (p.timestamp_ns < 0) row.fail(kTimestamp, "negative timestamp");

  const auto src = parse_ipv4(row.raw(kSrcIp));
  if (!src) row.fail(kSrcIp, "not a dotted-quad IPv4 address");
  const auto dst = parse_ipv4(row.raw(kDstIp));
  if (!dst) row.fail(kDstIp, "not a dotted-quad IPv4 address");
  p.src_ip = *src;
  p.dst_ip = *dst;

  p.src_port = static_cast<std::uint16_t>(row.u64(kSrcPort, 65535));
  p.dst_port = static_cast<std::uint16_t>(row.u64(kDstPort, 65535));
  p.protocol = static_cast<std::uint8_t>(row.u64(kProtocol, 255));
  p.length_bytes = static_cast<std::uint32_t>(row.u64(kLength, kMaxPacketLength));
  p.tcp_seq = static_cast<std::uint32_t>(row.u64(kTcpSeq, UINT32_MAX));

  if (!protocol_has_ports(p.protocol)) {
    if (p.src_port != 0) row.fail(kSrcPort, "protocol carries no ports, expected 0");
    if (p.dst_port != 0) row.fail(kDstPort, "protocol carries no ports, expected 0");
  }
  if (p.protocol != kProtoTcp && p.tcp_seq != 0) {
    row.fail(kTcpSeq, "non-TCP packet must have tcp_seq 0");
  }

  const auto label = parse_label(row.raw(kLabel));
  if (!label) row.fail(kLabel, "expected benign or anomalous");
  p.label = *label;
  return p;
}

}  // namespace

TraceReader::TraceReader(std::istream& in) : lines_(in) {
  csv::expect_header(lines_, kTraceHeader, "trace");
}

std::optional<PacketRecord> TraceReader::next() {
  const auto line = lines_.next();
  if (!line) return std::nullopt;
  ++row_;
  const csv::RowParser row(*line, row_, lines_.line_number(), columns());
  auto packet = parse_row(row);
  if (meta_.record_count > 0 && packet.timestamp_ns < meta_.last_ts_ns) {
    throw TimestampRegression("line " + std::to_string(row.line()) + " (row " +
                                  std::to_string(row_) + "): timestamp " +
                                  std::to_string(packet.timestamp_ns) + " precedes " +
                                  std::to_string(meta_.last_ts_ns),
                              row_, row.line(), "timestamp_ns");
  }
  meta_.add(packet);
  return packet;
}

ParsedTrace parse_trace(std::istream& in) {
  TraceReader reader(in);
  ParsedTrace trace;
  while (auto packet = reader.next()) trace.records.push_back(*packet);
  trace.meta = reader.meta();
  return trace;
}

ParsedTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

void write_trace(std::ostream& out, std::span<const PacketRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& p : records) {
    out << p.timestamp_ns << ',' << format_ipv4(p.src_ip) << ',' << format_ipv4(p.dst_ip) << ','
        << p.src_port << ',' << p.dst_port << ',' << unsigned{p.protocol} << ',' << p.length_bytes
        << ',' << p.tcp_seq << ',' << to_string(p.label) << '\n';
  }
}

void save_trace(const std::string& path, std::span<const PacketRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace file '" + path + "'");
  write_trace(out, records);
  if (!out.flush()) throw Error("write failed for '" + path + "'");
}

}  // namespace netsketch
