#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace support {

using namespace netsketch;

std::string bit_string(const FlowKey& key) {
  std::string bits;
  for (unsigned i = 0; i < key.bit_length(); ++i) bits += key.bit(i) ? '1' : '0';
  return bits;
}

std::uint32_t reference_fold(const std::string& bits, unsigned width) {
  std::string padded = bits;
  while (padded.size() % width != 0) padded += '0';
  std::uint32_t acc = 0;
  for (std::size_t at = 0; at < padded.size(); at += width) {
    std::uint32_t window = 0;
    for (unsigned i = 0; i < width; ++i) window = window * 2 + (padded[at + i] == '1' ? 1 : 0);
    acc ^= window;
  }
  return acc;
}

PacketRecord random_flow(Rng& rng) {
  PacketRecord p;
  p.src_ip = static_cast<std::uint32_t>(rng.bits());
  p.dst_ip = static_cast<std::uint32_t>(rng.bits());
  const std::uint8_t protocols[] = {kProtoTcp, kProtoUdp, kProtoIcmp};
  p.protocol = protocols[rng.below(3)];
  if (p.protocol != kProtoIcmp) {
    p.src_port = static_cast<std::uint16_t>(rng.below(65536));
    p.dst_port = static_cast<std::uint16_t>(rng.below(65536));
  }
  return p;
}

std::vector<PacketRecord> distinct_bucket_flows(Rng& rng, std::size_t count, const KeySpec& spec,
                                                unsigned width) {
  std::vector<PacketRecord> flows;
  std::set<std::uint32_t> used;
  while (flows.size() < count) {
    auto flow = random_flow(rng);
    const auto bucket = reference_fold(bit_string(extract_key(flow, spec)), width);
    if (used.insert(bucket).second) flows.push_back(flow);
  }
  return flows;
}

std::vector<PacketRecord> random_trace(Rng& rng, const std::vector<PacketRecord>& flows,
                                       const TraceShape& shape) {
  std::vector<PacketRecord> trace;
  trace.reserve(shape.packets);
  std::int64_t t = static_cast<std::int64_t>(rng.below(1'000'000'000));
  for (std::size_t i = 0; i < shape.packets; ++i) {
    if (rng.below(shape.epoch_skip_one_in) == 0) {
      t += shape.epoch_ns * static_cast<std::int64_t>(1 + rng.below(5));
    } else if (rng.below(10) == 0) {
      // same timestamp as the previous packet
    } else {
      t += 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * shape.mean_gap_ns)));
    }
    const auto which = rng.below(flows.size());
    PacketRecord p = flows[which];
    p.timestamp_ns = t;
    p.length_bytes = static_cast<std::uint32_t>(40 + rng.below(1461));
    p.label = which % 17 == 0 ? Label::anomalous : Label::benign;
    trace.push_back(p);
  }
  return trace;
}

std::vector<bool> brute_force_front(const std::vector<ParetoPoint>& points) {
  bool all_pps = true;
  for (const auto& p : points) all_pps = all_pps && p.measured_pps.has_value();
  std::vector<bool> front(points.size(), true);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      const auto& a = points[j];
      const auto& b = points[i];
      bool no_worse = a.f1 >= b.f1 && a.memory_bytes <= b.memory_bytes;
      bool better = a.f1 > b.f1 || a.memory_bytes < b.memory_bytes;
      if (all_pps) {
        no_worse = no_worse && *a.measured_pps >= *b.measured_pps;
        better = better || *a.measured_pps > *b.measured_pps;
      }
      if (no_worse && better) front[i] = false;
    }
  }
  return front;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("netsketch_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace support
