#pragma once

// Helpers shared by the unit tests and the acceptance binary. Everything here is written
// independently of the library code it is used to check.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "netsketch/evaluation.hpp"
#include "netsketch/hashing.hpp"
#include "netsketch/packet.hpp"
#include "netsketch/rng.hpp"

namespace support {

using netsketch::PacketRecord;

/// Key bits as a '0'/'1' string.
std::string bit_string(const netsketch::FlowKey& key);

/// Textbook XOR fold over a '0'/'1' string: pad right with zeros, cut into width-bit
/// windows, XOR them as integers.
std::uint32_t reference_fold(const std::string& bits, unsigned width);

/// Random header fields of one flow (timestamp and label left at defaults).
PacketRecord random_flow(netsketch::Rng& rng);

/// `count` flows whose keys under `spec` land in pairwise distinct buckets at `width`.
std::vector<PacketRecord> distinct_bucket_flows(netsketch::Rng& rng, std::size_t count,
                                                const netsketch::KeySpec& spec, unsigned width);

struct TraceShape {
  std::size_t packets = 1000;
  std::int64_t epoch_ns = 1'000'000;
  /// Mean gap between packets; 10% of gaps are zero.
  std::int64_t mean_gap_ns = 20'000;
  /// One gap in this many skips 1 to 5 whole epochs.
  std::uint64_t epoch_skip_one_in = 50;
};

/// Monotone random trace over the given flows. Lengths in [40, 1500]; every 17th flow is
/// labeled anomalous.
std::vector<PacketRecord> random_trace(netsketch::Rng& rng, const std::vector<PacketRecord>& flows,
                                       const TraceShape& shape);

/// O(n^2) domination check, written from the definition. Returns a front flag per point.
std::vector<bool> brute_force_front(const std::vector<netsketch::ParetoPoint>& points);

/// Fresh empty directory under the system temp dir; removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace support
