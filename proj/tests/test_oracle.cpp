#include <map>
#include <sstream>

#include "doctest.h"
#include "netsketch/error.hpp"
#include "netsketch/oracle.hpp"
#include "netsketch/synthetic.hpp"
#include "support.hpp"

using namespace netsketch;

namespace {

PacketRecord packet(std::int64_t ts, std::uint32_t src, std::uint32_t length) {
  PacketRecord p;
  p.timestamp_ns = ts;
  p.src_ip = src;
  p.protocol = kProtoIcmp;
  p.length_bytes = length;
  return p;
}

SketchConfig src_config(unsigned w, std::int64_t epoch_ns) {
  SketchConfig c;
  c.hash_width = w;
  c.epoch_ns = epoch_ns;
  return c;
}

StageCell random_cell(Rng& rng) {
  StageCell c;
  if (rng.below(4) == 0) return c;
  c.pkt_count = 1 + rng.below(50);
  c.byte_sum = c.pkt_count * 60 + rng.below(1000);
  c.byte_min = static_cast<std::uint32_t>(40 + rng.below(100));
  c.byte_max = *c.byte_min + static_cast<std::uint32_t>(rng.below(1000));
  c.last_ts_ns = static_cast<std::int64_t>(rng.below(1'000'000));
  if (c.pkt_count > 1) {
    c.iat_count = c.pkt_count - 1;
    c.iat_min_ns = static_cast<std::int64_t>(rng.below(100));
    c.iat_max_ns = *c.iat_min_ns + static_cast<std::int64_t>(rng.below(1000));
    c.iat_sum_ns = c.iat_count * static_cast<std::uint64_t>(*c.iat_min_ns);
  }
  return c;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("one packet, one flow") {
  Oracle oracle(src_config(4, 1000));
  oracle.update(packet(10, 5, 70));
  CHECK(oracle.flow_count() == 1);
  const auto* f = oracle.find(FlowKey::from_bits(5, 32), 0);
  REQUIRE(f);
  CHECK(f->metrics.pkt_count == 1);
  CHECK(f->metrics.byte_min == 70u);
  CHECK(f->metrics.iat_count == 0);
  CHECK(oracle.last_epoch() == 0);
}

TEST_CASE("interleaved keys keep per-flow inter-arrival times") {
  Oracle oracle(src_config(4, 1'000'000));
  oracle.update(packet(0, 1, 60));
  oracle.update(packet(10, 2, 60));
  oracle.update(packet(30, 1, 60));
  oracle.update(packet(70, 2, 60));
  const auto* a = oracle.find(FlowKey::from_bits(1, 32), 0);
  const auto* b = oracle.find(FlowKey::from_bits(2, 32), 0);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->metrics.iat_sum_ns == 30);
  CHECK(b->metrics.iat_sum_ns == 60);
  CHECK(oracle.flows_in_epoch(0).size() == 2);
}

TEST_CASE("epochs are counted from the first packet") {
  Oracle oracle(src_config(4, 100));
  oracle.update(packet(1050, 1, 60));
  CHECK(oracle.epoch_of(1050) == 0);
  CHECK(oracle.epoch_of(1149) == 0);
  CHECK(oracle.epoch_of(1150) == 1);
  oracle.update(packet(1420, 1, 60));
  CHECK(oracle.last_epoch() == 3);
  CHECK(oracle.find(FlowKey::from_bits(1, 32), 3));
  CHECK_FALSE(oracle.find(FlowKey::from_bits(1, 32), 1));
  CHECK(oracle.packets_in_epoch(2) == 0);
  CHECK_THROWS_AS(oracle.update(packet(1419, 1, 60)), TimestampRegression);
}

TEST_CASE("per-epoch totals equal a recount of the trace") {
  SyntheticProfile profile;
  profile.flow_count = 40;
  profile.packets_per_flow = 250;
  profile.duration_ns = 1'000'000'000;
  profile.jitter = 0.4;
  const auto trace = generate_synthetic(profile, 8);
  REQUIRE(trace.size() == 10'000);

  const auto cfg = src_config(4, 30'000'000);
  Oracle oracle(cfg);
  for (const auto& p : trace) oracle.update(p);

  std::map<std::int64_t, std::uint64_t> recount;
  for (const auto& p : trace) ++recount[(p.timestamp_ns - trace.front().timestamp_ns) / cfg.epoch_ns];
  for (const auto& [epoch, n] : recount) {
    std::uint64_t sum = 0;
    for (const auto* f : oracle.flows_in_epoch(epoch)) sum += f->metrics.pkt_count;
    CHECK(sum == n);
    CHECK(oracle.packets_in_epoch(epoch) == n);
  }
}

TEST_CASE("expected_bucket merges the flows of a bucket") {
  // 0x10000000 and 0x01000000 fold to the same bucket at W=4.
  const auto cfg = src_config(4, 1'000'000);
  Oracle oracle(cfg);
  const std::uint32_t a = 0x10000000, b = 0x01000000, c = 0x00000002;
  oracle.update(packet(0, a, 100));
  oracle.update(packet(1, b, 50));
  oracle.update(packet(2, a, 300));
  oracle.update(packet(3, a, 200));
  oracle.update(packet(4, b, 700));
  oracle.update(packet(5, c, 1000));

  const auto bucket = shift_xor_hash(FlowKey::from_bits(a, 32), 4);
  const auto merged = oracle.expected_bucket(bucket, 0, cfg);
  CHECK(merged.pkt_count == 5);
  CHECK(merged.byte_sum == 1350);
  CHECK(merged.byte_min == 50u);
  CHECK(merged.byte_max == 700u);
  CHECK(merged.iat_count == 3);

  const auto single = oracle.expected_bucket(2, 0, cfg);
  CHECK(single == oracle.find(FlowKey::from_bits(c, 32), 0)->metrics);
  CHECK(oracle.expected_bucket(7, 0, cfg).empty());

  const auto per_bucket = oracle.flows_per_bucket(0, cfg);
  CHECK(per_bucket[bucket] == 2);
  CHECK(per_bucket[2] == 1);

  auto other = cfg;
  other.epoch_ns = 5;
  CHECK_THROWS_AS(oracle.expected_bucket(0, 0, other), ConfigError);
  other = cfg;
  other.hash_width = 6;
  CHECK(oracle.expected_stage(0, other).size() == 64);
}

TEST_CASE("property: merge is associative and commutative") {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_cell(rng), b = random_cell(rng), c = random_cell(rng);
    CHECK(merge_cells(a, b) == merge_cells(b, a));
    CHECK(merge_cells(merge_cells(a, b), c) == merge_cells(a, merge_cells(b, c)));
    CHECK(merge_cells(a, StageCell{}) == a);
  }
}

TEST_CASE("CSV dump") {
  Oracle oracle(src_config(4, 1000));
  oracle.update(packet(0, ipv4(10, 0, 0, 1), 60));
  oracle.update(packet(5, ipv4(10, 0, 0, 1), 80));
  std::ostringstream out;
  oracle.write_csv(out);
  CHECK(out.str() == std::string(kOracleHeader) + "\n0a000001,0,2,140,60,80,1,5,5,5\n");
}

}  // TEST_SUITE
