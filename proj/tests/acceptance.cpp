// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "netsketch/detectors.hpp"
#include "netsketch/evaluation.hpp"
#include "netsketch/oracle.hpp"
#include "netsketch/sketch.hpp"
#include "netsketch/sweep.hpp"
#include "netsketch/synthetic.hpp"
#include "netsketch/trace_csv.hpp"
#include "support.hpp"

using namespace netsketch;

namespace {

// Tolerances and sizes.
constexpr int kOracleTraces = 50;
constexpr std::size_t kOracleMaxPackets = 10'000;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr double kAggregationBudgetSeconds = 60.0;
constexpr int kRotationTrials = 300;
constexpr int kLinearityPairs = 10'000;
constexpr int kParetoSets = 500;
constexpr std::size_t kParetoMaxSize = 20;
constexpr double kMinF1 = 0.9;
constexpr double kDetectionBudgetSeconds = 30.0;
constexpr std::size_t kBenchPackets = 1'000'000;
constexpr double kMinPps = 1e6;
constexpr double kMaxSpread = 0.20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few mismatches of a criterion.
class Failures {
 public:
  void add(const std::string& what) {
    if (count_++ < 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  bool any() const { return count_ > 0; }
  std::string summary() const { return std::to_string(count_) + " mismatches, e.g. " + first_; }

 private:
  std::size_t count_ = 0;
  std::string first_;
};

bool same_byte_fields(const StageCell& a, const StageCell& b) {
  return a.pkt_count == b.pkt_count && a.byte_sum == b.byte_sum && a.byte_min == b.byte_min &&
         a.byte_max == b.byte_max;
}

bool same_iat_fields(const StageCell& a, const StageCell& b) {
  return a.iat_count == b.iat_count && a.iat_sum_ns == b.iat_sum_ns &&
         a.iat_min_ns == b.iat_min_ns && a.iat_max_ns == b.iat_max_ns;
}

/// Random traces shared by criteria 1, 2 and 4.
std::vector<PacketRecord> seeded_trace(std::uint64_t seed, const KeySpec& spec,
                                       std::optional<unsigned> distinct_width,
                                       std::size_t flow_count, std::int64_t epoch_ns,
                                       std::optional<std::size_t> span_epochs = std::nullopt) {
  Rng rng(seed);
  std::vector<PacketRecord> flows;
  if (distinct_width) {
    flows = support::distinct_bucket_flows(rng, flow_count, spec, *distinct_width);
  } else {
    for (std::size_t i = 0; i < flow_count; ++i) flows.push_back(support::random_flow(rng));
  }
  support::TraceShape shape;
  shape.packets = 1000 + rng.below(kOracleMaxPackets - 999);
  shape.epoch_ns = epoch_ns;
  shape.mean_gap_ns = epoch_ns / static_cast<std::int64_t>(20 + rng.below(200));
  if (span_epochs) {
    // Wide sketches clear megabytes per rotation, so keep these to a handful of epochs
    // with two or three skipped stretches.
    const auto span = static_cast<std::int64_t>(*span_epochs) * epoch_ns;
    shape.mean_gap_ns = std::max<std::int64_t>(1, span / static_cast<std::int64_t>(shape.packets));
    shape.epoch_skip_one_in = shape.packets / 2 + 1;
  }
  return support::random_trace(rng, flows, shape);
}

// Conservation is checked on every replay below; these record what was covered.
std::uint64_t g_conservation_epochs = 0;
Failures g_conservation;

void check_conservation(const Sketch& s, const Oracle& oracle, std::int64_t epoch,
                        const std::string& where) {
  ++g_conservation_epochs;
  std::uint64_t packets = 0, bytes = 0;
  for (std::uint32_t b = 0; b < s.bucket_count(); ++b) {
    packets += s.cell(0, b).pkt_count;
    bytes += s.cell(0, b).byte_sum;
  }
  std::uint64_t oracle_bytes = 0;
  for (const auto* f : oracle.flows_in_epoch(epoch)) oracle_bytes += f->metrics.byte_sum;
  if (packets != s.packets_in_epoch() || packets != oracle.packets_in_epoch(epoch) ||
      bytes != oracle_bytes) {
    g_conservation.add(where + " epoch " + std::to_string(epoch));
  }
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  Failures failures;
  std::uint64_t compared = 0;
  for (int t = 0; t < kOracleTraces; ++t) {
    SketchConfig cfg;
    cfg.hash_width = 20;
    cfg.mem_stages = 1 + static_cast<unsigned>(t % 3);
    cfg.epoch_ns = 1'000'000;
    cfg.key_spec = t % 2 == 0 ? KeySpec::five_tuple() : KeySpec::parse("src_ip+dst_port");
    const auto trace = seeded_trace(1000 + t, cfg.key_spec, cfg.hash_width, 50 + t * 4,
                                    cfg.epoch_ns, 6);

    Oracle oracle(cfg);
    for (const auto& p : trace) oracle.update(p);
    Sketch sketch(cfg);
    replay(sketch, trace, [&](std::int64_t epoch, bool, const Sketch& s) {
      check_conservation(s, oracle, epoch, "trace " + std::to_string(t));
      for (std::size_t stage = 0; stage < cfg.mem_stages && stage <= static_cast<std::size_t>(epoch);
           ++stage) {
        const auto past = epoch - static_cast<std::int64_t>(stage);
        std::uint64_t seen = 0;
        for (const auto* flow : oracle.flows_in_epoch(past)) {
          ++compared;
          seen += flow->metrics.pkt_count;
          if (s.query(flow->key, stage) != features_of(flow->metrics, stage)) {
            failures.add("trace " + std::to_string(t) + " epoch " + std::to_string(past) + " key " +
                         flow->key.to_hex());
          }
        }
        std::uint64_t total = 0;
        for (std::uint32_t b = 0; b < s.bucket_count(); ++b) total += s.cell(stage, b).pkt_count;
        if (total != seen) failures.add("stray packets in stage " + std::to_string(stage));
      }
    });
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = !failures.any() && elapsed < kOracleBudgetSeconds;
  std::ostringstream d;
  d << kOracleTraces << " traces, " << compared << " flow-epoch vectors compared exactly at W=20, "
    << elapsed << " s (limit " << kOracleBudgetSeconds << " s)";
  if (failures.any()) d << "; " << failures.summary();
  o.detail = d.str();
  return o;
}

Outcome aggregation_law() {
  const auto start = Clock::now();
  Failures failures;
  std::uint64_t buckets = 0, iat_buckets = 0, collided = 0;
  for (unsigned width : {4u, 5u}) {
    for (int t = 0; t < kOracleTraces; ++t) {
      SketchConfig cfg;
      cfg.hash_width = width;
      cfg.mem_stages = 1;
      cfg.epoch_ns = 1'000'000;
      cfg.key_spec = t % 2 == 0 ? KeySpec::parse("src_ip") : KeySpec::five_tuple();
      const auto trace = seeded_trace(5000 + width * 100 + t, cfg.key_spec, std::nullopt,
                                      8 + t % 40, cfg.epoch_ns);
      Oracle oracle(cfg);
      for (const auto& p : trace) oracle.update(p);
      Sketch sketch(cfg);
      replay(sketch, trace, [&](std::int64_t epoch, bool, const Sketch& s) {
        check_conservation(s, oracle, epoch, "W=" + std::to_string(width));
        const auto expected = oracle.expected_stage(epoch, cfg);
        const auto flows = oracle.flows_per_bucket(epoch, cfg);
        for (std::uint32_t b = 0; b < s.bucket_count(); ++b) {
          ++buckets;
          const auto& cell = s.cell(0, b);
          if (!same_byte_fields(cell, expected[b])) {
            failures.add("W=" + std::to_string(width) + " trace " + std::to_string(t) + " bucket " +
                         std::to_string(b));
          }
          if (flows[b] > 1) ++collided;
          if (flows[b] == 1) {
            ++iat_buckets;
            if (!same_iat_fields(cell, expected[b])) failures.add("IAT bucket " + std::to_string(b));
          }
        }
      });
    }
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = !failures.any() && collided > 0 && elapsed < kAggregationBudgetSeconds;
  std::ostringstream d;
  d << 2 * kOracleTraces << " traces, " << buckets << " bucket-epochs (" << collided
    << " with collisions, IAT checked on " << iat_buckets << " single-flow), " << elapsed
    << " s (limit " << kAggregationBudgetSeconds << " s)";
  if (failures.any()) d << "; " << failures.summary();
  o.detail = d.str();
  return o;
}

Outcome rotation_semantics() {
  Failures failures;
  Rng rng(77);
  int rotations = 0;
  for (int trial = 0; trial < kRotationTrials; ++trial) {
    SketchConfig cfg;
    cfg.mem_stages = 1 + static_cast<unsigned>(trial % 3);
    cfg.hash_width = 1 + static_cast<unsigned>(rng.below(8));
    cfg.epoch_ns = 1000;
    Sketch sketch(cfg);
    std::int64_t t = 0;
    const int steps = 1 + static_cast<int>(rng.below(6));
    for (int step = 0; step < steps; ++step) {
      const auto packets = rng.below(40);
      for (std::uint64_t i = 0; i < packets; ++i) {
        PacketRecord p = support::random_flow(rng);
        p.timestamp_ns = t + static_cast<std::int64_t>(rng.below(1000));
        if (p.timestamp_ns < t) p.timestamp_ns = t;
        t = p.timestamp_ns;
        p.length_bytes = static_cast<std::uint32_t>(40 + rng.below(1000));
        if (sketch.rotations_due(p.timestamp_ns) == 0) sketch.update(p);
      }
      const auto before = sketch.snapshot();
      const std::int64_t next = sketch.epoch_start().value_or(0) + cfg.epoch_ns;
      sketch.rotate_epoch(next);
      t = next;
      ++rotations;
      const auto after = sketch.snapshot();
      const auto n = before.bucket_count();
      for (std::uint32_t b = 0; b < n; ++b) {
        if (!(after.at(0, b) == StageCell{})) failures.add("stage 0 not cleared");
        for (std::size_t s = 1; s < cfg.mem_stages; ++s) {
          if (!(after.at(s, b) == before.at(s - 1, b))) {
            failures.add("S=" + std::to_string(cfg.mem_stages) + " stage " + std::to_string(s));
          }
        }
      }
      if (after.cells.size() != before.cells.size()) failures.add("cell count changed");
    }
  }
  Outcome o;
  o.pass = !failures.any();
  o.detail = std::to_string(rotations) + " rotations over random states, S in {1,2,3}";
  if (failures.any()) o.detail += "; " + failures.summary();
  return o;
}

Outcome conservation() {
  // Also covers a synthetic trace with several configs, on top of criteria 1 and 2.
  SyntheticProfile profile;
  profile.flow_count = 100;
  profile.packets_per_flow = 500;
  profile.duration_ns = 2'000'000'000;
  profile.jitter = 0.7;
  profile.anomaly = AnomalyKind::port_scan;
  const auto trace = generate_synthetic(profile, 4);
  for (unsigned w : {1u, 4u, 8u}) {
    for (unsigned s : {1u, 3u}) {
      SketchConfig cfg;
      cfg.hash_width = w;
      cfg.mem_stages = s;
      cfg.epoch_ns = 50'000'000;
      Oracle oracle(cfg);
      for (const auto& p : trace) oracle.update(p);
      Sketch sketch(cfg);
      replay(sketch, trace, [&](std::int64_t epoch, bool, const Sketch& sk) {
        check_conservation(sk, oracle, epoch, "synthetic W=" + std::to_string(w));
      });
    }
  }
  Outcome o;
  o.pass = !g_conservation.any() && g_conservation_epochs > 0;
  o.detail = std::to_string(g_conservation_epochs) + " epochs checked (packets and bytes)";
  if (g_conservation.any()) o.detail += "; " + g_conservation.summary();
  return o;
}

Outcome hash_contract() {
  Failures failures;
  Rng rng(55);
  const auto random_key = [&](unsigned bits) {
    FlowKey k;
    while (bits > 0) {
      const unsigned take = std::min(bits, 64u);
      k.append(rng.bits(), take);
      bits -= take;
    }
    return k;
  };
  for (unsigned w = kMinHashWidth; w <= kMaxHashWidth; ++w) {
    for (int i = 0; i < 200; ++i) {
      const auto k = random_key(1 + static_cast<unsigned>(rng.below(128)));
      if (shift_xor_hash(k, w) >= (1u << w)) failures.add("range W=" + std::to_string(w));
    }
  }
  for (int i = 0; i < kLinearityPairs; ++i) {
    const unsigned bits = 1 + static_cast<unsigned>(rng.below(128));
    const unsigned w = 1 + static_cast<unsigned>(rng.below(24));
    const auto a = random_key(bits);
    const auto b = random_key(bits);
    if (shift_xor_hash(a ^ b, w) != (shift_xor_hash(a, w) ^ shift_xor_hash(b, w))) {
      failures.add("linearity W=" + std::to_string(w));
    }
  }
  FlowKey worked;
  for (char c : std::string("1011001101")) worked.append(c == '1', 1);
  const auto h = shift_xor_hash(worked, 5);
  if (h != 27) failures.add("worked example gave " + std::to_string(h));
  Outcome o;
  o.pass = !failures.any();
  o.detail = "range for W=1..24, " + std::to_string(kLinearityPairs) +
             " linearity pairs, 10110|01101 at W=5 -> " + std::to_string(h);
  if (failures.any()) o.detail += "; " + failures.summary();
  return o;
}

Outcome pareto_correctness() {
  Failures failures;
  Rng rng(31337);
  for (int set = 0; set < kParetoSets; ++set) {
    const auto n = 1 + rng.below(kParetoMaxSize);
    const bool with_pps = set % 2 == 1;
    std::vector<ParetoPoint> points;
    for (std::uint64_t i = 0; i < n; ++i) {
      ParetoPoint p;
      p.config_id = "p" + std::to_string(i);
      p.f1 = static_cast<double>(rng.below(8)) / 7;
      p.memory_bytes = 96 * (1 + rng.below(8));
      if (with_pps) p.measured_pps = 1e6 * static_cast<double>(1 + rng.below(5));
      points.push_back(p);
    }
    const auto flags = support::brute_force_front(points);
    std::set<std::string> expected;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (flags[i]) expected.insert(points[i].config_id);
    }
    const auto result = pareto_front(points);
    std::set<std::string> got;
    for (const auto& p : result.front) got.insert(p.config_id);
    if (got != expected || result.front.size() + result.dominated.size() != points.size()) {
      failures.add("set " + std::to_string(set));
    }
    std::set<std::string> again;
    for (const auto& p : pareto_front(result.front).front) again.insert(p.config_id);
    if (again != got) failures.add("idempotence set " + std::to_string(set));
  }
  Outcome o;
  o.pass = !failures.any();
  o.detail = std::to_string(kParetoSets) + " random sets of size <= " +
             std::to_string(kParetoMaxSize) + " against brute force, plus idempotence";
  if (failures.any()) o.detail += "; " + failures.summary();
  return o;
}

Outcome detection_quality() {
  const auto start = Clock::now();
  SyntheticProfile profile;
  profile.anomaly = AnomalyKind::flood;
  profile.rate_multiplier = 50;
  profile.window_begin = 0.4;
  profile.window_end = 0.5;
  const auto trace = generate_synthetic(profile, 2024);
  SketchConfig cfg;
  cfg.hash_width = 5;
  cfg.mem_stages = 1;
  const auto spec = DetectorSpec::parse("zscore:feature=pkt_count;k=3;train=20");
  const auto run = evaluate_config(trace, cfg, spec);
  const auto again = evaluate_config(trace, cfg, spec);
  const double f1 = run.quality.f1().value();
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = f1 >= kMinF1 && run.quality == again.quality && elapsed < kDetectionBudgetSeconds;
  std::ostringstream d;
  d << "f1=" << f1 << " (tp=" << run.quality.tp << " fp=" << run.quality.fp
    << " fn=" << run.quality.fn << " tn=" << run.quality.tn << ", epochs " << run.scored_epoch_begin
    << ".." << run.scored_epoch_end << "), need >= " << kMinF1 << ", " << elapsed << " s";
  o.detail = d.str();
  return o;
}

Outcome memory_monotonicity() {
  const std::pair<unsigned, unsigned> path[] = {{1, 4}, {1, 5}, {3, 4}, {3, 5}};
  std::ostringstream d;
  bool pass = true;
  std::uint64_t previous = 0;
  for (const auto& [s, w] : path) {
    SketchConfig cfg;
    cfg.mem_stages = s;
    cfg.hash_width = w;
    const auto bytes = resource_model(cfg).memory_bytes;
    pass = pass && bytes > previous;
    d << "(" << s << "," << w << ")=" << bytes << "B ";
    previous = bytes;
  }
  return {pass, d.str() + "strictly increasing"};
}

Outcome throughput() {
  SyntheticProfile profile;
  profile.flow_count = 1000;
  profile.packets_per_flow = 1000;
  const auto trace = generate_synthetic(profile, 9);
  SketchConfig cfg;
  cfg.hash_width = 4;
  cfg.mem_stages = 1;
  const auto result = bench_throughput(cfg, trace, 3);
  Outcome o;
  o.pass = trace.size() == kBenchPackets && result.median_pps >= kMinPps &&
           result.spread() < kMaxSpread;
  std::ostringstream d;
  d << trace.size() << " packets, median " << result.median_pps << " pps (need >= " << kMinPps
    << "), spread " << 100 * result.spread() << "% (limit " << 100 * kMaxSpread << "%), "
    << result.bytes_per_second() / 1e9 << " GB/s vs 21.5 GB/s hardware reference (informational)";
  o.detail = d.str();
  return o;
}

Outcome format_round_trips() {
  Failures failures;
  SyntheticProfile profile;
  profile.flow_count = 32;
  profile.packets_per_flow = 200;
  profile.duration_ns = 2'000'000'000;
  profile.jitter = 0.5;
  profile.anomaly = AnomalyKind::flood;
  const auto trace = generate_synthetic(profile, 10);

  const auto twice = [&](const std::string& name, const std::string& first,
                         const std::function<std::string(std::istream&)>& reparse) {
    std::istringstream in(first);
    if (reparse(in) != first) failures.add(name);
  };

  std::ostringstream trace_text;
  write_trace(trace_text, trace);
  twice("trace", trace_text.str(), [](std::istream& in) {
    std::ostringstream out;
    write_trace(out, parse_trace(in).records);
    return out.str();
  });

  SketchConfig cfg;
  cfg.hash_width = 4;
  cfg.mem_stages = 3;
  Sketch sketch(cfg);
  std::vector<Snapshot> snaps;
  replay(sketch, trace, [&](std::int64_t, bool partial, const Sketch& s) {
    if (!partial) snaps.push_back(s.snapshot());
  });
  for (const auto& snap : snaps) {
    std::ostringstream text;
    write_snapshot_csv(text, snap);
    twice("snapshot", text.str(), [](std::istream& in) {
      std::ostringstream out;
      write_snapshot_csv(out, parse_snapshot_csv(in));
      return out.str();
    });
  }

  std::vector<Verdict> verdicts;
  for (const char* text : {"zscore:k=3;train=5", "ewma:alpha=0.3;k=2", "threshold:feature=byte_avg;threshold=700"}) {
    auto det = make_detector(DetectorSpec::parse(text));
    for (const auto& snap : snaps) {
      const auto v = det->observe(snap);
      verdicts.insert(verdicts.end(), v.begin(), v.end());
    }
  }
  std::ostringstream verdict_text;
  write_verdicts_csv(verdict_text, verdicts);
  twice("verdicts", verdict_text.str(), [](std::istream& in) {
    std::ostringstream out;
    write_verdicts_csv(out, parse_verdicts_csv(in));
    return out.str();
  });

  SweepGrid grid;
  grid.hash_widths = {3, 4};
  grid.mem_stages = {1, 2};
  grid.detectors = {DetectorSpec::parse("zscore:k=2;train=5"), DetectorSpec::parse("ewma"),
                    DetectorSpec::parse("zscore:train=500")};
  SweepOptions options;
  options.bench = true;
  const auto report = sweep(trace, grid, options);
  std::ostringstream report_text;
  write_report_csv(report_text, report);
  twice("report", report_text.str(), [](std::istream& in) {
    std::ostringstream out;
    write_report_csv(out, parse_report_csv(in));
    return out.str();
  });

  Outcome o;
  o.pass = !failures.any();
  std::ostringstream d;
  d << "trace (" << trace.size() << " rows), " << snaps.size() << " snapshots, "
    << verdicts.size() << " verdicts, report (" << report.rows.size()
    << " rows incl. failed ones) byte-identical after write-parse-write";
  if (failures.any()) d << "; " << failures.summary();
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    Outcome (*run)();
  };
  // Conservation runs after 1 and 2 so it can report what they covered.
  const Criterion criteria[] = {
      {1, "oracle equivalence (collision-free)", oracle_equivalence},
      {2, "aggregation law (with collisions)", aggregation_law},
      {3, "rotation semantics", rotation_semantics},
      {4, "conservation", conservation},
      {5, "hash contract", hash_contract},
      {6, "pareto correctness", pareto_correctness},
      {7, "detection quality", detection_quality},
      {8, "resource-model monotonicity", memory_monotonicity},
      {9, "throughput sanity", throughput},
      {10, "format round-trips", format_round_trips},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("%s [%2d] %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.number, c.name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
