#include "netsketch/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "netsketch/error.hpp"

namespace netsketch {

GroundTruthGrid::GroundTruthGrid(std::size_t bucket_count, std::int64_t epoch_begin,
                                 std::int64_t epoch_end)
    : bucket_count_(bucket_count), epoch_begin_(epoch_begin), epoch_end_(epoch_end) {
  if (epoch_end < epoch_begin) throw ConfigError("ground truth grid: epoch_end < epoch_begin");
}

std::size_t GroundTruthGrid::cell_count() const noexcept {
  return bucket_count_ * static_cast<std::size_t>(epoch_end_ - epoch_begin_);
}

bool GroundTruthGrid::contains(std::uint32_t bucket, std::int64_t epoch) const noexcept {
  return bucket < bucket_count_ && epoch >= epoch_begin_ && epoch < epoch_end_;
}

void GroundTruthGrid::mark(std::uint32_t bucket, std::int64_t epoch) {
  if (!contains(bucket, epoch)) throw ConfigError("ground truth grid: cell outside the domain");
  anomalous_.emplace(epoch, bucket);
}

bool GroundTruthGrid::anomalous(std::uint32_t bucket, std::int64_t epoch) const {
  return anomalous_.contains({epoch, bucket});
}

GroundTruthGrid build_ground_truth(const Oracle& oracle, const SketchConfig& config,
                                   std::int64_t epoch_begin, std::int64_t epoch_end) {
  GroundTruthGrid grid(config.bucket_count(), epoch_begin, epoch_end);
  for (std::int64_t e = epoch_begin; e < epoch_end; ++e) {
    for (const auto* flow : oracle.flows_in_epoch(e)) {
      if (flow->anomalous_count > 0) grid.mark(shift_xor_hash(flow->key, config.hash_width), e);
    }
  }
  return grid;
}

void QualityScores::add(bool predicted, bool actual) noexcept {
  if (predicted) {
    ++(actual ? tp : fp);
  } else {
    ++(actual ? fn : tn);
  }
}

QualityScores score(std::span<const Verdict> verdicts, const GroundTruthGrid& grid) {
  if (verdicts.size() != grid.cell_count()) {
    throw DataError("verdicts cover " + std::to_string(verdicts.size()) +
                    " cells but the ground truth grid has " + std::to_string(grid.cell_count()));
  }
  std::vector<bool> seen(grid.cell_count());
  QualityScores q;
  for (const auto& v : verdicts) {
    if (!grid.contains(v.bucket, v.epoch_index)) {
      throw DataError("verdict for bucket " + std::to_string(v.bucket) + ", epoch " +
                      std::to_string(v.epoch_index) + " lies outside the ground truth grid");
    }
    const auto slot = static_cast<std::size_t>(v.epoch_index - grid.epoch_begin()) *
                          grid.bucket_count() + v.bucket;
    if (seen[slot]) {
      throw DataError("duplicate verdict for bucket " + std::to_string(v.bucket) + ", epoch " +
                      std::to_string(v.epoch_index));
    }
    seen[slot] = true;
    q.add(v.anomalous, grid.anomalous(v.bucket, v.epoch_index));
  }
  return q;
}

ResourceCost resource_model(const SketchConfig& config) {
  config.validate();
  ResourceCost cost;
  cost.memory_bytes = static_cast<std::uint64_t>(config.cell_count()) * Sketch::kCellBytes;
  cost.update_ops = Sketch::kUpdateOps;
  return cost;
}

double BenchResult::spread() const {
  if (runs_pps.empty() || median_pps == 0.0) return 0.0;
  const auto [lo, hi] = std::minmax_element(runs_pps.begin(), runs_pps.end());
  return (*hi - *lo) / median_pps;
}

BenchResult bench_throughput(const SketchConfig& config, std::span<const PacketRecord> trace,
                             std::size_t repetitions) {
  if (repetitions < 3) throw ConfigError("benchmark needs at least 3 repetitions");
  if (trace.size() < kMinBenchPackets) {
    throw DataError("benchmark trace has " + std::to_string(trace.size()) +
                    " packets, need at least " + std::to_string(kMinBenchPackets));
  }
  BenchResult result;
  std::uint64_t total_bytes = 0;
  for (const auto& p : trace) total_bytes += p.length_bytes;
  result.mean_packet_bytes = static_cast<double>(total_bytes) / static_cast<double>(trace.size());

  volatile std::uint64_t sink = 0;
  {
    // Untimed pass so page faults on the trace and allocator warm-up stay out of the runs.
    Sketch warm(config);
    for (const auto& p : trace) warm.update(p);
    sink = sink + warm.packets_in_epoch();
  }
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    Sketch sketch(config);
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : trace) sketch.update(p);
    const auto stop = std::chrono::steady_clock::now();
    sink = sink + sketch.packets_in_epoch();
    const double seconds = std::chrono::duration<double>(stop - start).count();
    result.runs_pps.push_back(static_cast<double>(trace.size()) / seconds);
  }
  auto sorted = result.runs_pps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  result.median_pps = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  return result;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b, bool use_pps) {
  bool strictly = false;
  if (a.f1 < b.f1 || a.memory_bytes > b.memory_bytes) return false;
  if (a.f1 > b.f1 || a.memory_bytes < b.memory_bytes) strictly = true;
  if (use_pps) {
    if (*a.measured_pps < *b.measured_pps) return false;
    if (*a.measured_pps > *b.measured_pps) strictly = true;
  }
  return strictly;
}

ParetoPartition pareto_front(std::vector<ParetoPoint> points) {
  if (points.empty()) throw ConfigError("pareto front of an empty point set");
  const bool use_pps = std::all_of(points.begin(), points.end(),
                                   [](const ParetoPoint& p) { return p.measured_pps.has_value(); });
  const auto better_first = [use_pps](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.f1 != b.f1) return a.f1 > b.f1;
    if (a.memory_bytes != b.memory_bytes) return a.memory_bytes < b.memory_bytes;
    if (use_pps && *a.measured_pps != *b.measured_pps) return *a.measured_pps > *b.measured_pps;
    return a.config_id < b.config_id;
  };
  std::sort(points.begin(), points.end(), better_first);

  // In this order a dominator always precedes what it dominates, and dominance is
  // transitive, so checking each point against the front found so far suffices.
  ParetoPartition out;
  for (auto& p : points) {
    const bool beaten = std::any_of(out.front.begin(), out.front.end(),
                                    [&](const ParetoPoint& f) { return dominates(f, p, use_pps); });
    p.dominated = beaten;
    (beaten ? out.dominated : out.front).push_back(std::move(p));
  }
  return out;
}

}  // namespace netsketch
