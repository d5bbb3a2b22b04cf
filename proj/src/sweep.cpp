#include "netsketch/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "netsketch/csv.hpp"
#include "netsketch/error.hpp"

namespace netsketch {

namespace {

QualityScores& operator+=(QualityScores& a, const QualityScores& b) {
  a.tp += b.tp;
  a.fp += b.fp;
  a.fn += b.fn;
  a.tn += b.tn;
  return a;
}

std::string config_id_for(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%04zu", index);
  return buf;
}

void run_cell(std::span<const PacketRecord> trace, SweepRow& row) {
  try {
    row.cost = resource_model(row.sketch);
    row.quality = evaluate_config(trace, row.sketch, row.detector).quality;
  } catch (const std::exception& e) {
    row.quality.reset();
    row.error = e.what();
  }
}

const std::vector<std::string_view>& report_columns() {
  static const auto names = csv::header_columns(kReportHeader);
  return names;
}

enum ReportColumn : std::size_t {
  kConfigId,
  kHashWidth,
  kMemStages,
  kEpochNs,
  kKeySpec,
  kDetectorId,
  kDetectorParams,
  kTp,
  kFp,
  kFn,
  kTn,
  kPrecision,
  kRecall,
  kF1,
  kMemoryBytes,
  kUpdateOps,
  kMeasuredPps,
  kOnFront,
};

}  // namespace

RunOutcome evaluate_config(std::span<const PacketRecord> trace, const SketchConfig& config,
                           const DetectorSpec& detector_spec) {
  Sketch sketch(config);
  const auto detector = make_detector(detector_spec);
  Oracle oracle(config);
  for (const auto& p : trace) oracle.update(p);

  const auto warmup = static_cast<std::int64_t>(detector->warmup_epochs());
  RunOutcome outcome;
  std::int64_t complete = 0;
  replay(sketch, trace, [&](std::int64_t epoch, bool partial, const Sketch& s) {
    if (partial) return;
    complete = epoch + 1;
    const auto verdicts = detector->observe(s.snapshot());
    if (epoch < warmup) {
      if (!verdicts.empty()) throw Error("detector emitted verdicts during its warmup");
      return;
    }
    const auto truth = build_ground_truth(oracle, config, epoch, epoch + 1);
    outcome.quality += score(verdicts, truth);
    outcome.anomalous_cells += truth.anomalous_count();
  });
  if (complete <= warmup) {
    throw DataError("trace has " + std::to_string(complete) +
                    " complete epochs; the detector needs more than " + std::to_string(warmup));
  }
  outcome.scored_epoch_begin = warmup;
  outcome.scored_epoch_end = complete;
  return outcome;
}

std::size_t SweepGrid::size() const noexcept {
  return hash_widths.size() * mem_stages.size() * epoch_ns.size() * key_specs.size() *
         detectors.size();
}

std::vector<std::pair<SketchConfig, DetectorSpec>> SweepGrid::cells() const {
  std::vector<std::pair<SketchConfig, DetectorSpec>> out;
  out.reserve(size());
  for (auto w : hash_widths) {
    for (auto s : mem_stages) {
      for (auto e : epoch_ns) {
        for (const auto& key : key_specs) {
          for (const auto& det : detectors) {
            SketchConfig config;
            config.hash_width = w;
            config.mem_stages = s;
            config.epoch_ns = e;
            config.key_spec = key;
            out.emplace_back(std::move(config), det);
          }
        }
      }
    }
  }
  return out;
}

bool SweepReport::complete() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok(); });
}

std::vector<ParetoPoint> SweepReport::points() const {
  std::vector<ParetoPoint> out;
  for (const auto& row : rows) {
    if (!row.ok() || !row.quality || !row.cost) continue;
    out.push_back({row.config_id, row.quality->f1().value(), row.cost->memory_bytes,
                   row.cost->measured_pps, false});
  }
  return out;
}

void SweepReport::mark_front() {
  for (auto& row : rows) row.on_front = false;
  auto pts = points();
  if (pts.empty()) return;
  const auto partition = pareto_front(std::move(pts));
  std::map<std::string, bool> on_front;
  for (const auto& p : partition.front) on_front[p.config_id] = true;
  for (auto& row : rows) row.on_front = on_front.contains(row.config_id);
}

SweepReport sweep(std::span<const PacketRecord> trace, const SweepGrid& grid,
                  const SweepOptions& options) {
  if (grid.size() == 0) throw ConfigError("sweep grid is empty");
  SweepReport report;
  auto cells = grid.cells();
  report.rows.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    report.rows[i].config_id = config_id_for(i);
    report.rows[i].sketch = std::move(cells[i].first);
    report.rows[i].detector = std::move(cells[i].second);
  }

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, report.rows.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < report.rows.size();) {
      run_cell(trace, report.rows[i]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (options.bench) {
    // Serialized; rows sharing a sketch config share one measurement.
    std::map<std::string, double> measured;
    for (auto& row : report.rows) {
      if (!row.ok()) continue;
      const std::string key = std::to_string(row.sketch.hash_width) + '/' +
                              std::to_string(row.sketch.mem_stages) + '/' +
                              std::to_string(row.sketch.epoch_ns) + '/' +
                              row.sketch.key_spec.to_string();
      try {
        auto it = measured.find(key);
        if (it == measured.end()) {
          const auto bench = bench_throughput(row.sketch, trace, options.bench_repetitions);
          it = measured.emplace(key, bench.median_pps).first;
        }
        row.cost->measured_pps = it->second;
      } catch (const std::exception& e) {
        row.error = std::string("benchmark: ") + e.what();
      }
    }
  }
  report.mark_front();
  return report;
}

void write_report_csv(std::ostream& out, const SweepReport& report) {
  out << kReportHeader << '\n';
  for (const auto& row : report.rows) {
    out << row.config_id << ',' << row.sketch.hash_width << ',' << row.sketch.mem_stages << ','
        << row.sketch.epoch_ns << ',' << row.sketch.key_spec.to_string() << ','
        << row.detector.id() << ',' << row.detector.params() << ',';
    if (row.quality) {
      const auto& q = *row.quality;
      out << q.tp << ',' << q.fp << ',' << q.fn << ',' << q.tn << ','
          << csv::format_double(q.precision().value()) << ','
          << csv::format_double(q.recall().value()) << ',' << csv::format_double(q.f1().value())
          << ',';
    } else {
      out << ",,,,,,,";
    }
    if (row.cost) {
      out << row.cost->memory_bytes << ',' << row.cost->update_ops << ',';
      if (row.cost->measured_pps) out << csv::format_double(*row.cost->measured_pps);
    } else {
      out << ",,";
    }
    out << ',' << csv::format_bool(row.on_front) << '\n';
  }
}

SweepReport parse_report_csv(std::istream& in) {
  csv::LineReader lines(in);
  csv::expect_header(lines, kReportHeader, "sweep report");
  SweepReport report;
  std::size_t row_index = 0;
  while (const auto line = lines.next()) {
    const csv::RowParser row(*line, ++row_index, lines.line_number(), report_columns());
    SweepRow r;
    r.config_id = std::string(row.raw(kConfigId));
    if (r.config_id.empty()) row.fail(kConfigId, "empty config id");
    r.sketch.hash_width = static_cast<unsigned>(row.u64(kHashWidth, UINT32_MAX));
    r.sketch.mem_stages = static_cast<unsigned>(row.u64(kMemStages, UINT32_MAX));
    r.sketch.epoch_ns = row.i64(kEpochNs);
    try {
      r.sketch.key_spec = KeySpec::parse(row.raw(kKeySpec));
    } catch (const ConfigError& e) {
      row.fail(kKeySpec, e.what());
    }
    try {
      r.detector = DetectorSpec::parse(row.raw(kDetectorId), row.raw(kDetectorParams));
    } catch (const ConfigError& e) {
      row.fail(kDetectorParams, e.what());
    }

    const bool has_quality = !row.raw(kTp).empty();
    for (std::size_t c = kTp; c <= kF1; ++c) {
      if (row.raw(c).empty() == has_quality) row.fail(c, "quality columns must be all set or all empty");
    }
    if (has_quality) {
      QualityScores q{row.u64(kTp), row.u64(kFp), row.u64(kFn), row.u64(kTn)};
      const std::pair<std::size_t, Ratio> checks[] = {
          {kPrecision, q.precision()}, {kRecall, q.recall()}, {kF1, q.f1()}};
      for (const auto& [column, ratio] : checks) {
        if (row.raw(column) != csv::format_double(ratio.value())) {
          row.fail(column, "does not match the confusion counts");
        }
      }
      r.quality = q;
    }

    if (!row.raw(kMemoryBytes).empty()) {
      ResourceCost cost;
      cost.memory_bytes = row.u64(kMemoryBytes);
      cost.update_ops = static_cast<unsigned>(row.u64(kUpdateOps, UINT32_MAX));
      cost.measured_pps = row.optional_real(kMeasuredPps);
      r.cost = cost;
    } else if (!row.raw(kUpdateOps).empty() || !row.raw(kMeasuredPps).empty()) {
      row.fail(kMemoryBytes, "cost columns must be set together");
    }
    r.on_front = row.boolean(kOnFront);
    if (!r.quality) r.error = "run failed";
    report.rows.push_back(std::move(r));
  }
  return report;
}

nlohmann::json report_to_json(const SweepReport& report) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json j;
    j["config_id"] = row.config_id;
    j["hash_width"] = row.sketch.hash_width;
    j["mem_stages"] = row.sketch.mem_stages;
    j["epoch_ns"] = row.sketch.epoch_ns;
    j["key_spec"] = row.sketch.key_spec.to_string();
    j["detector_id"] = row.detector.id();
    j["detector_params"] = row.detector.params();
    if (row.quality) {
      const auto& q = *row.quality;
      j["tp"] = q.tp;
      j["fp"] = q.fp;
      j["fn"] = q.fn;
      j["tn"] = q.tn;
      j["precision"] = q.precision().value();
      j["recall"] = q.recall().value();
      j["f1"] = q.f1().value();
    } else {
      for (const char* k : {"tp", "fp", "fn", "tn", "precision", "recall", "f1"}) j[k] = nullptr;
    }
    if (row.cost) {
      j["memory_bytes"] = row.cost->memory_bytes;
      j["update_ops"] = row.cost->update_ops;
      j["measured_pps"] = row.cost->measured_pps ? json(*row.cost->measured_pps) : json(nullptr);
    } else {
      j["memory_bytes"] = nullptr;
      j["update_ops"] = nullptr;
      j["measured_pps"] = nullptr;
    }
    j["on_front"] = row.on_front;
    j["error"] = row.error ? json(*row.error) : json(nullptr);
    rows.push_back(std::move(j));
  }
  return json{{"rows", std::move(rows)}, {"complete", report.complete()}};
}

}  // namespace netsketch
