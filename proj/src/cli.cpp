#include "netsketch/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "netsketch/csv.hpp"
#include "netsketch/error.hpp"
#include "netsketch/evaluation.hpp"
#include "netsketch/oracle.hpp"
#include "netsketch/run_config.hpp"
#include "netsketch/sweep.hpp"
#include "netsketch/synthetic.hpp"
#include "netsketch/trace_csv.hpp"

namespace netsketch::cli {

namespace {

namespace fs = std::filesystem;

// Hardware reference point the software benchmark is compared against: a 430 MHz
// pipeline consuming 50 bytes per cycle.
constexpr double kHardwareReferenceBytesPerSecond = 430e6 * 50;

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> trace;
  std::optional<std::string> out;
  std::optional<std::string> out_dir;
  std::optional<std::string> report;
  std::optional<std::string> oracle_out;

  bool synthetic = false;
  std::optional<std::uint32_t> flows;
  std::optional<std::uint32_t> packets_per_flow;
  std::optional<std::int64_t> duration_ns;
  std::optional<std::int64_t> start_ns;
  std::optional<double> jitter;
  std::optional<std::string> anomaly;
  std::optional<double> rate_multiplier;
  std::optional<std::string> window;
  std::optional<std::uint64_t> seed;

  std::optional<unsigned> hash_width;
  std::optional<unsigned> mem_stages;
  std::optional<std::int64_t> epoch_ns;
  std::optional<std::string> key_spec;
  std::optional<std::string> detector;

  std::vector<unsigned> grid_hash_width;
  std::vector<unsigned> grid_mem_stages;
  std::vector<std::int64_t> grid_epoch_ns;
  std::vector<std::string> grid_key_spec;
  std::vector<std::string> grid_detector;
  bool bench = false;
  std::optional<std::size_t> repetitions;
  std::optional<std::size_t> threads;

  bool any_synthetic() const {
    return synthetic || flows || packets_per_flow || duration_ns || start_ns || jitter ||
           anomaly || rate_multiplier || window;
  }
};

void add_config_flag(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON run document")->check(CLI::ExistingFile);
  cmd.add_option("--output-dir", f.out_dir, "Directory for output files");
}

void add_synthetic_flags(CLI::App& cmd, Flags& f, bool with_switch) {
  if (with_switch) cmd.add_flag("--synthetic", f.synthetic, "Generate the trace instead of reading one");
  cmd.add_option("--flows", f.flows, "Benign flow count");
  cmd.add_option("--packets-per-flow", f.packets_per_flow, "Packets each benign flow sends");
  cmd.add_option("--duration-ns", f.duration_ns, "Trace duration");
  cmd.add_option("--start-ns", f.start_ns, "Timestamp of the trace origin");
  cmd.add_option("--jitter", f.jitter, "Per-packet timing jitter as a fraction of the period");
  cmd.add_option("--anomaly", f.anomaly, "none, flood or port_scan");
  cmd.add_option("--rate-multiplier", f.rate_multiplier, "Attacker rate relative to one flow");
  cmd.add_option("--window", f.window, "Anomaly window as begin:end fractions of the duration");
  cmd.add_option("--seed", f.seed, "Generator seed");
}

void add_trace_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--trace", f.trace, "Trace CSV to read");
  add_synthetic_flags(cmd, f, true);
}

void add_sketch_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--hash-width", f.hash_width, "Hash width W (2^W buckets)");
  cmd.add_option("--mem-stages", f.mem_stages, "Memory stages S");
  cmd.add_option("--epoch-ns", f.epoch_ns, "Epoch duration");
  cmd.add_option("--key-spec", f.key_spec, "Key fields joined by '+', e.g. src_ip+dst_port");
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto parts = csv::split(text, ':');
  if (parts.size() == 2) {
    const auto begin = csv::parse_double(parts[0]);
    const auto end = csv::parse_double(parts[1]);
    if (begin && end) return {*begin, *end};
  }
  throw ConfigError("--window expects begin:end, got '" + text + "'");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) cfg = load_run_config(*f.config);

  if (f.trace) {
    cfg.trace_path = *f.trace;
    cfg.synthetic.reset();
  }
  if (f.any_synthetic()) {
    if (f.trace) throw ConfigError("--trace cannot be combined with synthetic trace flags");
    auto profile = cfg.synthetic.value_or(SyntheticProfile{});
    if (f.flows) profile.flow_count = *f.flows;
    if (f.packets_per_flow) profile.packets_per_flow = *f.packets_per_flow;
    if (f.duration_ns) profile.duration_ns = *f.duration_ns;
    if (f.start_ns) profile.start_ns = *f.start_ns;
    if (f.jitter) profile.jitter = *f.jitter;
    if (f.rate_multiplier) profile.rate_multiplier = *f.rate_multiplier;
    if (f.anomaly) {
      const auto kind = parse_anomaly_kind(*f.anomaly);
      if (!kind) throw ConfigError("unknown anomaly kind '" + *f.anomaly + "'");
      profile.anomaly = *kind;
    }
    if (f.window) std::tie(profile.window_begin, profile.window_end) = parse_window(*f.window);
    cfg.synthetic = profile;
    cfg.trace_path.reset();
  }
  if (f.seed) cfg.seed = *f.seed;

  if (f.hash_width) cfg.sketch.hash_width = *f.hash_width;
  if (f.mem_stages) cfg.sketch.mem_stages = *f.mem_stages;
  if (f.epoch_ns) cfg.sketch.epoch_ns = *f.epoch_ns;
  if (f.key_spec) cfg.sketch.key_spec = KeySpec::parse(*f.key_spec);
  if (f.detector) cfg.detector = DetectorSpec::parse(*f.detector);

  if (!f.grid_hash_width.empty()) cfg.grid.hash_widths = f.grid_hash_width;
  if (!f.grid_mem_stages.empty()) cfg.grid.mem_stages = f.grid_mem_stages;
  if (!f.grid_epoch_ns.empty()) cfg.grid.epoch_ns = f.grid_epoch_ns;
  if (!f.grid_key_spec.empty()) {
    cfg.grid.key_specs.clear();
    for (const auto& k : f.grid_key_spec) cfg.grid.key_specs.push_back(KeySpec::parse(k));
  }
  if (!f.grid_detector.empty()) {
    cfg.grid.detectors.clear();
    for (const auto& d : f.grid_detector) cfg.grid.detectors.push_back(DetectorSpec::parse(d));
  }
  if (f.bench) cfg.bench = true;
  if (f.repetitions) cfg.bench_repetitions = *f.repetitions;
  if (f.threads) cfg.threads = *f.threads;
  if (f.out_dir) cfg.output_dir = *f.out_dir;
  return cfg;
}

std::vector<PacketRecord> load_records(const RunConfig& cfg) {
  if (cfg.trace_path) return load_trace(*cfg.trace_path).records;
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, cfg.seed);
  throw ConfigError("no trace source: pass --trace, synthetic flags, or a config document");
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
  return p;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path().string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void print_meta(std::ostream& out, const TraceMeta& meta) {
  out << "records=" << meta.record_count << " anomalous=" << meta.anomalous_count
      << " first_ts_ns=" << meta.first_ts_ns << " last_ts_ns=" << meta.last_ts_ns << '\n';
}

void print_quality(std::ostream& out, const QualityScores& q) {
  out << "tp=" << q.tp << " fp=" << q.fp << " fn=" << q.fn << " tn=" << q.tn
      << " precision=" << csv::format_double(q.precision().value())
      << " recall=" << csv::format_double(q.recall().value())
      << " f1=" << csv::format_double(q.f1().value()) << '\n';
}

void print_front(std::ostream& out, const SweepReport& report) {
  auto points = report.points();
  if (points.empty()) {
    out << "no successful configurations\n";
    return;
  }
  const std::size_t total = points.size();
  const auto partition = pareto_front(std::move(points));
  std::map<std::string, const SweepRow*> by_id;
  for (const auto& row : report.rows) by_id[row.config_id] = &row;

  out << "Pareto front (" << partition.front.size() << " of " << total << " configurations):\n";
  out << std::left << std::setw(8) << "config" << std::setw(4) << "W" << std::setw(4) << "S"
      << std::setw(12) << "key_spec" << std::setw(40) << "detector" << std::setw(10) << "f1"
      << std::setw(14) << "memory_bytes" << "measured_pps\n";
  for (const auto& p : partition.front) {
    const SweepRow& row = *by_id.at(p.config_id);
    out << std::left << std::setw(8) << p.config_id << std::setw(4) << row.sketch.hash_width
        << std::setw(4) << row.sketch.mem_stages << std::setw(12) << row.sketch.key_spec.to_string()
        << std::setw(40) << row.detector.to_string() << std::setw(10)
        << csv::format_double(p.f1) << std::setw(14) << p.memory_bytes
        << (p.measured_pps ? csv::format_double(*p.measured_pps) : std::string("-")) << '\n';
  }
}

int cmd_generate(const Flags& f, std::ostream& out) {
  auto cfg = resolve(f);
  const auto profile = cfg.synthetic.value_or(SyntheticProfile{});
  const auto records = generate_synthetic(profile, cfg.seed);
  const fs::path path = f.out ? fs::path(*f.out) : fs::path(cfg.output_dir) / "trace.csv";
  auto file = open_output(path);
  write_trace(file, records);
  if (!file.flush()) throw Error("write failed for '" + path.string() + "'");
  out << "wrote " << records.size() << " records to " << path.string() << '\n';
  print_meta(out, summarize(records));
  return kSuccess;
}

int cmd_extract(const Flags& f, std::ostream& out) {
  const auto cfg = resolve(f);
  const auto records = load_records(cfg);
  const fs::path dir = ensure_dir(f.out ? *f.out : cfg.output_dir);
  Sketch sketch(cfg.sketch);
  std::size_t written = 0;
  replay(sketch, records, [&](std::int64_t epoch, bool partial, const Sketch& s) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(6) << std::setfill('0') << epoch
         << (partial ? "_partial" : "") << ".csv";
    auto file = open_output(dir / name.str());
    write_snapshot_csv(file, s.snapshot());
    ++written;
  });
  out << "wrote " << written << " snapshot" << (written == 1 ? "" : "s") << " to "
      << dir.string() << " (" << cfg.sketch.cell_count() << " rows each)\n";
  if (f.oracle_out) {
    Oracle oracle(cfg.sketch);
    for (const auto& p : records) oracle.update(p);
    auto file = open_output(*f.oracle_out);
    oracle.write_csv(file);
    out << "wrote oracle dump (" << oracle.flow_count() << " flow-epochs) to " << *f.oracle_out << '\n';
  }
  return kSuccess;
}

int cmd_detect(const Flags& f, std::ostream& out) {
  const auto cfg = resolve(f);
  const auto records = load_records(cfg);
  Sketch sketch(cfg.sketch);
  Oracle oracle(cfg.sketch);
  for (const auto& p : records) oracle.update(p);
  auto detector = make_detector(cfg.detector);

  std::vector<Verdict> verdicts;
  std::int64_t complete = 0;
  replay(sketch, records, [&](std::int64_t epoch, bool partial, const Sketch& s) {
    if (partial) return;
    complete = epoch + 1;
    auto v = detector->observe(s.snapshot());
    verdicts.insert(verdicts.end(), v.begin(), v.end());
  });
  const fs::path path = f.out ? fs::path(*f.out) : fs::path(cfg.output_dir) / "verdicts.csv";
  auto file = open_output(path);
  write_verdicts_csv(file, verdicts);
  out << "wrote " << verdicts.size() << " verdicts to " << path.string() << '\n';

  const auto warmup = static_cast<std::int64_t>(detector->warmup_epochs());
  if (complete > warmup) {
    const auto grid = build_ground_truth(oracle, cfg.sketch, warmup, complete);
    print_quality(out, score(verdicts, grid));
  } else {
    out << "no complete epoch after the detector warmup; nothing scored\n";
  }
  return kSuccess;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(f);
  const auto records = load_records(cfg);
  SweepOptions options;
  options.bench = cfg.bench;
  options.bench_repetitions = cfg.bench_repetitions;
  options.threads = cfg.threads;
  const auto report = sweep(records, cfg.grid, options);

  const fs::path dir = ensure_dir(cfg.output_dir);
  {
    auto csv_file = open_output(dir / "report.csv");
    write_report_csv(csv_file, report);
    auto json_file = open_output(dir / "report.json");
    json_file << report_to_json(report).dump(2) << '\n';
  }
  out << "wrote " << report.rows.size() << " rows to " << (dir / "report.csv").string() << '\n';
  print_front(out, report);
  for (const auto& row : report.rows) {
    if (!row.ok()) err << "config " << row.config_id << " failed: " << *row.error << '\n';
  }
  return report.complete() ? kSuccess : kPartialSweepFailure;
}

int cmd_bench(const Flags& f, std::ostream& out) {
  const auto cfg = resolve(f);
  const auto records = load_records(cfg);
  const auto result = bench_throughput(cfg.sketch, records, cfg.bench_repetitions);
  out << "packets=" << records.size() << " W=" << cfg.sketch.hash_width
      << " S=" << cfg.sketch.mem_stages << '\n';
  for (std::size_t i = 0; i < result.runs_pps.size(); ++i) {
    out << "run " << i + 1 << ": " << csv::format_double(result.runs_pps[i]) << " packets/s\n";
  }
  out << "median: " << csv::format_double(result.median_pps) << " packets/s, spread "
      << csv::format_double(result.spread() * 100.0) << "%\n";
  out << "mean packet: " << csv::format_double(result.mean_packet_bytes) << " bytes -> "
      << csv::format_double(result.bytes_per_second() / 1e9) << " GB/s\n";
  out << "hardware reference (430 MHz x 50 B): "
      << csv::format_double(kHardwareReferenceBytesPerSecond / 1e9) << " GB/s (informational)\n";
  return kSuccess;
}

int cmd_pareto(const Flags& f, std::ostream& out) {
  if (!f.report) throw ConfigError("pareto needs --report <report.csv>");
  std::ifstream in(*f.report, std::ios::binary);
  if (!in) throw DataError("cannot open report '" + *f.report + "'");
  const auto report = parse_report_csv(in);
  print_front(out, report);
  return kSuccess;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network-sketch feature extraction, anomaly detection and Pareto evaluation",
               "netsketch"};
  app.require_subcommand(1);
  Flags f;

  auto* generate = app.add_subcommand("generate", "Write a synthetic labeled trace");
  add_config_flag(*generate, f);
  add_synthetic_flags(*generate, f, false);
  generate->add_option("-o,--out", f.out, "Trace CSV path (default <output-dir>/trace.csv)");

  auto* extract = app.add_subcommand("extract", "Write one snapshot CSV per epoch");
  add_config_flag(*extract, f);
  add_trace_flags(*extract, f);
  add_sketch_flags(*extract, f);
  extract->add_option("-o,--out-dir", f.out, "Snapshot directory (default <output-dir>)");
  extract->add_option("--oracle-out", f.oracle_out, "Also dump exact per-flow statistics here");

  auto* detect = app.add_subcommand("detect", "Run one detector and write its verdicts");
  add_config_flag(*detect, f);
  add_trace_flags(*detect, f);
  add_sketch_flags(*detect, f);
  detect->add_option("--detector", f.detector, "e.g. zscore:feature=pkt_count;k=3;train=20");
  detect->add_option("-o,--out", f.out, "Verdict CSV path (default <output-dir>/verdicts.csv)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a configuration grid");
  add_config_flag(*sweep_cmd, f);
  add_trace_flags(*sweep_cmd, f);
  sweep_cmd->add_option("--grid-hash-width", f.grid_hash_width, "Hash widths")->delimiter(',');
  sweep_cmd->add_option("--grid-mem-stages", f.grid_mem_stages, "Memory stage counts")->delimiter(',');
  sweep_cmd->add_option("--grid-epoch-ns", f.grid_epoch_ns, "Epoch durations")->delimiter(',');
  sweep_cmd->add_option("--grid-key-spec", f.grid_key_spec, "Key specs")->delimiter(',');
  sweep_cmd->add_option("--grid-detector", f.grid_detector, "Detector specs (repeatable)");
  sweep_cmd->add_flag("--bench", f.bench, "Measure throughput for every configuration");
  sweep_cmd->add_option("--bench-repetitions", f.repetitions, "Benchmark runs per configuration");
  sweep_cmd->add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");

  auto* bench = app.add_subcommand("bench", "Measure sketch update throughput");
  add_config_flag(*bench, f);
  add_trace_flags(*bench, f);
  add_sketch_flags(*bench, f);
  bench->add_option("--repetitions", f.repetitions, "Timed runs (median reported)");

  auto* pareto = app.add_subcommand("pareto", "Reprint the Pareto front of a sweep report");
  pareto->add_option("--report", f.report, "Sweep report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*generate) return cmd_generate(f, out);
    if (*extract) return cmd_extract(f, out);
    if (*detect) return cmd_detect(f, out);
    if (*sweep_cmd) return cmd_sweep(f, out, err);
    if (*bench) return cmd_bench(f, out);
    if (*pareto) return cmd_pareto(f, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("netsketch");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace netsketch::cli
