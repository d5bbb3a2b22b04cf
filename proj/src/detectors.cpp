#include "netsketch/detectors.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "netsketch/csv.hpp"
#include "netsketch/error.hpp"

namespace netsketch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view kind_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::threshold:
      return "threshold";
    case DetectorKind::zscore:
      return "zscore";
    case DetectorKind::ewma:
      return "ewma";
  }
  return "?";
}

void check_layout(const Snapshot& snapshot) {
  if (snapshot.cells.size() != snapshot.bucket_count() * snapshot.mem_stages ||
      snapshot.mem_stages == 0) {
    throw ConfigError("snapshot has an inconsistent cell layout");
  }
}

class ThresholdDetector final : public Detector {
 public:
  explicit ThresholdDetector(const DetectorSpec& spec) : spec_(spec) {}
  std::string id() const override { return spec_.id(); }
  std::vector<Verdict> observe(const Snapshot& snapshot) override {
    return detect_threshold(snapshot, spec_.feature, spec_.threshold);
  }

 private:
  DetectorSpec spec_;
};

class ZScoreDetector final : public Detector {
 public:
  explicit ZScoreDetector(const DetectorSpec& spec) : spec_(spec) {}
  std::string id() const override { return spec_.id(); }
  std::size_t warmup_epochs() const override { return spec_.training_epochs; }
  std::vector<Verdict> observe(const Snapshot& snapshot) override {
    if (!model_) {
      training_.push_back(snapshot);
      if (training_.size() == spec_.training_epochs) {
        model_ = fit_baseline(training_, spec_.feature);
        training_.clear();
        training_.shrink_to_fit();
      }
      return {};
    }
    return detect_zscore(snapshot, *model_, spec_.k);
  }

 private:
  DetectorSpec spec_;
  std::vector<Snapshot> training_;
  std::optional<BaselineModel> model_;
};

class EwmaDetector final : public Detector {
 public:
  explicit EwmaDetector(const DetectorSpec& spec)
      : spec_(spec), state_(spec.feature, spec.alpha, spec.k) {}
  std::string id() const override { return spec_.id(); }
  std::vector<Verdict> observe(const Snapshot& snapshot) override {
    return state_.observe(snapshot);
  }

 private:
  DetectorSpec spec_;
  EwmaState state_;
};

}  // namespace

std::string_view to_string(Feature feature) {
  switch (feature) {
    case Feature::pkt_count:
      return "pkt_count";
    case Feature::byte_sum:
      return "byte_sum";
    case Feature::byte_avg:
      return "byte_avg";
    case Feature::iat_avg_ns:
      return "iat_avg_ns";
  }
  return "?";
}

Feature parse_feature(std::string_view text) {
  for (auto f : {Feature::pkt_count, Feature::byte_sum, Feature::byte_avg, Feature::iat_avg_ns}) {
    if (text == to_string(f)) return f;
  }
  throw ConfigError("unknown feature selector '" + std::string(text) + "'");
}

double feature_value(const StageCell& cell, Feature feature) {
  switch (feature) {
    case Feature::pkt_count:
      return static_cast<double>(cell.pkt_count);
    case Feature::byte_sum:
      return static_cast<double>(cell.byte_sum);
    case Feature::byte_avg:
      return cell.pkt_count == 0 ? 0.0 : Ratio{cell.byte_sum, cell.pkt_count}.value();
    case Feature::iat_avg_ns:
      return cell.iat_count == 0 ? 0.0 : Ratio{cell.iat_sum_ns, cell.iat_count}.value();
  }
  return 0.0;
}

std::vector<Verdict> detect_threshold(const Snapshot& snapshot, Feature feature, double threshold) {
  check_layout(snapshot);
  std::vector<Verdict> out;
  out.reserve(snapshot.bucket_count());
  for (std::uint32_t b = 0; b < snapshot.bucket_count(); ++b) {
    const double score = feature_value(snapshot.at(0, b), feature);
    out.push_back({b, snapshot.epoch_index, score > threshold, score, "threshold"});
  }
  return out;
}

BaselineModel fit_baseline(std::span<const Snapshot> training, Feature feature) {
  if (training.size() < 2) {
    throw ConfigError("baseline needs at least 2 training epochs, got " +
                      std::to_string(training.size()));
  }
  BaselineModel model;
  model.feature = feature;
  model.hash_width = training.front().hash_width;
  model.mem_stages = training.front().mem_stages;
  model.training_epochs = training.size();
  const std::size_t buckets = training.front().bucket_count();
  for (const auto& snap : training) {
    check_layout(snap);
    if (snap.hash_width != model.hash_width || snap.mem_stages != model.mem_stages) {
      throw ConfigError("training snapshots have different sketch layouts");
    }
  }

  const auto n = static_cast<double>(training.size());
  model.buckets.resize(buckets);
  for (std::uint32_t b = 0; b < buckets; ++b) {
    double sum = 0.0;
    bool seen = false;
    for (const auto& snap : training) {
      sum += feature_value(snap.at(0, b), feature);
      seen = seen || !snap.at(0, b).empty();
    }
    const double mean = sum / n;
    double squares = 0.0;
    for (const auto& snap : training) {
      const double diff = feature_value(snap.at(0, b), feature) - mean;
      squares += diff * diff;
    }
    model.buckets[b] = {mean, std::sqrt(squares / n), !seen};
  }
  return model;
}

std::vector<Verdict> detect_zscore(const Snapshot& snapshot, const BaselineModel& model, double k) {
  check_layout(snapshot);
  if (snapshot.hash_width != model.hash_width || snapshot.mem_stages != model.mem_stages ||
      model.buckets.size() != snapshot.bucket_count()) {
    throw ConfigError("snapshot layout (W=" + std::to_string(snapshot.hash_width) +
                      ", S=" + std::to_string(snapshot.mem_stages) +
                      ") does not match the baseline model (W=" +
                      std::to_string(model.hash_width) + ", S=" + std::to_string(model.mem_stages) +
                      ")");
  }
  std::vector<Verdict> out;
  out.reserve(snapshot.bucket_count());
  for (std::uint32_t b = 0; b < snapshot.bucket_count(); ++b) {
    const double x = feature_value(snapshot.at(0, b), model.feature);
    const BucketBaseline& base = model.buckets[b];
    double score;
    if (base.cold) {
      score = x > 0 ? kInf : 0.0;
    } else if (base.std == 0.0) {
      score = x == base.mean ? 0.0 : kInf;
    } else {
      score = std::abs(x - base.mean) / base.std;
    }
    out.push_back({b, snapshot.epoch_index, score > k, score, "zscore"});
  }
  return out;
}

EwmaState::EwmaState(Feature feature, double alpha, double k)
    : feature_(feature), alpha_(alpha), k_(k) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("EWMA alpha must lie in (0, 1], got " + csv::format_double(alpha));
  }
}

std::vector<Verdict> EwmaState::observe(const Snapshot& snapshot) {
  check_layout(snapshot);
  const std::size_t buckets = snapshot.bucket_count();
  std::vector<Verdict> out;
  out.reserve(buckets);
  if (!seeded_) {
    mean_.resize(buckets);
    deviation_.assign(buckets, 0.0);
    for (std::uint32_t b = 0; b < buckets; ++b) {
      mean_[b] = feature_value(snapshot.at(0, b), feature_);
      out.push_back({b, snapshot.epoch_index, false, 0.0, "ewma"});
    }
    seeded_ = true;
    return out;
  }
  if (mean_.size() != buckets) throw ConfigError("EWMA detector fed snapshots of different widths");
  for (std::uint32_t b = 0; b < buckets; ++b) {
    const double x = feature_value(snapshot.at(0, b), feature_);
    const double m_prev = mean_[b];
    const double d_prev = deviation_[b];
    const double residual = std::abs(x - m_prev);
    const double score = residual / std::max(d_prev, kEpsilon);
    mean_[b] = alpha_ * x + (1.0 - alpha_) * m_prev;
    deviation_[b] = alpha_ * residual + (1.0 - alpha_) * d_prev;
    out.push_back({b, snapshot.epoch_index, score > k_, score, "ewma"});
  }
  return out;
}

std::vector<std::vector<Verdict>> detect_ewma(std::span<const Snapshot> epochs, Feature feature,
                                              double alpha, double k) {
  EwmaState state(feature, alpha, k);
  std::vector<std::vector<Verdict>> out;
  out.reserve(epochs.size());
  for (const auto& snap : epochs) out.push_back(state.observe(snap));
  return out;
}

std::string DetectorSpec::id() const { return std::string(kind_name(kind)); }

std::string DetectorSpec::params() const {
  std::string out = "feature=" + std::string(netsketch::to_string(feature));
  switch (kind) {
    case DetectorKind::threshold:
      out += ";threshold=" + csv::format_double(threshold);
      break;
    case DetectorKind::zscore:
      out += ";k=" + csv::format_double(k) + ";train=" + std::to_string(training_epochs);
      break;
    case DetectorKind::ewma:
      out += ";alpha=" + csv::format_double(alpha) + ";k=" + csv::format_double(k);
      break;
  }
  return out;
}

DetectorSpec DetectorSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return parse(text, "");
  return parse(text.substr(0, colon), text.substr(colon + 1));
}

DetectorSpec DetectorSpec::parse(std::string_view id, std::string_view params) {
  DetectorSpec spec;
  if (id == "threshold") {
    spec.kind = DetectorKind::threshold;
  } else if (id == "zscore") {
    spec.kind = DetectorKind::zscore;
  } else if (id == "ewma") {
    spec.kind = DetectorKind::ewma;
  } else {
    throw ConfigError("unknown detector '" + std::string(id) + "'");
  }
  if (!params.empty()) {
    for (auto item : csv::split(params, ';')) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("detector parameter '" + std::string(item) + "' is not key=value");
      }
      const auto key = item.substr(0, eq);
      const auto value = item.substr(eq + 1);
      const auto number = [&]() {
        const auto v = csv::parse_double(value);
        if (!v) throw ConfigError("detector parameter " + std::string(key) + " is not a number");
        return *v;
      };
      if (key == "feature") {
        spec.feature = parse_feature(value);
      } else if (key == "threshold" && spec.kind == DetectorKind::threshold) {
        spec.threshold = number();
      } else if (key == "k" && spec.kind != DetectorKind::threshold) {
        spec.k = number();
      } else if (key == "alpha" && spec.kind == DetectorKind::ewma) {
        spec.alpha = number();
      } else if (key == "train" && spec.kind == DetectorKind::zscore) {
        const auto v = csv::parse_u64(value);
        if (!v) throw ConfigError("detector parameter train is not a non-negative integer");
        spec.training_epochs = static_cast<std::size_t>(*v);
      } else {
        throw ConfigError("parameter '" + std::string(key) + "' does not apply to detector '" +
                          std::string(id) + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

void DetectorSpec::validate() const {
  switch (kind) {
    case DetectorKind::threshold:
      if (std::isnan(threshold)) throw ConfigError("threshold must be a number");
      break;
    case DetectorKind::zscore:
      if (training_epochs < 2) throw ConfigError("zscore needs train >= 2");
      if (std::isnan(k)) throw ConfigError("k must be a number");
      break;
    case DetectorKind::ewma:
      if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("EWMA alpha must lie in (0, 1]");
      if (std::isnan(k)) throw ConfigError("k must be a number");
      break;
  }
}

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DetectorKind::threshold:
      return std::make_unique<ThresholdDetector>(spec);
    case DetectorKind::zscore:
      return std::make_unique<ZScoreDetector>(spec);
    case DetectorKind::ewma:
      return std::make_unique<EwmaDetector>(spec);
  }
  throw ConfigError("unknown detector kind");
}

void write_verdicts_csv(std::ostream& out, std::span<const Verdict> verdicts) {
  out << kVerdictHeader << '\n';
  for (const auto& v : verdicts) {
    out << v.detector_id << ',' << v.epoch_index << ',' << v.bucket << ','
        << csv::format_double(v.score) << ',' << csv::format_bool(v.anomalous) << '\n';
  }
}

std::vector<Verdict> parse_verdicts_csv(std::istream& in) {
  static const auto columns = csv::header_columns(kVerdictHeader);
  csv::LineReader lines(in);
  csv::expect_header(lines, kVerdictHeader, "verdicts");
  std::vector<Verdict> out;
  std::size_t row_index = 0;
  while (const auto line = lines.next()) {
    const csv::RowParser row(*line, ++row_index, lines.line_number(), columns);
    Verdict v;
    v.detector_id = std::string(row.raw(0));
    if (v.detector_id.empty()) row.fail(0, "empty detector id");
    v.epoch_index = row.i64(1);
    v.bucket = static_cast<std::uint32_t>(row.u64(2, UINT32_MAX));
    v.score = row.real(3);
    v.anomalous = row.boolean(4);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace netsketch
