#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netsketch/sketch.hpp"

namespace netsketch {

enum class Feature : std::uint8_t { pkt_count, byte_sum, byte_avg, iat_avg_ns };

std::string_view to_string(Feature feature);
/// Throws ConfigError for an unknown selector.
Feature parse_feature(std::string_view text);

/// Value of `feature` for a cell; absent averages read as 0.
double feature_value(const StageCell& cell, Feature feature);

/// Verdict for one bucket in one epoch. anomalous == (score > detector threshold).
struct Verdict {
  std::uint32_t bucket = 0;
  std::int64_t epoch_index = 0;
  bool anomalous = false;
  double score = 0.0;
  std::string detector_id;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Stateless: scores every stage-0 bucket of `snapshot` by the raw feature value.
std::vector<Verdict> detect_threshold(const Snapshot& snapshot, Feature feature, double threshold);

struct BucketBaseline {
  double mean = 0.0;
  double std = 0.0;
  bool cold = true;  // no packet in this bucket during training
};

/// Per-bucket "normal" statistics of one feature, fitted on a training prefix.
struct BaselineModel {
  Feature feature = Feature::pkt_count;
  unsigned hash_width = 0;
  unsigned mem_stages = 0;
  std::size_t training_epochs = 0;
  std::vector<BucketBaseline> buckets;
};

/// Mean and population std (divide by n) of the feature, per bucket, over the stage-0
/// cells of `training`. Throws ConfigError for fewer than 2 epochs or mixed layouts.
BaselineModel fit_baseline(std::span<const Snapshot> training, Feature feature);

/// score = |x - mean| / std with std == 0 giving 0 (x == mean) or +inf, and cold buckets
/// scoring +inf exactly when x > 0. Throws ConfigError if the snapshot layout differs
/// from the model's.
std::vector<Verdict> detect_zscore(const Snapshot& snapshot, const BaselineModel& model, double k);

/// Online EWMA change detector, one state per bucket.
///
/// The first epoch seeds m = x, d = 0 and is benign by definition. Afterwards each epoch
/// scores |x - m| / max(d, 1e-9) against the previous state, then updates
///   m <- alpha x + (1 - alpha) m,   d <- alpha |x - m_prev| + (1 - alpha) d.
class EwmaState {
 public:
  static constexpr double kEpsilon = 1e-9;

  /// Throws ConfigError unless 0 < alpha <= 1.
  EwmaState(Feature feature, double alpha, double k);

  std::vector<Verdict> observe(const Snapshot& snapshot);

 private:
  Feature feature_;
  double alpha_;
  double k_;
  std::vector<double> mean_;
  std::vector<double> deviation_;
  bool seeded_ = false;
};

std::vector<std::vector<Verdict>> detect_ewma(std::span<const Snapshot> epochs, Feature feature,
                                              double alpha, double k);

enum class DetectorKind : std::uint8_t { threshold, zscore, ewma };

/// Declarative detector selection, e.g. "zscore:feature=pkt_count;k=3;train=20".
struct DetectorSpec {
  DetectorKind kind = DetectorKind::zscore;
  Feature feature = Feature::pkt_count;
  double threshold = 0.0;       // threshold
  double k = 3.0;               // zscore, ewma
  std::size_t training_epochs = 20;  // zscore
  double alpha = 0.3;           // ewma

  std::string id() const;
  /// Parameter string without the id: "feature=pkt_count;k=3;train=20".
  std::string params() const;
  std::string to_string() const { return id() + ':' + params(); }

  static DetectorSpec parse(std::string_view text);
  /// Builds a spec from an id plus a params() string.
  static DetectorSpec parse(std::string_view id, std::string_view params);

  void validate() const;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

/// Common interface fed one completed-epoch snapshot at a time. Detectors that learn
/// from a prefix swallow their training epochs and return no verdicts for them.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string id() const = 0;
  /// Leading epochs consumed without verdicts.
  virtual std::size_t warmup_epochs() const { return 0; }
  virtual std::vector<Verdict> observe(const Snapshot& snapshot) = 0;
};

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec);

inline constexpr std::string_view kVerdictHeader = "detector_id,epoch_index,bucket,score,anomalous";

void write_verdicts_csv(std::ostream& out, std::span<const Verdict> verdicts);
std::vector<Verdict> parse_verdicts_csv(std::istream& in);

}  // namespace netsketch
