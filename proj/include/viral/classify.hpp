#ifndef VIRAL_CLASSIFY_HPP
#define VIRAL_CLASSIFY_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viral/ingest.hpp"
#include "viral/run_log.hpp"

namespace viral {

// MDI: media-driven (exogenous) influence, label 1.
// IDI: interaction-driven (endogenous) influence, label 0.
enum class InfluenceClass : int { kIDI = 0, kMDI = 1 };

const char* to_string(InfluenceClass c);
InfluenceClass influence_class_from_label(int label);

inline constexpr std::size_t kNumFeatures = 4;
inline constexpr std::array<const char*, kNumFeatures> kFeatureNames{
    "retweet_rate", "reply_rate", "link_rate", "median_length"};

// x1 retweet rate, x2 reply rate, x3 links per tweet, x4 median characters.
struct ActivityFeatures {
  std::array<double, kNumFeatures> values{};

  static ActivityFeatures from_stats(const AccountStats& stats);
  bool operator==(const ActivityFeatures&) const = default;
};

struct FeatureScaler {
  std::array<double, kNumFeatures> mean{0.0, 0.0, 0.0, 0.0};
  std::array<double, kNumFeatures> stddev{1.0, 1.0, 1.0, 1.0};

  static FeatureScaler identity() { return {}; }
  std::array<double, kNumFeatures> standardize(const ActivityFeatures& f) const;
  bool operator==(const FeatureScaler&) const = default;
};

struct LRModel {
  // beta[0] is the intercept; beta[1..4] weight the standardized features.
  std::array<double, kNumFeatures + 1> beta{};
  FeatureScaler scaler;
  double threshold = 0.7;

  // Throws DataError when stddevs are not positive or the threshold is
  // outside (0, 1).
  void validate() const;

  // Coefficients on the raw (unscaled) features, scaler folded in.
  std::array<double, kNumFeatures + 1> raw_coefficients() const;

  bool operator==(const LRModel&) const = default;
};

// Published coefficients (-0.96, 0.35, -1.76, 2.82, 0.61) with an identity
// scaler. The feature scaling they were fit under is unknown.
LRModel published_model();

// Stable logistic sigmoid, clamped to the open interval (0, 1).
double sigmoid(double g);

// pi(x) = sigmoid(beta0 + sum beta_i * standardized x_i). Throws DataError on
// non-finite features.
double logistic_score(const LRModel& model, const ActivityFeatures& features);

struct Classification {
  InfluenceClass label;
  double probability;
};

// MDI iff probability >= threshold.
InfluenceClass decide(double probability, double threshold);
Classification classify_account(const LRModel& model, const ActivityFeatures& features);

struct TrainingExample {
  ActivityFeatures features;
  InfluenceClass label;
};

struct FitOptions {
  double l2 = 1e-3;
  std::size_t max_iter = 10000;
  double tol = 1e-8;
};

struct FitResult {
  LRModel model;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_max_norm = 0.0;
};

// Maximizes the mean log-likelihood minus (l2/2)*||beta[1..4]||^2 by
// gradient ascent on standardized features. The scaler is fit on the
// examples. Non-convergence is reported through `log`, not as an error.
FitResult fit_lr(std::span<const TrainingExample> examples, const FitOptions& options = {},
                 RunLog* log = nullptr);

namespace lr {

// Standardized design: one row per example, labels 0/1.
struct Design {
  std::vector<std::array<double, kNumFeatures>> rows;
  std::vector<int> labels;
};

using Coefficients = std::array<double, kNumFeatures + 1>;

double objective(const Design& design, const Coefficients& beta, double l2);
Coefficients gradient(const Design& design, const Coefficients& beta, double l2);

// Fits mean/stddev; throws DataError naming a zero-variance feature.
FeatureScaler fit_scaler(std::span<const TrainingExample> examples);

}  // namespace lr

enum class LabelSource { kManual, kModel };

const char* to_string(LabelSource s);

struct LabeledAccount {
  std::string account_id;
  InfluenceClass label;
  LabelSource source = LabelSource::kManual;
  std::optional<double> probability;  // set only when source == kModel

  bool operator==(const LabeledAccount&) const = default;
};

struct SnowballOptions {
  std::size_t batch_size = 170;
  std::size_t target = 1750;
  double threshold = 0.7;
  FitOptions fit;
};

struct SnowballResult {
  std::vector<LabeledAccount> labels;  // seeds first, then batches in rank order
  LRModel model;
  std::size_t fit_passes = 0;
  std::vector<std::size_t> labeled_counts;  // labeled-set size at each fit pass
};

// Extract / label / refit loop. Each round ranks unlabeled accounts (which
// must author documents in the archive) by the number of labeled-set posts
// retweeting them, ties by account id, labels the top batch with the current
// model and refits on everything labeled so far.
SnowballResult snowball_label(const std::vector<Document>& docs,
                              const std::map<std::string, AccountStats>& stats,
                              std::span<const LabeledAccount> seeds, const SnowballOptions& options,
                              RunLog* log = nullptr);

// CSV with header `account_id,label,source`. A fourth `probability` column
// is accepted on read.
std::vector<LabeledAccount> read_labels_csv(const std::string& path);
std::vector<LabeledAccount> parse_labels_csv(std::string_view content);
std::string labels_to_csv(std::span<const LabeledAccount> labels);

// {"beta":[5], "scaler":[[mean,std] x4], "threshold":t}
std::string model_to_json(const LRModel& model);
LRModel model_from_json(std::string_view text);
void write_model(const std::string& path, const LRModel& model);
LRModel read_model(const std::string& path);

}  // namespace viral

#endif  // VIRAL_CLASSIFY_HPP
