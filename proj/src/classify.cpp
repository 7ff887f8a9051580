#include "viral/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "viral/error.hpp"
#include "viral/util.hpp"

namespace viral {

const char* to_string(InfluenceClass c) { return c == InfluenceClass::kMDI ? "MDI" : "IDI"; }

InfluenceClass influence_class_from_label(int label) {
  if (label == 1) return InfluenceClass::kMDI;
  if (label == 0) return InfluenceClass::kIDI;
  throw DataError("label must be 0 or 1, got " + std::to_string(label));
}

const char* to_string(LabelSource s) { return s == LabelSource::kModel ? "model" : "manual"; }

ActivityFeatures ActivityFeatures::from_stats(const AccountStats& s) {
  ActivityFeatures f;
  if (s.tweet_count > 0) {
    const double n = static_cast<double>(s.tweet_count);
    f.values[0] = static_cast<double>(s.retweet_count) / n;
    f.values[1] = static_cast<double>(s.reply_count) / n;
    f.values[2] = static_cast<double>(s.link_count) / n;
  }
  f.values[3] = s.median_length;
  return f;
}

std::array<double, kNumFeatures> FeatureScaler::standardize(const ActivityFeatures& f) const {
  std::array<double, kNumFeatures> z{};
  for (std::size_t k = 0; k < kNumFeatures; ++k) z[k] = (f.values[k] - mean[k]) / stddev[k];
  return z;
}

void LRModel::validate() const {
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (!(scaler.stddev[k] > 0.0) || !std::isfinite(scaler.stddev[k]) || !std::isfinite(scaler.mean[k])) {
      throw DataError(std::string("model scaler for feature '") + kFeatureNames[k] +
                      "' must have a finite mean and positive stddev");
    }
  }
  for (double b : beta) {
    if (!std::isfinite(b)) throw DataError("model coefficients must be finite");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw DataError("model threshold must lie in (0, 1)");
}

std::array<double, kNumFeatures + 1> LRModel::raw_coefficients() const {
  std::array<double, kNumFeatures + 1> raw{};
  raw[0] = beta[0];
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    raw[k + 1] = beta[k + 1] / scaler.stddev[k];
    raw[0] -= beta[k + 1] * scaler.mean[k] / scaler.stddev[k];
  }
  return raw;
}

LRModel published_model() {
  LRModel m;
  m.beta = {-0.96, 0.35, -1.76, 2.82, 0.61};
  m.scaler = FeatureScaler::identity();
  m.threshold = 0.7;
  return m;
}

double sigmoid(double g) {
  double p;
  if (g >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-g));
  } else {
    const double e = std::exp(g);
    p = e / (1.0 + e);
  }
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

namespace {

double linear_predictor(const lr::Coefficients& beta, const std::array<double, kNumFeatures>& z) {
  double g = beta[0];
  for (std::size_t k = 0; k < kNumFeatures; ++k) g += beta[k + 1] * z[k];
  return g;
}

// log(1 + e^g) without overflow.
double softplus(double g) { return g > 0.0 ? g + std::log1p(std::exp(-g)) : std::log1p(std::exp(g)); }

void require_finite(const ActivityFeatures& f) {
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (!std::isfinite(f.values[k])) {
      throw DataError(std::string("feature '") + kFeatureNames[k] + "' is not finite");
    }
  }
}

}  // namespace

double logistic_score(const LRModel& model, const ActivityFeatures& features) {
  require_finite(features);
  return sigmoid(linear_predictor(model.beta, model.scaler.standardize(features)));
}

InfluenceClass decide(double probability, double threshold) {
  return probability >= threshold ? InfluenceClass::kMDI : InfluenceClass::kIDI;
}

Classification classify_account(const LRModel& model, const ActivityFeatures& features) {
  const double p = logistic_score(model, features);
  return {decide(p, model.threshold), p};
}

namespace lr {

double objective(const Design& d, const Coefficients& beta, double l2) {
  double ll = 0.0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const double g = linear_predictor(beta, d.rows[i]);
    ll += d.labels[i] * g - softplus(g);
  }
  ll /= static_cast<double>(d.rows.size());
  double penalty = 0.0;
  for (std::size_t k = 1; k < beta.size(); ++k) penalty += beta[k] * beta[k];
  return ll - 0.5 * l2 * penalty;
}

Coefficients gradient(const Design& d, const Coefficients& beta, double l2) {
  Coefficients grad{};
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const double r = d.labels[i] - sigmoid(linear_predictor(beta, d.rows[i]));
    grad[0] += r;
    for (std::size_t k = 0; k < kNumFeatures; ++k) grad[k + 1] += r * d.rows[i][k];
  }
  const double n = static_cast<double>(d.rows.size());
  for (auto& g : grad) g /= n;
  for (std::size_t k = 1; k < grad.size(); ++k) grad[k] -= l2 * beta[k];
  return grad;
}

FeatureScaler fit_scaler(std::span<const TrainingExample> examples) {
  FeatureScaler s;
  const double n = static_cast<double>(examples.size());
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    double sum = 0.0;
    for (const auto& e : examples) sum += e.features.values[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& e : examples) {
      const double d = e.features.values[k] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw DataError(std::string("feature '") + kFeatureNames[k] + "' has zero variance");
    }
    s.mean[k] = mean;
    s.stddev[k] = sd;
  }
  return s;
}

}  // namespace lr

namespace {

// Largest eigenvalue of the (1/n) X^T X Gram matrix with an intercept column,
// by power iteration. Bounds the curvature of the mean log-likelihood.
double gram_top_eigenvalue(const lr::Design& d) {
  constexpr std::size_t kDim = kNumFeatures + 1;
  std::array<std::array<double, kDim>, kDim> gram{};
  for (const auto& row : d.rows) {
    std::array<double, kDim> x{};
    x[0] = 1.0;
    for (std::size_t k = 0; k < kNumFeatures; ++k) x[k + 1] = row[k];
    for (std::size_t a = 0; a < kDim; ++a) {
      for (std::size_t b = 0; b < kDim; ++b) gram[a][b] += x[a] * x[b];
    }
  }
  const double n = static_cast<double>(d.rows.size());
  for (auto& r : gram) {
    for (auto& v : r) v /= n;
  }
  std::array<double, kDim> v;
  v.fill(1.0);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::array<double, kDim> w{};
    for (std::size_t a = 0; a < kDim; ++a) {
      for (std::size_t b = 0; b < kDim; ++b) w[a] += gram[a][b] * v[b];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (std::size_t a = 0; a < kDim; ++a) v[a] = w[a] / norm;
    lambda = norm;
  }
  // Trace is a valid (looser) bound should power iteration stall.
  double trace = 0.0;
  for (std::size_t a = 0; a < kDim; ++a) trace += gram[a][a];
  return std::min(trace, lambda * 1.05);
}

double max_abs(const lr::Coefficients& c) {
  double m = 0.0;
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

FitResult fit_lr(std::span<const TrainingExample> examples, const FitOptions& options, RunLog* log) {
  if (examples.size() < 2) throw DataError("fit_lr needs at least 2 examples");
  if (!(options.l2 >= 0.0)) throw UsageError("l2 must be non-negative");
  bool has_mdi = false, has_idi = false;
  for (const auto& e : examples) {
    require_finite(e.features);
    (e.label == InfluenceClass::kMDI ? has_mdi : has_idi) = true;
  }
  if (!has_mdi || !has_idi) throw DataError("fit_lr needs examples of both classes (MDI and IDI)");

  FitResult result;
  result.model.scaler = lr::fit_scaler(examples);

  lr::Design design;
  design.rows.reserve(examples.size());
  design.labels.reserve(examples.size());
  for (const auto& e : examples) {
    design.rows.push_back(result.model.scaler.standardize(e.features));
    design.labels.push_back(static_cast<int>(e.label));
  }

  const double lipschitz = 0.25 * gram_top_eigenvalue(design) + options.l2;
  const double step = 1.0 / lipschitz;

  lr::Coefficients beta{};
  lr::Coefficients grad = lr::gradient(design, beta, options.l2);
  std::size_t it = 0;
  while (it < options.max_iter && max_abs(grad) >= options.tol) {
    for (std::size_t k = 0; k < beta.size(); ++k) beta[k] += step * grad[k];
    grad = lr::gradient(design, beta, options.l2);
    ++it;
  }
  result.iterations = it;
  result.gradient_max_norm = max_abs(grad);
  result.converged = result.gradient_max_norm < options.tol;
  result.model.beta = beta;
  if (!result.converged) {
    log_warn(log, "classify",
             "fit_lr reached max_iter=" + std::to_string(options.max_iter) +
                 " without convergence (gradient max-norm " + format_double(result.gradient_max_norm) +
                 "); data may be linearly separable");
  }
  return result;
}

SnowballResult snowball_label(const std::vector<Document>& docs,
                              const std::map<std::string, AccountStats>& stats,
                              std::span<const LabeledAccount> seeds, const SnowballOptions& options,
                              RunLog* log) {
  if (seeds.empty()) throw DataError("snowball_label needs at least one seed");
  if (options.batch_size < 1) throw UsageError("batch size must be at least 1");
  if (options.target < seeds.size()) throw UsageError("target must be at least the number of seeds");
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw UsageError("threshold must lie in (0, 1)");
  }

  std::vector<std::string> missing;
  std::unordered_set<std::string> labeled;
  for (const auto& s : seeds) {
    if (!stats.count(s.account_id)) missing.push_back(s.account_id);
    if (!labeled.insert(s.account_id).second) throw DataError("duplicate seed account '" + s.account_id + "'");
  }
  if (!missing.empty()) {
    std::string msg = "seed accounts absent from the archive:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  // author -> retweet targets, one entry per retweeting document
  std::unordered_map<std::string, std::vector<const std::string*>> retweets_by_author;
  for (const auto& d : docs) {
    if (d.retweet_of_author) retweets_by_author[d.author_id].push_back(&*d.retweet_of_author);
  }
  std::map<std::string, std::size_t> mentions;  // candidates only
  auto absorb = [&](const std::string& account) {
    auto it = retweets_by_author.find(account);
    if (it == retweets_by_author.end()) return;
    for (const std::string* target : it->second) {
      if (!labeled.count(*target) && stats.count(*target)) ++mentions[*target];
    }
  };

  SnowballResult result;
  result.labels.assign(seeds.begin(), seeds.end());
  for (const auto& s : seeds) absorb(s.account_id);

  std::vector<TrainingExample> training;
  for (const auto& l : result.labels) {
    training.push_back({ActivityFeatures::from_stats(stats.at(l.account_id)), l.label});
  }
  auto refit = [&] {
    FitResult fit = fit_lr(training, options.fit, log);
    result.model = fit.model;
    result.model.threshold = options.threshold;
    ++result.fit_passes;
    result.labeled_counts.push_back(result.labels.size());
  };
  refit();

  while (result.labels.size() < options.target) {
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto& [account, count] : mentions) {
      if (!labeled.count(account)) ranked.emplace_back(account, count);
    }
    if (ranked.empty()) {
      log_warn(log, "classify",
               "no reachable accounts: stopping at " + std::to_string(result.labels.size()) +
                   " labeled accounts (target " + std::to_string(options.target) + ")");
      break;
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (ranked.size() > options.batch_size) ranked.resize(options.batch_size);

    for (const auto& [account, count] : ranked) {
      const ActivityFeatures f = ActivityFeatures::from_stats(stats.at(account));
      const Classification c = classify_account(result.model, f);
      result.labels.push_back({account, c.label, LabelSource::kModel, c.probability});
      training.push_back({f, c.label});
      labeled.insert(account);
      mentions.erase(account);
    }
    for (const auto& [account, count] : ranked) absorb(account);
    refit();
  }
  log_info(log, "classify",
           "snowball labeled " + std::to_string(result.labels.size()) + " accounts in " +
               std::to_string(result.fit_passes) + " fit passes");
  return result;
}

std::vector<LabeledAccount> parse_labels_csv(std::string_view content) {
  std::vector<LabeledAccount> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_probability = false;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() == 3 && fields[0] == "account_id" && fields[1] == "label" && fields[2] == "source") {
        header_seen = true;
        continue;
      }
      if (fields.size() == 4 && fields[0] == "account_id" && fields[1] == "label" &&
          fields[2] == "source" && fields[3] == "probability") {
        header_seen = true;
        has_probability = true;
        continue;
      }
      throw DataError("labels file must start with header 'account_id,label,source'");
    }
    const std::size_t expected = has_probability ? 4 : 3;
    const std::string where = "labels line " + std::to_string(line_no);
    if (fields.size() != expected) throw DataError(where + ": expected " + std::to_string(expected) + " fields");
    LabeledAccount a;
    a.account_id = std::string(fields[0]);
    if (a.account_id.empty()) throw DataError(where + ": empty account_id");
    if (fields[1] == "1") {
      a.label = InfluenceClass::kMDI;
    } else if (fields[1] == "0") {
      a.label = InfluenceClass::kIDI;
    } else {
      throw DataError(where + ": label must be 0 or 1");
    }
    if (fields[2] == "manual") {
      a.source = LabelSource::kManual;
    } else if (fields[2] == "model") {
      a.source = LabelSource::kModel;
    } else {
      throw DataError(where + ": source must be 'manual' or 'model'");
    }
    if (has_probability && !fields[3].empty()) {
      if (a.source == LabelSource::kManual) throw DataError(where + ": manual labels carry no probability");
      try {
        a.probability = std::stod(std::string(fields[3]));
      } catch (const std::exception&) {
        throw DataError(where + ": bad probability");
      }
    }
    out.push_back(std::move(a));
  }
  if (!header_seen) throw DataError("labels file is empty (header required)");
  return out;
}

std::vector<LabeledAccount> read_labels_csv(const std::string& path) { return parse_labels_csv(read_file(path)); }

std::string labels_to_csv(std::span<const LabeledAccount> labels) {
  std::string out = "account_id,label,source\n";
  for (const auto& l : labels) {
    out += l.account_id;
    out += ',';
    out += std::to_string(static_cast<int>(l.label));
    out += ',';
    out += to_string(l.source);
    out += '\n';
  }
  return out;
}

std::string model_to_json(const LRModel& model) {
  nlohmann::ordered_json j;
  j["beta"] = model.beta;
  nlohmann::ordered_json scaler = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    scaler.push_back({model.scaler.mean[k], model.scaler.stddev[k]});
  }
  j["scaler"] = scaler;
  j["threshold"] = model.threshold;
  return j.dump(2) + "\n";
}

LRModel model_from_json(std::string_view text) {
  LRModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& beta = j.at("beta");
    if (!beta.is_array() || beta.size() != kNumFeatures + 1) throw DataError("model 'beta' must hold 5 numbers");
    for (std::size_t k = 0; k <= kNumFeatures; ++k) m.beta[k] = beta.at(k).get<double>();
    const auto& scaler = j.at("scaler");
    if (!scaler.is_array() || scaler.size() != kNumFeatures) {
      throw DataError("model 'scaler' must hold 4 [mean, std] pairs");
    }
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      const auto& pair = scaler.at(k);
      if (!pair.is_array() || pair.size() != 2) throw DataError("model scaler entries must be [mean, std]");
      m.scaler.mean[k] = pair.at(0).get<double>();
      m.scaler.stddev[k] = pair.at(1).get<double>();
    }
    m.threshold = j.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

void write_model(const std::string& path, const LRModel& model) { write_file(path, model_to_json(model)); }

LRModel read_model(const std::string& path) { return model_from_json(read_file(path)); }

}  // namespace viral
