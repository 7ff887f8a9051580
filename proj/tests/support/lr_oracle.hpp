// Reference pieces for the logistic-regression checks: a labeled sample drawn
// from known coefficients, a direct penalized log-likelihood, and its central
// finite-difference gradient.
#ifndef VIRAL_TESTS_LR_ORACLE_HPP
#define VIRAL_TESTS_LR_ORACLE_HPP

#include <cmath>
#include <random>
#include <vector>

#include "viral/classify.hpp"

namespace oracle {

inline const viral::lr::Coefficients kPublishedBeta{-0.96, 0.35, -1.76, 2.82, 0.61};

inline double true_probability(const viral::lr::Coefficients& beta, const viral::ActivityFeatures& f) {
  double g = beta[0];
  for (std::size_t k = 0; k < viral::kNumFeatures; ++k) g += beta[k + 1] * f.values[k];
  return 1.0 / (1.0 + std::exp(-g));
}

// Features ~ N(0, 1) independently, label ~ Bernoulli(pi(x)).
inline std::vector<viral::TrainingExample> sample_accounts(const viral::lr::Coefficients& beta, std::size_t n,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<viral::TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    viral::ActivityFeatures f;
    for (auto& v : f.values) v = z(rng);
    const auto label = u(rng) < true_probability(beta, f) ? viral::InfluenceClass::kMDI : viral::InfluenceClass::kIDI;
    out.push_back({f, label});
  }
  return out;
}

// (1/n) sum [y log pi + (1 - y) log(1 - pi)] - (l2/2) sum_{k>=1} beta_k^2
inline double penalized_loglik(const viral::lr::Design& d, const viral::lr::Coefficients& beta, double l2) {
  long double ll = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    long double g = beta[0];
    for (std::size_t k = 0; k < viral::kNumFeatures; ++k) g += beta[k + 1] * d.rows[i][k];
    const long double p = 1.0L / (1.0L + std::exp(-g));
    ll += d.labels[i] == 1 ? std::log(p) : std::log(1.0L - p);
  }
  ll /= static_cast<long double>(d.rows.size());
  long double pen = 0;
  for (std::size_t k = 1; k < beta.size(); ++k) pen += static_cast<long double>(beta[k]) * beta[k];
  return static_cast<double>(ll - 0.5L * l2 * pen);
}

inline viral::lr::Coefficients finite_difference_gradient(const viral::lr::Design& d,
                                                          const viral::lr::Coefficients& beta, double l2,
                                                          double h = 1e-5) {
  viral::lr::Coefficients g{};
  for (std::size_t k = 0; k < beta.size(); ++k) {
    auto plus = beta, minus = beta;
    plus[k] += h;
    minus[k] -= h;
    g[k] = (penalized_loglik(d, plus, l2) - penalized_loglik(d, minus, l2)) / (2.0 * h);
  }
  return g;
}

struct GradientCase {
  viral::lr::Design design;
  viral::lr::Coefficients beta;
  double l2;
};

inline GradientCase random_gradient_case(std::mt19937_64& rng) {
  GradientCase c;
  std::uniform_int_distribution<int> n(2, 20);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> l2(0.0, 0.1);
  const int rows = n(rng);
  for (int i = 0; i < rows; ++i) {
    std::array<double, viral::kNumFeatures> r{};
    for (auto& v : r) v = z(rng);
    c.design.rows.push_back(r);
    c.design.labels.push_back(i % 2 == 0 ? 1 : static_cast<int>(rng() % 2));
  }
  for (auto& b : c.beta) b = z(rng);
  c.l2 = l2(rng);
  return c;
}

// Penalized maximum by Newton's method on population z-scored features, then
// mapped back to raw-feature coefficients.
inline viral::lr::Coefficients newton_fit(const std::vector<viral::TrainingExample>& examples, double l2) {
  constexpr std::size_t K = viral::kNumFeatures + 1;
  const std::size_t n = examples.size();
  std::array<long double, viral::kNumFeatures> mean{}, sd{};
  for (const auto& e : examples) {
    for (std::size_t k = 0; k < viral::kNumFeatures; ++k) mean[k] += e.features.values[k];
  }
  for (auto& m : mean) m /= n;
  for (const auto& e : examples) {
    for (std::size_t k = 0; k < viral::kNumFeatures; ++k) sd[k] += std::pow(e.features.values[k] - mean[k], 2);
  }
  for (auto& s : sd) s = std::sqrt(s / n);

  std::array<long double, K> beta{};
  for (int iter = 0; iter < 100; ++iter) {
    std::array<long double, K> grad{};
    std::array<std::array<long double, K + 1>, K> h{};
    for (const auto& e : examples) {
      std::array<long double, K> x{1.0L};
      for (std::size_t k = 0; k < viral::kNumFeatures; ++k) x[k + 1] = (e.features.values[k] - mean[k]) / sd[k];
      long double g = 0;
      for (std::size_t k = 0; k < K; ++k) g += beta[k] * x[k];
      const long double p = 1.0L / (1.0L + std::exp(-g));
      const long double y = e.label == viral::InfluenceClass::kMDI ? 1.0L : 0.0L;
      for (std::size_t a = 0; a < K; ++a) {
        grad[a] += (y - p) * x[a] / n;
        for (std::size_t b = 0; b < K; ++b) h[a][b] += p * (1 - p) * x[a] * x[b] / n;
      }
    }
    for (std::size_t k = 1; k < K; ++k) {
      grad[k] -= l2 * beta[k];
      h[k][k] += l2;
    }
    // Solve h * step = grad by Gauss-Jordan with partial pivoting.
    for (std::size_t a = 0; a < K; ++a) h[a][K] = grad[a];
    for (std::size_t c = 0; c < K; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < K; ++r) {
        if (std::abs(h[r][c]) > std::abs(h[piv][c])) piv = r;
      }
      std::swap(h[c], h[piv]);
      for (std::size_t r = 0; r < K; ++r) {
        if (r == c) continue;
        const long double f = h[r][c] / h[c][c];
        for (std::size_t j = c; j <= K; ++j) h[r][j] -= f * h[c][j];
      }
    }
    long double step = 0;
    for (std::size_t k = 0; k < K; ++k) {
      beta[k] += h[k][K] / h[k][k];
      step = std::max(step, std::abs(h[k][K] / h[k][k]));
    }
    if (step < 1e-15L) break;
  }
  viral::lr::Coefficients raw{};
  long double b0 = beta[0];
  for (std::size_t k = 0; k < viral::kNumFeatures; ++k) {
    raw[k + 1] = static_cast<double>(beta[k + 1] / sd[k]);
    b0 -= beta[k + 1] * mean[k] / sd[k];
  }
  raw[0] = static_cast<double>(b0);
  return raw;
}

// max_k |a_k - b_k| / max(1e-8, max_k |b_k|)
inline double relative_error(const viral::lr::Coefficients& a, const viral::lr::Coefficients& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num = std::max(num, std::abs(a[k] - b[k]));
    den = std::max(den, std::abs(b[k]));
  }
  return num / std::max(den, 1e-8);
}

}  // namespace oracle

#endif  // VIRAL_TESTS_LR_ORACLE_HPP
