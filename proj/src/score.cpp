#include "viral/score.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "viral/error.hpp"
#include "viral/util.hpp"

namespace viral {

const char* to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::kPopularity:
      return "popularity";
    case ScoreKind::kBurstiness:
      return "burstiness";
    case ScoreKind::kRelevance:
      return "relevance";
  }
  return "popularity";
}

ScoreKind score_kind_from_string(std::string_view s) {
  if (s == "popularity") return ScoreKind::kPopularity;
  if (s == "burstiness") return ScoreKind::kBurstiness;
  if (s == "relevance") return ScoreKind::kRelevance;
  throw DataError("unknown score kind '" + std::string(s) + "'");
}

double ScoreMatrix::value(TermId i, TermId j) const {
  if (i > j) std::swap(i, j);
  const PairKey key = make_pair_key(i, j);
  auto it = std::lower_bound(deviations.begin(), deviations.end(), key,
                             [](const PairValue& e, PairKey k) { return e.key < k; });
  return (it != deviations.end() && it->key == key) ? it->value : baseline;
}

void ScoreWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw UsageError("score weights need alpha >= 0, beta >= 0 and alpha + beta > 0");
  }
}

ScoreMatrix popularity(const CoocMatrix& cooc) {
  if (cooc.n_terms < 2) throw DataError("popularity needs at least 2 terms");
  ScoreMatrix out;
  out.frame_id = cooc.frame_id;
  out.n_terms = cooc.n_terms;
  out.kind = ScoreKind::kPopularity;

  __extension__ using u128 = unsigned __int128;
  const std::uint64_t pairs = candidate_pair_count(cooc.n_terms);
  u128 s1 = 0, s2 = 0;
  for (const auto& e : cooc.entries) {
    s1 += e.count;
    s2 += static_cast<u128>(e.count) * e.count;
  }
  // P^2 * var = P * S2 - S1^2, exactly.
  const u128 scaled_var = static_cast<u128>(pairs) * s2 - s1 * s1;
  if (scaled_var == 0) return out;

  // Extended precision, rounded once per value, keeps pairs that tie in
  // exact arithmetic tied after rounding.
  const long double p = static_cast<long double>(pairs);
  const long double mean = static_cast<long double>(s1) / p;
  const long double sigma = std::sqrt(static_cast<long double>(scaled_var)) / p;
  out.baseline = static_cast<double>(-mean / sigma);
  out.deviations.reserve(cooc.entries.size());
  for (const auto& e : cooc.entries) {
    out.deviations.push_back({e.key, static_cast<double>((e.count - mean) / sigma)});
  }
  return out;
}

namespace {

// Population mean and stddev; stddev is exactly 0 for a constant series.
void series_stats(std::span<const double> values, long double& mean, long double& stddev) {
  const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  if (constant) {
    mean = values[0];
    stddev = 0.0L;
    return;
  }
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double n = static_cast<long double>(values.size());
  mean = sum / n;
  long double ss = 0.0L;
  for (double v : values) {
    const long double d = v - mean;
    ss += d * d;
  }
  stddev = std::sqrt(ss / n);
}

double standardize(double v, long double mean, long double stddev) {
  return stddev > 0.0L ? static_cast<double>((v - mean) / stddev) : 0.0;
}

}  // namespace

BurstinessSeries::BurstinessSeries(std::span<const ScoreMatrix> pop_series) : series_(pop_series) {
  if (series_.empty()) throw DataError("burstiness needs at least one frame");
  const std::size_t n_terms = series_.front().n_terms;
  for (const auto& m : series_) {
    if (m.n_terms != n_terms) throw DataError("burstiness: popularity matrices disagree on n_terms");
    if (m.kind != ScoreKind::kPopularity) throw DataError("burstiness expects popularity matrices");
  }
  const std::size_t frames = series_.size();

  std::vector<double> baselines(frames);
  for (std::size_t t = 0; t < frames; ++t) baselines[t] = series_[t].baseline;
  series_stats(baselines, baseline_mean_, baseline_stddev_);

  struct Occurrence {
    PairKey key;
    std::uint32_t frame;
    double value;
  };
  std::vector<Occurrence> occ;
  std::size_t total = 0;
  for (const auto& m : series_) total += m.deviations.size();
  occ.reserve(total);
  for (std::size_t t = 0; t < frames; ++t) {
    for (const auto& d : series_[t].deviations) occ.push_back({d.key, static_cast<std::uint32_t>(t), d.value});
  }
  std::sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
    return a.key != b.key ? a.key < b.key : a.frame < b.frame;
  });

  std::vector<double> values(frames);
  for (std::size_t i = 0; i < occ.size();) {
    std::size_t j = i;
    values = baselines;
    while (j < occ.size() && occ[j].key == occ[i].key) {
      values[occ[j].frame] = occ[j].value;
      ++j;
    }
    PairStats s{occ[i].key, 0.0L, 0.0L};
    series_stats(values, s.mean, s.stddev);
    stats_.push_back(s);
    i = j;
  }
}

ScoreMatrix BurstinessSeries::frame(std::size_t t) const {
  const ScoreMatrix& pop = series_[t];
  ScoreMatrix out;
  out.frame_id = pop.frame_id;
  out.n_terms = pop.n_terms;
  out.kind = ScoreKind::kBurstiness;
  out.baseline = standardize(pop.baseline, baseline_mean_, baseline_stddev_);
  out.deviations.reserve(stats_.size());
  auto it = pop.deviations.begin();
  for (const auto& s : stats_) {
    while (it != pop.deviations.end() && it->key < s.key) ++it;
    const double p = (it != pop.deviations.end() && it->key == s.key) ? it->value : pop.baseline;
    out.deviations.push_back({s.key, standardize(p, s.mean, s.stddev)});
  }
  return out;
}

std::vector<ScoreMatrix> burstiness(std::span<const ScoreMatrix> pop_series) {
  BurstinessSeries series(pop_series);
  std::vector<ScoreMatrix> out;
  out.reserve(series.frame_count());
  for (std::size_t t = 0; t < series.frame_count(); ++t) out.push_back(series.frame(t));
  return out;
}

ScoreMatrix relevance(const ScoreMatrix& pop, const ScoreMatrix& burst, const ScoreWeights& w) {
  w.validate();
  if (pop.frame_id != burst.frame_id || pop.n_terms != burst.n_terms) {
    throw DataError("relevance: popularity and burstiness matrices differ in shape or frame");
  }
  ScoreMatrix out;
  out.frame_id = pop.frame_id;
  out.n_terms = pop.n_terms;
  out.kind = ScoreKind::kRelevance;
  out.baseline = w.alpha * pop.baseline + w.beta * burst.baseline;
  out.deviations.reserve(std::max(pop.deviations.size(), burst.deviations.size()));
  auto a = pop.deviations.begin();
  auto b = burst.deviations.begin();
  while (a != pop.deviations.end() || b != burst.deviations.end()) {
    if (b == burst.deviations.end() || (a != pop.deviations.end() && a->key < b->key)) {
      out.deviations.push_back({a->key, w.alpha * a->value + w.beta * burst.baseline});
      ++a;
    } else if (a == pop.deviations.end() || b->key < a->key) {
      out.deviations.push_back({b->key, w.alpha * pop.baseline + w.beta * b->value});
      ++b;
    } else {
      out.deviations.push_back({a->key, w.alpha * a->value + w.beta * b->value});
      ++a;
      ++b;
    }
  }
  return out;
}

namespace {

std::uint64_t values_below_cutoff(std::uint64_t pairs, double percentile) {
  if (!(percentile >= 0.0 && percentile < 100.0)) throw UsageError("percentile must lie in [0, 100)");
  const auto below = static_cast<std::uint64_t>(std::floor(percentile / 100.0 * static_cast<double>(pairs)));
  return std::min(below, pairs == 0 ? 0 : pairs - 1);
}

}  // namespace

std::uint64_t threshold_edge_budget(std::uint64_t pairs, double percentile) {
  return pairs - values_below_cutoff(pairs, percentile);
}

double relevance_threshold(const ScoreMatrix& rel, double percentile) {
  const std::uint64_t pairs = rel.candidate_pairs();
  const std::uint64_t k = values_below_cutoff(pairs, percentile) + 1;  // 1-based rank
  if (pairs == 0) return rel.baseline;

  std::vector<double> sorted;
  sorted.reserve(rel.deviations.size());
  for (const auto& d : rel.deviations) sorted.push_back(d.value);
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t m = rel.baseline_pairs();
  const auto lo = static_cast<std::uint64_t>(
      std::lower_bound(sorted.begin(), sorted.end(), rel.baseline) - sorted.begin());
  if (k <= lo) return sorted[k - 1];
  if (k <= lo + m) return rel.baseline;
  return sorted[k - 1 - m];
}

AdjacencyGraph threshold_adjacency(const ScoreMatrix& rel, double percentile, RunLog* log) {
  AdjacencyGraph g;
  g.frame_id = rel.frame_id;
  g.n_terms = rel.n_terms;
  g.threshold_value = relevance_threshold(rel, percentile);
  const std::uint64_t pairs = rel.candidate_pairs();
  if (pairs == 0) return g;

  if (rel.baseline >= g.threshold_value && rel.baseline_pairs() > 0) {
    // Every implicit pair clears the cutoff; enumerate the complement of the
    // explicit entries.
    g.edges.reserve(static_cast<std::size_t>(pairs));
    auto it = rel.deviations.begin();
    for (TermId i = 0; i + 1 < rel.n_terms; ++i) {
      for (TermId j = i + 1; j < rel.n_terms; ++j) {
        const PairKey key = make_pair_key(i, j);
        if (it != rel.deviations.end() && it->key == key) {
          if (it->value >= g.threshold_value) g.edges.push_back(key);
          ++it;
        } else {
          g.edges.push_back(key);
        }
      }
    }
    log_warn(log, "score",
             "frame " + std::to_string(rel.frame_id) + ": relevance cutoff equals the baseline value; all " +
                 std::to_string(rel.baseline_pairs()) + " baseline pairs become edges");
  } else {
    for (const auto& d : rel.deviations) {
      if (d.value >= g.threshold_value) g.edges.push_back(d.key);
    }
  }
  const std::uint64_t budget = threshold_edge_budget(pairs, percentile);
  if (g.edges.size() > budget) {
    log_warn(log, "score",
             "frame " + std::to_string(rel.frame_id) + ": " + std::to_string(g.edges.size() - budget) +
                 " extra edges from values tied at the relevance cutoff");
  }
  return g;
}

std::string score_to_text(const ScoreMatrix& m) {
  std::string out = std::string("score ") + to_string(m.kind) + " " + std::to_string(m.frame_id) + " " +
                    std::to_string(m.n_terms) + " " + format_double(m.baseline) + " " +
                    std::to_string(m.deviations.size()) + "\n";
  for (const auto& d : m.deviations) {
    out += std::to_string(pair_first(d.key));
    out += ' ';
    out += std::to_string(pair_second(d.key));
    out += ' ';
    out += format_double(d.value);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split(line, ' ')) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

}  // namespace

ScoreMatrix score_from_text(std::string_view text) {
  auto lines = split(text, '\n');
  auto header = tokens_of(lines.at(0));
  if (header.size() != 6 || header[0] != "score") throw DataError("bad score header");
  ScoreMatrix m;
  m.kind = score_kind_from_string(header[1]);
  m.frame_id = parse_number<std::size_t>(header[2], "frame_id");
  m.n_terms = parse_number<std::size_t>(header[3], "n_terms");
  m.baseline = parse_number<double>(header[4], "baseline");
  const auto nnz = parse_number<std::size_t>(header[5], "nnz");
  if (lines.size() < nnz + 1) throw DataError("score file truncated");
  for (std::size_t r = 0; r < nnz; ++r) {
    auto f = tokens_of(lines[r + 1]);
    if (f.size() != 3) throw DataError("bad score row " + std::to_string(r + 1));
    const auto i = parse_number<TermId>(f[0], "term index");
    const auto j = parse_number<TermId>(f[1], "term index");
    if (!(i < j) || j >= m.n_terms) throw DataError("invalid score entry at row " + std::to_string(r + 1));
    const PairKey key = make_pair_key(i, j);
    if (!m.deviations.empty() && m.deviations.back().key >= key) {
      throw DataError("score rows must be sorted by (i, j)");
    }
    m.deviations.push_back({key, parse_number<double>(f[2], "value")});
  }
  return m;
}

}  // namespace viral
