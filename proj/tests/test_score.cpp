#include <doctest.h>

#include <cmath>
#include <random>

#include "support/pipeline_compare.hpp"
#include "viral/error.hpp"
#include "viral/score.hpp"

using namespace viral;

namespace {

CoocMatrix cooc_of(std::size_t n, std::vector<std::tuple<TermId, TermId, std::uint32_t>> entries, std::size_t frame = 0) {
  CoocMatrix m;
  m.frame_id = frame;
  m.n_terms = n;
  m.doc_count = 10;
  for (auto [i, j, c] : entries) m.entries.push_back({make_pair_key(i, j), c});
  std::sort(m.entries.begin(), m.entries.end(), [](const PairCount& a, const PairCount& b) { return a.key < b.key; });
  return m;
}

ScoreMatrix pop_frame(std::size_t n, double baseline, std::vector<PairValue> devs, std::size_t frame) {
  ScoreMatrix m;
  m.frame_id = frame;
  m.n_terms = n;
  m.baseline = baseline;
  m.deviations = std::move(devs);
  m.kind = ScoreKind::kPopularity;
  return m;
}

// Relevance matrix with arbitrary explicit values over n terms.
ScoreMatrix rel_matrix(std::size_t n, double baseline, const std::vector<double>& explicit_values) {
  ScoreMatrix m;
  m.n_terms = n;
  m.baseline = baseline;
  m.kind = ScoreKind::kRelevance;
  std::size_t k = 0;
  for (TermId i = 0; i < n && k < explicit_values.size(); ++i) {
    for (TermId j = i + 1; j < n && k < explicit_values.size(); ++j) m.deviations.push_back({make_pair_key(i, j), explicit_values[k++]});
  }
  return m;
}

}  // namespace

TEST_CASE("popularity: three-pair example") {
  const ScoreMatrix p = popularity(cooc_of(3, {{0, 1, 4}, {0, 2, 1}, {1, 2, 1}}));
  CHECK(p.value(0, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p.value(0, 2) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-14));
  CHECK(p.value(1, 2) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-14));
  CHECK(p.baseline == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p.baseline_pairs() == 0);
}

TEST_CASE("popularity: degenerate sigma") {
  const ScoreMatrix empty = popularity(cooc_of(5, {}));
  CHECK(empty.baseline == 0.0);
  CHECK(empty.deviations.empty());
  const ScoreMatrix flat = popularity(cooc_of(3, {{0, 1, 2}, {0, 2, 2}, {1, 2, 2}}));
  CHECK(flat.value(0, 1) == 0.0);
  CHECK(flat.deviations.empty());
  CHECK_THROWS_AS(popularity(cooc_of(1, {})), DataError);
}

TEST_CASE("popularity: implicit zeros enter the moments") {
  // One pair of 3 with count 3: values (3, 0, 0), mean 1, sigma sqrt(2).
  const ScoreMatrix p = popularity(cooc_of(3, {{0, 2, 3}}));
  CHECK(p.value(0, 2) == doctest::Approx(2.0 / std::sqrt(2.0)));
  CHECK(p.value(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(p.baseline_pairs() == 2);
}

TEST_CASE("popularity z-score identities and scale invariance") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = oracle::random_instance(rng, 30, 1, 200);
    const auto vocab = oracle::numbered_vocab(inst.n);
    const CoocMatrix c = count_cooccurrence(oracle::as_tokenized(inst.frames[0], vocab), vocab);
    oracle::Comparison z;
    const ScoreMatrix p = popularity(c);
    oracle::measure_zscore(p, z);
    if (z.zscore_frames == 1) {
      CHECK(z.worst_mean < 1e-9);
      CHECK(z.worst_std_error < 1e-9);
    }
    CoocMatrix scaled = c;
    for (auto& e : scaled.entries) e.count *= 7;
    const ScoreMatrix ps = popularity(scaled);
    CHECK(oracle::max_abs_diff(oracle::densify(p), oracle::densify(ps)) < 1e-12);
    const auto adj = threshold_adjacency(relevance(p, p, {1.0, 0.0}), 99.0);
    const auto adj_scaled = threshold_adjacency(relevance(ps, ps, {1.0, 0.0}), 99.0);
    CHECK(adj.edges == adj_scaled.edges);
  }
}

TEST_CASE("burstiness examples") {
  SUBCASE("series (0, 0, 3)") {
    std::vector<ScoreMatrix> pops{pop_frame(2, 0.0, {}, 0), pop_frame(2, 0.0, {}, 1),
                                  pop_frame(2, 0.0, {{make_pair_key(0, 1), 3.0}}, 2)};
    const auto b = burstiness(pops);
    CHECK(b[2].value(0, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(b[0].value(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("constant series") {
    std::vector<ScoreMatrix> pops;
    for (std::size_t t = 0; t < 4; ++t) pops.push_back(pop_frame(3, -0.3, {{make_pair_key(0, 1), 1.7}}, t));
    for (const auto& b : burstiness(pops)) {
      CHECK(b.value(0, 1) == 0.0);
      CHECK(b.value(1, 2) == 0.0);
    }
  }
  SUBCASE("single frame") {
    std::vector<ScoreMatrix> pops{pop_frame(4, -0.4, {{make_pair_key(0, 3), 2.5}}, 0)};
    const auto b = burstiness(pops);
    CHECK(b[0].value(0, 3) == 0.0);
    CHECK(b[0].baseline == 0.0);
  }
  SUBCASE("mismatched sizes") {
    std::vector<ScoreMatrix> pops{pop_frame(4, 0.0, {}, 0), pop_frame(5, 0.0, {}, 1)};
    CHECK_THROWS_AS(burstiness(pops), DataError);
  }
}

TEST_CASE("burstiness tracks only pairs explicit in some frame") {
  std::vector<ScoreMatrix> pops{pop_frame(50, -0.1, {{make_pair_key(0, 1), 2.0}}, 0),
                                pop_frame(50, -0.2, {{make_pair_key(2, 3), 1.0}, {make_pair_key(0, 1), 0.5}}, 1)};
  const BurstinessSeries series(pops);
  CHECK(series.tracked_pairs() == 2);
  const ScoreMatrix b0 = series.frame(0);
  CHECK(b0.deviations.size() == 2);
  // Pairs never stored share the baseline pattern (-0.1, -0.2).
  CHECK(b0.baseline == doctest::Approx(1.0));
  CHECK(b0.value(10, 20) == b0.baseline);
}

TEST_CASE("relevance examples") {
  const auto p = pop_frame(3, -1.0, {{make_pair_key(0, 1), 2.0}}, 0);
  ScoreMatrix b = pop_frame(3, 0.5, {{make_pair_key(0, 1), 4.0}, {make_pair_key(1, 2), -3.0}}, 0);
  b.kind = ScoreKind::kBurstiness;

  const auto only_p = relevance(p, b, {1.0, 0.0});
  for (TermId i = 0; i < 3; ++i) {
    for (TermId j = i + 1; j < 3; ++j) CHECK(only_p.value(i, j) == p.value(i, j));
  }
  const auto half = relevance(p, b, {0.5, 0.5});
  CHECK(half.value(0, 1) == 3.0);
  CHECK(half.value(1, 2) == doctest::Approx(0.5 * -1.0 + 0.5 * -3.0));
  CHECK(half.baseline == doctest::Approx(-0.25));
  CHECK(half.deviations.size() == 2);

  CHECK_THROWS_AS(relevance(p, b, {0.0, 0.0}), UsageError);
  CHECK_THROWS_AS(relevance(p, b, {-1.0, 2.0}), UsageError);
  ScoreMatrix other = b;
  other.n_terms = 4;
  CHECK_THROWS_AS(relevance(p, other, {0.5, 0.5}), DataError);
}

TEST_CASE("relevance is linear in the weights") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracle::random_instance(rng, 15, 4, 60);
    const auto vocab = oracle::numbered_vocab(inst.n);
    std::vector<ScoreMatrix> pops;
    for (std::size_t t = 0; t < inst.frames.size(); ++t) {
      pops.push_back(popularity(count_cooccurrence(oracle::as_tokenized(inst.frames[t], vocab), vocab, t)));
    }
    const auto bursts = burstiness(pops);
    for (std::size_t t = 0; t < pops.size(); ++t) {
      const auto a = oracle::densify(relevance(pops[t], bursts[t], {0.3, 0.9}));
      const auto b = oracle::densify(relevance(pops[t], bursts[t], {1.2, 0.4}));
      const auto sum = oracle::densify(relevance(pops[t], bursts[t], {1.5, 1.3}));
      for (std::size_t k = 0; k < a.v.size(); ++k) CHECK(std::abs(a.v[k] + b.v[k] - sum.v[k]) < 1e-12);
    }
  }
}

TEST_CASE("threshold_adjacency examples") {
  SUBCASE("rank rule for 200 distinct values keeps 2") {
    CHECK(threshold_edge_budget(200, 99.0) == 2);
    CHECK(threshold_edge_budget(200, 0.0) == 200);
  }
  SUBCASE("distinct values agree with the sort oracle") {
    for (std::size_t n : {20u, 21u, 64u}) {
      std::vector<double> vals;
      const std::size_t pairs = n * (n - 1) / 2;
      std::mt19937_64 rng(n);
      std::uniform_real_distribution<double> u(-5.0, 5.0);
      for (std::size_t k = 0; k < pairs; ++k) vals.push_back(u(rng));
      const ScoreMatrix rel = rel_matrix(n, 0.0, vals);
      const auto adj = threshold_adjacency(rel, 99.0);
      const auto want = oracle::threshold(oracle::densify(rel), 99.0);
      CHECK(std::set<PairKey>(adj.edges.begin(), adj.edges.end()) == want);
      CHECK(adj.edges.size() == threshold_edge_budget(pairs, 99.0));
    }
  }
  SUBCASE("all values equal keeps every pair with a warning") {
    RunLog log;
    const auto adj = threshold_adjacency(rel_matrix(10, 1.5, {}), 99.0, &log);
    CHECK(adj.edges.size() == 45);
    CHECK(log.warning_count() >= 1);
  }
  SUBCASE("q = 0 keeps all pairs") {
    const auto adj = threshold_adjacency(rel_matrix(8, -2.0, {0.5, -7.0, 3.0}), 0.0);
    CHECK(adj.edges.size() == 28);
  }
  SUBCASE("percentile out of range") {
    CHECK_THROWS_AS(threshold_adjacency(rel_matrix(4, 0.0, {}), 100.0), UsageError);
    CHECK_THROWS_AS(threshold_adjacency(rel_matrix(4, 0.0, {}), -1.0), UsageError);
  }
}

TEST_CASE("threshold cutoff handles the baseline block analytically") {
  // 45 pairs: 40 at baseline 0, explicit values below and above it.
  const ScoreMatrix rel = rel_matrix(10, 0.0, {-3.0, -2.0, 5.0, 6.0, 7.0});
  CHECK(relevance_threshold(rel, 0.0) == -3.0);
  CHECK(relevance_threshold(rel, 4.0) == -2.0);  // floor(1.8) = 1 below
  CHECK(relevance_threshold(rel, 50.0) == 0.0);
  CHECK(relevance_threshold(rel, 95.0) == 5.0);  // floor(42.75) = 42 below: -3, -2 and 40 zeros
  const auto adj = threshold_adjacency(rel, 95.0);
  CHECK(adj.edges.size() == 3);
}

TEST_CASE("dense oracle equivalence on random instances") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto c = oracle::compare_with_dense(inst, 0.5, 0.5, 99.0);
    CHECK(c.counts_equal);
    CHECK(c.pop_diff < 1e-12);
    CHECK(c.burst_diff < 1e-12);
    CHECK(c.rel_diff < 1e-12);
    CHECK(c.edges_equal);
  }
}

TEST_CASE("edge count bound") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = oracle::random_instance(rng, 30, 3, 100);
    const auto vocab = oracle::numbered_vocab(inst.n);
    std::vector<ScoreMatrix> pops;
    for (std::size_t t = 0; t < inst.frames.size(); ++t) {
      pops.push_back(popularity(count_cooccurrence(oracle::as_tokenized(inst.frames[t], vocab), vocab, t)));
    }
    const auto bursts = burstiness(pops);
    for (std::size_t t = 0; t < pops.size(); ++t) {
      const auto rel = relevance(pops[t], bursts[t], {0.5, 0.5});
      const auto adj = threshold_adjacency(rel, 99.0);
      const auto dense = oracle::densify(rel);
      std::size_t ties = 0;
      for (double v : dense.v) ties += v == adj.threshold_value;
      const double bound = std::ceil((1.0 - 0.99) * static_cast<double>(rel.candidate_pairs()));
      CHECK(static_cast<double>(adj.edges.size()) <= bound + static_cast<double>(ties));
      for (PairKey e : adj.edges) CHECK(rel.value(pair_first(e), pair_second(e)) >= adj.threshold_value);
    }
  }
}

TEST_CASE("score text format round trip") {
  ScoreMatrix m = pop_frame(6, -0.123456789012345, {{make_pair_key(0, 5), 1.0 / 3.0}, {make_pair_key(2, 3), -2e-300}}, 2);
  m.kind = ScoreKind::kBurstiness;
  const std::string text = score_to_text(m);
  CHECK(text.rfind("score burstiness 2 6 ", 0) == 0);
  CHECK(score_from_text(text) == m);
  CHECK(score_kind_from_string("relevance") == ScoreKind::kRelevance);
  CHECK_THROWS_AS(score_from_text("score odd 0 2 0 0\n"), DataError);
}
