#ifndef VIRAL_SCORE_HPP
#define VIRAL_SCORE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viral/graph.hpp"
#include "viral/run_log.hpp"

namespace viral {

enum class ScoreKind { kPopularity, kBurstiness, kRelevance };

const char* to_string(ScoreKind k);
ScoreKind score_kind_from_string(std::string_view s);

struct PairValue {
  PairKey key;
  double value;

  bool operator==(const PairValue&) const = default;
};

// A dense N x N upper-triangular matrix stored as a baseline plus explicit
// deviations: value(i, j) is the stored value when present, else baseline.
struct ScoreMatrix {
  std::size_t frame_id = 0;
  std::size_t n_terms = 0;
  double baseline = 0.0;
  std::vector<PairValue> deviations;  // sorted by key
  ScoreKind kind = ScoreKind::kPopularity;

  double value(TermId i, TermId j) const;
  std::uint64_t candidate_pairs() const { return candidate_pair_count(n_terms); }
  // Number of candidate pairs that hold the baseline.
  std::uint64_t baseline_pairs() const { return candidate_pairs() - deviations.size(); }
  bool operator==(const ScoreMatrix&) const = default;
};

struct ScoreWeights {
  double alpha = 0.5;
  double beta = 0.5;

  // alpha, beta >= 0 and alpha + beta > 0
  void validate() const;
};

// z-score of each pair's count against all N(N-1)/2 candidate pairs of the
// frame, absent pairs counted as zero. Moments come from exact integer sums.
// A frame without variation scores 0 everywhere.
ScoreMatrix popularity(const CoocMatrix& cooc);

// Per-pair mean and population stddev of popularity across frames, computed
// once for the pairs that are explicit in some frame and once for the
// all-baseline pattern shared by every other pair. Frames are materialized on
// demand. The popularity series must outlive this object.
class BurstinessSeries {
 public:
  explicit BurstinessSeries(std::span<const ScoreMatrix> pop_series);

  std::size_t frame_count() const { return series_.size(); }
  // Number of pairs explicit in at least one frame.
  std::size_t tracked_pairs() const { return stats_.size(); }
  ScoreMatrix frame(std::size_t t) const;

 private:
  struct PairStats {
    PairKey key;
    long double mean;
    long double stddev;  // 0 when the pair's series is constant
  };

  std::span<const ScoreMatrix> series_;
  std::vector<PairStats> stats_;
  long double baseline_mean_ = 0.0L;
  long double baseline_stddev_ = 0.0L;
};

// All frames of BurstinessSeries, materialized.
std::vector<ScoreMatrix> burstiness(std::span<const ScoreMatrix> pop_series);

// alpha * popularity + beta * burstiness, value-wise (baselines included).
ScoreMatrix relevance(const ScoreMatrix& pop, const ScoreMatrix& burst, const ScoreWeights& w);

struct AdjacencyGraph {
  std::size_t frame_id = 0;
  std::size_t n_terms = 0;
  std::vector<PairKey> edges;  // sorted
  double threshold_value = 0.0;
};

inline constexpr double kDefaultPercentile = 99.0;

// Number of values at or above the cutoff when all P values are distinct:
// P - floor(q/100 * P).
std::uint64_t threshold_edge_budget(std::uint64_t pairs, double percentile);

// Cutoff such that floor(q/100 * P) candidate values lie strictly below it
// in rank: the (floor(q/100 * P) + 1)-th smallest of all P values, baseline
// copies included. q must lie in [0, 100).
double relevance_threshold(const ScoreMatrix& rel, double percentile);

// Keeps every pair whose value is >= relevance_threshold. If the cutoff
// coincides with the baseline all baseline pairs become edges; that and any
// other ties beyond the nominal edge budget are reported through `log`.
AdjacencyGraph threshold_adjacency(const ScoreMatrix& rel, double percentile = kDefaultPercentile,
                                   RunLog* log = nullptr);

// Text triplet format:
//   score <kind> <frame_id> <n_terms> <baseline> <nnz>
//   <i> <j> <value>
std::string score_to_text(const ScoreMatrix& m);
ScoreMatrix score_from_text(std::string_view text);

}  // namespace viral

#endif  // VIRAL_SCORE_HPP
