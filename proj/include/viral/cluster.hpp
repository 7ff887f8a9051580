#ifndef VIRAL_CLUSTER_HPP
#define VIRAL_CLUSTER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viral/classify.hpp"
#include "viral/graph.hpp"
#include "viral/score.hpp"

namespace viral {

struct TopicCluster {
  std::size_t frame_id = 0;
  std::int64_t granularity_days = 1;
  InfluenceClass user_class = InfluenceClass::kIDI;
  std::vector<TermId> term_ids;  // ascending
  std::size_t size = 0;
  std::size_t edge_count = 0;
  // Means over the cluster's adjacency edges.
  double popularity = 0.0;
  double burstiness = 0.0;
  double score = 0.0;
  // Means divided by size.
  double rel_popularity = 0.0;
  double rel_burstiness = 0.0;
  double rel_score = 0.0;
};

// Maximal connected term sets of the adjacency graph. Terms without edges are
// left out; members are ascending and sets are ordered by smallest member.
std::vector<std::vector<TermId>> connected_components(const AdjacencyGraph& adj);

// Metrics for one component of `adj`, averaged over the adjacency edges with
// both endpoints in the component. Throws DataError for fewer than 2 terms or
// mismatched frames.
TopicCluster cluster_metrics(std::span<const TermId> component, const AdjacencyGraph& adj,
                             const ScoreMatrix& pop, const ScoreMatrix& burst, const ScoreMatrix& rel);

// Components of `adj` with metrics, in connected_components order. Each edge
// is visited once.
std::vector<TopicCluster> extract_clusters(const AdjacencyGraph& adj, const ScoreMatrix& pop,
                                           const ScoreMatrix& burst, const ScoreMatrix& rel);

inline constexpr std::size_t kDefaultTopK = 50;

// rel_score descending, then size descending, smallest term id, frame id.
std::vector<TopicCluster> top_clusters(std::vector<TopicCluster> clusters, std::size_t k = kDefaultTopK);

// Ranked clusters for one (user class, granularity) run.
struct ClusterGroup {
  InfluenceClass user_class = InfluenceClass::kIDI;
  std::int64_t granularity_days = 1;
  std::vector<TopicCluster> ranked;
};

struct ReportFiles {
  std::string clusters_csv;
  std::string scatter_csv;
};

// clusters.csv: granularity_days,frame_id,user_class,cluster_rank,size,popularity,
//   burstiness,score,rel_popularity,rel_burstiness,rel_score,terms
// scatter.csv: a "# shift_rel_popularity=..,shift_rel_burstiness=.." line, then
//   user_class,granularity,log_rel_popularity,log_rel_burstiness,size
// Rows are ordered by (granularity, user class, rank). A column whose minimum
// is <= 0 is shifted by (1 - min) before log10.
ReportFiles render_report(std::span<const ClusterGroup> groups, const Vocabulary& vocab);
void emit_report(std::span<const ClusterGroup> groups, const Vocabulary& vocab, const std::string& out_dir);

}  // namespace viral

#endif  // VIRAL_CLUSTER_HPP
