#include "viral/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <unordered_map>

#include "viral/error.hpp"
#include "viral/util.hpp"

namespace viral {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

void check_frames(const AdjacencyGraph& adj, const ScoreMatrix& pop, const ScoreMatrix& burst,
                  const ScoreMatrix& rel) {
  for (const ScoreMatrix* m : {&pop, &burst, &rel}) {
    if (m->frame_id != adj.frame_id || m->n_terms != adj.n_terms) {
      throw DataError("cluster metrics: score matrices do not match the adjacency frame");
    }
  }
}

struct EdgeSums {
  std::size_t edges = 0;
  double pop = 0.0;
  double burst = 0.0;
  double rel = 0.0;
};

void add_edge(EdgeSums& s, PairKey key, const ScoreMatrix& pop, const ScoreMatrix& burst,
              const ScoreMatrix& rel) {
  const TermId i = pair_first(key), j = pair_second(key);
  ++s.edges;
  s.pop += pop.value(i, j);
  s.burst += burst.value(i, j);
  s.rel += rel.value(i, j);
}

TopicCluster make_cluster(std::vector<TermId> terms, const EdgeSums& s, std::size_t frame_id) {
  TopicCluster c;
  c.frame_id = frame_id;
  c.term_ids = std::move(terms);
  c.size = c.term_ids.size();
  c.edge_count = s.edges;
  if (s.edges > 0) {
    const double n = static_cast<double>(s.edges);
    c.popularity = s.pop / n;
    c.burstiness = s.burst / n;
    c.score = s.rel / n;
  }
  const double size = static_cast<double>(c.size);
  c.rel_popularity = c.popularity / size;
  c.rel_burstiness = c.burstiness / size;
  c.rel_score = c.score / size;
  return c;
}

}  // namespace

std::vector<std::vector<TermId>> connected_components(const AdjacencyGraph& adj) {
  DisjointSets sets(adj.n_terms);
  std::vector<bool> touched(adj.n_terms, false);
  for (PairKey e : adj.edges) {
    const TermId i = pair_first(e), j = pair_second(e);
    if (i >= adj.n_terms || j >= adj.n_terms) throw DataError("adjacency edge out of range");
    sets.unite(i, j);
    touched[i] = touched[j] = true;
  }
  std::unordered_map<std::size_t, std::size_t> slot;  // root -> output index
  std::vector<std::vector<TermId>> out;
  for (TermId t = 0; t < adj.n_terms; ++t) {
    if (!touched[t]) continue;
    auto [it, inserted] = slot.emplace(sets.find(t), out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(t);
  }
  // Visiting terms in ascending order already yields ascending members and
  // components ordered by their smallest member.
  return out;
}

TopicCluster cluster_metrics(std::span<const TermId> component, const AdjacencyGraph& adj,
                             const ScoreMatrix& pop, const ScoreMatrix& burst, const ScoreMatrix& rel) {
  if (component.size() < 2) throw DataError("a cluster needs at least 2 terms");
  check_frames(adj, pop, burst, rel);
  std::vector<TermId> terms(component.begin(), component.end());
  std::sort(terms.begin(), terms.end());
  auto member = [&](TermId t) { return std::binary_search(terms.begin(), terms.end(), t); };
  EdgeSums sums;
  for (PairKey e : adj.edges) {
    if (member(pair_first(e)) && member(pair_second(e))) add_edge(sums, e, pop, burst, rel);
  }
  return make_cluster(std::move(terms), sums, adj.frame_id);
}

std::vector<TopicCluster> extract_clusters(const AdjacencyGraph& adj, const ScoreMatrix& pop,
                                           const ScoreMatrix& burst, const ScoreMatrix& rel) {
  check_frames(adj, pop, burst, rel);
  auto components = connected_components(adj);
  std::vector<std::size_t> owner(adj.n_terms, 0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (TermId t : components[c]) owner[t] = c;
  }
  std::vector<EdgeSums> sums(components.size());
  for (PairKey e : adj.edges) add_edge(sums[owner[pair_first(e)]], e, pop, burst, rel);
  std::vector<TopicCluster> out;
  out.reserve(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    out.push_back(make_cluster(std::move(components[c]), sums[c], adj.frame_id));
  }
  return out;
}

std::vector<TopicCluster> top_clusters(std::vector<TopicCluster> clusters, std::size_t k) {
  if (k < 1) throw UsageError("top-k must be at least 1");
  std::stable_sort(clusters.begin(), clusters.end(), [](const TopicCluster& a, const TopicCluster& b) {
    if (a.rel_score != b.rel_score) return a.rel_score > b.rel_score;
    if (a.size != b.size) return a.size > b.size;
    const TermId ma = a.term_ids.empty() ? 0 : a.term_ids.front();
    const TermId mb = b.term_ids.empty() ? 0 : b.term_ids.front();
    if (ma != mb) return ma < mb;
    return a.frame_id < b.frame_id;
  });
  if (clusters.size() > k) clusters.resize(k);
  return clusters;
}

namespace {

struct Row {
  const ClusterGroup* group;
  std::size_t rank;  // 1-based
  const TopicCluster* cluster;
};

std::vector<Row> ordered_rows(std::span<const ClusterGroup> groups) {
  std::vector<Row> rows;
  for (const auto& g : groups) {
    for (std::size_t r = 0; r < g.ranked.size(); ++r) rows.push_back({&g, r + 1, &g.ranked[r]});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.group->granularity_days != b.group->granularity_days) {
      return a.group->granularity_days < b.group->granularity_days;
    }
    if (a.group->user_class != b.group->user_class) {
      return static_cast<int>(a.group->user_class) < static_cast<int>(b.group->user_class);
    }
    return a.rank < b.rank;
  });
  return rows;
}

double log_shift(const std::vector<Row>& rows, double TopicCluster::*field) {
  if (rows.empty()) return 0.0;
  double lo = rows.front().cluster->*field;
  for (const auto& r : rows) lo = std::min(lo, r.cluster->*field);
  return lo <= 0.0 ? 1.0 - lo : 0.0;
}

}  // namespace

ReportFiles render_report(std::span<const ClusterGroup> groups, const Vocabulary& vocab) {
  const auto rows = ordered_rows(groups);
  ReportFiles files;
  files.clusters_csv =
      "granularity_days,frame_id,user_class,cluster_rank,size,popularity,burstiness,score,"
      "rel_popularity,rel_burstiness,rel_score,terms\n";
  for (const auto& r : rows) {
    const TopicCluster& c = *r.cluster;
    std::string terms;
    for (TermId t : c.term_ids) {
      if (!terms.empty()) terms += ';';
      terms += vocab.term(t);
    }
    files.clusters_csv += std::to_string(r.group->granularity_days) + "," + std::to_string(c.frame_id) + "," +
                          to_string(r.group->user_class) + "," + std::to_string(r.rank) + "," +
                          std::to_string(c.size) + "," + format_double(c.popularity) + "," +
                          format_double(c.burstiness) + "," + format_double(c.score) + "," +
                          format_double(c.rel_popularity) + "," + format_double(c.rel_burstiness) + "," +
                          format_double(c.rel_score) + "," + terms + "\n";
  }

  const double shift_pop = log_shift(rows, &TopicCluster::rel_popularity);
  const double shift_burst = log_shift(rows, &TopicCluster::rel_burstiness);
  files.scatter_csv = "# shift_rel_popularity=" + format_double(shift_pop) +
                      ",shift_rel_burstiness=" + format_double(shift_burst) + "\n";
  files.scatter_csv += "user_class,granularity,log_rel_popularity,log_rel_burstiness,size\n";
  for (const auto& r : rows) {
    const TopicCluster& c = *r.cluster;
    files.scatter_csv += std::string(to_string(r.group->user_class)) + "," +
                         std::to_string(r.group->granularity_days) + "," +
                         format_double(std::log10(c.rel_popularity + shift_pop)) + "," +
                         format_double(std::log10(c.rel_burstiness + shift_burst)) + "," +
                         std::to_string(c.size) + "\n";
  }
  return files;
}

void emit_report(std::span<const ClusterGroup> groups, const Vocabulary& vocab, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create output directory");
  const ReportFiles files = render_report(groups, vocab);
  write_file((std::filesystem::path(out_dir) / "clusters.csv").string(), files.clusters_csv);
  write_file((std::filesystem::path(out_dir) / "scatter.csv").string(), files.scatter_csv);
}

}  // namespace viral
