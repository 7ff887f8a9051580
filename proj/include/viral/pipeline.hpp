#ifndef VIRAL_PIPELINE_HPP
#define VIRAL_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "viral/classify.hpp"
#include "viral/cluster.hpp"
#include "viral/graph.hpp"
#include "viral/run_log.hpp"
#include "viral/score.hpp"
#include "viral/synth.hpp"

namespace viral {

struct PipelineConfig {
  std::string input;
  std::string labels;  // detect: account labels; classify: seeds when `seeds` is empty
  std::string seeds;
  std::vector<std::int64_t> granularities{1, 3, 7, 21};
  std::size_t vocab_size = kDefaultVocabularySize;
  double alpha = 0.5;
  double beta = 0.5;
  double percentile = kDefaultPercentile;
  std::size_t top_k = kDefaultTopK;
  double threshold = 0.7;
  std::size_t batch = 170;
  std::size_t target = 1750;
  std::uint64_t seed = 1;
  std::string out = "out";

  double l2 = 1e-3;
  std::size_t max_iter = 10000;
  double tol = 1e-8;

  // synth
  std::size_t docs = 50000;
  std::size_t topics = 10;
  std::int64_t span_days = 30;
  std::size_t accounts = 400;

  // Throws UsageError naming the offending field.
  void validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

// Keys match the field names. Missing keys keep their defaults; unknown keys
// are rejected.
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(std::string_view text);
PipelineConfig read_config(const std::string& path);

struct ClassifyResult {
  SnowballResult snowball;
  std::string labels_path;
  std::string model_path;
};

// ingest -> account stats -> snowball labeling. Writes labels.csv,
// probabilities.csv and model.json into config.out.
ClassifyResult run_classify(const PipelineConfig& config, RunLog& log);

struct DetectResult {
  Vocabulary vocab;
  Timestamp origin = 0;
  std::vector<ClusterGroup> groups;  // (class, granularity) runs that had documents
  std::vector<std::size_t> frame_counts;  // parallel to groups
  std::string cache_dir;
  bool cache_hit = false;
};

// Per user class and granularity: frames -> co-occurrence -> popularity ->
// burstiness -> relevance -> adjacency -> clusters -> top_k. Writes
// clusters.csv and scatter.csv. Co-occurrence counts are cached under
// config.out/cache/<key>, keyed by the archive, the labels and the counting
// parameters, and reused when present.
DetectResult run_detect(const PipelineConfig& config, RunLog& log);

// Rescores the most recently cached counts with the current weights,
// percentile and top_k, and rewrites the report.
DetectResult run_report(const PipelineConfig& config, RunLog& log);

// Writes archive.jsonl, ground_truth.json, seeds.csv and labels_truth.csv.
SynthCorpus run_synth(const PipelineConfig& config, RunLog& log);

SynthConfig synth_config_from(const PipelineConfig& config);

// Counted frames for one (class, granularity) run.
struct FrameCounts {
  InfluenceClass user_class = InfluenceClass::kIDI;
  std::int64_t granularity_days = 1;
  std::vector<CoocMatrix> frames;
};

// Scores every frame of `counts` and returns its top clusters.
ClusterGroup score_and_cluster(const FrameCounts& counts, const ScoreWeights& weights, double percentile,
                               std::size_t top_k, RunLog* log = nullptr);

}  // namespace viral

#endif  // VIRAL_PIPELINE_HPP
