#ifndef VIRAL_SYNTH_HPP
#define VIRAL_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "viral/classify.hpp"
#include "viral/ingest.hpp"

namespace viral {

// Portable draws on top of mt19937_64; the standard distributions are
// implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // [lo, hi]
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  // Box-Muller
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Samples indices 0..n-1 with weight proportional to 1 / (i + 1)^exponent.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

struct SynthConfig {
  std::size_t docs = 50000;
  std::size_t topics = 10;
  std::int64_t span_days = 30;
  std::uint64_t seed = 1;
  std::size_t accounts = 400;
  double mdi_fraction = 0.3;
  std::size_t background_terms = 400;
  double zipf_exponent = 1.0;
  // Share of documents that carry a planted topic.
  double topic_doc_fraction = 0.02;
  Timestamp start = 1501545600;  // 2017-08-01T00:00:00Z
};

struct PlantedTopic {
  std::size_t id = 0;
  std::vector<std::string> terms;  // normalized form, as they appear in the vocabulary
  std::int64_t first_day = 0;      // burst window, days since start, inclusive
  std::int64_t last_day = 0;
  InfluenceClass user_class = InfluenceClass::kIDI;
};

struct SynthAccount {
  std::string id;
  InfluenceClass profile = InfluenceClass::kIDI;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<Document> documents;  // sorted by (created_at, id)
  std::vector<PlantedTopic> topics;
  std::vector<SynthAccount> accounts;
};

// Background posts draw terms from a power law over a fixed vocabulary.
// Each planted topic owns 5-8 dedicated terms that are co-injected into
// posts concentrated in 1-3 consecutive days and authored by accounts of one
// profile; topics of the same profile get disjoint windows when the span
// allows. MDI accounts post long, link-heavy text with few replies; IDI
// accounts post short, reply-heavy text. Every day of the span receives
// background posts once docs >= span_days.
SynthCorpus generate_corpus(const SynthConfig& config);

// {"seed", "start", "span_days", "topics": [{"id","terms","first_day",
//  "last_day","user_class"}], "accounts": [{"account_id","profile","label"}]}
std::string ground_truth_to_json(const SynthCorpus& corpus);

struct GroundTruth {
  Timestamp start = 0;
  std::int64_t span_days = 0;
  std::vector<PlantedTopic> topics;
  std::vector<SynthAccount> accounts;
};
GroundTruth ground_truth_from_json(std::string_view text);

// Every account with its profile as a manual label.
std::vector<LabeledAccount> truth_labels(const SynthCorpus& corpus);

// A manually labeled subset (true profiles) for the snowball loop: the first
// `count` accounts of a seeded shuffle, adjusted so both profiles appear.
std::vector<LabeledAccount> synth_seeds(const SynthCorpus& corpus, std::size_t count);

}  // namespace viral

#endif  // VIRAL_SYNTH_HPP
