#ifndef VIRAL_GRAPH_HPP
#define VIRAL_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "viral/ingest.hpp"
#include "viral/run_log.hpp"
#include "viral/timestamp.hpp"

namespace viral {

using TermId = std::uint32_t;

// Candidate term pair (i, j) with i < j, packed so that key order equals
// (i, j) lexicographic order.
using PairKey = std::uint64_t;

inline constexpr PairKey make_pair_key(TermId i, TermId j) {
  return (static_cast<PairKey>(i) << 32) | static_cast<PairKey>(j);
}
inline constexpr TermId pair_first(PairKey k) { return static_cast<TermId>(k >> 32); }
inline constexpr TermId pair_second(PairKey k) { return static_cast<TermId>(k & 0xffffffffULL); }

// N(N-1)/2
inline constexpr std::uint64_t candidate_pair_count(std::size_t n_terms) {
  return n_terms < 2 ? 0 : static_cast<std::uint64_t>(n_terms) * (n_terms - 1) / 2;
}

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(TermId id) const { return terms_.at(id); }
  // -1 when absent
  std::int64_t find(const std::string& term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

inline constexpr std::size_t kDefaultVocabularySize = 5000;

// Keeps the max_terms tokens with the highest total occurrence count
// (multiplicity included); ties broken by ascending term. Terms are stored in
// that rank order.
Vocabulary build_vocabulary(std::span<const TokenizedDocument> docs, std::size_t max_terms);

struct FrameIndex {
  std::int64_t granularity_days = 1;
  Timestamp origin = 0;
  // frames[t] holds positions into the partitioned document sequence.
  std::vector<std::vector<std::size_t>> frames;

  std::size_t frame_count() const { return frames.size(); }
  Timestamp frame_start(std::size_t t) const {
    return origin + static_cast<Timestamp>(t) * granularity_days * kSecondsPerDay;
  }
};

// Midnight UTC of the earliest document's day; 0 for an empty input.
Timestamp default_frame_origin(std::span<const TokenizedDocument> docs);

// Half-open windows [origin + t*g, origin + (t+1)*g). T is one past the last
// non-empty frame; empty frames in between are kept.
FrameIndex partition_frames(std::span<const TokenizedDocument> docs, std::int64_t granularity_days,
                            Timestamp origin);

struct PairCount {
  PairKey key;
  std::uint32_t count;

  bool operator==(const PairCount&) const = default;
};

struct CoocMatrix {
  std::size_t frame_id = 0;
  std::size_t n_terms = 0;
  std::size_t doc_count = 0;
  std::vector<PairCount> entries;  // sorted by key, counts >= 1

  std::uint32_t count(TermId i, TermId j) const;
  std::uint64_t total() const;
  bool operator==(const CoocMatrix&) const = default;
};

inline constexpr std::size_t kDefaultPairWarnTerms = 200;

// Each unordered pair of distinct in-vocabulary terms in a document adds 1,
// however often the terms repeat. Documents with more than `warn_terms`
// distinct in-vocabulary terms are counted in full but reported.
CoocMatrix count_cooccurrence(std::span<const TokenizedDocument> frame_docs, const Vocabulary& vocab,
                              std::size_t frame_id = 0, RunLog* log = nullptr,
                              std::size_t warn_terms = kDefaultPairWarnTerms);

// Counting over a subset of documents referenced by position.
CoocMatrix count_cooccurrence(std::span<const TokenizedDocument> docs, std::span<const std::size_t> members,
                              const Vocabulary& vocab, std::size_t frame_id = 0, RunLog* log = nullptr,
                              std::size_t warn_terms = kDefaultPairWarnTerms);

// Text triplet format:
//   cooc <frame_id> <n_terms> <doc_count> <nnz>
//   <i> <j> <count>      (nnz rows, sorted by (i, j))
std::string cooc_to_text(const CoocMatrix& m);
CoocMatrix cooc_from_text(std::string_view text);

}  // namespace viral

#endif  // VIRAL_GRAPH_HPP
