#ifndef VIRAL_INGEST_HPP
#define VIRAL_INGEST_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viral/run_log.hpp"
#include "viral/text.hpp"
#include "viral/timestamp.hpp"

namespace viral {

struct Document {
  std::string id;
  std::string author_id;
  Timestamp created_at = 0;
  std::string text;
  std::optional<std::string> retweet_of_author;
  std::optional<std::string> reply_to_author;
  std::int64_t url_count = 0;

  bool operator==(const Document&) const = default;
};

struct TokenizedDocument {
  std::string doc_id;
  std::string author_id;
  Timestamp created_at = 0;
  std::vector<std::string> tokens;
};

struct AccountStats {
  std::string account_id;
  std::size_t tweet_count = 0;
  std::size_t retweet_count = 0;
  std::size_t reply_count = 0;
  std::int64_t link_count = 0;
  double median_length = 0.0;

  bool operator==(const AccountStats&) const = default;
};

struct LineWarning {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ArchiveReadResult {
  std::vector<Document> documents;
  std::vector<LineWarning> warnings;
};

// Reads a JSONL archive. Malformed lines and duplicate ids are skipped with a
// per-line warning (also mirrored into `log` under stage "ingest"); an
// unreadable file throws IoError.
ArchiveReadResult parse_archive(const std::string& path, RunLog* log = nullptr);

// Same as parse_archive but over in-memory content.
ArchiveReadResult parse_archive_text(std::string_view content, RunLog* log = nullptr);

// Decodes one archive line; throws DataError describing the problem.
Document parse_document_line(std::string_view line);

// Inverse of parse_document_line. Keys are written in a fixed order.
std::string document_to_json_line(const Document& doc);
void write_archive(const std::string& path, const std::vector<Document>& docs);

struct TokenizeResult {
  std::vector<TokenizedDocument> documents;
  std::size_t dropped = 0;
};

// Documents whose normalized token list is empty are dropped.
TokenizeResult tokenize_documents(const std::vector<Document>& docs,
                                  const TextNormalizer& normalizer = TextNormalizer());

// Per-account counters that can be built on shards and merged; the median is
// computed from the merged length multiset so merge order does not matter.
class AccountStatsAccumulator {
 public:
  void add(const Document& doc);
  void merge(const AccountStatsAccumulator& other);
  std::map<std::string, AccountStats> finish() const;

 private:
  struct Partial {
    std::size_t tweets = 0;
    std::size_t retweets = 0;
    std::size_t replies = 0;
    std::int64_t links = 0;
    std::vector<std::size_t> lengths;
  };
  std::map<std::string, Partial> partial_;
};

std::map<std::string, AccountStats> aggregate_account_stats(const std::vector<Document>& docs);

// Median of a multiset; the mean of the two middle values for even counts,
// 0 for an empty input.
double median(std::vector<std::size_t> values);

}  // namespace viral

#endif  // VIRAL_INGEST_HPP
