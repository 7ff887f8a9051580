#include "viral/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "viral/error.hpp"

namespace viral {
namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

Document parse_document_line(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("line is not a JSON object");

  Document doc;
  doc.id = require_string(obj, "id");
  if (doc.id.empty()) throw DataError("field 'id' is empty");
  doc.author_id = require_string(obj, "user_id");
  const std::string created = require_string(obj, "created_at");
  auto ts = parse_iso8601_utc(created);
  if (!ts) throw DataError("invalid timestamp '" + created + "'");
  doc.created_at = *ts;
  doc.text = require_string(obj, "text");
  doc.retweet_of_author = optional_string(obj, "retweet_of_user");
  doc.reply_to_author = optional_string(obj, "reply_to_user");
  if (auto it = obj.find("urls"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw DataError("field 'urls' must be an integer");
    doc.url_count = it->get<std::int64_t>();
    if (doc.url_count < 0) throw DataError("field 'urls' must be non-negative");
  }
  return doc;
}

std::string document_to_json_line(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["user_id"] = doc.author_id;
  j["created_at"] = format_iso8601_utc(doc.created_at);
  j["text"] = doc.text;
  j["retweet_of_user"] = doc.retweet_of_author ? json(*doc.retweet_of_author) : json(nullptr);
  j["reply_to_user"] = doc.reply_to_author ? json(*doc.reply_to_author) : json(nullptr);
  j["urls"] = doc.url_count;
  return j.dump();
}

void write_archive(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot write archive");
  for (const auto& d : docs) os << document_to_json_line(d) << '\n';
  if (!os) throw IoError(path, "failed writing archive");
}

ArchiveReadResult parse_archive_text(std::string_view content, RunLog* log) {
  ArchiveReadResult result;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      Document doc = parse_document_line(line);
      if (!seen.insert(doc.id).second) throw DataError("duplicate id '" + doc.id + "'");
      result.documents.push_back(std::move(doc));
    } catch (const DataError& e) {
      result.warnings.push_back({line_no, e.what()});
      log_warn(log, "ingest", "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return result;
}

ArchiveReadResult parse_archive(const std::string& path, RunLog* log) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot read archive");
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError(path, "failed reading archive");
  return parse_archive_text(ss.str(), log);
}

TokenizeResult tokenize_documents(const std::vector<Document>& docs, const TextNormalizer& normalizer) {
  TokenizeResult out;
  out.documents.reserve(docs.size());
  for (const auto& d : docs) {
    auto tokens = normalizer.normalize(d.text);
    if (tokens.empty()) {
      ++out.dropped;
      continue;
    }
    out.documents.push_back({d.id, d.author_id, d.created_at, std::move(tokens)});
  }
  return out;
}

double median(std::vector<std::size_t> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = static_cast<double>(values[mid]);
  if (values.size() % 2 == 1) return upper;
  const auto lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (static_cast<double>(lower) + upper) / 2.0;
}

void AccountStatsAccumulator::add(const Document& doc) {
  auto& p = partial_[doc.author_id];
  ++p.tweets;
  if (doc.retweet_of_author) ++p.retweets;
  if (doc.reply_to_author) ++p.replies;
  p.links += doc.url_count;
  p.lengths.push_back(utf8_length(doc.text));
}

void AccountStatsAccumulator::merge(const AccountStatsAccumulator& other) {
  for (const auto& [id, o] : other.partial_) {
    auto& p = partial_[id];
    p.tweets += o.tweets;
    p.retweets += o.retweets;
    p.replies += o.replies;
    p.links += o.links;
    p.lengths.insert(p.lengths.end(), o.lengths.begin(), o.lengths.end());
  }
}

std::map<std::string, AccountStats> AccountStatsAccumulator::finish() const {
  std::map<std::string, AccountStats> out;
  for (const auto& [id, p] : partial_) {
    AccountStats s;
    s.account_id = id;
    s.tweet_count = p.tweets;
    s.retweet_count = p.retweets;
    s.reply_count = p.replies;
    s.link_count = p.links;
    s.median_length = median(p.lengths);
    out.emplace(id, std::move(s));
  }
  return out;
}

std::map<std::string, AccountStats> aggregate_account_stats(const std::vector<Document>& docs) {
  AccountStatsAccumulator acc;
  for (const auto& d : docs) acc.add(d);
  return acc.finish();
}

}  // namespace viral
