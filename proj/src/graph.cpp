#include "viral/graph.hpp"

#include <algorithm>
#include <charconv>

#include "viral/error.hpp"
#include "viral/util.hpp"

namespace viral {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
      throw DataError("duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

std::int64_t Vocabulary::find(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocabulary(std::span<const TokenizedDocument> docs, std::size_t max_terms) {
  if (max_terms < 2) throw UsageError("vocabulary size must be at least 2");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& d : docs) {
    for (const auto& t : d.tokens) ++freq[t];
  }
  if (freq.size() < 2) throw DataError("corpus has fewer than 2 distinct terms");
  std::vector<std::pair<const std::string*, std::uint64_t>> ranked;
  ranked.reserve(freq.size());
  for (const auto& [term, n] : freq) ranked.emplace_back(&term, n);
  auto by_rank = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return *a.first < *b.first;
  };
  if (ranked.size() > max_terms) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(max_terms), ranked.end(),
                      by_rank);
    ranked.resize(max_terms);
  } else {
    std::sort(ranked.begin(), ranked.end(), by_rank);
  }
  std::vector<std::string> terms;
  terms.reserve(ranked.size());
  for (const auto& r : ranked) terms.push_back(*r.first);
  return Vocabulary(std::move(terms));
}

Timestamp default_frame_origin(std::span<const TokenizedDocument> docs) {
  if (docs.empty()) return 0;
  Timestamp earliest = docs.front().created_at;
  for (const auto& d : docs) earliest = std::min(earliest, d.created_at);
  return floor_to_day(earliest);
}

FrameIndex partition_frames(std::span<const TokenizedDocument> docs, std::int64_t granularity_days,
                            Timestamp origin) {
  if (granularity_days < 1) throw UsageError("granularity must be at least 1 day");
  FrameIndex idx;
  idx.granularity_days = granularity_days;
  idx.origin = origin;
  const Timestamp width = granularity_days * kSecondsPerDay;
  for (std::size_t pos = 0; pos < docs.size(); ++pos) {
    const auto& d = docs[pos];
    if (d.created_at < origin) throw DataError("document '" + d.doc_id + "' precedes the frame origin");
    const auto t = static_cast<std::size_t>((d.created_at - origin) / width);
    if (t >= idx.frames.size()) idx.frames.resize(t + 1);
    idx.frames[t].push_back(pos);
  }
  return idx;
}

std::uint32_t CoocMatrix::count(TermId i, TermId j) const {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  const PairKey key = make_pair_key(i, j);
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const PairCount& e, PairKey k) { return e.key < k; });
  return (it != entries.end() && it->key == key) ? it->count : 0;
}

std::uint64_t CoocMatrix::total() const {
  std::uint64_t s = 0;
  for (const auto& e : entries) s += e.count;
  return s;
}

namespace {

CoocMatrix count_pairs(std::span<const TokenizedDocument> docs, const std::size_t* members, std::size_t n_members,
                       const Vocabulary& vocab, std::size_t frame_id, RunLog* log, std::size_t warn_terms) {
  CoocMatrix m;
  m.frame_id = frame_id;
  m.n_terms = vocab.size();
  m.doc_count = n_members;

  std::vector<PairKey> keys;
  std::vector<TermId> ids;
  for (std::size_t n = 0; n < n_members; ++n) {
    const auto& doc = members ? docs[members[n]] : docs[n];
    ids.clear();
    for (const auto& t : doc.tokens) {
      const auto id = vocab.find(t);
      if (id >= 0) ids.push_back(static_cast<TermId>(id));
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() > warn_terms) {
      log_warn(log, "graph",
               "document '" + doc.doc_id + "' has " + std::to_string(ids.size()) +
                   " distinct in-vocabulary terms (all pairs counted)");
    }
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) keys.push_back(make_pair_key(ids[a], ids[b]));
    }
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    m.entries.push_back({keys[i], static_cast<std::uint32_t>(j - i)});
    i = j;
  }
  return m;
}

}  // namespace

CoocMatrix count_cooccurrence(std::span<const TokenizedDocument> frame_docs, const Vocabulary& vocab,
                              std::size_t frame_id, RunLog* log, std::size_t warn_terms) {
  return count_pairs(frame_docs, nullptr, frame_docs.size(), vocab, frame_id, log, warn_terms);
}

CoocMatrix count_cooccurrence(std::span<const TokenizedDocument> docs, std::span<const std::size_t> members,
                              const Vocabulary& vocab, std::size_t frame_id, RunLog* log,
                              std::size_t warn_terms) {
  for (std::size_t m : members) {
    if (m >= docs.size()) throw DataError("frame member index out of range");
  }
  return count_pairs(docs, members.data(), members.size(), vocab, frame_id, log, warn_terms);
}

std::string cooc_to_text(const CoocMatrix& m) {
  std::string out = "cooc " + std::to_string(m.frame_id) + " " + std::to_string(m.n_terms) + " " +
                    std::to_string(m.doc_count) + " " + std::to_string(m.entries.size()) + "\n";
  for (const auto& e : m.entries) {
    out += std::to_string(pair_first(e.key));
    out += ' ';
    out += std::to_string(pair_second(e.key));
    out += ' ';
    out += std::to_string(e.count);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_uint(std::string_view s, const char* what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split(line, ' ')) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

}  // namespace

CoocMatrix cooc_from_text(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty()) throw DataError("empty cooc file");
  auto header = fields_of(lines[0]);
  if (header.size() != 5 || header[0] != "cooc") throw DataError("bad cooc header");
  CoocMatrix m;
  m.frame_id = parse_uint<std::size_t>(header[1], "frame_id");
  m.n_terms = parse_uint<std::size_t>(header[2], "n_terms");
  m.doc_count = parse_uint<std::size_t>(header[3], "doc_count");
  const auto nnz = parse_uint<std::size_t>(header[4], "nnz");
  if (lines.size() < nnz + 1) throw DataError("cooc file truncated");
  m.entries.reserve(nnz);
  for (std::size_t r = 0; r < nnz; ++r) {
    auto f = fields_of(lines[r + 1]);
    if (f.size() != 3) throw DataError("bad cooc row " + std::to_string(r + 1));
    const auto i = parse_uint<TermId>(f[0], "term index");
    const auto j = parse_uint<TermId>(f[1], "term index");
    const auto c = parse_uint<std::uint32_t>(f[2], "count");
    if (!(i < j) || j >= m.n_terms || c == 0) throw DataError("invalid cooc entry at row " + std::to_string(r + 1));
    const PairKey key = make_pair_key(i, j);
    if (!m.entries.empty() && m.entries.back().key >= key) throw DataError("cooc rows must be sorted by (i, j)");
    m.entries.push_back({key, c});
  }
  return m;
}

}  // namespace viral
