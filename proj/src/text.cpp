#include "viral/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "viral/error.hpp"
#include "viral/porter_stemmer.hpp"

namespace viral {

// Generated from data/stopwords.txt.
extern const char* const kBundledStopwords;

namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_handle_char(char c) { return is_ascii_alnum(c) || c == '_'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[i]) != prefix[i]) return false;
  }
  return true;
}

bool is_url(std::string_view chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.") || starts_with_ci(chunk, "t.co/");
}

// U+2019 RIGHT SINGLE QUOTATION MARK
bool is_curly_apostrophe(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99;
}

bool all_alpha(const std::string& w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

StopwordSet parse_stopwords(std::string_view content) {
  StopwordSet out;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') out.emplace(line);
    pos = end + 1;
  }
  return out;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot read stopword file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_stopwords(ss.str());
}

const StopwordSet& default_stopwords() {
  static const StopwordSet kSet = parse_stopwords(kBundledStopwords);
  return kSet;
}

std::string stem_to_fixed_point(std::string_view word) {
  std::string cur(word);
  // Each pass strictly shortens the word or leaves it unchanged, apart from
  // y->i rewrites; a handful of passes always suffices.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = porter_stem(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

TextNormalizer::TextNormalizer() : stopwords_(default_stopwords()) {}

TextNormalizer::TextNormalizer(StopwordSet stopwords) : stopwords_(std::move(stopwords)) {}

void TextNormalizer::emit_word(std::string word, std::vector<std::string>& out) const {
  if (word.empty() || is_stopword(word)) return;
  if (all_alpha(word)) {
    word = stem_to_fixed_point(word);
    if (is_stopword(word)) return;
  }
  if (word.size() < 2) return;
  out.push_back(std::move(word));
}

std::vector<std::string> TextNormalizer::normalize(std::string_view raw) const {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    // Advance to the next whitespace-delimited chunk.
    while (i < n && is_space(raw[i])) ++i;
    std::size_t end = i;
    while (end < n && !is_space(raw[end])) ++end;
    std::string_view chunk = raw.substr(i, end - i);
    i = end;

    // Leading punctuation such as "(" or "\"" does not hide a URL.
    std::size_t lead = 0;
    while (lead < chunk.size() && !is_ascii_alnum(chunk[lead]) && chunk[lead] != '@' &&
           chunk[lead] != '#') {
      ++lead;
    }
    if (is_url(chunk.substr(lead))) continue;

    std::size_t k = 0;
    std::string word;
    auto flush = [&] {
      emit_word(std::move(word), out);
      word.clear();
    };
    while (k < chunk.size()) {
      const char c = chunk[k];
      if (c == '@' && word.empty() && k + 1 < chunk.size() && is_handle_char(chunk[k + 1])) {
        ++k;
        while (k < chunk.size() && is_handle_char(chunk[k])) ++k;
        continue;
      }
      if (c == '#' && word.empty() && k + 1 < chunk.size() && is_handle_char(chunk[k + 1])) {
        std::string tag = "#";
        ++k;
        while (k < chunk.size() && is_handle_char(chunk[k])) tag.push_back(ascii_lower(chunk[k++]));
        out.push_back(std::move(tag));
        continue;
      }
      if (is_ascii_alnum(c)) {
        word.push_back(ascii_lower(c));
        ++k;
        continue;
      }
      if (!word.empty() && c == '\'' && k + 1 < chunk.size() && is_ascii_alnum(chunk[k + 1])) {
        ++k;
        continue;
      }
      if (!word.empty() && is_curly_apostrophe(chunk, k) && k + 3 < chunk.size() &&
          is_ascii_alnum(chunk[k + 3])) {
        k += 3;
        continue;
      }
      flush();
      ++k;
    }
    flush();
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace viral
