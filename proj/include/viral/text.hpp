#ifndef VIRAL_TEXT_HPP
#define VIRAL_TEXT_HPP

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace viral {

using StopwordSet = std::unordered_set<std::string>;

// One lowercase word per line; blank lines and lines starting with '#' are
// ignored. Surrounding whitespace is trimmed.
StopwordSet parse_stopwords(std::string_view content);
StopwordSet load_stopwords(const std::string& path);

// The list bundled with the library (data/stopwords.txt at build time).
const StopwordSet& default_stopwords();

// Turns raw post text into normalized terms:
//  - ASCII is lowercased; other bytes act as separators
//  - URLs (http://, https://, www., t.co/) and @-mentions are dropped
//  - '#tag' becomes the single token "#tag", unstemmed
//  - other alphanumeric runs are words; apostrophes inside a word are removed
//  - stopwords are removed, alphabetic words are Porter-stemmed (repeated to
//    a fixed point) and stems that are stopwords or shorter than two
//    characters are removed
// Tokens are returned as a lexicographically sorted multiset, which makes the
// output independent of word order and maps normalized text onto itself.
class TextNormalizer {
 public:
  TextNormalizer();
  explicit TextNormalizer(StopwordSet stopwords);

  std::vector<std::string> normalize(std::string_view raw) const;

  bool is_stopword(const std::string& w) const { return stopwords_.count(w) != 0; }

 private:
  void emit_word(std::string word, std::vector<std::string>& out) const;

  StopwordSet stopwords_;
};

// Stem repeatedly until the word no longer changes.
std::string stem_to_fixed_point(std::string_view word);

// Number of Unicode code points in a UTF-8 string (continuation bytes are not
// counted).
std::size_t utf8_length(std::string_view s);

}  // namespace viral

#endif  // VIRAL_TEXT_HPP
