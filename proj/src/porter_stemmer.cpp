#include "viral/porter_stemmer.hpp"

#include <array>
#include <utility>

namespace viral {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string_view w) : b_(w) {}

  std::string run() {
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5a();
    step5b();
    return b_;
  }

 private:
  // b_[0, len) is the stem under consideration.
  bool is_consonant(std::size_t i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !is_consonant(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_consonant(i)) ++i;
    while (i < len) {
      while (i < len && !is_consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && is_consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool ends_double_consonant(std::size_t len) const {
    return len >= 2 && b_[len - 1] == b_[len - 2] && is_consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, final consonant not w, x or y.
  bool ends_cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!is_consonant(len - 3) || is_consonant(len - 2) || !is_consonant(len - 1)) return false;
    const char c = b_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view suffix) const {
    return b_.size() >= suffix.size() &&
           std::string_view(b_).substr(b_.size() - suffix.size()) == suffix;
  }

  std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view repl) {
    b_.resize(stem_len(suffix));
    b_.append(repl);
  }

  using Rule = std::pair<std::string_view, std::string_view>;

  // Only the longest matching suffix is considered; it is replaced when the
  // remaining stem has m > min_m.
  template <std::size_t K>
  void apply_rules(const std::array<Rule, K>& rules, int min_m) {
    const Rule* best = nullptr;
    for (const auto& rule : rules) {
      if (ends_with(rule.first) && (best == nullptr || rule.first.size() > best->first.size())) {
        best = &rule;
      }
    }
    if (best != nullptr && measure(stem_len(best->first)) > min_m) {
      replace_suffix(best->first, best->second);
    }
  }

  void step1a() {
    if (ends_with("sses")) {
      replace_suffix("sses", "ss");
    } else if (ends_with("ies")) {
      replace_suffix("ies", "i");
    } else if (ends_with("ss")) {
      // unchanged
    } else if (ends_with("s")) {
      replace_suffix("s", "");
    }
  }

  void step1b() {
    if (ends_with("eed")) {
      if (measure(stem_len("eed")) > 0) replace_suffix("eed", "ee");
      return;
    }
    bool removed = false;
    if (ends_with("ed") && has_vowel(stem_len("ed"))) {
      replace_suffix("ed", "");
      removed = true;
    } else if (ends_with("ing") && has_vowel(stem_len("ing"))) {
      replace_suffix("ing", "");
      removed = true;
    }
    if (!removed) return;
    if (ends_with("at") || ends_with("bl") || ends_with("iz")) {
      b_.push_back('e');
    } else if (ends_double_consonant(b_.size())) {
      const char c = b_.back();
      if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
    } else if (measure(b_.size()) == 1 && ends_cvc(b_.size())) {
      b_.push_back('e');
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(stem_len("y"))) b_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> kRules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_rules(kRules, 0);
  }

  void step3() {
    static constexpr std::array<Rule, 7> kRules{{
        {"icate", "ic"},
        {"ative", ""},
        {"alize", "al"},
        {"iciti", "ic"},
        {"ical", "ic"},
        {"ful", ""},
        {"ness", ""},
    }};
    apply_rules(kRules, 0);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> kSuffixes{
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
    };
    // Longest match wins, so "ement" must shadow "ment" and "ent".
    std::string_view match;
    for (auto s : kSuffixes) {
      if (ends_with(s) && s.size() > match.size()) match = s;
    }
    if (match.empty()) return;
    const std::size_t len = stem_len(match);
    if (measure(len) <= 1) return;
    if (match == "ion") {
      if (len == 0 || (b_[len - 1] != 's' && b_[len - 1] != 't')) return;
    }
    b_.resize(len);
  }

  void step5a() {
    if (!ends_with("e")) return;
    const std::size_t len = stem_len("e");
    const int m = measure(len);
    if (m > 1 || (m == 1 && !ends_cvc(len))) b_.pop_back();
  }

  void step5b() {
    if (measure(b_.size()) > 1 && ends_double_consonant(b_.size()) && b_.back() == 'l') {
      b_.pop_back();
    }
  }

  std::string b_;
};

bool is_lower_ascii_word(std::string_view w) {
  if (w.empty()) return false;
  for (char c : w) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (!is_lower_ascii_word(word)) return std::string(word);
  return Stemmer(word).run();
}

}  // namespace viral
