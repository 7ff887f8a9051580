#include "viral/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "viral/error.hpp"
#include "viral/text.hpp"

namespace viral {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
  std::uint64_t x;
  do {
    x = engine_();
  } while (limit != 0 && x >= limit);
  return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
}

double Rng::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
  if (n == 0) throw UsageError("ZipfSampler needs at least one outcome");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf_[i] = acc;
  }
  for (auto& c : cdf_) c /= acc;
}

std::size_t ZipfSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                   "s", "t", "v", "z", "br", "dr", "gr", "kl", "pl", "tr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
constexpr const char* kCodas[] = {"", "", "n", "r", "k", "m", "t", "x"};
constexpr const char* kFillers[] = {"the", "and", "of", "to", "in", "is", "for", "on", "with", "this",
                                    "that", "at", "by", "from", "about", "just", "very", "more", "our", "it"};
constexpr const char* kPunct[] = {"", "", "", ",", ".", "!", "?"};

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&arr)[N]) {
  return arr[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(N) - 1))];
}

// Pseudo-words that survive normalization unchanged.
class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string next() {
    while (true) {
      std::string w;
      const auto syllables = rng_.uniform_int(2, 3);
      for (std::int64_t s = 0; s < syllables; ++s) {
        w += pick(rng_, kOnsets);
        w += pick(rng_, kVowels);
      }
      w += pick(rng_, kCodas);
      if (used_.count(w)) continue;
      const auto norm = normalizer_.normalize(w);
      if (norm.size() != 1 || norm[0] != w) continue;
      used_.insert(w);
      return w;
    }
  }

 private:
  Rng& rng_;
  TextNormalizer normalizer_;
  std::unordered_set<std::string> used_;
};

struct Behavior {
  double url_rate;
  double reply_rate;
  double retweet_rate;
  std::int64_t filler_min;
  std::int64_t filler_max;
};

double jitter(Rng& rng, double base, double spread) {
  return std::clamp(base + spread * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
}

Behavior sample_behavior(Rng& rng, InfluenceClass profile) {
  if (profile == InfluenceClass::kMDI) {
    return {jitter(rng, 0.75, 0.2), jitter(rng, 0.06, 0.05), jitter(rng, 0.15, 0.1), 6, 14};
  }
  return {jitter(rng, 0.12, 0.1), jitter(rng, 0.45, 0.2), jitter(rng, 0.3, 0.15), 0, 4};
}

std::string short_link(Rng& rng) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string s = "https://t.co/";
  for (int i = 0; i < 8; ++i) s += kAlphabet[rng.uniform_int(0, 61)];
  return s;
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

int digits_for(std::size_t n) { return static_cast<int>(std::to_string(n == 0 ? 0 : n - 1).size()); }

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  if (cfg.docs < 1) throw UsageError("synth needs at least one document");
  if (cfg.span_days < 1) throw UsageError("synth span must be at least one day");
  if (cfg.accounts < 2) throw UsageError("synth needs at least two accounts");
  if (cfg.background_terms < 2) throw UsageError("synth needs at least two background terms");

  Rng rng(cfg.seed);
  SynthCorpus corpus;
  corpus.config = cfg;

  // Accounts: the first ceil(mdi_fraction * n) are MDI, at least one of each.
  const std::size_t n_mdi = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.mdi_fraction * static_cast<double>(cfg.accounts))), 1,
      cfg.accounts - 1);
  const int acct_digits = digits_for(cfg.accounts);
  std::vector<Behavior> behavior;
  std::vector<std::size_t> mdi_accounts, idi_accounts;
  for (std::size_t a = 0; a < cfg.accounts; ++a) {
    const InfluenceClass profile = a < n_mdi ? InfluenceClass::kMDI : InfluenceClass::kIDI;
    corpus.accounts.push_back({"acct" + zero_pad(a, acct_digits), profile});
    behavior.push_back(sample_behavior(rng, profile));
    (profile == InfluenceClass::kMDI ? mdi_accounts : idi_accounts).push_back(a);
  }
  // Retweet popularity follows a power law over a shuffled account order.
  std::vector<std::size_t> popularity_order(cfg.accounts);
  std::iota(popularity_order.begin(), popularity_order.end(), 0);
  for (std::size_t i = popularity_order.size(); i > 1; --i) {
    std::swap(popularity_order[i - 1], popularity_order[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
  }
  const ZipfSampler retweet_target(cfg.accounts, 1.0);

  WordFactory words(rng);
  std::vector<std::string> background;
  for (std::size_t i = 0; i < cfg.background_terms; ++i) background.push_back(words.next());
  const ZipfSampler background_sampler(background.size(), cfg.zipf_exponent);

  // Topics of one class get disjoint slots of the span (overlapping only when
  // the span is too short), in shuffled order.
  const std::size_t per_class[2] = {(cfg.topics + 1) / 2, cfg.topics / 2};
  std::vector<std::size_t> slot_order[2];
  for (int c = 0; c < 2; ++c) {
    slot_order[c].resize(per_class[c]);
    std::iota(slot_order[c].begin(), slot_order[c].end(), 0);
    for (std::size_t i = slot_order[c].size(); i > 1; --i) {
      std::swap(slot_order[c][i - 1], slot_order[c][static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
  }
  for (std::size_t k = 0; k < cfg.topics; ++k) {
    PlantedTopic t;
    t.id = k;
    const auto n_terms = rng.uniform_int(5, 8);
    for (std::int64_t i = 0; i < n_terms; ++i) t.terms.push_back(i == 0 ? "#" + words.next() : words.next());
    std::sort(t.terms.begin(), t.terms.end());
    const int c = static_cast<int>(k % 2);
    t.user_class = c == 0 ? InfluenceClass::kIDI : InfluenceClass::kMDI;
    const auto slots = static_cast<std::int64_t>(per_class[c]);
    const auto slot = static_cast<std::int64_t>(slot_order[c][k / 2]);
    std::int64_t lo = 0, hi = cfg.span_days;
    if (cfg.span_days >= slots) {
      lo = slot * cfg.span_days / slots;
      hi = (slot + 1) * cfg.span_days / slots;
    }
    const std::int64_t width = std::min<std::int64_t>(rng.uniform_int(1, 3), hi - lo);
    t.first_day = rng.uniform_int(lo, hi - width);
    t.last_day = t.first_day + width - 1;
    corpus.topics.push_back(std::move(t));
  }

  const std::size_t n_topic_docs =
      cfg.topics == 0 ? 0
                      : std::min(cfg.docs, static_cast<std::size_t>(std::llround(
                                               cfg.topic_doc_fraction * static_cast<double>(cfg.docs))));
  const std::size_t n_background_docs = cfg.docs - n_topic_docs;
  const int doc_digits = digits_for(cfg.docs);

  auto render = [&](std::size_t author, std::vector<std::string> terms, Timestamp ts, std::size_t serial) {
    const Behavior& b = behavior[author];
    Document d;
    d.id = "d" + zero_pad(serial, doc_digits);
    d.author_id = corpus.accounts[author].id;
    d.created_at = ts;

    const auto fillers = rng.uniform_int(b.filler_min, b.filler_max);
    for (std::int64_t f = 0; f < fillers; ++f) {
      const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(terms.size())));
      terms.insert(terms.begin() + static_cast<std::ptrdiff_t>(at), pick(rng, kFillers));
    }
    std::string body;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      std::string w = terms[i];
      if (i == 0 && w[0] != '#' && rng.bernoulli(0.3)) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      if (!body.empty()) body += ' ';
      body += w;
      body += pick(rng, kPunct);
    }

    std::string text;
    if (rng.bernoulli(b.retweet_rate)) {
      std::size_t target;
      do {
        target = popularity_order[retweet_target.sample(rng)];
      } while (target == author);
      d.retweet_of_author = corpus.accounts[target].id;
      text = "RT @" + *d.retweet_of_author + ": ";
    } else if (rng.bernoulli(b.reply_rate)) {
      std::size_t target;
      do {
        target = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.accounts) - 1));
      } while (target == author);
      d.reply_to_author = corpus.accounts[target].id;
      text = "@" + *d.reply_to_author + " ";
    }
    text += body;
    if (rng.bernoulli(b.url_rate)) {
      d.url_count = rng.bernoulli(0.2) ? 2 : 1;
      for (std::int64_t u = 0; u < d.url_count; ++u) text += " " + short_link(rng);
    }
    d.text = std::move(text);
    return d;
  };

  std::size_t serial = 0;
  for (std::size_t i = 0; i < n_background_docs; ++i) {
    const auto day = static_cast<std::int64_t>(i % static_cast<std::size_t>(cfg.span_days));
    const Timestamp ts = cfg.start + day * kSecondsPerDay + rng.uniform_int(0, kSecondsPerDay - 1);
    const auto author = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.accounts) - 1));
    std::vector<std::string> terms;
    const auto len = rng.uniform_int(6, 12);
    for (std::int64_t k = 0; k < len; ++k) terms.push_back(background[background_sampler.sample(rng)]);
    corpus.documents.push_back(render(author, std::move(terms), ts, serial++));
  }
  for (std::size_t i = 0; i < n_topic_docs; ++i) {
    const PlantedTopic& t = corpus.topics[i % corpus.topics.size()];
    const auto day = rng.uniform_int(t.first_day, t.last_day);
    const Timestamp ts = cfg.start + day * kSecondsPerDay + rng.uniform_int(0, kSecondsPerDay - 1);
    const auto& pool = t.user_class == InfluenceClass::kMDI ? mdi_accounts : idi_accounts;
    const std::size_t author = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    std::vector<std::string> terms;
    for (const auto& term : t.terms) {
      if (rng.bernoulli(0.75)) terms.push_back(term);
    }
    while (terms.size() < 3) {
      const auto& term = t.terms[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(t.terms.size()) - 1))];
      if (std::find(terms.begin(), terms.end(), term) == terms.end()) terms.push_back(term);
    }
    const auto extra = rng.uniform_int(0, 0);
    for (std::int64_t k = 0; k < extra; ++k) terms.push_back(background[background_sampler.sample(rng)]);
    for (std::size_t s = terms.size(); s > 1; --s) {
      std::swap(terms[s - 1], terms[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(s) - 1))]);
    }
    corpus.documents.push_back(render(author, std::move(terms), ts, serial++));
  }
  std::sort(corpus.documents.begin(), corpus.documents.end(), [](const Document& a, const Document& b) {
    return a.created_at != b.created_at ? a.created_at < b.created_at : a.id < b.id;
  });
  return corpus;
}

std::string ground_truth_to_json(const SynthCorpus& corpus) {
  nlohmann::ordered_json j;
  j["seed"] = corpus.config.seed;
  j["start"] = format_iso8601_utc(corpus.config.start);
  j["span_days"] = corpus.config.span_days;
  j["docs"] = corpus.documents.size();
  auto topics = nlohmann::ordered_json::array();
  for (const auto& t : corpus.topics) {
    nlohmann::ordered_json o;
    o["id"] = t.id;
    o["terms"] = t.terms;
    o["first_day"] = t.first_day;
    o["last_day"] = t.last_day;
    o["user_class"] = to_string(t.user_class);
    topics.push_back(std::move(o));
  }
  j["topics"] = std::move(topics);
  auto accounts = nlohmann::ordered_json::array();
  for (const auto& a : corpus.accounts) {
    nlohmann::ordered_json o;
    o["account_id"] = a.id;
    o["profile"] = to_string(a.profile);
    o["label"] = static_cast<int>(a.profile);
    accounts.push_back(std::move(o));
  }
  j["accounts"] = std::move(accounts);
  return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(std::string_view text) {
  GroundTruth gt;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto start = parse_iso8601_utc(j.at("start").get<std::string>());
    if (!start) throw DataError("ground truth: bad start timestamp");
    gt.start = *start;
    gt.span_days = j.at("span_days").get<std::int64_t>();
    for (const auto& o : j.at("topics")) {
      PlantedTopic t;
      t.id = o.at("id").get<std::size_t>();
      t.terms = o.at("terms").get<std::vector<std::string>>();
      t.first_day = o.at("first_day").get<std::int64_t>();
      t.last_day = o.at("last_day").get<std::int64_t>();
      t.user_class = o.at("user_class").get<std::string>() == "MDI" ? InfluenceClass::kMDI : InfluenceClass::kIDI;
      gt.topics.push_back(std::move(t));
    }
    for (const auto& o : j.at("accounts")) {
      gt.accounts.push_back({o.at("account_id").get<std::string>(), influence_class_from_label(o.at("label").get<int>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid ground truth JSON: ") + e.what());
  }
  return gt;
}

std::vector<LabeledAccount> truth_labels(const SynthCorpus& corpus) {
  std::vector<LabeledAccount> out;
  for (const auto& a : corpus.accounts) out.push_back({a.id, a.profile, LabelSource::kManual, std::nullopt});
  return out;
}

std::vector<LabeledAccount> synth_seeds(const SynthCorpus& corpus, std::size_t count) {
  count = std::clamp<std::size_t>(count, 2, corpus.accounts.size());
  Rng rng(corpus.config.seed ^ 0x5eed5eed5eedULL);
  std::vector<std::size_t> order(corpus.accounts.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  }
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  for (InfluenceClass c : {InfluenceClass::kMDI, InfluenceClass::kIDI}) {
    const bool present = std::any_of(chosen.begin(), chosen.end(),
                                     [&](std::size_t a) { return corpus.accounts[a].profile == c; });
    if (present) continue;
    for (std::size_t a : order) {
      if (corpus.accounts[a].profile == c) {
        chosen.back() = a;
        break;
      }
    }
  }
  std::vector<LabeledAccount> out;
  for (std::size_t a : chosen) {
    out.push_back({corpus.accounts[a].id, corpus.accounts[a].profile, LabelSource::kManual, std::nullopt});
  }
  return out;
}

}  // namespace viral
