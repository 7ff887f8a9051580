#include "viral/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "viral/error.hpp"
#include "viral/ingest.hpp"
#include "viral/util.hpp"

namespace viral {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (granularities.empty()) throw UsageError("granularities: at least one value required");
  std::set<std::int64_t> seen;
  for (auto g : granularities) {
    if (g < 1) throw UsageError("granularities: values must be >= 1");
    if (!seen.insert(g).second) throw UsageError("granularities: duplicate value " + std::to_string(g));
  }
  if (vocab_size < 2) throw UsageError("vocab_size: must be >= 2");
  ScoreWeights{alpha, beta}.validate();
  if (!(percentile >= 0.0 && percentile < 100.0)) throw UsageError("percentile: must lie in [0, 100)");
  if (top_k < 1) throw UsageError("top_k: must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold: must lie in (0, 1)");
  if (batch < 1) throw UsageError("batch: must be >= 1");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw UsageError("l2: must be >= 0");
  if (!(tol > 0.0)) throw UsageError("tol: must be > 0");
  if (docs < 1) throw UsageError("docs: must be >= 1");
  if (span_days < 1) throw UsageError("span_days: must be >= 1");
  if (accounts < 2) throw UsageError("accounts: must be >= 2");
  if (out.empty()) throw UsageError("out: output directory required");
}

std::string config_to_json(const PipelineConfig& c) {
  ojson j;
  j["input"] = c.input;
  j["labels"] = c.labels;
  j["seeds"] = c.seeds;
  j["granularities"] = c.granularities;
  j["vocab_size"] = c.vocab_size;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["percentile"] = c.percentile;
  j["top_k"] = c.top_k;
  j["threshold"] = c.threshold;
  j["batch"] = c.batch;
  j["target"] = c.target;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["l2"] = c.l2;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["docs"] = c.docs;
  j["topics"] = c.topics;
  j["span_days"] = c.span_days;
  j["accounts"] = c.accounts;
  return j.dump(2) + "\n";
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& field) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    field = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: field '") + key + "' has the wrong type");
  }
}

}  // namespace

PipelineConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  PipelineConfig c;
  const auto known = nlohmann::json::parse(config_to_json(c));
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw UsageError("config: unknown field '" + key + "'");
  }
  read_field(j, "input", c.input);
  read_field(j, "labels", c.labels);
  read_field(j, "seeds", c.seeds);
  read_field(j, "granularities", c.granularities);
  read_field(j, "vocab_size", c.vocab_size);
  read_field(j, "alpha", c.alpha);
  read_field(j, "beta", c.beta);
  read_field(j, "percentile", c.percentile);
  read_field(j, "top_k", c.top_k);
  read_field(j, "threshold", c.threshold);
  read_field(j, "batch", c.batch);
  read_field(j, "target", c.target);
  read_field(j, "seed", c.seed);
  read_field(j, "out", c.out);
  read_field(j, "l2", c.l2);
  read_field(j, "max_iter", c.max_iter);
  read_field(j, "tol", c.tol);
  read_field(j, "docs", c.docs);
  read_field(j, "topics", c.topics);
  read_field(j, "span_days", c.span_days);
  read_field(j, "accounts", c.accounts);
  return c;
}

PipelineConfig read_config(const std::string& path) { return config_from_json(read_file(path)); }

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory");
}

std::string out_file(const PipelineConfig& c, const char* name) { return (fs::path(c.out) / name).string(); }

}  // namespace

ClassifyResult run_classify(const PipelineConfig& config, RunLog& log) {
  config.validate();
  if (config.input.empty()) throw UsageError("classify needs --input");
  const std::string& seeds_path = config.seeds.empty() ? config.labels : config.seeds;
  if (seeds_path.empty()) throw UsageError("classify needs --seeds");
  log.info("cli", "seed " + std::to_string(config.seed));

  const auto archive = parse_archive(config.input, &log);
  const auto stats = aggregate_account_stats(archive.documents);
  const auto seeds = read_labels_csv(seeds_path);

  SnowballOptions opts;
  opts.batch_size = config.batch;
  opts.target = config.target;
  opts.threshold = config.threshold;
  opts.fit = {config.l2, config.max_iter, config.tol};

  ClassifyResult result;
  result.snowball = snowball_label(archive.documents, stats, seeds, opts, &log);
  log.info("classify", "labeled " + std::to_string(result.snowball.labels.size()) + " accounts in " +
                           std::to_string(result.snowball.fit_passes) + " fit passes");

  ensure_dir(config.out);
  result.labels_path = out_file(config, "labels.csv");
  result.model_path = out_file(config, "model.json");
  write_file(result.labels_path, labels_to_csv(result.snowball.labels));
  write_model(result.model_path, result.snowball.model);
  std::string probs = "account_id,probability\n";
  for (const auto& l : result.snowball.labels) {
    if (l.probability) probs += l.account_id + "," + format_double(*l.probability) + "\n";
  }
  write_file(out_file(config, "probabilities.csv"), probs);
  return result;
}

namespace {

struct CountedCorpus {
  Vocabulary vocab;
  Timestamp origin = 0;
  std::vector<FrameCounts> runs;
  std::vector<InfluenceClass> skipped;
};

constexpr InfluenceClass kClasses[] = {InfluenceClass::kIDI, InfluenceClass::kMDI};

std::string cache_key(std::string_view archive, std::string_view labels, const PipelineConfig& c) {
  Fnv1a h;
  h.update("viral-cooc-v1").update(std::string_view("\0", 1));
  h.update(std::to_string(archive.size())).update(":").update(archive);
  h.update(std::to_string(labels.size())).update(":").update(labels);
  h.update("vocab=" + std::to_string(c.vocab_size));
  for (auto g : c.granularities) h.update(",g=" + std::to_string(g));
  return h.hex();
}

CountedCorpus count_corpus(std::string_view archive_text, std::string_view labels_text, const PipelineConfig& config,
                           RunLog& log) {
  const auto archive = parse_archive_text(archive_text, &log);
  std::map<std::string, InfluenceClass> label_of;
  for (const auto& l : parse_labels_csv(labels_text)) label_of[l.account_id] = l.label;

  std::vector<Document> labeled;
  std::set<std::string> unlabeled_accounts;
  std::size_t unlabeled_docs = 0;
  for (const auto& d : archive.documents) {
    if (label_of.count(d.author_id)) {
      labeled.push_back(d);
    } else {
      unlabeled_accounts.insert(d.author_id);
      ++unlabeled_docs;
    }
  }
  if (!unlabeled_accounts.empty()) {
    log.warn("detect", "excluded " + std::to_string(unlabeled_docs) + " documents from " +
                           std::to_string(unlabeled_accounts.size()) + " unlabeled accounts");
  }

  auto tokenized = tokenize_documents(labeled);
  log.info("ingest", "tokenized " + std::to_string(tokenized.documents.size()) + " documents, dropped " +
                         std::to_string(tokenized.dropped));
  if (tokenized.documents.empty()) throw DataError("no labeled documents with linguistic content");

  CountedCorpus counted;
  counted.vocab = build_vocabulary(tokenized.documents, config.vocab_size);
  counted.origin = default_frame_origin(tokenized.documents);
  log.info("graph", "vocabulary of " + std::to_string(counted.vocab.size()) + " terms");

  for (InfluenceClass cls : kClasses) {
    std::vector<TokenizedDocument> docs;
    for (const auto& d : tokenized.documents) {
      if (label_of.at(d.author_id) == cls) docs.push_back(d);
    }
    if (docs.empty()) {
      log.warn("detect", std::string("no documents for class ") + to_string(cls) + ", skipped");
      counted.skipped.push_back(cls);
      continue;
    }
    for (auto g : config.granularities) {
      const FrameIndex index = partition_frames(docs, g, counted.origin);
      FrameCounts run;
      run.user_class = cls;
      run.granularity_days = g;
      for (std::size_t t = 0; t < index.frame_count(); ++t) {
        run.frames.push_back(count_cooccurrence(docs, index.frames[t], counted.vocab, t, &log));
      }
      counted.runs.push_back(std::move(run));
    }
  }
  return counted;
}

std::string run_file_name(const FrameCounts& run, std::size_t t) {
  return std::string(to_string(run.user_class)) + "_g" + std::to_string(run.granularity_days) + "_f" +
         std::to_string(t) + ".txt";
}

void save_cache(const fs::path& dir, const std::string& key, const CountedCorpus& counted) {
  ensure_dir(dir / "cooc");
  std::string vocab;
  for (const auto& t : counted.vocab.terms()) vocab += t + "\n";
  write_file((dir / "vocab.txt").string(), vocab);
  ojson manifest;
  manifest["key"] = key;
  manifest["origin"] = counted.origin;
  manifest["n_terms"] = counted.vocab.size();
  auto skipped = ojson::array();
  for (auto c : counted.skipped) skipped.push_back(to_string(c));
  manifest["skipped"] = std::move(skipped);
  auto runs = ojson::array();
  for (const auto& run : counted.runs) {
    ojson r;
    r["user_class"] = to_string(run.user_class);
    r["granularity_days"] = run.granularity_days;
    r["frames"] = run.frames.size();
    runs.push_back(std::move(r));
    for (std::size_t t = 0; t < run.frames.size(); ++t) {
      write_file((dir / "cooc" / run_file_name(run, t)).string(), cooc_to_text(run.frames[t]));
    }
  }
  manifest["runs"] = std::move(runs);
  // The manifest goes last: its presence marks a complete cache entry.
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

InfluenceClass class_from_name(const std::string& s) {
  if (s == "MDI") return InfluenceClass::kMDI;
  if (s == "IDI") return InfluenceClass::kIDI;
  throw DataError("cache manifest: unknown user class '" + s + "'");
}

CountedCorpus load_cache(const fs::path& dir, RunLog& log) {
  CountedCorpus counted;
  try {
    const auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    std::vector<std::string> terms;
    const std::string vocab_text = read_file((dir / "vocab.txt").string());
    for (auto line : split(vocab_text, '\n')) {
      if (!line.empty()) terms.emplace_back(line);
    }
    counted.vocab = Vocabulary(std::move(terms));
    if (counted.vocab.size() != manifest.at("n_terms").get<std::size_t>()) {
      throw DataError("cache vocabulary does not match its manifest");
    }
    counted.origin = manifest.at("origin").get<Timestamp>();
    for (const auto& s : manifest.at("skipped")) {
      const auto cls = class_from_name(s.get<std::string>());
      counted.skipped.push_back(cls);
      log.warn("detect", std::string("no documents for class ") + to_string(cls) + ", skipped");
    }
    for (const auto& r : manifest.at("runs")) {
      FrameCounts run;
      run.user_class = class_from_name(r.at("user_class").get<std::string>());
      run.granularity_days = r.at("granularity_days").get<std::int64_t>();
      const auto frames = r.at("frames").get<std::size_t>();
      for (std::size_t t = 0; t < frames; ++t) {
        run.frames.push_back(cooc_from_text(read_file((dir / "cooc" / run_file_name(run, t)).string())));
      }
      counted.runs.push_back(std::move(run));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt cache manifest: ") + e.what());
  }
  return counted;
}

DetectResult finish_detect(CountedCorpus counted, const PipelineConfig& config, RunLog& log) {
  const ScoreWeights weights{config.alpha, config.beta};
  DetectResult result;
  for (const auto& run : counted.runs) {
    result.groups.push_back(score_and_cluster(run, weights, config.percentile, config.top_k, &log));
    result.frame_counts.push_back(run.frames.size());
    log.info("cluster", std::string(to_string(run.user_class)) + " g=" + std::to_string(run.granularity_days) +
                            ": " + std::to_string(run.frames.size()) + " frames, " +
                            std::to_string(result.groups.back().ranked.size()) + " ranked clusters");
  }
  result.vocab = std::move(counted.vocab);
  result.origin = counted.origin;
  emit_report(result.groups, result.vocab, config.out);
  return result;
}

}  // namespace

ClusterGroup score_and_cluster(const FrameCounts& counts, const ScoreWeights& weights, double percentile,
                               std::size_t top_k, RunLog* log) {
  weights.validate();
  ClusterGroup group;
  group.user_class = counts.user_class;
  group.granularity_days = counts.granularity_days;
  std::vector<ScoreMatrix> pops;
  pops.reserve(counts.frames.size());
  for (const auto& f : counts.frames) pops.push_back(popularity(f));
  const BurstinessSeries series(pops);
  const std::string tag = std::string(to_string(counts.user_class)) + " g=" +
                          std::to_string(counts.granularity_days);

  std::vector<TopicCluster> all;
  for (std::size_t t = 0; t < pops.size(); ++t) {
    if (counts.frames[t].doc_count == 0) {
      log_info(log, "score", tag + " frame " + std::to_string(t) + " has no documents, not clustered");
      continue;
    }
    const ScoreMatrix burst = series.frame(t);
    const ScoreMatrix rel = relevance(pops[t], burst, weights);
    RunLog frame_log;
    const AdjacencyGraph adj = threshold_adjacency(rel, percentile, &frame_log);
    for (const auto& e : frame_log.entries()) log_warn(log, e.stage, tag + " " + e.message);
    for (auto& c : extract_clusters(adj, pops[t], burst, rel)) {
      c.granularity_days = counts.granularity_days;
      c.user_class = counts.user_class;
      all.push_back(std::move(c));
    }
  }
  group.ranked = top_clusters(std::move(all), top_k);
  return group;
}

DetectResult run_detect(const PipelineConfig& config, RunLog& log) {
  config.validate();
  if (config.input.empty()) throw UsageError("detect needs --input");
  if (config.labels.empty()) throw UsageError("detect needs --labels");
  log.info("cli", "seed " + std::to_string(config.seed));

  const std::string archive = read_file(config.input);
  const std::string labels = read_file(config.labels);
  const std::string key = cache_key(archive, labels, config);
  const fs::path cache_root = fs::path(config.out) / "cache";
  const fs::path dir = cache_root / key;

  CountedCorpus counted;
  bool hit = false;
  if (fs::exists(dir / "manifest.json")) {
    log.info("cache", "reusing co-occurrence counts " + key);
    counted = load_cache(dir, log);
    hit = true;
  } else {
    counted = count_corpus(archive, labels, config, log);
    save_cache(dir, key, counted);
  }
  write_file((cache_root / "latest").string(), key + "\n");

  DetectResult result = finish_detect(std::move(counted), config, log);
  result.cache_dir = dir.string();
  result.cache_hit = hit;
  return result;
}

DetectResult run_report(const PipelineConfig& config, RunLog& log) {
  config.validate();
  const fs::path cache_root = fs::path(config.out) / "cache";
  std::string key(read_file((cache_root / "latest").string()));
  while (!key.empty() && (key.back() == '\n' || key.back() == '\r')) key.pop_back();
  const fs::path dir = cache_root / key;
  if (key.empty() || !fs::exists(dir / "manifest.json")) {
    throw IoError(dir.string(), "no cached counts; run detect first");
  }
  log.info("cache", "rescoring cached counts " + key);
  DetectResult result = finish_detect(load_cache(dir, log), config, log);
  result.cache_dir = dir.string();
  result.cache_hit = true;
  return result;
}

SynthConfig synth_config_from(const PipelineConfig& config) {
  SynthConfig s;
  s.docs = config.docs;
  s.topics = config.topics;
  s.span_days = config.span_days;
  s.seed = config.seed;
  s.accounts = config.accounts;
  return s;
}

SynthCorpus run_synth(const PipelineConfig& config, RunLog& log) {
  config.validate();
  log.info("cli", "seed " + std::to_string(config.seed));
  SynthCorpus corpus = generate_corpus(synth_config_from(config));
  ensure_dir(config.out);
  write_archive(out_file(config, "archive.jsonl"), corpus.documents);
  write_file(out_file(config, "ground_truth.json"), ground_truth_to_json(corpus));
  const auto seeds = synth_seeds(corpus, std::max<std::size_t>(2, corpus.accounts.size() / 10));
  write_file(out_file(config, "seeds.csv"), labels_to_csv(seeds));
  write_file(out_file(config, "labels_truth.csv"), labels_to_csv(truth_labels(corpus)));
  log.info("synth", "wrote " + std::to_string(corpus.documents.size()) + " documents, " +
                        std::to_string(corpus.topics.size()) + " planted topics");
  return corpus;
}

}  // namespace viral
