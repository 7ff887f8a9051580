#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "support/dense_oracle.hpp"
#include "viral/error.hpp"
#include "viral/pipeline.hpp"
#include "viral/util.hpp"

using namespace viral;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(const oracle::TempDir& dir, std::size_t docs = 3000, std::int64_t span = 12) {
  PipelineConfig c;
  c.docs = docs;
  c.topics = 3;
  c.span_days = span;
  c.accounts = 120;
  c.vocab_size = 300;
  c.out = dir.file("synth");
  return c;
}

// Synthesizes a corpus and returns a detect config pointed at it.
PipelineConfig prepared(const oracle::TempDir& dir, std::vector<std::int64_t> granularities,
                        std::size_t docs = 3000, std::int64_t span = 12) {
  PipelineConfig c = small_config(dir, docs, span);
  RunLog log;
  run_synth(c, log);
  c.input = dir.file("synth/archive.jsonl");
  c.labels = dir.file("synth/labels_truth.csv");
  c.granularities = std::move(granularities);
  c.out = dir.file("detect");
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(VIRAL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config json round trip") {
  PipelineConfig c;
  c.input = "a.jsonl";
  c.granularities = {2, 5};
  c.alpha = 0.25;
  c.beta = 0.75;
  c.percentile = 97.5;
  c.seed = 77;
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{}") == PipelineConfig{});
  CHECK(config_from_json(R"({"top_k": 5})").top_k == 5);
  CHECK_THROWS_AS(config_from_json(R"({"top_kk": 5})"), UsageError);
  CHECK_THROWS_AS(config_from_json("[1, 2"), UsageError);
}

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), UsageError);
  };
  bad([](PipelineConfig& c) { c.percentile = 100.0; });
  bad([](PipelineConfig& c) { c.percentile = -1.0; });
  bad([](PipelineConfig& c) { c.alpha = 0.0, c.beta = 0.0; });
  bad([](PipelineConfig& c) { c.granularities = {}; });
  bad([](PipelineConfig& c) { c.granularities = {1, 0}; });
  bad([](PipelineConfig& c) { c.top_k = 0; });
  bad([](PipelineConfig& c) { c.threshold = 1.5; });
  bad([](PipelineConfig& c) { c.vocab_size = 1; });
}

TEST_CASE("synthetic corpus shape and determinism") {
  SynthConfig c;
  c.docs = 4000;
  c.span_days = 15;
  const SynthCorpus a = generate_corpus(c);
  const SynthCorpus b = generate_corpus(c);
  CHECK(a.documents == b.documents);
  CHECK(ground_truth_to_json(a) == ground_truth_to_json(b));
  CHECK(a.documents.size() == 4000);
  REQUIRE(a.topics.size() == 10);
  for (const auto& t : a.topics) {
    CHECK(t.terms.size() >= 5);
    CHECK(t.terms.size() <= 8);
    CHECK(t.first_day >= 0);
    CHECK(t.last_day < 15);
    CHECK(t.last_day - t.first_day <= 2);
  }
  CHECK(std::is_sorted(a.documents.begin(), a.documents.end(), [](const Document& x, const Document& y) {
    return std::tie(x.created_at, x.id) < std::tie(y.created_at, y.id);
  }));

  c.seed = 2;
  CHECK(generate_corpus(c).documents != a.documents);
  c.topics = 0;
  CHECK(generate_corpus(c).topics.empty());

  const GroundTruth gt = ground_truth_from_json(ground_truth_to_json(a));
  CHECK(gt.topics.size() == a.topics.size());
  CHECK(gt.topics[3].terms == a.topics[3].terms);
  CHECK(gt.accounts.size() == a.accounts.size());
}

TEST_CASE("synth seeds cover both profiles") {
  SynthConfig c;
  c.docs = 500;
  c.accounts = 40;
  const SynthCorpus corpus = generate_corpus(c);
  const auto seeds = synth_seeds(corpus, 2);
  REQUIRE(seeds.size() == 2);
  CHECK(seeds[0].label != seeds[1].label);
  CHECK(truth_labels(corpus).size() == 40);
}

TEST_CASE("detect runs every class and granularity") {
  oracle::TempDir dir("detect_groups");
  const PipelineConfig c = prepared(dir, {1, 3});
  RunLog log;
  const DetectResult r = run_detect(c, log);
  REQUIRE(r.groups.size() == 4);
  CHECK(r.groups[0].user_class == InfluenceClass::kIDI);
  CHECK(r.groups[0].granularity_days == 1);
  CHECK(r.groups[1].granularity_days == 3);
  CHECK(r.groups[2].user_class == InfluenceClass::kMDI);
  CHECK(r.frame_counts[0] == 12);
  CHECK(r.frame_counts[1] == 4);
  CHECK(!r.cache_hit);
  CHECK(fs::exists(dir.file("detect/clusters.csv")));
  CHECK(fs::exists(dir.file("detect/scatter.csv")));
  for (const auto& g : r.groups) CHECK(g.ranked.size() <= c.top_k);
}

TEST_CASE("detect skips a class without accounts") {
  oracle::TempDir dir("detect_one_class");
  PipelineConfig c = prepared(dir, {1});
  auto labels = read_labels_csv(c.labels);
  for (auto& l : labels) l.label = InfluenceClass::kIDI;
  write_file(dir.file("idi.csv"), labels_to_csv(labels));
  c.labels = dir.file("idi.csv");
  RunLog log;
  const DetectResult r = run_detect(c, log);
  REQUIRE(r.groups.size() == 1);
  CHECK(r.groups[0].user_class == InfluenceClass::kIDI);
  CHECK(log.has_warning_containing("MDI"));
}

TEST_CASE("frame counts over a 210-day span") {
  oracle::TempDir dir("detect_span");
  const PipelineConfig c = prepared(dir, {21, 7}, 2100, 210);
  RunLog log;
  const DetectResult r = run_detect(c, log);
  REQUIRE(r.groups.size() >= 2);
  CHECK(r.groups[0].granularity_days == 21);
  CHECK(r.frame_counts[0] == 10);
  CHECK(r.frame_counts[1] == 30);
  for (const auto& g : r.groups) {
    for (const auto& cl : g.ranked) CHECK(cl.frame_id < (g.granularity_days == 21 ? 10u : 30u));
  }
}

TEST_CASE("reruns are byte identical and report matches detect") {
  oracle::TempDir dir("detect_rerun");
  PipelineConfig c = prepared(dir, {1, 3});
  RunLog first_log;
  run_detect(c, first_log);
  const std::string clusters = read_file(dir.file("detect/clusters.csv"));
  const std::string scatter = read_file(dir.file("detect/scatter.csv"));

  RunLog second_log;
  const DetectResult again = run_detect(c, second_log);
  CHECK(again.cache_hit);
  CHECK(read_file(dir.file("detect/clusters.csv")) == clusters);
  CHECK(read_file(dir.file("detect/scatter.csv")) == scatter);
  CHECK(second_log.warning_count() == first_log.warning_count());

  fs::remove(dir.file("detect/clusters.csv"));
  RunLog report_log;
  run_report(c, report_log);
  CHECK(read_file(dir.file("detect/clusters.csv")) == clusters);

  // A fresh output directory recounts from scratch to the same bytes.
  c.out = dir.file("detect2");
  RunLog fresh_log;
  CHECK(!run_detect(c, fresh_log).cache_hit);
  CHECK(read_file(dir.file("detect2/clusters.csv")) == clusters);

  // Reweighting through report changes the scores but keeps the counts.
  c.out = dir.file("detect");
  c.alpha = 1.0;
  c.beta = 0.0;
  RunLog reweighted;
  run_report(c, reweighted);
  CHECK(read_file(dir.file("detect/clusters.csv")) != clusters);
}

TEST_CASE("report without a cache fails") {
  oracle::TempDir dir("report_nocache");
  PipelineConfig c;
  c.out = dir.file("empty");
  RunLog log;
  CHECK_THROWS_AS(run_report(c, log), IoError);
}

TEST_CASE("classify labels and fits from seeds") {
  oracle::TempDir dir("classify");
  PipelineConfig c = small_config(dir, 4000);
  RunLog synth_log;
  run_synth(c, synth_log);
  c.input = dir.file("synth/archive.jsonl");
  c.seeds = dir.file("synth/seeds.csv");
  c.batch = 20;
  c.target = 80;
  c.out = dir.file("classify");
  RunLog log;
  const ClassifyResult r = run_classify(c, log);
  CHECK(r.snowball.labels.size() >= 80);
  CHECK(r.snowball.labels.size() <= 80 + 20 - 1);
  CHECK(r.snowball.labels.size() > read_labels_csv(c.seeds).size());
  CHECK(fs::exists(r.labels_path));
  CHECK(fs::exists(r.model_path));
  CHECK(fs::exists(dir.file("classify/probabilities.csv")));
  // labels.csv carries no probabilities; they go to probabilities.csv.
  const auto written = read_labels_csv(r.labels_path);
  REQUIRE(written.size() == r.snowball.labels.size());
  for (std::size_t i = 0; i < written.size(); ++i) {
    CHECK(written[i].account_id == r.snowball.labels[i].account_id);
    CHECK(written[i].label == r.snowball.labels[i].label);
    CHECK(written[i].source == r.snowball.labels[i].source);
  }
  CHECK(read_model(r.model_path) == r.snowball.model);

  auto one_class = read_labels_csv(c.seeds);
  for (auto& l : one_class) l.label = InfluenceClass::kMDI;
  write_file(dir.file("one_class.csv"), labels_to_csv(one_class));
  c.seeds = dir.file("one_class.csv");
  RunLog bad_log;
  CHECK_THROWS_AS(run_classify(c, bad_log), DataError);
}

TEST_CASE("cli exit codes") {
  oracle::TempDir dir("cli");
  const std::string out = dir.file("out");
  CHECK(cli("synth --docs 600 --topics 2 --span-days 5 --accounts 30 --out " + out) == 0);
  CHECK(fs::exists(out + "/archive.jsonl"));
  CHECK(fs::exists(out + "/synth_config.json"));
  CHECK(cli("detect --input " + out + "/archive.jsonl --labels " + out + "/labels_truth.csv --granularities 1,2 " +
            "--vocab-size 200 --out " + out) == 0);
  CHECK(fs::exists(out + "/clusters.csv"));
  CHECK(fs::exists(out + "/detect_log.jsonl"));
  CHECK(cli("report --alpha 1 --beta 0 --out " + out) == 0);

  CHECK(cli("detect --percentile 150 --input x --labels y --out " + out) == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("detect --input /nonexistent/archive.jsonl --labels " + out + "/labels_truth.csv --out " + out) == 3);
  write_file(dir.file("bad_labels.csv"), "account_id,label,source\nacct1,7,manual\n");
  CHECK(cli("detect --input " + out + "/archive.jsonl --labels " + dir.file("bad_labels.csv") + " --out " + out) == 2);
  write_file(dir.file("bad.json"), R"({"percentile": 99, "colour": 1})");
  CHECK(cli("detect --config " + dir.file("bad.json")) == 1);
}
