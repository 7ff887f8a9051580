// viral: account influence classification and viral topic detection.
//
//   viral synth    --out DIR [--docs N --topics K --span-days D --accounts A --seed S]
//   viral classify --input archive.jsonl --seeds seeds.csv --out DIR
//   viral detect   --input archive.jsonl --labels labels.csv --out DIR
//   viral report   --out DIR [--alpha A --beta B --percentile Q --top-k K]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "viral/error.hpp"
#include "viral/pipeline.hpp"
#include "viral/run_log.hpp"
#include "viral/util.hpp"

namespace {

using viral::PipelineConfig;

struct Flags {
  std::string config_path;
  PipelineConfig values;
};

// Registers every pipeline flag on `cmd`. Values land in `flags.values`; only
// flags given on the command line override the config file.
void add_pipeline_flags(CLI::App* cmd, Flags& flags) {
  auto& v = flags.values;
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--input", v.input, "JSONL archive");
  cmd->add_option("--labels", v.labels, "account labels CSV");
  cmd->add_option("--seeds", v.seeds, "seed labels CSV for classify");
  cmd->add_option("--granularities", v.granularities, "frame widths in days")->delimiter(',');
  cmd->add_option("--vocab-size", v.vocab_size);
  cmd->add_option("--alpha", v.alpha, "popularity weight");
  cmd->add_option("--beta", v.beta, "burstiness weight");
  cmd->add_option("--percentile", v.percentile, "adjacency threshold percentile");
  cmd->add_option("--top-k", v.top_k);
  cmd->add_option("--threshold", v.threshold, "MDI probability cutoff");
  cmd->add_option("--batch", v.batch, "snowball batch size");
  cmd->add_option("--target", v.target, "snowball target label count");
  cmd->add_option("--seed", v.seed);
  cmd->add_option("--out", v.out, "output directory");
  cmd->add_option("--l2", v.l2);
  cmd->add_option("--max-iter", v.max_iter);
  cmd->add_option("--tol", v.tol);
  cmd->add_option("--docs", v.docs);
  cmd->add_option("--topics", v.topics);
  cmd->add_option("--span-days", v.span_days);
  cmd->add_option("--accounts", v.accounts);
}

void override_if_set(const CLI::App* cmd, const char* flag, auto& dst, const auto& src) {
  if (cmd->count(flag) > 0) dst = src;
}

PipelineConfig resolve(const CLI::App* cmd, const Flags& flags) {
  PipelineConfig c = flags.config_path.empty() ? PipelineConfig{} : viral::read_config(flags.config_path);
  const auto& v = flags.values;
  override_if_set(cmd, "--input", c.input, v.input);
  override_if_set(cmd, "--labels", c.labels, v.labels);
  override_if_set(cmd, "--seeds", c.seeds, v.seeds);
  override_if_set(cmd, "--granularities", c.granularities, v.granularities);
  override_if_set(cmd, "--vocab-size", c.vocab_size, v.vocab_size);
  override_if_set(cmd, "--alpha", c.alpha, v.alpha);
  override_if_set(cmd, "--beta", c.beta, v.beta);
  override_if_set(cmd, "--percentile", c.percentile, v.percentile);
  override_if_set(cmd, "--top-k", c.top_k, v.top_k);
  override_if_set(cmd, "--threshold", c.threshold, v.threshold);
  override_if_set(cmd, "--batch", c.batch, v.batch);
  override_if_set(cmd, "--target", c.target, v.target);
  override_if_set(cmd, "--seed", c.seed, v.seed);
  override_if_set(cmd, "--out", c.out, v.out);
  override_if_set(cmd, "--l2", c.l2, v.l2);
  override_if_set(cmd, "--max-iter", c.max_iter, v.max_iter);
  override_if_set(cmd, "--tol", c.tol, v.tol);
  override_if_set(cmd, "--docs", c.docs, v.docs);
  override_if_set(cmd, "--topics", c.topics, v.topics);
  override_if_set(cmd, "--span-days", c.span_days, v.span_days);
  override_if_set(cmd, "--accounts", c.accounts, v.accounts);
  return c;
}

void write_run_files(const std::string& command, const PipelineConfig& cfg, const viral::RunLog& log) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) return;
  const auto base = std::filesystem::path(cfg.out);
  try {
    viral::write_file((base / (command + "_config.json")).string(), viral::config_to_json(cfg));
    log.write((base / (command + "_log.jsonl")).string());
  } catch (const viral::IoError& e) {
    std::cerr << "viral: " << e.what() << "\n";
  }
}

int run(const std::string& command, const PipelineConfig& cfg) {
  viral::RunLog log;
  int code = static_cast<int>(viral::ExitCode::kOk);
  try {
    if (command == "classify") {
      viral::run_classify(cfg, log);
    } else if (command == "detect") {
      viral::run_detect(cfg, log);
    } else if (command == "report") {
      viral::run_report(cfg, log);
    } else {
      viral::run_synth(cfg, log);
    }
  } catch (const viral::UsageError& e) {
    log.error(command, e.what());
    code = static_cast<int>(viral::ExitCode::kUsage);
  } catch (const viral::DataError& e) {
    log.error(command, e.what());
    code = static_cast<int>(viral::ExitCode::kData);
  } catch (const viral::IoError& e) {
    log.error(command, e.what());
    code = static_cast<int>(viral::ExitCode::kIo);
  }
  for (const auto& entry : log.entries()) {
    if (entry.level != viral::LogLevel::kInfo) {
      std::cerr << viral::to_string(entry.level) << " [" << entry.stage << "] " << entry.message << "\n";
    }
  }
  write_run_files(command, cfg, log);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence classification and viral topic detection"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"classify", "detect", "report", "synth"};
  const char* help[] = {"label accounts with the snowball LR loop", "detect and rank topic clusters",
                        "rescore cached counts and rewrite the report", "generate a synthetic corpus"};
  for (int i = 0; i < 4; ++i) add_pipeline_flags(app.add_subcommand(names[i], help[i]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(viral::ExitCode::kUsage);
  }

  const CLI::App* cmd = app.get_subcommands().front();
  PipelineConfig cfg;
  try {
    cfg = resolve(cmd, flags);
  } catch (const viral::UsageError& e) {
    std::cerr << "viral: " << e.what() << "\n";
    return static_cast<int>(viral::ExitCode::kUsage);
  } catch (const viral::IoError& e) {
    std::cerr << "viral: " << e.what() << "\n";
    return static_cast<int>(viral::ExitCode::kIo);
  }
  return run(cmd->get_name(), cfg);
}
