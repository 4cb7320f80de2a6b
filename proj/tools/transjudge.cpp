#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "transjudge/corpus.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/pipeline.hpp"

using namespace transjudge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEnvironment = 3;
constexpr int kExitPrerequisite = 4;
constexpr int kExitInterrupted = 130;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolation:
      return kExitPrerequisite;
    case ErrorCode::ToolchainMissing:
    case ErrorCode::SandboxFailure:
    case ErrorCode::TransportError:
    case ErrorCode::Timeout:
    case ErrorCode::IoError:
    case ErrorCode::CassetteWriteError:
      return kExitEnvironment;
    default:
      return kExitConfig;
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void on_sigint(int) { interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execution-based judge and repair loop for LLM code translations", "transjudge"};
  app.require_subcommand(1);

  std::string manifest;
  bool check = false;
  auto* ingest = app.add_subcommand("ingest", "Load a corpus manifest and report on it");
  ingest->add_option("--manifest", manifest, "Corpus manifest (JSON)")->required();
  ingest->add_flag("--check", check, "Exit non-zero when validation finds problems");

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
  };

  std::string record, replay;
  bool retry_errors = false;
  auto* translate = app.add_subcommand("translate", "Prompt every backend for every task");
  add_config(translate);
  auto* rec_opt = translate->add_option("--record", record, "Record completions into this cassette");
  translate->add_option("--replay", replay, "Answer prompts from this cassette only")->excludes(rec_opt);
  translate->add_flag("--retry-errors", retry_errors, "Retry tasks whose translation failed earlier");

  auto* evaluate = app.add_subcommand("evaluate", "Compile and test every translation");
  add_config(evaluate);

  std::string labels;
  auto* classify = app.add_subcommand("classify", "Label failed translations by root cause");
  add_config(classify);
  classify->add_option("--labels", labels, "Manual labels (CSV task_id,category)");

  std::string chain;
  int budget = 0;
  auto* repair = app.add_subcommand("repair", "Run the corrector chain over failed translations");
  add_config(repair);
  repair->add_option("--chain", chain, "Comma-separated correctors: rules, backend:NAME");
  repair->add_option("--budget", budget, "Candidates evaluated per task")->check(CLI::PositiveNumber);

  std::string manual_fixes, pairs_out;
  auto* pairs = app.add_subcommand("export-pairs", "Write verified invalid/valid pairs as JSONL");
  add_config(pairs);
  pairs->add_option("--manual-fixes", manual_fixes, "Directory of <task_id>/fixed.<ext> files");
  pairs->add_option("--out", pairs_out, "Output file (default: <run>/pairs.jsonl)");

  std::string tables = "success,breakdown,category,repair,transitions", format = "md";
  auto* report = app.add_subcommand("report", "Aggregate results into tables");
  add_config(report);
  report->add_option("--tables", tables, "Comma-separated tables");
  report->add_option("--format", format, "md, csv or json");

  std::string ids_path, ratios = "0.8,0.1,0.1", split_out;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand("split", "Seeded train/valid/test split of task ids");
  split->add_option("--ids", ids_path, "File with one id per line")->required();
  split->add_option("--ratios", ratios, "Three ratios summing to 1");
  split->add_option("--seed", seed, "Shuffle seed");
  split->add_option("--out", split_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, on_sigint);

  try {
    if (*ingest) {
      const Corpus corpus = load_manifest(manifest);
      const ValidationReport vr = validate_corpus(corpus);
      std::cout << "corpus " << corpus.name << ": " << corpus.programs.size() << " programs, "
                << corpus.test_count() << " tests\n";
      for (const auto& f : vr.findings) {
        std::cout << "  " << f.program_id << ": " << f.kind;
        if (!f.detail.empty()) std::cout << " (" << f.detail << ")";
        std::cout << "\n";
      }
      return check && !vr.ok ? kExitFindings : kExitOk;
    }
    if (*split) {
      const auto parts = split_list(ratios);
      if (parts.size() != 3) fail(ErrorCode::BadRatios, "--ratios needs three values");
      std::array<double, 3> r{};
      for (std::size_t i = 0; i < 3; ++i) r[i] = std::stod(parts[i]);
      const std::string out = split_to_json(split_tasks(read_lines(ids_path), r, seed));
      if (split_out.empty()) std::cout << out;
      else write_file_atomic(split_out, out);
      return kExitOk;
    }

    const RunConfig config = RunConfig::load(config_path);
    PhaseSummary summary;
    if (*translate) {
      TranslateOptions opts;
      if (!record.empty()) opts.record = record;
      if (!replay.empty()) opts.replay = replay;
      opts.retry_errors = retry_errors;
      summary = cmd_translate(config, opts, std::cerr);
    } else if (*evaluate) {
      summary = cmd_evaluate(config, std::cerr);
    } else if (*classify) {
      summary = cmd_classify(config, labels.empty() ? std::nullopt : std::optional<std::filesystem::path>(labels),
                             std::cerr);
    } else if (*repair) {
      summary = cmd_repair(config, split_list(chain), budget > 0 ? std::optional<int>(budget) : std::nullopt,
                           std::cerr);
    } else if (*pairs) {
      cmd_export_pairs(config,
                       manual_fixes.empty() ? std::nullopt : std::optional<std::filesystem::path>(manual_fixes),
                       pairs_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(pairs_out),
                       std::cerr);
    } else if (*report) {
      cmd_report(config, split_list(tables), format, std::cerr);
    }
    return summary.interrupted ? kExitInterrupted : kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::PreconditionViolation) {
      std::cerr << "hint: run the earlier phases (translate, evaluate) for this config first\n";
    }
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
