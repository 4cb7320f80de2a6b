#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transjudge/backend.hpp"
#include "transjudge/corpus.hpp"
#include "transjudge/exec.hpp"
#include "transjudge/prompt.hpp"
#include "transjudge/rectify.hpp"

namespace transjudge {

struct RunConfig {
  std::filesystem::path config_path;
  nlohmann::json raw;

  std::filesystem::path corpus;
  TargetMap targets;
  std::vector<BackendSpec> backends;
  std::map<std::string, PromptTemplate> templates;
  Limits limits;
  ComparePolicy compare;
  std::vector<std::string> chain{"rules"};
  int budget = 4;
  RepairEncoding encoding = RepairEncoding::WithDiagnostic;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<std::filesystem::path> toolchains;
  std::optional<std::filesystem::path> manual_fixes;
  bool canonical_timestamps = false;

  /// Relative paths resolve against the config file's directory. Throws
  /// Error(ConfigError) for unknown template references and bad fields.
  static RunConfig load(const std::filesystem::path& path);

  const BackendSpec& backend(const std::string& name) const;
  ToolchainSet toolchain_set() const;
};

/// Files of one run directory.
struct RunDir {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path provenance() const { return root / "provenance.json"; }
  std::filesystem::path translations() const { return root / "translations.jsonl"; }
  std::filesystem::path results() const { return root / "results.jsonl"; }
  std::filesystem::path verdicts() const { return root / "verdicts.jsonl"; }
  std::filesystem::path labels() const { return root / "labels.jsonl"; }
  std::filesystem::path attempts() const { return root / "attempts.jsonl"; }
  std::filesystem::path pairs() const { return root / "pairs.jsonl"; }
  std::filesystem::path reports() const { return root / "reports"; }
};

/// Set from a SIGINT handler; workers stop picking up new tasks once it is set.
std::atomic<bool>& interrupt_flag();

struct TranslateOptions {
  std::optional<std::filesystem::path> record;
  std::optional<std::filesystem::path> replay;
  bool retry_errors = false;
};

struct PhaseSummary {
  std::size_t done = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  bool interrupted = false;
};

PhaseSummary cmd_translate(const RunConfig& config, const TranslateOptions& options, std::ostream& log);
PhaseSummary cmd_evaluate(const RunConfig& config, std::ostream& log);
PhaseSummary cmd_classify(const RunConfig& config, const std::optional<std::filesystem::path>& labels,
                          std::ostream& log);
PhaseSummary cmd_repair(const RunConfig& config, const std::vector<std::string>& chain,
                        std::optional<int> budget, std::ostream& log);
ExportResult cmd_export_pairs(const RunConfig& config,
                              const std::optional<std::filesystem::path>& manual_fixes,
                              const std::optional<std::filesystem::path>& out, std::ostream& log);
std::vector<std::filesystem::path> cmd_report(const RunConfig& config,
                                              const std::vector<std::string>& tables,
                                              const std::string& format, std::ostream& log);

inline const std::vector<std::string> kAllTables = {"success", "breakdown", "category", "repair",
                                                    "transitions"};

}  // namespace transjudge
