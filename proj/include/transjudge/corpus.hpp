#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "transjudge/language.hpp"

namespace transjudge {

struct TestCase {
  std::string id;
  std::string stdin_data;
  std::string expected_stdout;
};

struct SourceProgram {
  std::string id;
  Language language = Language::Cpp;
  std::string code;
  std::vector<TestCase> tests;
};

struct Corpus {
  std::string name;
  std::vector<SourceProgram> programs;
  std::filesystem::path manifest_path;

  const SourceProgram* find(const std::string& program_id) const;
  std::size_t test_count() const;
};

struct TranslationTask {
  std::string task_id;
  std::string program_id;
  Language source_lang = Language::Cpp;
  Language target_lang = Language::Java;

  friend bool operator==(const TranslationTask&, const TranslationTask&) = default;
};

using TargetMap = std::map<Language, std::vector<Language>>;

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

struct ValidationFinding {
  std::string program_id;
  std::string kind;  // "empty code", "empty test list", "duplicate test id", "non-UTF-8 code"
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationFinding> findings;
};

/// Reads a corpus manifest and every code/test file it references. Paths in the
/// manifest are relative to the manifest's own directory. An optional integer
/// "testcase_total" is checked against the loaded test count.
Corpus load_manifest(const std::filesystem::path& path);

ValidationReport validate_corpus(const Corpus& corpus);

/// Every source language mapped to the two other languages.
TargetMap default_targets();

/// Stable, filesystem-safe id for a (corpus, program, source, target) unit.
std::string make_task_id(const std::string& corpus_name, const std::string& program_id,
                         Language source, Language target);

/// One task per (program, target), ordered by (program_id, target_lang).
std::vector<TranslationTask> enumerate_tasks(const Corpus& corpus, const TargetMap& targets);

/// Seeded shuffle then floor cuts: |train| = floor(r0*n), |valid| = floor(r1*n),
/// the remainder goes to test.
SplitAssignment split_tasks(const std::vector<std::string>& ids, std::array<double, 3> ratios,
                            std::uint64_t seed);

std::string split_to_json(const SplitAssignment& split);

bool is_valid_utf8(std::string_view bytes);

}  // namespace transjudge
