#include "transjudge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "transjudge/error.hpp"
#include "transjudge/io.hpp"

namespace transjudge {

namespace fs = std::filesystem;
using nlohmann::json;

const SourceProgram* Corpus::find(const std::string& program_id) const {
  for (const auto& p : programs) {
    if (p.id == program_id) return &p;
  }
  return nullptr;
}

std::size_t Corpus::test_count() const {
  std::size_t total = 0;
  for (const auto& p : programs) total += p.tests.size();
  return total;
}

namespace {

const json& require(const json& obj, const char* key, json::value_t type,
                    const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorCode::MalformedManifest, where + "/" + key + ": missing");
  }
  const json& v = obj.at(key);
  if (v.type() != type) {
    fail(ErrorCode::MalformedManifest, where + "/" + key + ": expected " +
                                           json(type).type_name() + ", got " + v.type_name());
  }
  return v;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const std::string s = require(obj, key, json::value_t::string, where).get<std::string>();
  if (s.empty()) fail(ErrorCode::MalformedManifest, where + "/" + key + ": empty string");
  return s;
}

std::string load_referenced(const fs::path& base, const std::string& rel) {
  const fs::path full = base / rel;
  if (!fs::is_regular_file(full)) fail(ErrorCode::MissingFile, rel);
  return read_file(full);
}

}  // namespace

Corpus load_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) fail(ErrorCode::MissingFile, path.string());
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedManifest, std::string("(root): ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::MalformedManifest, "(root): expected object");

  const fs::path base = path.parent_path();
  Corpus corpus;
  corpus.name = require_string(doc, "name", "");
  corpus.manifest_path = path;

  const json& programs = require(doc, "programs", json::value_t::array, "");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const std::string where = "/programs/" + std::to_string(i);
    const json& entry = programs[i];
    if (!entry.is_object()) fail(ErrorCode::MalformedManifest, where + ": expected object");

    SourceProgram program;
    program.id = require_string(entry, "id", where);
    if (!seen.insert(program.id).second) {
      fail(ErrorCode::DuplicateId, "program id '" + program.id + "' at " + where);
    }
    const std::string lang = require_string(entry, "language", where);
    auto parsed = parse_language(lang);
    if (!parsed || lang != to_id(*parsed)) {
      fail(ErrorCode::MalformedManifest, where + "/language: unknown language '" + lang + "'");
    }
    program.language = *parsed;
    program.code = load_referenced(base, require_string(entry, "code_file", where));

    const json& tests = require(entry, "tests", json::value_t::array, where);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const std::string twhere = where + "/tests/" + std::to_string(t);
      TestCase tc;
      tc.id = require_string(tests[t], "id", twhere);
      tc.stdin_data = load_referenced(base, require_string(tests[t], "stdin_file", twhere));
      tc.expected_stdout = load_referenced(base, require_string(tests[t], "expected_file", twhere));
      program.tests.push_back(std::move(tc));
    }
    corpus.programs.push_back(std::move(program));
  }

  if (doc.contains("testcase_total")) {
    const json& total = doc.at("testcase_total");
    if (!total.is_number_unsigned() && !total.is_number_integer()) {
      fail(ErrorCode::MalformedManifest, "/testcase_total: expected integer");
    }
    if (total.get<std::size_t>() != corpus.test_count()) {
      fail(ErrorCode::MalformedManifest,
           "/testcase_total: declares " + std::to_string(total.get<std::size_t>()) +
               " but manifest lists " + std::to_string(corpus.test_count()));
    }
  }
  return corpus;
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  for (const auto& p : corpus.programs) {
    if (p.code.find_first_not_of(" \t\r\n") == std::string::npos) {
      report.findings.push_back({p.id, "empty code", ""});
    }
    if (!is_valid_utf8(p.code)) {
      report.findings.push_back({p.id, "non-UTF-8 code", "source files are not transcoded"});
    }
    if (p.tests.empty()) {
      report.findings.push_back({p.id, "empty test list", ""});
    }
    std::unordered_set<std::string> ids;
    for (const auto& t : p.tests) {
      if (!ids.insert(t.id).second) {
        report.findings.push_back({p.id, "duplicate test id", t.id});
      }
    }
  }
  report.ok = report.findings.empty();
  return report;
}

TargetMap default_targets() {
  TargetMap map;
  for (Language src : kAllLanguages) {
    for (Language dst : kAllLanguages) {
      if (src != dst) map[src].push_back(dst);
    }
  }
  return map;
}

std::string make_task_id(const std::string& corpus_name, const std::string& program_id,
                         Language source, Language target) {
  auto clean = [](std::string s) {
    for (char& c : s) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                      c == '.';
      if (!ok) c = '_';
    }
    return s;
  };
  return clean(corpus_name) + "__" + clean(program_id) + "__" + std::string(to_id(source)) +
         "-" + std::string(to_id(target));
}

std::vector<TranslationTask> enumerate_tasks(const Corpus& corpus, const TargetMap& targets) {
  for (const auto& [src, dsts] : targets) {
    for (Language dst : dsts) {
      if (dst == src) {
        fail(ErrorCode::InvalidTargetMap,
             std::string(display_name(src)) + " listed as its own target");
      }
    }
  }

  std::vector<const SourceProgram*> ordered;
  for (const auto& p : corpus.programs) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const SourceProgram* a, const SourceProgram* b) { return a->id < b->id; });

  std::vector<TranslationTask> tasks;
  for (const SourceProgram* p : ordered) {
    auto it = targets.find(p->language);
    if (it == targets.end()) continue;
    std::vector<Language> dsts = it->second;
    std::sort(dsts.begin(), dsts.end());
    dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());
    for (Language dst : dsts) {
      tasks.push_back({make_task_id(corpus.name, p->id, p->language, dst), p->id, p->language,
                       dst});
    }
  }
  return tasks;
}

namespace {

// Unbiased draw in [0, bound) from the raw 64-bit engine; std distributions are
// implementation-defined and would make splits differ between standard libraries.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

std::size_t floor_share(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

SplitAssignment split_tasks(const std::vector<std::string>& ids, std::array<double, 3> ratios,
                            std::uint64_t seed) {
  if (ids.empty()) fail(ErrorCode::EmptyInput, "no ids to split");
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::BadRatios, "ratios must be positive");
  }
  if (std::fabs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    fail(ErrorCode::BadRatios, "ratios must sum to 1");
  }
  std::unordered_set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) fail(ErrorCode::DuplicateId, "split ids must be unique");

  std::vector<std::string> order = ids;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = bounded_draw(rng, i);
    std::swap(order[i - 1], order[j]);
  }

  const std::size_t n = order.size();
  const std::size_t n_train = floor_share(ratios[0], n);
  const std::size_t n_valid = std::min(floor_share(ratios[1], n), n - n_train);

  SplitAssignment split;
  split.seed = seed;
  split.ratios = ratios;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
  return split;
}

std::string split_to_json(const SplitAssignment& split) {
  json doc;
  doc["seed"] = split.seed;
  doc["ratios"] = split.ratios;
  doc["train"] = split.train;
  doc["valid"] = split.valid;
  doc["test"] = split.test;
  return doc.dump(2) + "\n";
}

}  // namespace transjudge
