#include "transjudge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "transjudge/digest.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/report.hpp"
#include "transjudge/taxonomy.hpp"

namespace transjudge {

namespace fs = std::filesystem;
using nlohmann::json;

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

// ---------------------------------------------------------------------------
// Config

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig RunConfig::load(const fs::path& path) {
  RunConfig c;
  c.config_path = path;
  try {
    c.raw = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  const json& doc = c.raw;
  try {
    if (!doc.contains("corpus")) fail(ErrorCode::ConfigError, path.string() + ": missing corpus");
    c.corpus = resolve(base, doc.at("corpus").get<std::string>());

    c.targets = default_targets();
    if (doc.contains("targets")) {
      c.targets.clear();
      for (auto it = doc.at("targets").begin(); it != doc.at("targets").end(); ++it) {
        auto src = parse_language(it.key());
        if (!src) fail(ErrorCode::ConfigError, "targets: unknown language " + it.key());
        for (const auto& t : it.value()) {
          auto dst = parse_language(t.get<std::string>());
          if (!dst) fail(ErrorCode::ConfigError, "targets: unknown language " + t.get<std::string>());
          c.targets[*src].push_back(*dst);
        }
      }
    }

    c.templates["chat"] = default_chat_template();
    c.templates["completion"] = default_completion_template();
    if (doc.contains("templates")) {
      for (auto it = doc.at("templates").begin(); it != doc.at("templates").end(); ++it) {
        c.templates[it.key()] = template_from_json(it.value());
      }
    }

    std::set<std::string> names;
    for (const auto& b : doc.value("backends", json::array())) {
      BackendSpec spec = backend_spec_from_json(b);
      if (spec.cassette) spec.cassette = resolve(base, spec.cassette->string());
      if (spec.kind == BackendKind::Command) {
        const std::string dir = fs::absolute(base).lexically_normal().string();
        for (auto at = spec.endpoint_or_cmd.find("{config_dir}"); at != std::string::npos;
             at = spec.endpoint_or_cmd.find("{config_dir}", at + dir.size())) {
          spec.endpoint_or_cmd.replace(at, 12, dir);
        }
      }
      validate_spec(spec);
      if (!names.insert(spec.name).second) fail(ErrorCode::ConfigError, "duplicate backend " + spec.name);
      if (!c.templates.count(spec.template_ref)) {
        fail(ErrorCode::ConfigError, "backend '" + spec.name + "' references unknown template '" +
                                         spec.template_ref + "'");
      }
      c.backends.push_back(std::move(spec));
    }

    if (doc.contains("limits")) {
      const json& l = doc.at("limits");
      c.limits.compile_timeout_seconds = l.value("compile_timeout", c.limits.compile_timeout_seconds);
      c.limits.run_timeout_per_test_seconds = l.value("run_timeout", c.limits.run_timeout_per_test_seconds);
      c.limits.max_output_bytes = l.value("max_output_bytes", c.limits.max_output_bytes);
      c.limits.max_processes = l.value("max_processes", c.limits.max_processes);
      validate_limits(c.limits);
    }
    if (doc.contains("compare")) {
      const json& cmp = doc.at("compare");
      const std::string mode = cmp.value("mode", std::string("strict"));
      if (mode == "strict") c.compare.mode = CompareMode::Strict;
      else if (mode == "token-float") c.compare.mode = CompareMode::TokenFloat;
      else fail(ErrorCode::ConfigError, "compare.mode must be strict or token-float");
      c.compare.abs_tolerance = cmp.value("tolerance", c.compare.abs_tolerance);
    }
    if (doc.contains("correctors")) {
      const json& cr = doc.at("correctors");
      c.chain = cr.value("chain", c.chain);
      c.budget = cr.value("budget", c.budget);
      auto enc = parse_encoding(cr.value("encoding", std::string("with-diagnostic")));
      if (!enc) fail(ErrorCode::ConfigError, "correctors.encoding must be with-diagnostic or code-only");
      c.encoding = *enc;
    }
    for (const auto& link : c.chain) {
      if (link == "rules") continue;
      if (link.rfind("backend:", 0) != 0 || !names.count(link.substr(8))) {
        fail(ErrorCode::ConfigError, "corrector '" + link + "' is neither rules nor a configured backend");
      }
    }
    c.output_dir = resolve(base, doc.value("output_dir", std::string("run")));
    c.seed = doc.value("seed", std::uint64_t{0});
    c.workers = doc.value("workers", static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    if (c.workers < 1) fail(ErrorCode::ConfigError, "workers must be >= 1");
    if (doc.contains("toolchains") && !doc.at("toolchains").is_null()) {
      c.toolchains = resolve(base, doc.at("toolchains").get<std::string>());
    }
    if (doc.contains("manual_fixes") && !doc.at("manual_fixes").is_null()) {
      c.manual_fixes = resolve(base, doc.at("manual_fixes").get<std::string>());
    }
    c.canonical_timestamps = doc.value("canonical_timestamps", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return c;
}

const BackendSpec& RunConfig::backend(const std::string& name) const {
  for (const auto& b : backends) {
    if (b.name == name) return b;
  }
  fail(ErrorCode::ConfigError, "unknown backend '" + name + "'");
}

ToolchainSet RunConfig::toolchain_set() const {
  return toolchains ? ToolchainSet::from_file(*toolchains) : ToolchainSet::from_env();
}

// ---------------------------------------------------------------------------
// Plumbing

namespace {

class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path) : out_(path, std::ios::app | std::ios::binary) {
    if (!out_) fail(ErrorCode::IoError, "cannot append to " + path.string());
  }

  void write(const json& doc) {
    std::lock_guard lock(mu_);
    out_ << doc.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  if (!fs::exists(path)) return out;
  for (const auto& line : read_lines(path)) {
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::IoError, path.string() + ": " + e.what());
    }
  }
  return out;
}

using Key = std::pair<std::string, std::string>;

Key key_of(const json& doc) {
  return {doc.at("task_id").get<std::string>(), doc.at("backend").get<std::string>()};
}

// Latest record per (task_id, backend), in key order.
std::map<Key, json> latest(const std::vector<json>& docs) {
  std::map<Key, json> out;
  for (const auto& d : docs) out[key_of(d)] = d;
  return out;
}

std::string timestamp(const RunConfig& config) {
  if (config.canonical_timestamps) return std::string(kCanonicalTimestamp);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunDir prepare(const RunConfig& config) {
  RunDir dir{config.output_dir};
  std::error_code ec;
  fs::create_directories(dir.root, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.root.string() + ": " + ec.message());
  write_file_atomic(dir.config(), config.raw.dump(2) + "\n");
  return dir;
}

template <class Job>
bool run_pool(std::size_t count, int workers, Job&& job) {
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      if (interrupt_flag().load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        interrupt_flag().store(true);
        return;
      }
    }
  };
  const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(worker);
  if (n > 0) worker();
  for (auto& t : threads) t.join();
  if (first_error) {
    interrupt_flag().store(false);
    std::rethrow_exception(first_error);
  }
  return next.load() < count || interrupt_flag().load();
}

struct TaskRef {
  TranslationTask task;
  const SourceProgram* program = nullptr;
};

std::map<std::string, TaskRef> index_tasks(const Corpus& corpus, const TargetMap& targets) {
  std::map<std::string, TaskRef> out;
  for (const auto& t : enumerate_tasks(corpus, targets)) out[t.task_id] = {t, corpus.find(t.program_id)};
  return out;
}

const TaskRef& task_ref(const std::map<std::string, TaskRef>& tasks, const std::string& id) {
  auto it = tasks.find(id);
  if (it == tasks.end()) {
    fail(ErrorCode::ConfigError, "task " + id + " is not part of the configured corpus and targets");
  }
  return it->second;
}

void summarize(std::ostream& log, const char* phase, const PhaseSummary& s) {
  log << phase << ": " << s.done << " done, " << s.skipped << " skipped, " << s.failed << " failed";
  if (s.interrupted) log << " (interrupted)";
  log << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// translate

PhaseSummary cmd_translate(const RunConfig& config, const TranslateOptions& options, std::ostream& log) {
  if (config.backends.empty()) fail(ErrorCode::ConfigError, "no backends configured");
  const Corpus corpus = load_manifest(config.corpus);
  const auto tasks = enumerate_tasks(corpus, config.targets);
  const RunDir dir = prepare(config);

  std::shared_ptr<Cassette> replay, record;
  if (options.replay) {
    if (!fs::exists(*options.replay)) {
      fail(ErrorCode::MissingFile, "replay cassette not found: " + options.replay->string());
    }
    replay = Cassette::open(*options.replay);
  }
  if (options.record) record = Cassette::open(*options.record);

  std::vector<std::unique_ptr<Backend>> backends;
  for (BackendSpec spec : config.backends) {
    std::shared_ptr<Cassette> cassette;
    if (replay) {
      spec.kind = BackendKind::Replay;
      spec.cassette = *options.replay;
      cassette = replay;
    } else if (spec.kind == BackendKind::Replay) {
      if (!spec.cassette || !fs::exists(*spec.cassette)) {
        fail(ErrorCode::MissingFile, "backend '" + spec.name + "' needs an existing cassette");
      }
      cassette = Cassette::open(*spec.cassette);
    }
    backends.push_back(std::make_unique<Backend>(spec, cassette));
  }

  std::set<Key> done;
  for (const auto& d : read_jsonl(dir.translations())) {
    if (!options.retry_errors || d.at("error").is_null()) done.insert(key_of(d));
  }

  struct Job {
    const TranslationTask* task;
    Backend* backend;
  };
  std::vector<Job> jobs;
  PhaseSummary summary;
  for (const auto& t : tasks) {
    for (const auto& b : backends) {
      if (done.count({t.task_id, b->spec().name})) ++summary.skipped;
      else jobs.push_back({&t, b.get()});
    }
  }

  JsonlWriter writer(dir.translations());
  std::atomic<std::size_t> ok{0}, failed{0};
  summary.interrupted = run_pool(jobs.size(), config.workers, [&](std::size_t i) {
    const auto& [task, backend] = jobs[i];
    const SourceProgram* program = corpus.find(task->program_id);
    const PromptTemplate& tmpl = config.templates.at(backend->spec().template_ref);
    const RenderedPrompt prompt = render_prompt(tmpl, program->code, task->source_lang, task->target_lang);
    json rec{{"task_id", task->task_id},
             {"program_id", task->program_id},
             {"backend", backend->spec().name},
             {"dataset", corpus.name},
             {"source_lang", std::string(to_id(task->source_lang))},
             {"target_lang", std::string(to_id(task->target_lang))},
             {"digest", request_digest(backend->spec().name, prompt.text)}};
    try {
      const Completion c = record ? backend->record(prompt, *record) : backend->complete(prompt);
      const ExtractionResult ex = extract_code(c.raw_text, task->target_lang, prompt.sentinel);
      rec["raw"] = c.raw_text;
      rec["code"] = ex.code;
      rec["method"] = std::string(to_string(ex.method));
      rec["warnings"] = ex.warnings;
      rec["error"] = nullptr;
      ++ok;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      rec["raw"] = "";
      rec["code"] = "";
      rec["method"] = nullptr;
      rec["warnings"] = json::array();
      rec["error"] = e.what();
      ++failed;
      log << "translate: " << task->task_id << " via " << backend->spec().name << ": " << e.what() << "\n";
    }
    rec["timestamp"] = timestamp(config);
    writer.write(rec);
  });
  summary.done = ok;
  summary.failed = failed;
  summarize(log, "translate", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// evaluate

PhaseSummary cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const RunDir dir{config.output_dir};
  const auto translations = latest(read_jsonl(dir.translations()));
  PhaseSummary summary;
  if (translations.empty()) {
    log << "nothing to evaluate\n";
    return summary;
  }
  const Corpus corpus = load_manifest(config.corpus);
  const auto tasks = index_tasks(corpus, config.targets);
  prepare(config);

  std::set<Key> evaluated;
  for (const auto& d : read_jsonl(dir.verdicts())) evaluated.insert(key_of(d));

  std::vector<const json*> pending;
  for (const auto& [key, rec] : translations) {
    if (!rec.at("error").is_null()) {
      ++summary.failed;
    } else if (evaluated.count(key)) {
      ++summary.skipped;
    } else {
      pending.push_back(&rec);
    }
  }
  if (pending.empty()) {
    summarize(log, "evaluate", summary);
    return summary;
  }

  const ToolchainSet toolchains = config.toolchain_set();
  json provenance = fs::exists(dir.provenance()) ? json::parse(read_file(dir.provenance())) : json::object();
  std::set<Language> needed;
  for (const json* rec : pending) needed.insert(*parse_language(rec->at("target_lang").get<std::string>()));
  for (Language lang : needed) {
    provenance["toolchains"][std::string(to_id(lang))] = probe_toolchain(toolchains.get(lang));
  }
  provenance["compare"] = config.compare.mode == CompareMode::Strict ? "strict" : "token-float";
  write_file_atomic(dir.provenance(), provenance.dump(2) + "\n");

  JsonlWriter verdicts(dir.verdicts());
  JsonlWriter results(dir.results());
  std::atomic<std::size_t> ok{0};
  summary.interrupted = run_pool(pending.size(), config.workers, [&](std::size_t i) {
    const json& rec = *pending[i];
    const TaskRef& ref = task_ref(tasks, rec.at("task_id").get<std::string>());
    const Verdict v = evaluate(rec.at("code").get<std::string>(), ref.task.target_lang, ref.program->tests,
                               config.limits, config.compare, toolchains);
    const std::string backend = rec.at("backend").get<std::string>();
    verdicts.write({{"task_id", ref.task.task_id}, {"backend", backend}, {"verdict", verdict_to_json(v)}});
    ResultRecord r;
    r.task_id = ref.task.task_id;
    r.backend = backend;
    r.dataset = corpus.name;
    r.source_lang = ref.task.source_lang;
    r.target_lang = ref.task.target_lang;
    r.outcome = v.outcome;
    r.tests_passed = v.tests_passed;
    r.tests_total = v.tests_total;
    r.timestamp = timestamp(config);
    results.write(record_to_json(r));
    ++ok;
  });
  summary.done = ok;
  summarize(log, "evaluate", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// classify

namespace {

std::map<Key, json> require_verdicts(const RunDir& dir) {
  auto verdicts = latest(read_jsonl(dir.verdicts()));
  if (verdicts.empty()) {
    fail(ErrorCode::PreconditionViolation, "no verdicts found; run `transjudge evaluate` first");
  }
  return verdicts;
}

json label_to_json(const CategoryLabel& l, const std::string& backend, const std::string& ts) {
  return {{"task_id", l.task_id},
          {"backend", backend},
          {"category", std::string(to_string(l.category))},
          {"source", std::string(to_string(l.source))},
          {"evidence", l.evidence},
          {"timestamp", ts}};
}

CategoryLabel label_from_json(const json& doc) {
  CategoryLabel l;
  l.task_id = doc.at("task_id").get<std::string>();
  l.category = parse_category(doc.at("category").get<std::string>()).value_or(ErrorCategory::Other);
  l.source = doc.value("source", std::string()) == "Manual" ? LabelSource::Manual : LabelSource::Heuristic;
  l.evidence = doc.value("evidence", std::string());
  return l;
}

}  // namespace

PhaseSummary cmd_classify(const RunConfig& config, const std::optional<fs::path>& labels_csv,
                          std::ostream& log) {
  const RunDir dir{config.output_dir};
  const auto verdicts = require_verdicts(dir);
  const auto translations = latest(read_jsonl(dir.translations()));
  const Corpus corpus = load_manifest(config.corpus);
  const auto tasks = index_tasks(corpus, config.targets);

  std::map<Key, CategoryLabel> current;
  for (const auto& [key, doc] : latest(read_jsonl(dir.labels()))) current[key] = label_from_json(doc);

  PhaseSummary summary;
  std::map<Key, CategoryLabel> fresh;
  for (const auto& [key, doc] : verdicts) {
    const Verdict v = verdict_from_json(doc.at("verdict"));
    if (v.outcome == Outcome::Success) continue;
    if (current.count(key)) {
      ++summary.skipped;
      continue;
    }
    const TaskRef& ref = task_ref(tasks, key.first);
    auto tr = translations.find(key);
    const std::string code = tr == translations.end() ? std::string() : tr->second.at("code").get<std::string>();
    fresh[key] = classify(key.first, v, code, ref.program->code, ref.task.target_lang, ref.task.source_lang);
  }

  std::map<Key, CategoryLabel> merged = current;
  for (const auto& [key, l] : fresh) merged[key] = l;
  if (labels_csv) {
    std::map<std::string, std::vector<CategoryLabel>> by_backend;
    for (const auto& [key, l] : merged) by_backend[key.second].push_back(l);
    std::set<std::string> known;
    for (const auto& [key, l] : merged) known.insert(key.first);
    std::set<std::string> warned;
    for (const auto& [backend, labels] : by_backend) {
      const MergeResult m = merge_labels(labels, labels_csv);
      for (const auto& l : m.labels) merged[{l.task_id, backend}] = l;
      for (const auto& w : m.warnings) {
        const std::string prefix = "UnknownTaskId: ";
        const std::string id = w.substr(prefix.size(), w.find(' ', prefix.size()) - prefix.size());
        if (!known.count(id) && warned.insert(w).second) log << "warning: " << w << "\n";
      }
    }
  }

  prepare(config);
  JsonlWriter writer(dir.labels());
  for (const auto& [key, l] : merged) {
    auto it = current.find(key);
    if (it != current.end() && it->second == l) continue;
    writer.write(label_to_json(l, key.second, timestamp(config)));
    ++summary.done;
  }
  summarize(log, "classify", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// repair

PhaseSummary cmd_repair(const RunConfig& config, const std::vector<std::string>& chain_arg,
                        std::optional<int> budget, std::ostream& log) {
  const RunDir dir{config.output_dir};
  const auto verdicts = require_verdicts(dir);
  const auto translations = latest(read_jsonl(dir.translations()));
  const Corpus corpus = load_manifest(config.corpus);
  const auto tasks = index_tasks(corpus, config.targets);

  const std::vector<std::string> chain_names = chain_arg.empty() ? config.chain : chain_arg;
  std::string chain_id;
  std::vector<Corrector> chain;
  for (const auto& link : chain_names) {
    chain_id += (chain_id.empty() ? "" : ",") + link;
    if (link == "rules") {
      chain.push_back(Corrector::rule_engine());
      continue;
    }
    if (link.rfind("backend:", 0) != 0) {
      fail(ErrorCode::ConfigError, "corrector '" + link + "' is neither rules nor backend:NAME");
    }
    const BackendSpec& spec = config.backend(link.substr(8));
    std::shared_ptr<Cassette> cassette;
    if (spec.kind == BackendKind::Replay && spec.cassette) cassette = Cassette::open(*spec.cassette);
    chain.push_back(Corrector::model(std::make_shared<Backend>(spec, cassette)));
  }
  if (chain.empty()) fail(ErrorCode::ConfigError, "corrector chain is empty");

  RepairSettings settings;
  settings.budget = budget.value_or(config.budget);
  settings.limits = config.limits;
  settings.policy = config.compare;
  settings.encoding = config.encoding;
  settings.toolchains = config.toolchain_set();

  std::set<std::tuple<std::string, std::string, std::string>> done;
  for (const auto& d : read_jsonl(dir.attempts())) {
    done.insert({d.at("task_id").get<std::string>(), d.at("backend").get<std::string>(),
                  d.at("chain").get<std::string>()});
  }

  PhaseSummary summary;
  std::vector<std::pair<Key, Verdict>> pending;
  for (const auto& [key, doc] : verdicts) {
    Verdict v = verdict_from_json(doc.at("verdict"));
    if (v.outcome == Outcome::Success) continue;
    if (done.count({key.first, key.second, chain_id})) {
      ++summary.skipped;
      continue;
    }
    pending.emplace_back(key, std::move(v));
  }
  if (pending.empty()) {
    summarize(log, "repair", summary);
    return summary;
  }

  prepare(config);
  JsonlWriter attempts(dir.attempts());
  JsonlWriter results(dir.results());
  std::atomic<std::size_t> ok{0}, failed{0};
  summary.interrupted = run_pool(pending.size(), config.workers, [&](std::size_t i) {
    const auto& [key, verdict] = pending[i];
    const TaskRef& ref = task_ref(tasks, key.first);
    auto tr = translations.find(key);
    RepairRequest req{ref.task, ref.program->code,
                      tr == translations.end() ? std::string() : tr->second.at("code").get<std::string>(),
                      verdict, ref.program->tests};
    const RepairAttempt a = repair_task(req, chain, settings);
    json doc = attempt_to_json(a);
    doc["backend"] = key.second;
    doc["chain"] = chain_id;
    doc["timestamp"] = timestamp(config);
    attempts.write(doc);

    ResultRecord r;
    r.task_id = key.first;
    r.backend = key.second;
    r.dataset = corpus.name;
    r.source_lang = ref.task.source_lang;
    r.target_lang = ref.task.target_lang;
    r.phase = "repair";
    r.outcome = a.after.outcome;
    r.tests_passed = a.after.tests_passed;
    r.tests_total = a.after.tests_total;
    r.corrector = chain_id;
    r.before_outcome = a.before.outcome;
    r.timestamp = timestamp(config);
    results.write(record_to_json(r));
    (a.success ? ok : failed)++;
  });
  summary.done = ok;
  summary.failed = failed;
  log << "repair: " << ok << " repaired of " << (ok + failed) << " attempted\n";
  summarize(log, "repair", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// export-pairs

ExportResult cmd_export_pairs(const RunConfig& config, const std::optional<fs::path>& manual_fixes,
                              const std::optional<fs::path>& out, std::ostream& log) {
  const RunDir dir{config.output_dir};
  const auto verdicts = require_verdicts(dir);
  const auto translations = latest(read_jsonl(dir.translations()));
  const Corpus corpus = load_manifest(config.corpus);
  const auto tasks = index_tasks(corpus, config.targets);

  std::map<Key, RepairAttempt> attempts;
  for (const auto& d : read_jsonl(dir.attempts())) {
    RepairAttempt a = attempt_from_json(d);
    const Key key{a.task_id, d.at("backend").get<std::string>()};
    auto it = attempts.find(key);
    if (it == attempts.end() || !it->second.success) attempts[key] = std::move(a);
  }
  std::map<Key, ErrorCategory> categories;
  for (const auto& [key, doc] : latest(read_jsonl(dir.labels()))) {
    categories[key] = label_from_json(doc).category;
  }

  std::vector<PairSource> sources;
  for (const auto& [key, doc] : verdicts) {
    const Verdict v = verdict_from_json(doc.at("verdict"));
    if (v.outcome == Outcome::Success) continue;
    const TaskRef& ref = task_ref(tasks, key.first);
    PairSource src;
    if (auto it = attempts.find(key); it != attempts.end()) {
      src.attempt = it->second;
    } else {
      auto tr = translations.find(key);
      src.attempt.task_id = key.first;
      src.attempt.before = v;
      src.attempt.after = v;
      src.attempt.code_before = tr == translations.end() ? std::string() : tr->second.at("code").get<std::string>();
      src.attempt.code_after = src.attempt.code_before;
    }
    src.task = ref.task;
    src.tests = ref.program->tests;
    src.origin_backend = key.second;
    if (auto c = categories.find(key); c != categories.end()) src.category = c->second;
    sources.push_back(std::move(src));
  }

  prepare(config);
  const fs::path target = out.value_or(dir.pairs());
  auto fixes = manual_fixes ? manual_fixes : config.manual_fixes;
  ExportResult result = export_pairs(sources, fixes, target, config.limits, config.compare,
                                     config.toolchain_set());
  for (const auto& r : result.rejected) log << r << "\n";
  log << "export-pairs: " << result.count << " pair(s) written to " << target.string() << "\n";
  return result;
}

// ---------------------------------------------------------------------------
// report

std::vector<fs::path> cmd_report(const RunConfig& config, const std::vector<std::string>& tables,
                                 const std::string& format_name, std::ostream& log) {
  const RunDir dir{config.output_dir};
  auto format = parse_format(format_name);
  if (!format) fail(ErrorCode::ConfigError, "unknown report format '" + format_name + "'");
  for (const auto& t : tables) {
    if (std::find(kAllTables.begin(), kAllTables.end(), t) == kAllTables.end()) {
      fail(ErrorCode::ConfigError, "unknown table '" + t + "'");
    }
  }

  std::vector<ResultRecord> records;
  if (fs::exists(dir.results())) records = read_records(dir.results());
  if (std::none_of(records.begin(), records.end(), [](const ResultRecord& r) { return r.phase == "translate"; })) {
    fail(ErrorCode::PreconditionViolation, "no verdicts found; run `transjudge evaluate` first");
  }
  std::map<Key, ErrorCategory> categories;
  for (const auto& [key, doc] : latest(read_jsonl(dir.labels()))) {
    categories[key] = label_from_json(doc).category;
  }
  // Later records for the same (task, backend, phase, corrector) replace earlier ones.
  std::map<std::tuple<std::string, std::string, std::string, std::string>, ResultRecord> unique;
  for (auto& r : records) {
    if (r.phase == "translate") {
      if (auto c = categories.find({r.task_id, r.backend}); c != categories.end()) r.category = c->second;
    }
    unique[{r.task_id, r.backend, r.phase, r.corrector.value_or("")}] = r;
  }
  records.clear();
  for (auto& [k, r] : unique) records.push_back(std::move(r));

  std::error_code ec;
  fs::create_directories(dir.reports(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.reports().string());
  std::vector<fs::path> written;
  for (const auto& name : tables) {
    Table table;
    if (name == "success") table = success_table(records);
    else if (name == "breakdown") table = error_breakdown(records);
    else if (name == "category") table = category_table(records);
    else if (name == "repair") table = repair_table(records);
    else table = transition_table(transition_matrix(records));
    const fs::path path = dir.reports() / (name + "." + std::string(file_extension(*format)));
    emit(table, *format, path);
    written.push_back(path);
    log << "report: wrote " << path.string() << "\n";
  }
  return written;
}

}  // namespace transjudge
