#include "transjudge/backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include "transjudge/digest.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/process.hpp"

namespace transjudge {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Command: return "command";
    case BackendKind::Replay: return "replay";
  }
  return "?";
}

void validate_spec(const BackendSpec& spec) {
  if (spec.name.empty()) fail(ErrorCode::ConfigError, "backend name is empty");
  if (!(spec.timeout_seconds > 0)) fail(ErrorCode::ConfigError, spec.name + ": timeout must be > 0");
  if (spec.max_retries < 0) fail(ErrorCode::ConfigError, spec.name + ": max_retries must be >= 0");
  if (spec.rate_limit_per_minute && !(*spec.rate_limit_per_minute > 0)) {
    fail(ErrorCode::ConfigError, spec.name + ": rate_limit must be > 0");
  }
  if (spec.kind == BackendKind::Replay && !spec.cassette) {
    fail(ErrorCode::ConfigError, spec.name + ": replay backends need a cassette path");
  }
  if (spec.kind != BackendKind::Replay && spec.endpoint_or_cmd.empty()) {
    fail(ErrorCode::ConfigError, spec.name + ": endpoint/command is empty");
  }
}

BackendSpec backend_spec_from_json(const json& doc) {
  BackendSpec s;
  s.name = doc.value("name", std::string());
  const std::string kind = doc.value("kind", std::string("replay"));
  if (kind == "http") s.kind = BackendKind::Http;
  else if (kind == "command") s.kind = BackendKind::Command;
  else if (kind == "replay") s.kind = BackendKind::Replay;
  else fail(ErrorCode::ConfigError, "backend '" + s.name + "': unknown kind '" + kind + "'");
  if (doc.contains("endpoint")) s.endpoint_or_cmd = doc.at("endpoint").get<std::string>();
  if (doc.contains("command")) s.endpoint_or_cmd = doc.at("command").get<std::string>();
  s.timeout_seconds = doc.value("timeout", s.timeout_seconds);
  s.max_retries = doc.value("max_retries", s.max_retries);
  if (doc.contains("rate_limit") && !doc.at("rate_limit").is_null()) {
    s.rate_limit_per_minute = doc.at("rate_limit").get<double>();
  }
  s.template_ref = doc.value("template", s.template_ref);
  if (doc.contains("api_key_env") && !doc.at("api_key_env").is_null()) {
    s.api_key_env = doc.at("api_key_env").get<std::string>();
  }
  if (doc.contains("cassette") && !doc.at("cassette").is_null()) {
    s.cassette = doc.at("cassette").get<std::string>();
  }
  s.max_tokens = doc.value("max_tokens", s.max_tokens);
  s.backoff_base_seconds = doc.value("backoff_base", s.backoff_base_seconds);
  s.backoff_cap_seconds = doc.value("backoff_cap", s.backoff_cap_seconds);
  return s;
}

json backend_spec_to_json(const BackendSpec& s) {
  json doc;
  doc["name"] = s.name;
  doc["kind"] = std::string(to_string(s.kind));
  if (s.kind == BackendKind::Command) doc["command"] = s.endpoint_or_cmd;
  else if (s.kind == BackendKind::Http) doc["endpoint"] = s.endpoint_or_cmd;
  doc["timeout"] = s.timeout_seconds;
  doc["max_retries"] = s.max_retries;
  doc["rate_limit"] = s.rate_limit_per_minute ? json(*s.rate_limit_per_minute) : json(nullptr);
  doc["template"] = s.template_ref;
  doc["api_key_env"] = s.api_key_env ? json(*s.api_key_env) : json(nullptr);
  doc["cassette"] = s.cassette ? json(s.cassette->string()) : json(nullptr);
  doc["max_tokens"] = s.max_tokens;
  doc["backoff_base"] = s.backoff_base_seconds;
  doc["backoff_cap"] = s.backoff_cap_seconds;
  return doc;
}

// ---------------------------------------------------------------------------
// Cassette

Cassette::Cassette(fs::path path) : path_(std::move(path)) {}

std::shared_ptr<Cassette> Cassette::open(const fs::path& path) {
  auto c = std::make_shared<Cassette>(path);
  if (!fs::exists(path)) return c;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    json doc;
    try {
      doc = json::parse(line);
      c->put(doc.at("digest").get<std::string>(), doc.at("backend").get<std::string>(),
             doc.at("text").get<std::string>());
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError,
           path.string() + ":" + std::to_string(lineno) + ": bad cassette line: " + e.what());
    }
  }
  return c;
}

std::optional<Completion> Cassette::lookup(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(digest);
  if (it == index_.end()) return std::nullopt;
  const Entry& e = entries_[it->second];
  return Completion{e.text, e.backend, 0, 0};
}

void Cassette::put(const std::string& digest, const std::string& backend,
                   const std::string& text) {
  std::lock_guard lock(mu_);
  auto it = index_.find(digest);
  if (it != index_.end()) {
    entries_[it->second] = {digest, backend, text};
    return;
  }
  index_.emplace(digest, entries_.size());
  entries_.push_back({digest, backend, text});
}

void Cassette::save() const {
  std::string body;
  {
    std::lock_guard lock(mu_);
    for (const auto& e : entries_) {
      json doc;
      doc["digest"] = e.digest;
      doc["backend"] = e.backend;
      doc["text"] = e.text;
      body += doc.dump();
      body += '\n';
    }
  }
  static std::mutex writer;
  std::lock_guard lock(writer);
  try {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    write_file_atomic(path_, body);
  } catch (const std::exception& e) {
    fail(ErrorCode::CassetteWriteError, path_.string() + ": " + e.what());
  }
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Rate limiting and backoff

RateLimiter::RateLimiter(double per_minute)
    : interval_(std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(60.0 / per_minute))),
      next_(Clock::now()) {}

void RateLimiter::acquire() {
  Clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::chrono::milliseconds backoff_delay(int retry, double base_seconds, double cap_seconds,
                                        double jitter_unit) {
  const double raw = std::min(cap_seconds, base_seconds * std::pow(2.0, retry - 1));
  const double factor = 0.8 + 0.4 * std::clamp(jitter_unit, 0.0, 1.0);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(raw * factor * 1000.0)));
}

namespace {

double jitter_draw() {
  thread_local std::mt19937_64 rng(std::random_device{}());
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::ConfigError, "endpoint is not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Backend

Backend::Backend(BackendSpec spec, std::shared_ptr<Cassette> cassette)
    : spec_(std::move(spec)), cassette_(std::move(cassette)) {
  validate_spec(spec_);
  if (spec_.rate_limit_per_minute) {
    limiter_ = std::make_unique<RateLimiter>(*spec_.rate_limit_per_minute);
  }
  if (spec_.kind == BackendKind::Replay && !cassette_) {
    cassette_ = Cassette::open(*spec_.cassette);
  }
}

Completion Backend::complete(const RenderedPrompt& prompt) {
  switch (spec_.kind) {
    case BackendKind::Http: return complete_http(prompt);
    case BackendKind::Command: return complete_command(prompt);
    case BackendKind::Replay: return complete_replay(prompt);
  }
  fail(ErrorCode::ConfigError, "unknown backend kind");
}

Completion Backend::record(const RenderedPrompt& prompt, Cassette& cassette) {
  if (spec_.kind == BackendKind::Replay) {
    fail(ErrorCode::PreconditionViolation, spec_.name + ": cannot record from a replay backend");
  }
  Completion c = complete(prompt);
  cassette.put(request_digest(spec_.name, prompt.text), spec_.name, c.raw_text);
  cassette.save();
  return c;
}

Completion Backend::complete_replay(const RenderedPrompt& prompt) {
  const std::string digest = request_digest(spec_.name, prompt.text);
  auto hit = cassette_->lookup(digest);
  if (!hit) fail(ErrorCode::CassetteMiss, spec_.name + ": no recording for digest " + digest);
  hit->backend_name = spec_.name;
  return *hit;
}

Completion Backend::complete_command(const RenderedPrompt& prompt) {
  if (limiter_) limiter_->acquire();
  ProcessSpec ps;
  ps.argv = {"/bin/sh", "-c", spec_.endpoint_or_cmd};
  ps.stdin_data = prompt.text;
  ps.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(spec_.timeout_seconds * 1000));
  ps.max_output_bytes = std::size_t{64} << 20;
  const auto started = Clock::now();
  ProcessResult r = run_process(ps);
  if (r.timed_out) {
    fail(ErrorCode::Timeout, spec_.name + ": command exceeded " +
                                 std::to_string(spec_.timeout_seconds) + "s");
  }
  if (!r.ok()) {
    const std::string status = r.exit_code ? "exit " + std::to_string(*r.exit_code)
                                           : "signal " + std::to_string(r.term_signal.value_or(0));
    fail(ErrorCode::NonZeroExit, spec_.name + ": " + status + ": " + r.err);
  }
  return Completion{std::move(r.out), spec_.name, elapsed_ms(started), 0};
}

Completion Backend::complete_http(const RenderedPrompt& prompt) {
  const ParsedUrl url = parse_url(spec_.endpoint_or_cmd);
  json body;
  body["prompt"] = prompt.text;
  body["max_tokens"] = spec_.max_tokens;
  body["stop"] = prompt.sentinel ? json::array({*prompt.sentinel}) : json(nullptr);
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (spec_.api_key_env) {
    if (const char* key = std::getenv(spec_.api_key_env->c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto timeout = std::chrono::duration<double>(spec_.timeout_seconds);
  const auto secs = static_cast<time_t>(spec_.timeout_seconds);
  const auto usecs = static_cast<time_t>((spec_.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff_delay(attempt, spec_.backoff_base_seconds,
                                                spec_.backoff_cap_seconds, jitter_draw()));
    }
    if (limiter_) limiter_->acquire();

    httplib::Client client(url.origin);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    const auto started = Clock::now();
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_was_timeout = Clock::now() - started >= timeout ||
                         res.error() == httplib::Error::ConnectionTimeout;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        json doc = json::parse(res->body);
        return Completion{doc.at("text").get<std::string>(), spec_.name, elapsed_ms(started),
                          attempt};
      } catch (const json::exception& e) {
        fail(ErrorCode::TransportError, spec_.name + ": malformed response body: " + e.what());
      }
    }
    last_was_timeout = false;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;  // client errors are not retried
  }
  fail(last_was_timeout ? ErrorCode::Timeout : ErrorCode::TransportError,
       spec_.name + ": " + last_error);
}

}  // namespace transjudge
