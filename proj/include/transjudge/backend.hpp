#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transjudge/prompt.hpp"

namespace transjudge {

enum class BackendKind { Http, Command, Replay };

std::string_view to_string(BackendKind kind);

struct BackendSpec {
  std::string name;  // includes the model version, e.g. "chatgpt-gpt-3.5-turbo-0301"
  BackendKind kind = BackendKind::Replay;
  std::string endpoint_or_cmd;
  double timeout_seconds = 120.0;
  int max_retries = 3;
  std::optional<double> rate_limit_per_minute;
  std::string template_ref = "chat";
  std::optional<std::string> api_key_env;
  std::optional<std::filesystem::path> cassette;
  int max_tokens = 2048;
  double backoff_base_seconds = 1.0;
  double backoff_cap_seconds = 30.0;
};

/// Throws Error(ConfigError) on a spec that breaks its invariants.
void validate_spec(const BackendSpec& spec);

BackendSpec backend_spec_from_json(const nlohmann::json& doc);
nlohmann::json backend_spec_to_json(const BackendSpec& spec);

struct Completion {
  std::string raw_text;
  std::string backend_name;
  std::int64_t latency_ms = 0;
  int attempt = 0;
};

/// Persisted prompt-digest -> completion map (JSONL on disk). Safe to share
/// between threads; saves go through write-temp-then-rename.
class Cassette {
 public:
  Cassette() = default;
  explicit Cassette(std::filesystem::path path);

  /// Missing file means an empty cassette that will be created on save.
  static std::shared_ptr<Cassette> open(const std::filesystem::path& path);

  std::optional<Completion> lookup(const std::string& digest) const;
  /// Last write wins for an existing digest.
  void put(const std::string& digest, const std::string& backend, const std::string& text);
  void save() const;

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  struct Entry {
    std::string digest;
    std::string backend;
    std::string text;
  };

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Shared per-backend token bucket (burst of one request).
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

/// Backoff before retry number `retry` (1-based): base * 2^(retry-1), capped,
/// then scaled by a jitter factor drawn from [0.8, 1.2].
std::chrono::milliseconds backoff_delay(int retry, double base_seconds, double cap_seconds,
                                        double jitter_unit);

class Backend {
 public:
  /// Replay backends need a cassette; for the others it is ignored here and
  /// only used by record().
  explicit Backend(BackendSpec spec, std::shared_ptr<Cassette> cassette = nullptr);

  const BackendSpec& spec() const { return spec_; }

  Completion complete(const RenderedPrompt& prompt);

  /// complete() followed by persisting the result into `cassette`.
  Completion record(const RenderedPrompt& prompt, Cassette& cassette);

 private:
  Completion complete_http(const RenderedPrompt& prompt);
  Completion complete_command(const RenderedPrompt& prompt);
  Completion complete_replay(const RenderedPrompt& prompt);

  BackendSpec spec_;
  std::shared_ptr<Cassette> cassette_;
  std::unique_ptr<RateLimiter> limiter_;
};

}  // namespace transjudge
