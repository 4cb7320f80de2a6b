#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace transjudge {

enum class ErrorCode {
  MissingFile,
  MalformedManifest,
  DuplicateId,
  InvalidTargetMap,
  BadRatios,
  EmptyInput,
  PlaceholderMissing,
  PreconditionViolation,
  Timeout,
  TransportError,
  NonZeroExit,
  CassetteMiss,
  CassetteWriteError,
  ToolchainMissing,
  SandboxFailure,
  MalformedLabelFile,
  UnverifiedValidCode,
  EmptyGroup,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the CLI
// exit-code policy) can tell environment problems from data problems.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace transjudge
