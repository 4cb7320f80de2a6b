#include "transjudge/error.hpp"

namespace transjudge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidTargetMap: return "InvalidTargetMap";
    case ErrorCode::BadRatios: return "BadRatios";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::PlaceholderMissing: return "PlaceholderMissing";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::NonZeroExit: return "NonZeroExit";
    case ErrorCode::CassetteMiss: return "CassetteMiss";
    case ErrorCode::CassetteWriteError: return "CassetteWriteError";
    case ErrorCode::ToolchainMissing: return "ToolchainMissing";
    case ErrorCode::SandboxFailure: return "SandboxFailure";
    case ErrorCode::MalformedLabelFile: return "MalformedLabelFile";
    case ErrorCode::UnverifiedValidCode: return "UnverifiedValidCode";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace transjudge
