#pragma once

#include <stdexcept>
#include <string>

namespace rsing {

enum class ErrorCode {
    DegenerateLaw,
    AmbiguousMode,
    InvalidLaw,
    BiasZero,
    OutOfRegime,
    ZeroScaleEntry,
    EmptyLambda,
    TooLarge,
    SandwichViolation,
    NonFinite,
    AuditFailure,
    ConfigError,
    InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures derive from this; the code lets the CLI map to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rsing
