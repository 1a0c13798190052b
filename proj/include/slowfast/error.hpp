#pragma once

#include <stdexcept>
#include <string>

namespace slowfast {

enum class ErrorKind {
    contract,      // dimension mismatch, malformed arguments
    overflow,      // non-finite values produced
    stiffness,     // step-size underflow
    numerical,     // iteration failed to converge
    domain,        // parameter outside the admissible set
    unsupported,   // operation undefined for the given input
    precondition,  // caller-side assumption violated
    degenerate,    // singular structure (rank deficiency, zero eigenvalue multiplicity)
    config,        // configuration / schema error
    io,            // file system failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Prefixes the message with a pipeline stage tag, keeping the kind.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& inner)
        : Error(inner.kind(), "[" + stage + "] " + inner.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg)
{
    if (!cond) fail(kind, msg);
}

}  // namespace slowfast
