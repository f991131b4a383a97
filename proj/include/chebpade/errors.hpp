#pragma once

#include <stdexcept>
#include <string>

namespace chebpade {

// Failure taxonomy shared by the library and the CLI.  The CLI maps the
// category to its process exit code, so additions here must keep the
// existing numeric meanings stable.
enum class ErrorKind {
    geometry,   // bad input geometry: coincident or collinear anchors, ...
    solver,     // an iteration failed to converge within its budget
    precision,  // requested accuracy unreachable, retries exhausted
    domain,     // argument outside the documented domain of an operation
    internal    // invariant breakage that indicates a bug, not bad input
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Process exit code used by the command line tool.
    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::geometry:  return 2;
            case ErrorKind::solver:    return 3;
            case ErrorKind::precision: return 4;
            default:                   return 1;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_geometry(const std::string& msg)  { throw Error(ErrorKind::geometry, msg); }
[[noreturn]] inline void fail_solver(const std::string& msg)    { throw Error(ErrorKind::solver, msg); }
[[noreturn]] inline void fail_precision(const std::string& msg) { throw Error(ErrorKind::precision, msg); }
[[noreturn]] inline void fail_domain(const std::string& msg)    { throw Error(ErrorKind::domain, msg); }
[[noreturn]] inline void fail_internal(const std::string& msg)  { throw Error(ErrorKind::internal, msg); }

} // namespace chebpade
