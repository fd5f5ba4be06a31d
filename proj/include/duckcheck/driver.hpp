#pragma once

// Checking a source file end to end and reporting structured diagnostics.

#include "duckcheck/frontend.hpp"
#include "duckcheck/smt.hpp"
#include "duckcheck/subtyping.hpp"

#include <optional>
#include <string>
#include <vector>

namespace duck {

struct Diagnostic {
    std::string severity = "error";
    std::string rule;  // a typing/subtyping rule name, or "plumbing"
    std::string message;
    int line = 0, col = 0;
    std::optional<std::string> clause;
    std::vector<std::string> candidates;
};

enum class Status { Ok, TypeError, Error };
const char *to_string(Status s);

struct CheckReport {
    std::string file;
    Status status = Status::Error;
    std::optional<Scheme> scheme;
    std::vector<std::pair<std::string, Scheme>> toplevel;
    std::vector<Diagnostic> diagnostics;
    long smt_queries = 0;
    double wall_ms = 0;
    std::optional<Program> program;
};

struct DriverOptions {
    SolverConfig solver;
    CheckOptions check;
};

/// parse, load, check. Never throws for user-facing failures.
CheckReport check_source(const std::string &text, const std::string &file, const DriverOptions &opts);

/// Reads a file and checks it; unreadable files give Status::Error.
CheckReport check_file(const std::string &path, const DriverOptions &opts);

/// The `-- expect: ok|typeerror` header, if present.
std::optional<std::string> expectation(const std::string &text);

/// Human-readable rendering of one diagnostic.
std::string render(const Diagnostic &d, const std::string &file);

}  // namespace duck
