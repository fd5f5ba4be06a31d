#pragma once

// Shared helpers for the unit tests: parsing shorthands and a fresh
// checker state per test.

#include "duckcheck/frontend.hpp"
#include "duckcheck/subtyping.hpp"
#include "duckcheck/typing.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace duck::test {

inline RefType ty(const std::string &s) {
    auto sc = parse_scheme(s);
    return sc.body;
}
inline Scheme scheme(const std::string &s) { return parse_scheme(s); }
inline FormulaPtr fml(const std::string &s) { return parse_formula(s); }

inline DefEnv list_defs() {
    DefEnv d;
    d.emplace("List", builtin_list());
    return d;
}

struct Session {
    CheckerState st;
    Subtyper sub;
    explicit Session(DefEnv d = list_defs(), CheckOptions o = {})
        : st(std::move(d), SolverConfig{}, o), sub(st) {}
};

inline std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string source_path(const std::string &rel) { return std::string(DUCK_SOURCE_DIR) + "/" + rel; }

/// A corpus file with its final expression replaced by `client`.
inline std::string with_client(const std::string &file, const std::string &client) {
    auto text = slurp(source_path("corpus/" + file));
    while (!text.empty() && text.back() == '\n') text.pop_back();
    auto last = text.substr(text.rfind('\n') + 1);
    auto head = text.substr(0, text.rfind('\n') + 1);
    return head + (last.rfind("in ", 0) == 0 ? "in " : "") + client + "\n";
}

}  // namespace duck::test
