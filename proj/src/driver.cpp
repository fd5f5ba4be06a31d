#include "duckcheck/driver.hpp"

#include "duckcheck/typing.hpp"
#include "duckcheck/wellformed.hpp"

#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>

namespace duck {

const char *to_string(Status s) {
    switch (s) {
    case Status::Ok: return "ok";
    case Status::TypeError: return "typeerror";
    case Status::Error: return "error";
    }
    return "?";
}

namespace {

Diagnostic plumbing(const std::string &msg, int line = 0, int col = 0) {
    Diagnostic d;
    d.rule = "plumbing";
    d.message = msg;
    d.line = line;
    d.col = col;
    return d;
}

}  // namespace

CheckReport check_source(const std::string &text, const std::string &file, const DriverOptions &opts) {
    auto t0 = std::chrono::steady_clock::now();
    CheckReport r;
    r.file = file;
    auto finish = [&] {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };
    try {
        r.program = load_program(text);
    } catch (const ParseError &e) {
        r.diagnostics.push_back(plumbing(std::string("parse error: ") + e.what(), e.pos.line, e.pos.col));
        return finish();
    } catch (const DuplicateCtor &e) {
        Diagnostic d;
        d.rule = "WF-TypeDef";
        d.message = e.what();
        r.diagnostics.push_back(d);
        r.status = Status::TypeError;
        return finish();
    } catch (const WfError &e) {
        Diagnostic d;
        d.rule = "WF-TypeDef";
        d.message = e.what();
        r.diagnostics.push_back(d);
        r.status = Status::TypeError;
        return finish();
    }
    auto &prog = *r.program;
    try {
        CheckerState st(prog.defs, opts.solver, opts.check);
        try {
            auto res = check_program(st, prog);
            r.scheme = res.scheme;
            r.toplevel = res.toplevel;
            r.status = Status::Ok;
        } catch (const TypeError &e) {
            Diagnostic d;
            d.rule = e.rule;
            d.message = e.what();
            d.clause = e.clause;
            d.candidates = e.candidates;
            if (auto it = prog.positions.find(e.binder); it != prog.positions.end()) {
                d.line = it->second.line;
                d.col = it->second.col;
            }
            r.diagnostics.push_back(d);
            r.status = Status::TypeError;
        } catch (const FuelExhausted &e) {
            Diagnostic d;
            d.rule = "CA-ImpSyn";
            d.message = e.what();
            r.diagnostics.push_back(d);
            r.status = Status::TypeError;
        }
        r.smt_queries = st.solver.stats().queries;
    } catch (const SolverError &e) {
        r.diagnostics.push_back(plumbing(std::string("solver error: ") + e.what()));
        r.status = Status::Error;
    }
    return finish();
}

CheckReport check_file(const std::string &path, const DriverOptions &opts) {
    std::ifstream in(path);
    if (!in) {
        CheckReport r;
        r.file = path;
        r.diagnostics.push_back(plumbing("cannot read " + path));
        return r;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return check_source(ss.str(), path, opts);
}

std::optional<std::string> expectation(const std::string &text) {
    static const std::regex re(R"(--\s*expect:\s*(ok|typeerror))");
    std::smatch m;
    if (std::regex_search(text, m, re)) return m[1].str();
    return std::nullopt;
}

std::string render(const Diagnostic &d, const std::string &file) {
    std::ostringstream o;
    o << file << ":" << d.line << ":" << d.col << ": " << d.severity << " [" << d.rule << "] " << d.message << "\n";
    if (d.clause) o << "  failing clause: " << *d.clause << "\n";
    for (auto &c : d.candidates) o << "  candidate: " << c << "\n";
    return o.str();
}

}  // namespace duck
