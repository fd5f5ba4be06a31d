// duckcheck: check, run and corpus commands.

#include "duckcheck/driver.hpp"
#include "duckcheck/eval.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace duck;
using nlohmann::json;

namespace {

json to_json(const CheckReport &r) {
    json j;
    j["file"] = r.file;
    j["status"] = to_string(r.status);
    if (r.scheme) j["scheme"] = to_string(*r.scheme);
    j["diagnostics"] = json::array();
    for (auto &d : r.diagnostics) {
        json k{{"severity", d.severity}, {"rule", d.rule}, {"message", d.message}, {"line", d.line}, {"col", d.col}};
        if (d.clause) k["clause"] = *d.clause;
        if (!d.candidates.empty()) k["candidates"] = d.candidates;
        j["diagnostics"].push_back(k);
    }
    j["stats"] = {{"smt_queries", r.smt_queries}, {"wall_ms", r.wall_ms}};
    return j;
}

void print_report(const CheckReport &r) {
    if (r.status == Status::Ok) {
        for (auto &[x, s] : r.toplevel) std::cout << "val " << x << " :: " << to_string(s) << "\n";
        std::cout << "- :: " << to_string(*r.scheme) << "\n";
    }
    for (auto &d : r.diagnostics) std::cerr << render(d, r.file);
}

int exit_code(const CheckReport &r) {
    switch (r.status) {
    case Status::Ok: return 0;
    case Status::TypeError: return 1;
    case Status::Error: return 2;
    }
    return 2;
}

std::optional<std::string> slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"duckcheck: nested refinement type checker"};
    app.require_subcommand(1);

    DriverOptions opts;
    std::string file, dir;
    bool as_json = false;

    auto *check = app.add_subcommand("check", "type check a program");
    check->add_option("FILE", file)->required();
    check->add_option("--solver-cmd", opts.solver.cmd, "solver command line");
    check->add_option("--timeout-ms", opts.solver.timeout_ms, "per-query solver timeout");
    std::string log_dir;
    check->add_option("--smt-log", log_dir, "write solver transcripts to this directory");
    check->add_flag("--json", as_json);
    check->add_flag("--strict-elim", opts.check.strict_elim, "only the printed variable elimination cases");

    auto *run = app.add_subcommand("run", "check and evaluate a program");
    long fuel = 1000000;
    bool trace = false, no_check = false;
    run->add_option("FILE", file)->required();
    run->add_option("--fuel", fuel);
    run->add_flag("--trace", trace);
    run->add_flag("--no-check", no_check);

    auto *corpus = app.add_subcommand("corpus", "check every .dref file against its expectation header");
    corpus->add_option("DIR", dir)->required();
    corpus->add_flag("--json", as_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (!log_dir.empty()) opts.solver.log_dir = log_dir;

    if (*check) {
        auto r = check_file(file, opts);
        if (as_json)
            std::cout << to_json(r).dump(2) << "\n";
        else
            print_report(r);
        return exit_code(r);
    }

    if (*run) {
        auto text = slurp(file);
        if (!text) {
            std::cerr << "cannot read " << file << "\n";
            return 2;
        }
        Program prog;
        if (no_check) {
            try {
                prog = load_program(*text);
            } catch (const std::exception &e) {
                std::cerr << file << ": " << e.what() << "\n";
                return 2;
            }
        } else {
            auto r = check_source(*text, file, opts);
            if (r.status != Status::Ok) {
                for (auto &d : r.diagnostics) std::cerr << render(d, file);
                return exit_code(r);
            }
            prog = *r.program;
        }
        auto out = eval(prog.defs, prog.body, fuel, trace ? &std::cerr : nullptr);
        switch (out.kind) {
        case EvalOutcome::Kind::Value:
            std::cout << to_string(out.value) << "\n";
            return 0;
        case EvalOutcome::Kind::Stuck:
            std::cerr << "stuck: " << out.reason << "\n";
            return 3;
        case EvalOutcome::Kind::OutOfFuel:
            std::cerr << "out of fuel after " << out.steps << " steps\n";
            return 4;
        }
    }

    if (*corpus) {
        namespace fs = std::filesystem;
        std::vector<fs::path> files;
        std::error_code ec;
        for (auto &e : fs::directory_iterator(dir, ec))
            if (e.path().extension() == ".dref") files.push_back(e.path());
        if (ec) {
            std::cerr << "cannot read directory " << dir << "\n";
            return 2;
        }
        std::sort(files.begin(), files.end());
        int mismatches = 0;
        json summary = json::array();
        for (auto &p : files) {
            auto text = slurp(p.string());
            auto want = text ? expectation(*text) : std::nullopt;
            auto r = text ? check_source(*text, p.string(), opts) : check_file(p.string(), opts);
            std::string got = to_string(r.status);
            bool ok = want && *want == got;
            if (!ok) ++mismatches;
            if (as_json) {
                auto j = to_json(r);
                j["expect"] = want ? *want : "";
                j["match"] = ok;
                summary.push_back(j);
            } else {
                std::cout << (ok ? "PASS " : "FAIL ") << p.filename().string() << "  expect=" << (want ? *want : "?")
                          << " got=" << got << "  " << static_cast<long>(r.wall_ms) << " ms, " << r.smt_queries
                          << " queries\n";
                if (!ok || r.status != Status::Ok)
                    for (auto &d : r.diagnostics) std::cout << "    " << render(d, p.filename().string());
            }
        }
        if (as_json)
            std::cout << json{{"files", summary}, {"mismatches", mismatches}}.dump(2) << "\n";
        else
            std::cout << files.size() - mismatches << "/" << files.size() << " files as expected\n";
        return mismatches == 0 ? 0 : 1;
    }
    return 2;
}
