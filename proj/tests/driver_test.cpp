#include "support.hpp"

#include "duckcheck/driver.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace duck;
using namespace duck::test;
namespace fs = std::filesystem;

namespace {

struct Ran {
    int code;
    std::string out;
};

Ran duckcheck(const std::string &args, bool with_stderr = false) {
    std::string cmd = std::string(DUCK_BINARY) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    FILE *p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("duck-driver-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int &counter() {
        static int c = 0;
        return c;
    }
    std::string write(const std::string &name, const std::string &text) const {
        auto p = path / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

std::string q(const std::string &s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("check exit codes") {
    CHECK(duckcheck("check " + q(source_path("corpus/negate.dref"))).code == 0);
    CHECK(duckcheck("check " + q(source_path("corpus-neg/negate-no-test.dref"))).code == 1);
    CHECK(duckcheck("check /nonexistent/file.dref").code == 2);

    TempDir d;
    CHECK(duckcheck("check " + q(d.write("p.dref", "let x = in 3"))).code == 2);
    CHECK(duckcheck("check --solver-cmd '/nonexistent/z3 -in' " + q(source_path("corpus/negate.dref"))).code == 2);
}

TEST_CASE("check prints the inferred signature") {
    auto r = duckcheck("check " + q(source_path("corpus/negate.dref")));
    CHECK(r.out.find("negate") != std::string::npos);
    CHECK(r.out.find("tag(v) = tag(x)") != std::string::npos);
}

TEST_CASE("run") {
    auto r = duckcheck("run " + q(source_path("corpus/getCount.dref")));
    CHECK(r.code == 0);
    CHECK(r.out.find("0") != std::string::npos);

    TempDir d;
    r = duckcheck("run --fuel 1000 " + q(d.write("loop.dref", "let rec loop :: Int -> Int = fun x -> loop x in loop 0")));
    CHECK(r.code == 4);
    r = duckcheck("run --no-check " + q(d.write("stuck.dref", "get 3 \"x\"")));
    CHECK(r.code == 3);
    r = duckcheck("run " + q(d.write("stuck2.dref", "get 3 \"x\"")));
    CHECK(r.code == 1);

    // the step trace goes to stderr, one line per step
    r = duckcheck("run --trace " + q(d.write("add.dref", "1 + 2")), true);
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') >= 3);
}

TEST_CASE("JSON reports follow the schema") {
    std::vector<std::string> files;
    for (auto dir : {"corpus", "corpus-neg"})
        for (auto &e : fs::directory_iterator(source_path(dir))) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    REQUIRE(files.size() >= 20);
    for (auto &f : files) {
        auto r = duckcheck("check --json " + q(f));
        auto j = nlohmann::json::parse(r.out);
        CHECK(j.at("file").get<std::string>() == f);
        auto status = j.at("status").get<std::string>();
        CHECK((status == "ok" || status == "typeerror" || status == "error"));
        CHECK(r.code == (status == "ok" ? 0 : status == "typeerror" ? 1 : 2));
        CHECK(j.at("diagnostics").is_array());
        CHECK(j.at("stats").at("smt_queries").is_number_integer());
        CHECK(j.at("stats").at("wall_ms").is_number());
        if (status == "ok") {
            CHECK(j.at("scheme").is_string());
            CHECK(j.at("diagnostics").empty());
        } else {
            REQUIRE(!j.at("diagnostics").empty());
            auto &d = j.at("diagnostics")[0];
            CHECK(!d.at("rule").get<std::string>().empty());
            CHECK(d.at("message").is_string());
            CHECK(d.at("severity").get<std::string>() == "error");
        }
        CHECK(status == *expectation(slurp(f)));
    }
}

TEST_CASE("corpus runner") {
    TempDir empty;
    CHECK(duckcheck("corpus " + q(empty.path.string())).code == 0);

    TempDir d;
    d.write("good.dref", "-- expect: ok\n3\n");
    d.write("bad.dref", "-- expect: ok\n1 + true\n");
    auto r = duckcheck("corpus " + q(d.path.string()));
    CHECK(r.code != 0);
    CHECK(r.out.find("FAIL") != std::string::npos);

    CHECK(duckcheck("corpus " + q(source_path("corpus"))).code == 0);
}

TEST_CASE("library entry points") {
    DriverOptions o;
    auto rep = check_source("let x = 1 in\n  x + \"a\"", "inline.dref", o);
    CHECK(rep.status == Status::TypeError);
    REQUIRE(!rep.diagnostics.empty());
    CHECK(rep.diagnostics[0].line == 2);
    CHECK(render(rep.diagnostics[0], "inline.dref").find("inline.dref:2:") == 0);

    rep = check_source("let x = in 3", "p.dref", o);
    CHECK(rep.status == Status::Error);
    CHECK(rep.diagnostics[0].rule == "plumbing");
    CHECK(rep.diagnostics[0].line == 1);
    CHECK(rep.diagnostics[0].col == 9);

    CHECK(check_file("/nonexistent.dref", o).status == Status::Error);
    CHECK(expectation("-- expect: typeerror\n1") == std::optional<std::string>("typeerror"));
    CHECK(!expectation("1"));
}
