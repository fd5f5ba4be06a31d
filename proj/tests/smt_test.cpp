#include "gen.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace duck;
using namespace duck::test;

namespace {

struct Solver {
    BoxTable boxes;
    SolverSession s;
    explicit Solver(SolverConfig c = {}) : s(std::move(c), boxes) {}
};

ValuePtr random_value(Rng &r) {
    switch (pick(r, 6)) {
    case 0: return mk::int_(pick(r, 3));
    case 1: return mk::str(pick(r, 2) ? "f" : "g");
    case 2: return mk::bool_(pick(r, 2) == 0);
    case 3: return mk::null();
    case 4: return mk::empty();
    default: return mk::ext(mk::empty(), mk::str("f"), mk::int_(pick(r, 3)));
    }
}

bool type_free(const Formula &p) {
    if (std::holds_alternative<Formula::HasType>(p.v)) return false;
    if (auto *a = std::get_if<Formula::And>(&p.v)) {
        for (auto &q : a->ps)
            if (!type_free(*q)) return false;
    } else if (auto *o = std::get_if<Formula::Or>(&p.v)) {
        for (auto &q : o->ps)
            if (!type_free(*q)) return false;
    } else if (auto *n = std::get_if<Formula::Not>(&p.v)) {
        return type_free(*n->p);
    } else if (auto *i = std::get_if<Formula::Implies>(&p.v)) {
        return type_free(*i->p) && type_free(*i->q);
    }
    return true;
}

}  // namespace

TEST_CASE("validity queries") {
    Solver z;
    auto p = mk::eq(mk::lvar("x"), mk::lv(mk::int_(0)));
    CHECK(z.s.check_valid({mk::top()}, mk::implies(p, p)) == Verdict::Valid);

    auto ib = mk::or_({mk::tag_is(mk::lvar("x"), "Int"), mk::tag_is(mk::lvar("x"), "Bool")});
    CHECK(z.s.check_valid({ib, mk::not_(mk::tag_is(mk::lvar("x"), "Int"))}, mk::tag_is(mk::lvar("x"), "Bool")) ==
          Verdict::Valid);

    auto u = mk::arrow("z", mk::tag_type("Int"), mk::tag_type("Int"));
    CHECK(z.s.check_valid({mk::top()}, mk::has_type(mk::lvar("f"), u)) == Verdict::Invalid);
    CHECK(z.s.check_valid({mk::has_type(mk::lvar("f"), u)}, mk::has_type(mk::lvar("f"), u)) == Verdict::Valid);
}

TEST_CASE("dictionary reasoning goes through the instantiated axioms") {
    Solver z;
    auto d = mk::lv(mk::ext(mk::empty(), mk::str("k"), mk::int_(3)));
    CHECK(z.s.check_valid({}, mk::eq(mk::sel(d, mk::lv(mk::str("k"))), mk::lv(mk::int_(3)))) == Verdict::Valid);
    CHECK(z.s.check_valid({}, mk::has(mk::lv(mk::empty()), mk::lv(mk::str("k")))) == Verdict::Invalid);
    CHECK(z.s.check_valid({}, mk::not_(mk::eq(mk::lv(mk::str("a")), mk::lv(mk::str("b"))))) == Verdict::Valid);
    CHECK(z.s.check_valid({}, mk::tag_is(mk::lv(mk::int_(7)), "Int")) == Verdict::Valid);
}

TEST_CASE("a command that is not a solver is an error") {
    SolverConfig c;
    c.cmd = "/nonexistent/solver-binary -in";
    Solver z(c);
    CHECK_THROWS_AS(z.s.check_valid({}, mk::top()), SolverError);
}

TEST_CASE("transcripts are reproducible") {
    namespace fs = std::filesystem;
    auto base = fs::temp_directory_path() / ("duck-smt-log-" + std::to_string(::getpid()));
    fs::remove_all(base);
    auto run = [&](const std::string &sub) {
        SolverConfig c;
        c.log_dir = (base / sub).string();
        Solver z(c);
        z.s.check_valid({mk::tag_is(mk::lvar("x"), "Int")}, mk::tag_is(mk::lvar("x"), "Int"));
        z.s.check_valid({}, mk::has(mk::lv(mk::empty()), mk::lv(mk::str("k"))));
    };
    run("one");
    run("two");
    std::vector<std::string> texts;
    for (auto sub : {"one", "two"}) {
        std::string all;
        for (auto &e : fs::directory_iterator(base / sub)) all += slurp(e.path().string());
        texts.push_back(all);
    }
    CHECK(!texts[0].empty());
    CHECK(texts[0].find("check-sat") != std::string::npos);
    CHECK(texts[0] == texts[1]);
    fs::remove_all(base);
}

TEST_CASE("assumption frames") {
    Solver z;
    auto p = mk::eq(mk::lvar("x"), mk::lv(mk::int_(1)));
    CHECK(z.s.check_valid({}, p) == Verdict::Invalid);
    z.s.with_assumptions({mk::bot()}, [&] {
        CHECK(z.s.check_valid({}, p) == Verdict::Valid);
        z.s.with_assumptions({mk::top()}, [&] { CHECK(z.s.check_valid({}, p) == Verdict::Valid); });
        return 0;
    });
    CHECK(z.s.check_valid({}, p) == Verdict::Invalid);
    z.s.with_assumptions({p}, [&] {
        CHECK(z.s.check_valid({}, p) == Verdict::Valid);
        return 0;
    });
    CHECK(z.s.depth() == 0);

    Rng rng(3);
    std::function<void(int)> nest = [&](int d) {
        if (d == 0) return;
        z.s.with_assumptions({mk::eq(mk::lvar("y"), mk::lv(mk::int_(pick(rng, 3))))}, [&] {
            nest(d - 1);
            return 0;
        });
    };
    for (int i = 0; i < 100; ++i) nest(1 + pick(rng, 4));
    CHECK(z.s.depth() == 0);

    try {
        z.s.with_assumptions({p}, [&]() -> int { throw std::runtime_error("boom"); });
    } catch (const std::runtime_error &) {
    }
    CHECK(z.s.depth() == 0);
}

TEST_CASE("valid verdicts survive random ground models") {
    Solver z;
    Rng rng(17);
    int valid = 0;
    for (int n = 0; n < 300; ++n) {
        GenScope s;
        auto p = gen_formula(rng, s, 3);
        if (!type_free(*p)) continue;
        if (z.s.check_valid({}, p) != Verdict::Valid) continue;
        ++valid;
        for (int k = 0; k < 50; ++k) {
            GroundModel m;
            for (auto x : {"a", "b", "v"}) m.vars[x] = random_value(rng);
            if (eval_ground(p, m) == Truth::False) FAIL("valid formula falsified: " << to_string(p));
        }
    }
    CHECK(valid > 10);
}

TEST_CASE("verdicts are deterministic") {
    Solver z;
    auto q = mk::implies(mk::tag_is(mk::lvar("x"), "Int"), mk::not_(mk::tag_is(mk::lvar("x"), "Str")));
    auto a = z.s.check_valid({}, q);
    auto b = z.s.check_valid({}, q);
    CHECK(a == Verdict::Valid);
    CHECK(a == b);
    CHECK(z.s.translate(q).find("tag") != std::string::npos);
}
