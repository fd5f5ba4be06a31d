#include "progs.hpp"
#include "properties.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace duck;
using namespace duck::test;

namespace {

ValuePtr apply_all(const DefEnv &defs, Prim p, const std::vector<ValuePtr> &args) {
    ValuePtr f = mk::prim(p);
    for (auto &a : args) {
        auto out = delta(defs, std::get<Const>(f->v), a);
        if (!out) return nullptr;
        auto *v = std::get_if<Expr::Val>(&(*out)->v);
        if (!v) return nullptr;
        f = v->w;
    }
    return f;
}

EvalOutcome run(const std::string &text, long fuel = 1000000) {
    auto p = load_program(text);
    return eval(p.defs, p.body, fuel);
}

}  // namespace

TEST_CASE("primitive interpretation") {
    auto defs = list_defs();
    auto d = mk::ext(mk::empty(), mk::str("x"), mk::int_(3));
    CHECK(to_string(apply_all(defs, Prim::Get, {d, mk::str("x")})) == "3");
    CHECK(apply_all(defs, Prim::Get, {d, mk::str("y")}) == nullptr);
    CHECK(to_string(apply_all(defs, Prim::Has, {mk::empty(), mk::str("x")})) == "false");
    CHECK(to_string(apply_all(defs, Prim::Tag, {mk::bool_(true)})) == "\"Bool\"");
    CHECK(to_string(apply_all(defs, Prim::Tag, {mk::null()})) == "\"Null\"");
    CHECK(to_string(apply_all(defs, Prim::Plus, {mk::int_(2), mk::int_(3)})) == "5");
    CHECK(apply_all(defs, Prim::Plus, {mk::int_(2), mk::str("3")}) == nullptr);
    CHECK(apply_all(defs, Prim::Not, {mk::int_(0)}) == nullptr);

    auto set = apply_all(defs, Prim::Set, {d, mk::str("y"), mk::bool_(false)});
    REQUIRE(set);
    CHECK(to_string(apply_all(defs, Prim::Get, {set, mk::str("y")})) == "false");
    CHECK(to_string(apply_all(defs, Prim::Get, {set, mk::str("x")})) == "3");

    // keys: distinct, outermost extension first
    auto dd = mk::ext(mk::ext(mk::ext(mk::empty(), mk::str("a"), mk::int_(1)), mk::str("b"), mk::int_(2)), mk::str("a"),
                      mk::int_(3));
    auto ks = apply_all(defs, Prim::Keys, {dd});
    REQUIRE(ks);
    CHECK(to_string(apply_all(defs, Prim::Get, {ks, mk::str("hd")})) == "\"a\"");
    auto tl = apply_all(defs, Prim::Get, {ks, mk::str("tl")});
    CHECK(to_string(apply_all(defs, Prim::Get, {tl, mk::str("hd")})) == "\"b\"");
    CHECK(to_string(apply_all(defs, Prim::Get, {tl, mk::str("tl")})) == "null");

    // under-applied primitives are values
    auto part = apply_all(defs, Prim::Get, {d});
    REQUIRE(part);
    CHECK(std::holds_alternative<Const::Partial>(std::get<Const>(part->v).v));
}

TEST_CASE("single steps") {
    auto defs = list_defs();
    auto id = mk::fun("x", std::nullopt, mk::val(mk::var("x")));
    auto r = step(defs, mk::app(id, mk::int_(3)));
    REQUIRE(r.kind == StepResult::Kind::Stepped);
    CHECK(to_string(r.next) == "3");

    auto e1 = mk::val(mk::int_(1)), e2 = mk::val(mk::int_(2));
    r = step(defs, mk::if_(mk::bool_(true), e1, e2));
    REQUIRE(r.kind == StepResult::Kind::Stepped);
    CHECK(r.next == e1);
    CHECK(step(defs, mk::if_(mk::int_(0), e1, e2)).kind == StepResult::Kind::Stuck);

    auto g = mk::app(mk::partial(Prim::Get, {mk::int_(3)}), mk::str("x"));
    r = step(defs, g);
    CHECK(r.kind == StepResult::Kind::Stuck);
    CHECK(!r.reason.empty());

    r = step(defs, mk::val(mk::int_(4)));
    CHECK(r.kind == StepResult::Kind::Value);
}

TEST_CASE("evaluation") {
    auto out = run("{}");
    CHECK(out.kind == EvalOutcome::Kind::Value);
    CHECK(out.steps == 0);

    out = run("let rec loop :: Int -> Int = fun x -> loop x in loop 0", 5000);
    CHECK(out.kind == EvalOutcome::Kind::OutOfFuel);

    out = run(with_client("getCount.dref", "getCount {} \"c\""));
    REQUIRE(out.kind == EvalOutcome::Kind::Value);
    CHECK(to_string(out.value) == "0");

    // d0 = incCount {} "files" binds files to 1; once more gives 1 + 1
    out = run(with_client("incCount.dref", "incCount d0 \"files\""));
    REQUIRE(out.kind == EvalOutcome::Kind::Value);
    auto defs = list_defs();
    CHECK(to_string(apply_all(defs, Prim::Get, {out.value, mk::str("files")})) == "2");

    std::ostringstream trace;
    auto p = load_program("1 + 2");
    out = eval(p.defs, p.body, 100, &trace);
    CHECK(out.steps > 0);
    auto lines = trace.str();
    CHECK(std::count(lines.begin(), lines.end(), '\n') >= out.steps);
}

TEST_CASE("steps are deterministic and stay in A-normal form") {
    Rng rng(211);
    int traced = 0;
    for (int n = 0; n < 300; ++n) {
        ProgGen g{rng};
        auto p = load_program(g.gen(static_cast<K>(pick(rng, 4)), 4));
        auto e = p.body;
        for (int k = 0; k < 500; ++k) {
            auto a = step(p.defs, e);
            auto b = step(p.defs, e);
            REQUIRE(a.kind == b.kind);
            if (a.kind != StepResult::Kind::Stepped) break;
            CHECK(alpha_equal(a.next, b.next));
            CHECK(is_anf(*a.next));
            e = a.next;
            ++traced;
        }
    }
    CHECK(traced > 1000);
}

TEST_CASE("soundness probe") {
    auto probe = [](const std::string &text) {
        auto p = load_program(text);
        Session s;
        s.st.defs = p.defs;
        auto r = check_program(s.st, p);
        return soundness_probe(p.defs, p.body, r.scheme, 1000000);
    };
    auto neg = probe(with_client("negate.dref", "negate 5"));
    REQUIRE(neg.outcome.kind == EvalOutcome::Kind::Value);
    CHECK(to_string(neg.outcome.value) == "-5");
    REQUIRE(neg.refinement);
    CHECK(*neg.refinement == Truth::True);

    auto gc = probe(with_client("getCount.dref", "getCount {} \"c\""));
    CHECK(to_string(gc.outcome.value) == "0");
    REQUIRE(gc.refinement);
    CHECK(*gc.refinement == Truth::True);

    // an unchecked stuck program trips the probe
    auto p = load_program("get 3 \"x\"");
    CHECK_THROWS_AS(soundness_probe(p.defs, p.body, Scheme::mono(mk::top_type()), 100), SoundnessViolation);
}

TEST_CASE("delta agrees with the constant types") {
    for (auto p : all_prims()) {
        auto t = delta_coherence(p, 100, 1000 + static_cast<unsigned>(p));
        CHECK_MESSAGE(t.fail == 0, prim_name(p) << ": " << t.first);
    }
}
