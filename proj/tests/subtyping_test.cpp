#include "properties.hpp"
#include "support.hpp"

#include "duckcheck/wellformed.hpp"

#include <doctest.h>

#include <chrono>

using namespace duck;
using namespace duck::test;

namespace {

TermPtr term(const std::string &s) {
    auto t = ty(s);
    auto *h = std::get_if<Formula::HasType>(&t.pred->v);
    REQUIRE(h);
    return h->term;
}

// x:Int, f:{v = null \/ v :: U1}, not (f = null)
TypeEnv maybe_apply_else(const TermPtr &u1) {
    return TypeEnv{}
        .bind("x", Scheme::mono(ty("Int")))
        .bind("f", Scheme::mono(mk::ref(mk::or_({mk::eq(mk::lnu(), mk::lv(mk::null())), mk::has_type(mk::lnu(), u1)}))))
        .guard(mk::not_(mk::eq(mk::lvar("f"), mk::lv(mk::null()))));
}

}  // namespace

TEST_CASE("type terms of an environment") {
    auto u1 = term("Int -> Int");
    auto g = maybe_apply_else(u1);
    Session s;
    auto us = s.sub.type_terms(g);
    REQUIRE(us.size() == 1);
    CHECK(alpha_equal(us[0], u1));
    CHECK(s.sub.type_terms(TypeEnv{}).empty());

    // nested terms are not collected
    auto w = term("b:Int -> Top");
    auto u = mk::arrow("a", mk::term_type(w), mk::top_type());
    auto h = TypeEnv{}.bind("p", Scheme::mono(mk::term_type(u)));
    us = s.sub.type_terms(h);
    REQUIRE(us.size() == 1);
    CHECK(alpha_equal(us[0], u));
}

TEST_CASE("must-flow extraction") {
    Session s;
    auto u1 = term("Int -> Int");
    auto u0 = term("x:IorB -> {tag(v) = tag(x)}");
    auto g = maybe_apply_else(u1);

    auto got = s.sub.must_flow(g, mk::ref(mk::eq(mk::lnu(), mk::lvar("f"))));
    REQUIRE(got.size() == 1);
    CHECK(alpha_equal(got[0], u1));

    UsedSet used{s.st.boxes.box(u1)};
    CHECK(s.sub.must_flow(g, mk::ref(mk::eq(mk::lnu(), mk::lvar("f"))), used).empty());

    // the client: negate : {v :: U0}
    auto g1 = TypeEnv{}
                  .bind("negate", Scheme::mono(mk::term_type(u0)))
                  .bind("maybeApply", Scheme::mono(ty("x:Int -> f:{v = null \\/ v :: Int -> Int} -> Int")));
    got = s.sub.must_flow(g1, mk::ref(mk::eq(mk::lnu(), mk::lvar("negate"))));
    REQUIRE(got.size() == 1);
    CHECK(alpha_equal(got[0], u0));

    // nothing flows into a value without a type predicate
    CHECK(s.sub.must_flow(g1, ty("Int")).empty());
}

TEST_CASE("must-flow results are re-verifiable") {
    Session s;
    Rng rng(13);
    int found = 0;
    for (int n = 0; n < 400; ++n) {
        GenScope sc;
        TypeEnv g = TypeEnv{}.tyvar("A").tyvar("B").bind("a", Scheme::mono(gen_ref(rng, sc, 2)));
        if (!is_wf(g, s.st.defs, Scheme::mono(mk::top_type()))) continue;
        auto t = mk::ref(mk::eq(mk::lnu(), mk::lvar("a")));
        for (auto &u : s.sub.must_flow(g, t)) {
            ++found;
            auto h = g.bind("w", Scheme::mono(t));
            CHECK(s.st.valid(h, mk::has_type(mk::lvar("w"), u)));
        }
    }
    CHECK(found > 5);
}

TEST_CASE("clause implication") {
    Session s;
    auto u1 = term("Int -> Int");
    auto u0 = term("x:IorB -> {tag(v) = tag(x)}");

    // inconsistent environment
    auto bad = TypeEnv{}.bind("x", Scheme::mono(ty("Int"))).guard(mk::tag_is(mk::lvar("x"), "Bool"));
    CHECK(s.sub.imp(bad, Clause{mk::top(), {}}));

    // not (v = null) => v :: U1 under the client environment
    auto g = TypeEnv{}.bind("negate", Scheme::mono(mk::term_type(u0))).bind("nu", Scheme::mono(ty("{v = negate}")));
    Clause c{mk::not_(mk::eq(mk::lvar("nu"), mk::lv(mk::null()))), {{mk::lvar("nu"), u1}}};
    CHECK(s.sub.imp(g, c));

    Clause no{mk::top(), {{mk::lvar("nu"), term("Int -> Bool")}}};
    CHECK_FALSE(s.sub.imp(g, no));
    REQUIRE(s.sub.failure());
    CHECK(!s.sub.failure()->rule.empty());
}

TEST_CASE("subtyping examples") {
    Session s;
    auto iorb = TypeEnv{}.bind("x", Scheme::mono(ty("IorB"))).guard(mk::tag_is(mk::lvar("x"), "Int"));
    CHECK(s.sub.sub(iorb, ty("{tag(v) = \"Int\" /\\ v = 0 - x}"), ty("IorB")));

    auto g1 = TypeEnv{}.bind("negate", Scheme::mono(ty("x:IorB -> {tag(v) = tag(x)}")));
    CHECK(s.sub.sub(g1, ty("{v = 42}"), ty("Int")));
    CHECK(s.sub.sub(g1, ty("{v = negate}"), ty("{v = null \\/ v :: Int -> Int}")));
    CHECK_FALSE(s.sub.sub(g1, ty("{v = negate}"), ty("{v = null \\/ v :: Str -> Int}")));
    CHECK_FALSE(s.sub.sub(TypeEnv{}, ty("Top"), ty("Int")));

    CHECK(s.sub.sub(TypeEnv{}, scheme("forall A. A -> A"), scheme("forall B. B -> B")));
    CHECK_FALSE(s.sub.sub(TypeEnv{}, scheme("forall A. A -> A"), scheme("forall A, B. A -> B")));
}

TEST_CASE("syntactic subtyping") {
    Session s;
    CHECK(s.sub.syn_sub(TypeEnv{}, term("x:IorB -> {tag(v) = tag(x)}"), term("Int -> Int")));
    CHECK_FALSE(s.sub.syn_sub(TypeEnv{}, term("Int -> Int"), term("x:IorB -> {tag(v) = tag(x)}")));
    CHECK(s.sub.syn_sub(TypeEnv{}, mk::null_term(), term("List[Int]")));
    CHECK(s.sub.syn_sub(TypeEnv{}, term("List[Int]"), term("List[Top]")));
    CHECK_FALSE(s.sub.syn_sub(TypeEnv{}, term("List[Top]"), term("List[Int]")));
    auto g = TypeEnv{}.tyvar("A").tyvar("B");
    CHECK(s.sub.syn_sub(g, mk::tyvar("A"), mk::tyvar("A")));
    CHECK_FALSE(s.sub.syn_sub(g, mk::tyvar("A"), mk::tyvar("B")));
}

TEST_CASE("subtyping is reflexive") {
    Session s;
    auto g = TypeEnv{}
                 .tyvar("A")
                 .tyvar("B")
                 .bind("a", Scheme::mono(mk::top_type()))
                 .bind("b", Scheme::mono(ty("Int")));
    Rng rng(59);
    int n = 0;
    while (n < 60) {
        GenScope sc;
        auto t = gen_ref(rng, sc, 3);
        if (!is_wf(g, s.st.defs, Scheme::mono(t))) continue;
        ++n;
        CHECK_MESSAGE(s.sub.sub(g, t, t), to_string(t));
    }
}

TEST_CASE("the looping environment terminates only with the used-set guard") {
    auto [g, c] = loop_query();

    {
        Session s;
        auto t0 = std::chrono::steady_clock::now();
        s.sub.imp(g, c);
        auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(secs < 10.0);
    }
    {
        CheckOptions o;
        o.used_guard = false;
        o.fuel = 200;
        Session s(list_defs(), o);
        CHECK_THROWS_AS(s.sub.imp(g, c), FuelExhausted);
    }
}

TEST_CASE("extend unfolds constructed types") {
    Session s;
    auto g = s.sub.extend(TypeEnv{}, "x", Scheme::mono(ty("{v != null /\\ v :: List[Top]}")));
    CHECK(s.st.valid(g, mk::has(mk::lvar("x"), mk::lv(mk::str("hd")))));
    CHECK(s.st.valid(g, mk::tag_is(mk::lvar("x"), "Dict")));

    auto h = s.sub.extend(TypeEnv{}, "x", Scheme::mono(ty("Int")));
    CHECK(conjuncts(embed_env(h)).size() == 1);
}
