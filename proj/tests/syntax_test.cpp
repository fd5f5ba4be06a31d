#include "gen.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace duck;
using namespace duck::test;

TEST_CASE("substitution replaces free occurrences") {
    auto t = mk::ref(mk::eq(mk::lnu(), mk::lvar("x")));
    auto r = subst_value(t, "x", mk::int_(3));
    CHECK(alpha_equal(r, mk::ref(mk::eq(mk::lnu(), mk::lv(mk::int_(3))))));

    auto f = mk::val(mk::fun("x", std::nullopt, mk::val(mk::var("x"))));
    CHECK(alpha_equal(subst_value(f, "x", mk::int_(3)), f));
}

TEST_CASE("substitution into an arrow codomain") {
    // x:Int -> {v = x + y} with y := 4
    auto cod = mk::ref(mk::eq(mk::lnu(), mk::fn(Fn::Plus, {mk::lvar("x"), mk::lvar("y")})));
    auto u = mk::arrow("x", mk::tag_type("Int"), cod);
    auto r = subst_value(mk::term_type(u), "y", mk::int_(4));
    auto want = mk::term_type(
        mk::arrow("x", mk::tag_type("Int"),
                  mk::ref(mk::eq(mk::lnu(), mk::fn(Fn::Plus, {mk::lvar("x"), mk::lv(mk::int_(4))})))));
    CHECK(alpha_ref(r, want, {}));
}

TEST_CASE("substitution avoids capture") {
    Rng rng(11);
    int tested = 0;
    for (int i = 0; i < 2000; ++i) {
        GenScope s;
        s.vars = {"a", "x", "y"};
        auto t = gen_ref(rng, s, 3);
        auto before = fv(t);
        if (!before.count("a")) continue;
        std::string w = pick(rng, 2) ? "x" : "y";
        auto r = subst_value(t, "a", mk::var(w));
        auto expected = before;
        expected.erase("a");
        expected.insert(w);
        CHECK(fv(r) == expected);
        ++tested;
    }
    CHECK(tested > 100);
}

TEST_CASE("subst_nu") {
    auto p = subst_nu(mk::tag_is(mk::lnu(), "Int"), mk::lvar("x"));
    CHECK(to_string(p) == "tag(x) = \"Int\"");
    auto q = subst_nu(mk::eq(mk::lnu(), mk::lv(mk::int_(0))), mk::sel(mk::lvar("d"), mk::lv(mk::str("c"))));
    CHECK(to_string(q) == "sel(d, \"c\") = 0");
}

TEST_CASE("embedding a constant's singleton at the constant") {
    auto s = const_type(Const{Const::Int{1}});
    CHECK(to_string(embed_at(s.body, mk::lv(mk::int_(1)))) == "1 = 1");
}

TEST_CASE("alpha canonical forms") {
    auto mkid = [](const std::string &x) {
        return mk::arrow(x, mk::tag_type("Int"), mk::ref(mk::eq(mk::lnu(), mk::lvar(x))));
    };
    CHECK(canonical_key(mkid("x")) == canonical_key(mkid("y")));
    CHECK(to_string(alpha_canonical(mk::tyvar("A"))) == "A");

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        GenScope s;
        auto u = gen_term(rng, s, 3);
        auto c = alpha_canonical(u);
        CHECK(canonical_key(alpha_canonical(c)) == canonical_key(c));
        CHECK(alpha_term(*c, *u, {}));
    }
}

TEST_CASE("canonical keys agree with a renaming oracle") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        GenScope s;
        auto u = gen_term(rng, s, 3);
        Renamer rn;
        auto v = rn.term(u);
        REQUIRE(alpha_term(*u, *v, {}));
        CHECK(canonical_key(u) == canonical_key(v));

        auto w = gen_term(rng, s, 3);
        CHECK((canonical_key(u) == canonical_key(w)) == alpha_term(*u, *w, {}));
    }
}

TEST_CASE("erase") {
    auto e1 = mk::let("x", Scheme::mono(mk::tag_type("Int")), mk::val(mk::int_(1)), mk::val(mk::var("x")));
    CHECK(to_string(erase(e1)) == to_string(mk::let("x", std::nullopt, mk::val(mk::int_(1)), mk::val(mk::var("x")))));

    auto f = mk::fun("x", mk::tag_type("Int"), mk::val(mk::var("x")));
    CHECK(to_string(erase(f)) == to_string(mk::fun("x", std::nullopt, mk::val(mk::var("x")))));

    auto n = mk::new_("List", std::vector<RefType>{mk::tag_type("Int")}, {mk::int_(1), mk::null()});
    CHECK(to_string(erase(n)) == "new List(1, null)");
}
