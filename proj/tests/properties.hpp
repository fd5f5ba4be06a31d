#pragma once

// Property suites shared by the unit tests and the acceptance runner.

#include "gen.hpp"
#include "support.hpp"

#include "duckcheck/eval.hpp"
#include "duckcheck/wellformed.hpp"

#include <sstream>
#include <string>

namespace duck::test {

struct Tally {
    int pass = 0;
    int fail = 0;
    std::string first;  // first counterexample

    void add(bool ok, const std::string &why) {
        if (ok) {
            ++pass;
        } else {
            if (!fail) first = why;
            ++fail;
        }
    }
};

// ------------------------------------------------------------ normalize

inline bool clauses_truth(const std::vector<Clause> &cs, unsigned bits) {
    for (auto &c : cs) {
        bool r = false;
        for (auto &[lw, u] : c.r) r = r || ((bits >> std::stoi(lval_name(*lw).substr(1))) & 1U);
        if (truth(*c.q, bits) && !r) return false;
    }
    return true;
}

/// Truth-table equivalence of normalize on n random propositions.
inline Tally normalize_suite(int n, int max_atoms, int depth, std::uint64_t seed) {
    Rng rng(seed);
    Tally t;
    for (int i = 0; i < n; ++i) {
        int atoms = 1 + pick(rng, max_atoms);
        auto p = gen_prop(rng, atoms, depth);
        std::vector<Clause> cs;
        try {
            cs = normalize(p);
        } catch (const CnfBlowup &) {
            t.add(false, "blowup on " + to_string(p));
            continue;
        }
        bool ok = true;
        for (unsigned bits = 0; bits < (1U << atoms) && ok; ++bits) ok = truth(*p, bits) == clauses_truth(cs, bits);
        t.add(ok, to_string(p));
    }
    return t;
}

// ------------------------------------------------------------ termination

struct LoopQuery {
    TypeEnv g;
    Clause c;
};

/// y : Top, x : {v = y /\ v :: U} with U = a:{v :: b:{v = y} -> Top} -> Top,
/// asking true => y :: (x:{v = y} -> Top).
inline LoopQuery loop_query() {
    auto inner = mk::arrow("b", mk::ref(mk::eq(mk::lnu(), mk::lvar("y"))), mk::top_type());
    auto u = mk::arrow("a", mk::term_type(inner), mk::top_type());
    auto g = TypeEnv{}
                 .bind("y", Scheme::mono(mk::top_type()))
                 .bind("x", Scheme::mono(mk::ref(mk::and_({mk::eq(mk::lnu(), mk::lvar("y")), mk::has_type(mk::lnu(), u)}))));
    auto goal = mk::arrow("x", mk::ref(mk::eq(mk::lnu(), mk::lvar("y"))), mk::top_type());
    return {g, Clause{mk::top(), {{mk::lvar("y"), goal}}}};
}

// ------------------------------------------------------------ reflexivity

inline Tally reflexive_suite(int n, std::uint64_t seed) {
    Session s;
    auto g = TypeEnv{}
                 .tyvar("A")
                 .tyvar("B")
                 .bind("a", Scheme::mono(mk::top_type()))
                 .bind("b", Scheme::mono(mk::tag_type("Int")));
    Rng rng(seed);
    Tally t;
    while (t.pass + t.fail < n) {
        GenScope sc;
        auto body = gen_ref(rng, sc, 3);
        Scheme sch = Scheme::mono(body);
        if (pick(rng, 3) == 0) sch = Scheme{{"C"}, rename_tyvar(body, "A", "C")};
        if (!is_wf(g, s.st.defs, sch)) continue;
        bool ok = false;
        try {
            ok = s.sub.sub(g, sch, sch);
        } catch (const std::exception &) {
        }
        t.add(ok, to_string(sch));
    }
    return t;
}

// ------------------------------------------------------------ delta / ty

inline ValuePtr sample_value(Rng &r) {
    const char *keys[] = {"a", "b"};
    switch (pick(r, 9)) {
    case 0:
    case 1: return mk::int_(pick(r, 7) - 3);
    case 2: return mk::str(keys[pick(r, 2)]);
    case 3: return mk::bool_(pick(r, 2) == 0);
    case 4: return mk::null();
    case 5: return mk::empty();
    case 6:
    case 7: {
        ValuePtr d = mk::empty();
        int n = 1 + pick(r, 3);
        for (int i = 0; i < n; ++i) d = mk::ext(d, mk::str(keys[pick(r, 2)]), sample_value(r));
        return d;
    }
    default: return mk::fun("y", std::nullopt, mk::val(mk::var("y")));
    }
}

inline TermPtr arrow_term(const RefType &t) {
    for (auto &p : conjuncts(t.pred))
        if (auto *h = std::get_if<Formula::HasType>(&p->v))
            if (std::holds_alternative<TypeTerm::Arrow>(h->term->v)) return h->term;
    return nullptr;
}

inline bool ground_true(const RefType &t, const ValuePtr &w, const GroundModel &m) {
    return eval_ground(ground_part(embed_at(t, mk::lv(w))), m) == Truth::True;
}

/// n applications of p to sampled arguments that satisfy its input types.
inline Tally delta_coherence(Prim p, int n, std::uint64_t seed) {
    auto defs = list_defs();
    Rng rng(seed);
    Tally t;
    auto sc = const_type(p);
    if (!sc.is_mono()) sc = inst(sc, mk::term_type(mk::arrow("y", mk::top_type(), mk::top_type())));
    auto top = arrow_term(sc.body);
    while (t.pass + t.fail < n) {
        GroundModel m;
        m.defs = &defs;
        auto u = top;
        std::vector<ValuePtr> args;
        RefType cod = mk::top_type();
        bool sampled = true;
        for (int i = 0; i < prim_arity(p); ++i) {
            auto &arr = std::get<TypeTerm::Arrow>(u->v);
            ValuePtr w;
            int tries = 0;
            do {
                w = p == Prim::Fix ? mk::fun("g", std::nullopt, mk::val(mk::var("g"))) : sample_value(rng);
            } while (!ground_true(arr.dom, w, m) && ++tries < 200);
            if (tries >= 200) {
                sampled = false;
                break;
            }
            args.push_back(w);
            m.vars[arr.binder] = w;
            cod = arr.cod;
            if (i + 1 < prim_arity(p)) u = arrow_term(cod);
        }
        if (!sampled) continue;

        std::ostringstream what;
        what << prim_name(p);
        for (auto &a : args) what << " " << to_string(a);

        ValuePtr f = mk::prim(p);
        std::optional<ExprPtr> out;
        for (auto &a : args) {
            out = delta(defs, std::get<Const>(f->v), a);
            if (!out) break;
            if (auto *v = std::get_if<Expr::Val>(&(*out)->v)) f = v->w;
        }
        if (!out) {
            t.add(false, "delta undefined on " + what.str());
            continue;
        }
        auto *v = std::get_if<Expr::Val>(&(*out)->v);
        if (!v) {
            // fix unrolls to an application; its result type has no ground part
            t.add(p == Prim::Fix, what.str() + " did not produce a value");
            continue;
        }
        t.add(ground_true(cod, v->w, m), what.str() + " gave " + to_string(v->w));
    }
    return t;
}

}  // namespace duck::test
