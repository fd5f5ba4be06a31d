#pragma once

// Random syntax generators and small independent oracles (free variables,
// alpha-equivalence, binder renaming) written directly over the AST so they
// share no code with the library.

#include "duckcheck/syntax.hpp"

#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace duck::test {

using Rng = std::mt19937_64;

inline int pick(Rng &r, int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(r)); }

// ------------------------------------------------------------ generators

struct GenScope {
    std::vector<std::string> vars{"a", "b"};  // free or in-scope term variables
    std::vector<std::string> tyvars{"A", "B"};
    int next = 0;
};

inline LValPtr gen_lval(Rng &r, const GenScope &s, int depth, bool with_nu) {
    int k = pick(r, depth > 0 ? 5 : 3);
    switch (k) {
    case 0:
        if (with_nu && pick(r, 2) == 0) return mk::lnu();
        return mk::lvar(s.vars[static_cast<size_t>(pick(r, static_cast<int>(s.vars.size())))]);
    case 1: return mk::lv(mk::int_(pick(r, 3)));
    case 2: return mk::lv(mk::str(pick(r, 2) ? "f" : "g"));
    case 3: return mk::tag(gen_lval(r, s, depth - 1, with_nu));
    default: return mk::sel(gen_lval(r, s, depth - 1, with_nu), mk::lv(mk::str("f")));
    }
}

inline TermPtr gen_term(Rng &r, GenScope &s, int depth);

inline RefType gen_ref(Rng &r, GenScope &s, int depth);

inline FormulaPtr gen_formula(Rng &r, GenScope &s, int depth) {
    int k = pick(r, depth > 0 ? 7 : 3);
    switch (k) {
    case 0: return mk::eq(gen_lval(r, s, 1, true), gen_lval(r, s, 1, true));
    case 1: return mk::top();
    case 2:
        if (depth > 0) return mk::has_type(gen_lval(r, s, 1, true), gen_term(r, s, depth - 1));
        return mk::tag_is(mk::lnu(), "Int");
    case 3: return mk::and_({gen_formula(r, s, depth - 1), gen_formula(r, s, depth - 1)});
    case 4: return mk::or_({gen_formula(r, s, depth - 1), gen_formula(r, s, depth - 1)});
    case 5: return mk::not_(gen_formula(r, s, depth - 1));
    default: return mk::implies(gen_formula(r, s, depth - 1), gen_formula(r, s, depth - 1));
    }
}

inline RefType gen_ref(Rng &r, GenScope &s, int depth) { return mk::ref(gen_formula(r, s, depth)); }

inline TermPtr gen_term(Rng &r, GenScope &s, int depth) {
    int k = pick(r, depth > 0 ? 4 : 2);
    switch (k) {
    case 0: return mk::tyvar(s.tyvars[static_cast<size_t>(pick(r, static_cast<int>(s.tyvars.size())))]);
    case 1: return mk::null_term();
    case 2: {
        std::string x = pick(r, 2) ? "x" : "y";
        auto dom = gen_ref(r, s, depth - 1);
        GenScope inner = s;
        inner.vars.push_back(x);
        auto cod = gen_ref(r, inner, depth - 1);
        return mk::arrow(x, dom, cod);
    }
    default: return mk::ctor("List", {gen_ref(r, s, depth - 1)});
    }
}

// ------------------------------------------------------------ free variables

inline void fv_term(const TypeTerm &u, std::set<std::string> bound, std::set<std::string> &out);

inline void fv_lval(const LogicalValue &l, const std::set<std::string> &bound, std::set<std::string> &out) {
    if (auto *w = std::get_if<ValuePtr>(&l.v)) {
        if (auto *x = std::get_if<Value::Var>(&(*w)->v))
            if (!bound.count(x->name)) out.insert(x->name);
        return;
    }
    for (auto &a : std::get<LogicalValue::FnApp>(l.v).args) fv_lval(*a, bound, out);
}

inline void fv_formula(const Formula &p, const std::set<std::string> &bound, std::set<std::string> &out) {
    if (auto *a = std::get_if<Formula::Atom>(&p.v)) {
        for (auto &x : a->args) fv_lval(*x, bound, out);
    } else if (auto *h = std::get_if<Formula::HasType>(&p.v)) {
        fv_lval(*h->lw, bound, out);
        fv_term(*h->term, bound, out);
    } else if (auto *c = std::get_if<Formula::And>(&p.v)) {
        for (auto &q : c->ps) fv_formula(*q, bound, out);
    } else if (auto *o = std::get_if<Formula::Or>(&p.v)) {
        for (auto &q : o->ps) fv_formula(*q, bound, out);
    } else if (auto *n = std::get_if<Formula::Not>(&p.v)) {
        fv_formula(*n->p, bound, out);
    } else if (auto *i = std::get_if<Formula::Implies>(&p.v)) {
        fv_formula(*i->p, bound, out);
        fv_formula(*i->q, bound, out);
    } else if (auto *f = std::get_if<Formula::Iff>(&p.v)) {
        fv_formula(*f->p, bound, out);
        fv_formula(*f->q, bound, out);
    }
}

inline void fv_ref(const RefType &t, std::set<std::string> bound, std::set<std::string> &out) {
    bound.insert(std::string(kNu));
    fv_formula(*t.pred, bound, out);
}

inline void fv_term(const TypeTerm &u, std::set<std::string> bound, std::set<std::string> &out) {
    if (auto *a = std::get_if<TypeTerm::Arrow>(&u.v)) {
        fv_ref(a->dom, bound, out);
        bound.insert(a->binder);
        fv_ref(a->cod, bound, out);
    } else if (auto *c = std::get_if<TypeTerm::CtorApp>(&u.v)) {
        for (auto &t : c->args) fv_ref(t, bound, out);
    }
}

inline std::set<std::string> fv(const RefType &t) {
    std::set<std::string> out;
    fv_ref(t, {}, out);
    return out;
}

// ------------------------------------------------------------ alpha oracle

/// Pairs of (left, right) binders, innermost last.
using AlphaEnv = std::vector<std::pair<std::string, std::string>>;

inline bool alpha_var(const AlphaEnv &env, const std::string &a, const std::string &b) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
        bool la = it->first == a, rb = it->second == b;
        if (la || rb) return la && rb;
    }
    return a == b;
}

inline bool alpha_term(const TypeTerm &a, const TypeTerm &b, AlphaEnv env);

inline bool alpha_lval(const LogicalValue &a, const LogicalValue &b, const AlphaEnv &env) {
    auto *wa = std::get_if<ValuePtr>(&a.v);
    auto *wb = std::get_if<ValuePtr>(&b.v);
    if (wa && wb) {
        auto *xa = std::get_if<Value::Var>(&(*wa)->v);
        auto *xb = std::get_if<Value::Var>(&(*wb)->v);
        if (xa || xb) return xa && xb && alpha_var(env, xa->name, xb->name);
        auto *ca = std::get_if<Const>(&(*wa)->v);
        auto *cb = std::get_if<Const>(&(*wb)->v);
        if (!ca || !cb || ca->v.index() != cb->v.index()) return false;
        if (auto *i = std::get_if<Const::Int>(&ca->v)) return i->z == std::get<Const::Int>(cb->v).z;
        if (auto *s = std::get_if<Const::Str>(&ca->v)) return s->s == std::get<Const::Str>(cb->v).s;
        if (auto *t = std::get_if<Const::Bool>(&ca->v)) return t->b == std::get<Const::Bool>(cb->v).b;
        return true;
    }
    if (wa || wb) return false;
    auto &fa = std::get<LogicalValue::FnApp>(a.v);
    auto &fb = std::get<LogicalValue::FnApp>(b.v);
    if (fa.fn != fb.fn || fa.args.size() != fb.args.size()) return false;
    for (size_t i = 0; i < fa.args.size(); ++i)
        if (!alpha_lval(*fa.args[i], *fb.args[i], env)) return false;
    return true;
}

inline bool alpha_formula(const Formula &a, const Formula &b, const AlphaEnv &env) {
    if (a.v.index() != b.v.index()) return false;
    auto list = [&](const std::vector<FormulaPtr> &x, const std::vector<FormulaPtr> &y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (!alpha_formula(*x[i], *y[i], env)) return false;
        return true;
    };
    if (auto *p = std::get_if<Formula::Atom>(&a.v)) {
        auto &q = std::get<Formula::Atom>(b.v);
        if (p->pred != q.pred || p->args.size() != q.args.size()) return false;
        for (size_t i = 0; i < p->args.size(); ++i)
            if (!alpha_lval(*p->args[i], *q.args[i], env)) return false;
        return true;
    }
    if (auto *p = std::get_if<Formula::HasType>(&a.v)) {
        auto &q = std::get<Formula::HasType>(b.v);
        return alpha_lval(*p->lw, *q.lw, env) && alpha_term(*p->term, *q.term, env);
    }
    if (auto *p = std::get_if<Formula::And>(&a.v)) return list(p->ps, std::get<Formula::And>(b.v).ps);
    if (auto *p = std::get_if<Formula::Or>(&a.v)) return list(p->ps, std::get<Formula::Or>(b.v).ps);
    if (auto *p = std::get_if<Formula::Not>(&a.v)) return alpha_formula(*p->p, *std::get<Formula::Not>(b.v).p, env);
    if (auto *p = std::get_if<Formula::Implies>(&a.v)) {
        auto &q = std::get<Formula::Implies>(b.v);
        return alpha_formula(*p->p, *q.p, env) && alpha_formula(*p->q, *q.q, env);
    }
    if (auto *p = std::get_if<Formula::Iff>(&a.v)) {
        auto &q = std::get<Formula::Iff>(b.v);
        return alpha_formula(*p->p, *q.p, env) && alpha_formula(*p->q, *q.q, env);
    }
    return true;
}

inline bool alpha_ref(const RefType &a, const RefType &b, AlphaEnv env) {
    env.emplace_back(std::string(kNu), std::string(kNu));
    return alpha_formula(*a.pred, *b.pred, env);
}

inline bool alpha_term(const TypeTerm &a, const TypeTerm &b, AlphaEnv env) {
    if (a.v.index() != b.v.index()) return false;
    if (auto *p = std::get_if<TypeTerm::Arrow>(&a.v)) {
        auto &q = std::get<TypeTerm::Arrow>(b.v);
        if (!alpha_ref(p->dom, q.dom, env)) return false;
        env.emplace_back(p->binder, q.binder);
        return alpha_ref(p->cod, q.cod, env);
    }
    if (auto *p = std::get_if<TypeTerm::TyVar>(&a.v)) return p->name == std::get<TypeTerm::TyVar>(b.v).name;
    if (auto *p = std::get_if<TypeTerm::CtorApp>(&a.v)) {
        auto &q = std::get<TypeTerm::CtorApp>(b.v);
        if (p->ctor != q.ctor || p->args.size() != q.args.size()) return false;
        for (size_t i = 0; i < p->args.size(); ++i)
            if (!alpha_ref(p->args[i], q.args[i], env)) return false;
        return true;
    }
    return true;
}

// ------------------------------------------------------------ renaming

/// Renames every arrow binder to a fresh name. Returns an alpha-variant.
struct Renamer {
    int next = 0;
    std::map<std::string, std::string> env;

    LValPtr lval(const LValPtr &l) {
        if (auto *w = std::get_if<ValuePtr>(&l->v)) {
            if (auto *x = std::get_if<Value::Var>(&(*w)->v)) {
                auto it = env.find(x->name);
                if (it != env.end()) return mk::lvar(it->second);
            }
            return l;
        }
        auto &f = std::get<LogicalValue::FnApp>(l->v);
        std::vector<LValPtr> args;
        for (auto &a : f.args) args.push_back(lval(a));
        return mk::fn(f.fn, args);
    }

    FormulaPtr formula(const FormulaPtr &p) {
        if (auto *a = std::get_if<Formula::Atom>(&p->v)) {
            std::vector<LValPtr> args;
            for (auto &x : a->args) args.push_back(lval(x));
            return mk::atom(a->pred, args);
        }
        if (auto *h = std::get_if<Formula::HasType>(&p->v)) return mk::has_type(lval(h->lw), term(h->term));
        auto list = [&](const std::vector<FormulaPtr> &ps) {
            std::vector<FormulaPtr> out;
            for (auto &q : ps) out.push_back(formula(q));
            return out;
        };
        if (auto *c = std::get_if<Formula::And>(&p->v)) return mk::and_(list(c->ps));
        if (auto *o = std::get_if<Formula::Or>(&p->v)) return mk::or_(list(o->ps));
        if (auto *n = std::get_if<Formula::Not>(&p->v)) return mk::not_(formula(n->p));
        if (auto *i = std::get_if<Formula::Implies>(&p->v)) return mk::implies(formula(i->p), formula(i->q));
        if (auto *f = std::get_if<Formula::Iff>(&p->v)) return mk::iff(formula(f->p), formula(f->q));
        return p;
    }

    RefType ref(const RefType &t) { return mk::ref(formula(t.pred)); }

    TermPtr term(const TermPtr &u) {
        if (auto *a = std::get_if<TypeTerm::Arrow>(&u->v)) {
            auto dom = ref(a->dom);
            auto saved = env;
            std::string fresh = "r" + std::to_string(next++);
            env[a->binder] = fresh;
            auto cod = ref(a->cod);
            env = saved;
            return mk::arrow(fresh, dom, cod);
        }
        if (auto *c = std::get_if<TypeTerm::CtorApp>(&u->v)) {
            std::vector<RefType> args;
            for (auto &t : c->args) args.push_back(ref(t));
            return mk::ctor(c->ctor, args);
        }
        return u;
    }
};

// ------------------------------------------------------------ propositions

/// Opaque atoms: `p<i> = 0` for plain atoms and `h<i> :: A` for type
/// predicates. Atom identity is the variable name.
inline FormulaPtr gen_prop(Rng &r, int atoms, int depth) {
    int k = pick(r, depth > 0 ? 7 : 2);
    auto atom = [&]() -> FormulaPtr {
        int i = pick(r, atoms);
        if (i % 3 == 2) return mk::has_type(mk::lvar("h" + std::to_string(i)), mk::tyvar("A"));
        return mk::eq(mk::lvar("p" + std::to_string(i)), mk::lv(mk::int_(0)));
    };
    switch (k) {
    case 0:
    case 1: return atom();
    case 2: return mk::and_({gen_prop(r, atoms, depth - 1), gen_prop(r, atoms, depth - 1)});
    case 3: return mk::or_({gen_prop(r, atoms, depth - 1), gen_prop(r, atoms, depth - 1)});
    case 4: return mk::not_(gen_prop(r, atoms, depth - 1));
    case 5: return mk::implies(gen_prop(r, atoms, depth - 1), gen_prop(r, atoms, depth - 1));
    default: return mk::iff(gen_prop(r, atoms, depth - 1), gen_prop(r, atoms, depth - 1));
    }
}

inline std::string lval_name(const LogicalValue &l) {
    return std::get<Value::Var>(std::get<ValuePtr>(l.v)->v).name;
}

/// Truth of an opaque-atom formula; bit i of `bits` is atom i.
inline bool truth(const Formula &p, unsigned bits) {
    auto bit = [&](const std::string &name) { return ((bits >> std::stoi(name.substr(1))) & 1U) != 0; };
    if (auto *a = std::get_if<Formula::Atom>(&p.v)) return bit(lval_name(*a->args.at(0)));
    if (auto *h = std::get_if<Formula::HasType>(&p.v)) return bit(lval_name(*h->lw));
    if (auto *c = std::get_if<Formula::And>(&p.v)) {
        for (auto &q : c->ps)
            if (!truth(*q, bits)) return false;
        return true;
    }
    if (auto *o = std::get_if<Formula::Or>(&p.v)) {
        for (auto &q : o->ps)
            if (truth(*q, bits)) return true;
        return false;
    }
    if (auto *n = std::get_if<Formula::Not>(&p.v)) return !truth(*n->p, bits);
    if (auto *i = std::get_if<Formula::Implies>(&p.v)) return !truth(*i->p, bits) || truth(*i->q, bits);
    if (auto *f = std::get_if<Formula::Iff>(&p.v)) return truth(*f->p, bits) == truth(*f->q, bits);
    return std::holds_alternative<Formula::True>(p.v);
}

}  // namespace duck::test
