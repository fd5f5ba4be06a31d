#include "duckcheck/logic.hpp"

#include "util.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace duck {

using detail::overloaded;

namespace {
const std::string kNuStr{kNu};
}

// ------------------------------------------------------------ environment

TypeEnv TypeEnv::bind(const std::string &x, Scheme s) const {
    TypeEnv g = *this;
    g.entries_.push_back(EnvEntry{EnvEntry::Kind::Bind, x, std::move(s), nullptr});
    return g;
}

TypeEnv TypeEnv::tyvar(const std::string &a) const {
    TypeEnv g = *this;
    g.entries_.push_back(EnvEntry{EnvEntry::Kind::TyVar, a, Scheme{}, nullptr});
    return g;
}

TypeEnv TypeEnv::guard(FormulaPtr p) const {
    TypeEnv g = *this;
    g.entries_.push_back(EnvEntry{EnvEntry::Kind::Guard, "", Scheme{}, std::move(p)});
    return g;
}

const Scheme *TypeEnv::lookup(const std::string &x) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->kind == EnvEntry::Kind::Bind && it->name == x) return &it->scheme;
    return nullptr;
}

bool TypeEnv::has_tyvar(const std::string &a) const {
    for (auto &e : entries_)
        if (e.kind == EnvEntry::Kind::TyVar && e.name == a) return true;
    return false;
}

// ---------------------------------------------------------------- clauses

FormulaPtr Clause::consequent() const {
    std::vector<FormulaPtr> ds;
    for (auto &[lw, u] : r) ds.push_back(mk::has_type(lw, u));
    return mk::or_(std::move(ds));
}

FormulaPtr clause_formula(const Clause &c) {
    if (c.r.empty()) {
        if (auto *n = std::get_if<Formula::Not>(&c.q->v)) return n->p;
        return mk::not_(c.q);
    }
    if (std::holds_alternative<Formula::True>(c.q->v)) return c.consequent();
    return mk::implies(c.q, c.consequent());
}

FormulaPtr lower(const FormulaPtr &p) {
    return std::visit(
        overloaded{
            [&](const Formula::And &a) {
                std::vector<FormulaPtr> ps;
                for (auto &q : a.ps) ps.push_back(lower(q));
                return mk::and_(std::move(ps));
            },
            [&](const Formula::Or &o) {
                std::vector<FormulaPtr> ps;
                for (auto &q : o.ps) ps.push_back(lower(q));
                return mk::or_(std::move(ps));
            },
            [&](const Formula::Not &n) { return mk::not_(lower(n.p)); },
            [&](const Formula::Implies &i) { return mk::or_({mk::not_(lower(i.p)), lower(i.q)}); },
            [&](const Formula::Iff &i) {
                auto a = lower(i.p), b = lower(i.q);
                return mk::and_({mk::or_({mk::not_(a), b}), mk::or_({a, mk::not_(b)})});
            },
            [&](const auto &) { return p; },
        },
        p->v);
}

namespace {

struct Lit {
    FormulaPtr atom;  // Atom or HasType
    bool pos;
    std::string key;
};
using LitClause = std::vector<Lit>;
using Cnf = std::vector<LitClause>;

// Drops repeated literals, tautological clauses and repeated clauses.
Cnf tidy(Cnf in) {
    Cnf out;
    std::set<std::string> clauses;
    for (auto &c : in) {
        std::map<std::string, bool> lits;
        LitClause kept;
        bool taut = false;
        for (auto &l : c) {
            auto [it, fresh] = lits.emplace(l.key, l.pos);
            if (fresh) {
                kept.push_back(l);
            } else if (it->second != l.pos) {
                taut = true;
                break;
            }
        }
        if (taut) continue;
        std::string k;
        for (auto &[a, pos] : lits) k += (pos ? "+" : "-") + a + "\n";
        if (clauses.insert(k).second) out.push_back(std::move(kept));
    }
    return out;
}

Cnf cnf(const FormulaPtr &p, bool pos, std::size_t cap) {
    auto conj = [&](const std::vector<FormulaPtr> &ps) {
        Cnf out;
        for (auto &q : ps) {
            auto c = cnf(q, pos, cap);
            out.insert(out.end(), c.begin(), c.end());
            if (out.size() > 16 * cap) throw CnfBlowup("clause limit exceeded");
        }
        out = tidy(std::move(out));
        if (out.size() > cap) throw CnfBlowup("clause limit exceeded");
        return out;
    };
    auto disj = [&](const std::vector<FormulaPtr> &ps) {
        Cnf acc{LitClause{}};
        for (auto &q : ps) {
            auto c = cnf(q, pos, cap);
            if (acc.size() * c.size() > 16 * cap) throw CnfBlowup("clause limit exceeded");
            Cnf next;
            for (auto &a : acc)
                for (auto &b : c) {
                    LitClause m = a;
                    m.insert(m.end(), b.begin(), b.end());
                    next.push_back(std::move(m));
                }
            acc = tidy(std::move(next));
            if (acc.size() > cap) throw CnfBlowup("clause limit exceeded");
        }
        return acc;
    };
    return std::visit(
        overloaded{
            [&](const Formula::And &a) { return pos ? conj(a.ps) : disj(a.ps); },
            [&](const Formula::Or &o) { return pos ? disj(o.ps) : conj(o.ps); },
            [&](const Formula::Not &n) { return cnf(n.p, !pos, cap); },
            [&](const Formula::True &) { return pos ? Cnf{} : Cnf{LitClause{}}; },
            [&](const Formula::False &) { return pos ? Cnf{LitClause{}} : Cnf{}; },
            [&](const Formula::Implies &) -> Cnf { return cnf(lower(p), pos, cap); },
            [&](const Formula::Iff &) -> Cnf { return cnf(lower(p), pos, cap); },
            [&](const auto &) { return Cnf{LitClause{Lit{p, pos, canonical_key(*p)}}}; },
        },
        p->v);
}

}  // namespace

std::vector<Clause> normalize(const FormulaPtr &p, std::size_t cap) {
    std::vector<Clause> out;
    for (auto &lc : cnf(p, true, cap)) {
        std::vector<FormulaPtr> qs;
        Clause c;
        std::set<std::string> seen;
        for (auto &l : lc) {
            auto *h = std::get_if<Formula::HasType>(&l.atom->v);
            if (h && l.pos) {
                auto key = canonical_key(*h->lw) + "::" + canonical_key(h->term);
                if (seen.insert(key).second) c.r.emplace_back(h->lw, h->term);
            } else if (h) {
                qs.push_back(l.atom);
            } else {
                qs.push_back(l.pos ? mk::not_(l.atom) : l.atom);
            }
        }
        c.q = mk::and_(std::move(qs));
        out.push_back(std::move(c));
    }
    return out;
}

// -------------------------------------------------------------- embedding

FormulaPtr embed_type(const Scheme &s) {
    if (!s.is_mono()) return mk::top();
    return s.body.pred;
}

FormulaPtr embed_env(const TypeEnv &g) {
    std::vector<FormulaPtr> ps;
    for (auto &e : g.entries()) {
        if (e.kind == EnvEntry::Kind::Bind && e.scheme.is_mono())
            ps.push_back(embed_at(e.scheme.body, mk::lvar(e.name)));
        else if (e.kind == EnvEntry::Kind::Guard)
            ps.push_back(e.guard);
    }
    return mk::and_(std::move(ps));
}

// ----------------------------------------------------------------- boxing

int BoxTable::box(const TermPtr &u) {
    auto key = canonical_key(u);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(terms_.size());
    ids_.emplace(key, id);
    terms_.push_back(u);
    return id;
}

int BoxTable::find(const TermPtr &u) const {
    auto it = ids_.find(canonical_key(u));
    return it == ids_.end() ? -1 : it->second;
}

// ----------------------------------------------------- axiom instantiation

std::optional<std::string> literal_tag(const Value &w) {
    return std::visit(
        overloaded{
            [](const Value::Var &) -> std::optional<std::string> { return std::nullopt; },
            [](const Const &c) -> std::optional<std::string> {
                return std::visit(overloaded{
                                      [](const Const::Int &) { return std::string("Int"); },
                                      [](const Const::Bool &) { return std::string("Bool"); },
                                      [](const Const::Str &) { return std::string("Str"); },
                                      [](const Const::Null &) { return std::string("Null"); },
                                      [](const Const::EmptyDict &) { return std::string("Dict"); },
                                      [](const Const::PrimOp &) { return std::string("Fun"); },
                                      [](const Const::Partial &) { return std::string("Fun"); },
                                  },
                                  c.v);
            },
            [](const Value::DictExt &) -> std::optional<std::string> { return "Dict"; },
            [](const Value::Fun &) -> std::optional<std::string> { return "Fun"; },
            [](const Value::TFun &) -> std::optional<std::string> { return "TFun"; },
            [](const Value::New &) -> std::optional<std::string> { return "Dict"; },
        },
        w.v);
}

namespace {

struct TermCollector {
    std::vector<LValPtr> out;
    std::set<std::string> seen;

    void lval(const LValPtr &l) {
        if (!seen.insert(canonical_key(*l)).second) return;
        if (auto *f = std::get_if<LogicalValue::FnApp>(&l->v)) {
            for (auto &a : f->args) lval(a);
        } else {
            auto &w = std::get<ValuePtr>(l->v);
            if (auto *d = std::get_if<Value::DictExt>(&w->v)) {
                lval(mk::lv(d->base));
                lval(mk::lv(d->key));
                lval(mk::lv(d->val));
            }
        }
        out.push_back(l);
    }

    void formula(const FormulaPtr &p) {
        std::visit(overloaded{
                       [&](const Formula::Atom &a) {
                           for (auto &x : a.args) lval(x);
                       },
                       [&](const Formula::HasType &h) { lval(h.lw); },
                       [&](const Formula::And &a) {
                           for (auto &q : a.ps) formula(q);
                       },
                       [&](const Formula::Or &o) {
                           for (auto &q : o.ps) formula(q);
                       },
                       [&](const Formula::Not &n) { formula(n.p); },
                       [&](const Formula::Implies &i) {
                           formula(i.p);
                           formula(i.q);
                       },
                       [&](const Formula::Iff &i) {
                           formula(i.p);
                           formula(i.q);
                       },
                       [&](const auto &) {},
                   },
                   p->v);
    }
};

// ext(b, k, v) in either the value or the logical form.
bool as_ext(const LValPtr &l, LValPtr &b, LValPtr &k, LValPtr &v) {
    if (auto *f = std::get_if<LogicalValue::FnApp>(&l->v)) {
        if (f->fn != Fn::Ext) return false;
        b = f->args[0], k = f->args[1], v = f->args[2];
        return true;
    }
    auto &w = std::get<ValuePtr>(l->v);
    if (auto *d = std::get_if<Value::DictExt>(&w->v)) {
        b = mk::lv(d->base), k = mk::lv(d->key), v = mk::lv(d->val);
        return true;
    }
    return false;
}

const Value *as_value(const LValPtr &l) {
    if (auto *w = std::get_if<ValuePtr>(&l->v)) return w->get();
    return nullptr;
}

bool is_string_const(const LValPtr &l) {
    auto *w = as_value(l);
    if (!w) return false;
    auto *c = std::get_if<Const>(&w->v);
    return c && std::holds_alternative<Const::Str>(c->v);
}

bool is_literal(const LValPtr &l) {
    auto *w = as_value(l);
    return w && !std::holds_alternative<Value::Var>(w->v);
}

struct Eqmod {
    LValPtr a, b, x;
};

void collect_eqmods(const FormulaPtr &p, std::vector<Eqmod> &out) {
    std::visit(overloaded{
                   [&](const Formula::Atom &a) {
                       if (a.pred == Pred::EqMod) out.push_back({a.args[0], a.args[1], a.args[2]});
                   },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) collect_eqmods(q, out);
                   },
                   [&](const Formula::Or &o) {
                       for (auto &q : o.ps) collect_eqmods(q, out);
                   },
                   [&](const Formula::Not &n) { collect_eqmods(n.p, out); },
                   [&](const Formula::Implies &i) {
                       collect_eqmods(i.p, out);
                       collect_eqmods(i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       collect_eqmods(i.p, out);
                       collect_eqmods(i.q, out);
                   },
                   [&](const auto &) {},
               },
               p->v);
}

void collect_keys(const FormulaPtr &p, std::vector<LValPtr> &out);

void collect_keys_lv(const LValPtr &l, std::vector<LValPtr> &out) {
    if (auto *f = std::get_if<LogicalValue::FnApp>(&l->v)) {
        if (f->fn == Fn::Sel || f->fn == Fn::Ext) out.push_back(f->args[1]);
        for (auto &a : f->args) collect_keys_lv(a, out);
    } else if (auto *d = std::get_if<Value::DictExt>(&std::get<ValuePtr>(l->v)->v)) {
        out.push_back(mk::lv(d->key));
        collect_keys_lv(mk::lv(d->base), out);
        collect_keys_lv(mk::lv(d->val), out);
    }
}

void collect_keys(const FormulaPtr &p, std::vector<LValPtr> &out) {
    std::visit(overloaded{
                   [&](const Formula::Atom &a) {
                       if (a.pred == Pred::Has || a.pred == Pred::EqMod) out.push_back(a.args[a.pred == Pred::Has ? 1 : 2]);
                       for (auto &x : a.args) collect_keys_lv(x, out);
                   },
                   [&](const Formula::HasType &h) { collect_keys_lv(h.lw, out); },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) collect_keys(q, out);
                   },
                   [&](const Formula::Or &o) {
                       for (auto &q : o.ps) collect_keys(q, out);
                   },
                   [&](const Formula::Not &n) { collect_keys(n.p, out); },
                   [&](const Formula::Implies &i) {
                       collect_keys(i.p, out);
                       collect_keys(i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       collect_keys(i.p, out);
                       collect_keys(i.q, out);
                   },
                   [&](const auto &) {},
               },
               p->v);
}

std::vector<LValPtr> dedup(const std::vector<LValPtr> &xs) {
    std::vector<LValPtr> out;
    std::set<std::string> seen;
    for (auto &x : xs)
        if (seen.insert(canonical_key(*x)).second) out.push_back(x);
    return out;
}

LValPtr lstr(const std::string &s) { return mk::lv(mk::str(s)); }

}  // namespace

std::vector<LValPtr> ground_terms(const std::vector<FormulaPtr> &fs) {
    TermCollector c;
    for (auto &f : fs) c.formula(f);
    return c.out;
}

namespace {

std::vector<FormulaPtr> instantiate_impl(const std::vector<LValPtr> &terms, std::vector<LValPtr> keys,
                                         std::vector<Eqmod> eqmods, std::size_t cap) {
    std::vector<FormulaPtr> out;
    auto push = [&](FormulaPtr f) {
        out.push_back(std::move(f));
        if (out.size() > cap) throw InstantiationBlowup("axiom instance limit exceeded");
    };

    for (auto &t : terms) {
        if (is_string_const(t)) keys.push_back(t);
        LValPtr b, k, v;
        if (as_ext(t, b, k, v)) keys.push_back(k);
    }
    keys = dedup(keys);

    bool has_empty = false;
    for (auto &t : terms) {
        LValPtr b, k, v;
        if (as_ext(t, b, k, v)) {
            push(mk::has(t, k));
            push(mk::eq(mk::sel(t, k), v));
            push(mk::atom(Pred::EqMod, {t, b, k}));
            push(mk::tag_is(t, "Dict"));
            eqmods.push_back({t, b, k});
        }
        if (auto *w = as_value(t)) {
            if (auto *c = std::get_if<Const>(&w->v))
                if (std::holds_alternative<Const::EmptyDict>(c->v)) has_empty = true;
            if (auto tg = literal_tag(*w)) push(mk::tag_is(t, *tg));
            if (auto *c = std::get_if<Const>(&w->v)) {
                if (auto *bb = std::get_if<Const::Bool>(&c->v); bb && bb->b)
                    push(mk::not_(mk::eq(t, mk::lv(mk::bool_(false)))));
            }
        } else {
            auto &f = std::get<LogicalValue::FnApp>(t->v);
            if (f.fn == Fn::Plus || f.fn == Fn::Minus) push(mk::tag_is(t, "Int"));
            if (f.fn == Fn::Tag) push(mk::tag_is(t, "Str"));
        }
        if (!is_literal(t)) {
            push(mk::implies(mk::tag_is(t, "Bool"),
                             mk::or_({mk::eq(t, mk::lv(mk::bool_(true))), mk::eq(t, mk::lv(mk::bool_(false)))})));
        }
    }
    if (has_empty)
        for (auto &k : keys) push(mk::not_(mk::has(mk::lv(mk::empty()), k)));

    // eqmod congruence, one round over the known keys
    std::set<std::string> done;
    for (auto &e : eqmods) {
        auto ek = canonical_key(*e.a) + "|" + canonical_key(*e.b) + "|" + canonical_key(*e.x);
        if (!done.insert(ek).second) continue;
        auto xk = canonical_key(*e.x);
        for (auto &y : keys) {
            if (canonical_key(*y) == xk) continue;
            push(mk::implies(mk::and_({mk::atom(Pred::EqMod, {e.a, e.b, e.x}), mk::not_(mk::eq(e.x, y))}),
                             mk::and_({mk::iff(mk::has(e.a, y), mk::has(e.b, y)),
                                       mk::eq(mk::sel(e.a, y), mk::sel(e.b, y))})));
        }
    }

    // distinct string constants, including the tag names introduced above
    std::vector<LValPtr> strs;
    for (auto &t : terms)
        if (is_string_const(t)) strs.push_back(t);
    for (auto &n : {"Int", "Bool", "Str", "Dict", "Null", "Fun", "TFun"}) strs.push_back(lstr(n));
    strs = dedup(strs);
    for (size_t i = 0; i < strs.size(); ++i)
        for (size_t j = i + 1; j < strs.size(); ++j) push(mk::not_(mk::eq(strs[i], strs[j])));
    return out;
}

}  // namespace

std::vector<FormulaPtr> instantiate_axioms(const std::vector<LValPtr> &terms, std::size_t cap) {
    return instantiate_impl(terms, {}, {}, cap);
}

std::vector<FormulaPtr> axioms_for(const std::vector<FormulaPtr> &fs, std::size_t cap) {
    auto terms = ground_terms(fs);
    std::vector<LValPtr> keys;
    std::vector<Eqmod> eqmods;
    for (auto &f : fs) {
        collect_keys(f, keys);
        collect_eqmods(f, eqmods);
    }
    return instantiate_impl(terms, keys, eqmods, cap);
}

// ------------------------------------------------------------ ground eval

bool value_equal(const ValuePtr &a, const ValuePtr &b) { return canonical_key(*a) == canonical_key(*b); }

namespace {

const std::string *str_of(const ValuePtr &w) {
    if (auto *c = std::get_if<Const>(&w->v))
        if (auto *s = std::get_if<Const::Str>(&c->v)) return &s->s;
    return nullptr;
}

const std::int64_t *int_of(const ValuePtr &w) {
    if (auto *c = std::get_if<Const>(&w->v))
        if (auto *s = std::get_if<Const::Int>(&c->v)) return &s->z;
    return nullptr;
}

bool is_dict(const ValuePtr &w) {
    if (std::holds_alternative<Value::DictExt>(w->v) || std::holds_alternative<Value::New>(w->v)) return true;
    if (auto *c = std::get_if<Const>(&w->v)) return std::holds_alternative<Const::EmptyDict>(c->v);
    return false;
}

}  // namespace

std::optional<ValuePtr> dict_lookup(const ValuePtr &d, const std::string &k, const DefEnv *defs) {
    const Value *cur = d.get();
    while (true) {
        if (auto *e = std::get_if<Value::DictExt>(&cur->v)) {
            auto *ks = str_of(e->key);
            if (ks && *ks == k) return e->val;
            cur = e->base.get();
            continue;
        }
        if (auto *n = std::get_if<Value::New>(&cur->v)) {
            if (!defs) return std::nullopt;
            auto it = defs->find(n->ctor);
            if (it == defs->end()) return std::nullopt;
            auto &fs = it->second.fields;
            for (size_t i = 0; i < fs.size() && i < n->args.size(); ++i)
                if (fs[i].name == k) return n->args[i];
            return ValuePtr{};
        }
        if (auto *c = std::get_if<Const>(&cur->v))
            if (std::holds_alternative<Const::EmptyDict>(c->v)) return ValuePtr{};
        return std::nullopt;
    }
}

std::optional<std::vector<std::string>> dict_keys(const ValuePtr &d, const DefEnv *defs) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    const Value *cur = d.get();
    while (true) {
        if (auto *e = std::get_if<Value::DictExt>(&cur->v)) {
            auto *ks = str_of(e->key);
            if (!ks) return std::nullopt;
            if (seen.insert(*ks).second) out.push_back(*ks);
            cur = e->base.get();
            continue;
        }
        if (auto *n = std::get_if<Value::New>(&cur->v)) {
            if (!defs) return std::nullopt;
            auto it = defs->find(n->ctor);
            if (it == defs->end()) return std::nullopt;
            for (auto &f : it->second.fields)
                if (seen.insert(f.name).second) out.push_back(f.name);
            return out;
        }
        if (auto *c = std::get_if<Const>(&cur->v))
            if (std::holds_alternative<Const::EmptyDict>(c->v)) return out;
        return std::nullopt;
    }
}

namespace {

// sel at an absent key: the model's default for that key. Only equality
// can inspect it.
constexpr const char *kMissing = "#missing";

ValuePtr missing(const std::string &k) { return mk::new_(kMissing, std::nullopt, {mk::str(k)}); }

bool is_missing(const ValuePtr &w) {
    auto *n = std::get_if<Value::New>(&w->v);
    return n && n->ctor == kMissing;
}

}  // namespace

ValuePtr eval_lval(const LValPtr &lw, const GroundModel &m) {
    if (auto *wp = std::get_if<ValuePtr>(&lw->v)) {
        auto &w = *wp;
        if (auto *x = std::get_if<Value::Var>(&w->v)) {
            auto it = m.vars.find(x->name);
            return it == m.vars.end() ? nullptr : it->second;
        }
        if (auto *d = std::get_if<Value::DictExt>(&w->v)) {
            auto b = eval_lval(mk::lv(d->base), m), k = eval_lval(mk::lv(d->key), m),
                 v = eval_lval(mk::lv(d->val), m);
            if (!b || !k || !v) return nullptr;
            return mk::ext(b, k, v);
        }
        NameSet fv;
        free_vars(*w, fv);
        for (auto &x : fv)
            if (!m.vars.count(x)) return nullptr;
        ValuePtr out = w;
        for (auto &x : fv) out = subst_value(out, x, m.vars.at(x));
        return out;
    }
    auto &f = std::get<LogicalValue::FnApp>(lw->v);
    std::vector<ValuePtr> as;
    for (auto &a : f.args) {
        auto v = eval_lval(a, m);
        if (!v) return nullptr;
        if (is_missing(v)) return nullptr;
        as.push_back(v);
    }
    switch (f.fn) {
    case Fn::Tag: {
        auto t = literal_tag(*as[0]);
        return t ? mk::str(*t) : nullptr;
    }
    case Fn::Sel: {
        auto *k = str_of(as[1]);
        if (!k) return nullptr;
        auto r = dict_lookup(as[0], *k, m.defs);
        if (!r) return nullptr;
        return *r ? *r : missing(*k);
    }
    case Fn::Plus:
    case Fn::Minus: {
        auto *a = int_of(as[0]), *b = int_of(as[1]);
        if (!a || !b) return nullptr;
        auto ua = static_cast<std::uint64_t>(*a), ub = static_cast<std::uint64_t>(*b);
        return mk::int_(static_cast<std::int64_t>(f.fn == Fn::Plus ? ua + ub : ua - ub));
    }
    case Fn::Ext:
        if (!is_dict(as[0]) || !str_of(as[1])) return nullptr;
        return mk::ext(as[0], as[1], as[2]);
    }
    return nullptr;
}

namespace {

Truth of_bool(bool b) { return b ? Truth::True : Truth::False; }

Truth eval_atom(const Formula::Atom &a, const GroundModel &m) {
    std::vector<ValuePtr> as;
    for (auto &x : a.args) {
        auto v = eval_lval(x, m);
        if (!v || (is_missing(v) && a.pred != Pred::Eq)) return Truth::Stuck;
        as.push_back(v);
    }
    switch (a.pred) {
    case Pred::Eq:
        return of_bool(value_equal(as[0], as[1]));
    case Pred::Lt:
    case Pred::Le: {
        auto *x = int_of(as[0]), *y = int_of(as[1]);
        if (!x || !y) return Truth::Stuck;
        return of_bool(a.pred == Pred::Lt ? *x < *y : *x <= *y);
    }
    case Pred::Has: {
        auto *k = str_of(as[1]);
        if (!k) return Truth::Stuck;
        auto r = dict_lookup(as[0], *k, m.defs);
        if (!r) return Truth::Stuck;
        return of_bool(*r != nullptr);
    }
    case Pred::EqMod: {
        auto *k = str_of(as[2]);
        auto k1 = dict_keys(as[0], m.defs), k2 = dict_keys(as[1], m.defs);
        if (!k || !k1 || !k2) return Truth::Stuck;
        std::set<std::string> all(k1->begin(), k1->end());
        all.insert(k2->begin(), k2->end());
        for (auto &y : all) {
            if (y == *k) continue;
            auto a1 = *dict_lookup(as[0], y, m.defs), a2 = *dict_lookup(as[1], y, m.defs);
            if ((a1 == nullptr) != (a2 == nullptr)) return Truth::False;
            if (a1 && !value_equal(a1, a2)) return Truth::False;
        }
        return Truth::True;
    }
    }
    return Truth::Stuck;
}

}  // namespace

Truth eval_ground(const FormulaPtr &p, const GroundModel &m) {
    return std::visit(
        overloaded{
            [&](const Formula::Atom &a) { return eval_atom(a, m); },
            [&](const Formula::HasType &) { return Truth::Stuck; },
            [&](const Formula::And &a) {
                bool stuck = false;
                for (auto &q : a.ps) {
                    auto t = eval_ground(q, m);
                    if (t == Truth::False) return Truth::False;
                    if (t == Truth::Stuck) stuck = true;
                }
                return stuck ? Truth::Stuck : Truth::True;
            },
            [&](const Formula::Or &o) {
                bool stuck = false;
                for (auto &q : o.ps) {
                    auto t = eval_ground(q, m);
                    if (t == Truth::True) return Truth::True;
                    if (t == Truth::Stuck) stuck = true;
                }
                return stuck ? Truth::Stuck : Truth::False;
            },
            [&](const Formula::Not &n) {
                auto t = eval_ground(n.p, m);
                return t == Truth::Stuck ? t : of_bool(t == Truth::False);
            },
            [&](const Formula::Implies &i) {
                auto a = eval_ground(i.p, m);
                if (a == Truth::False) return Truth::True;
                auto b = eval_ground(i.q, m);
                if (b == Truth::True) return Truth::True;
                if (a == Truth::Stuck || b == Truth::Stuck) return Truth::Stuck;
                return Truth::False;
            },
            [&](const Formula::Iff &i) {
                auto a = eval_ground(i.p, m), b = eval_ground(i.q, m);
                if (a == Truth::Stuck || b == Truth::Stuck) return Truth::Stuck;
                return of_bool(a == b);
            },
            [&](const Formula::True &) { return Truth::True; },
            [&](const Formula::False &) { return Truth::False; },
        },
        p->v);
}

}  // namespace duck
