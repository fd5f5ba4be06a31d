#include "duckcheck/typing.hpp"

#include "duckcheck/wellformed.hpp"
#include "util.hpp"

#include <functional>

namespace duck {

using detail::overloaded;

TypeError::TypeError(std::string r, const std::string &msg, std::string b)
    : std::runtime_error(msg), rule(std::move(r)), binder(std::move(b)) {}

namespace {

const std::string kNuStr{kNu};

LValPtr lx(const std::string &x) { return mk::lvar(x); }
LValPtr ltrue() { return mk::lv(mk::bool_(true)); }
LValPtr lfalse() { return mk::lv(mk::bool_(false)); }

RefType arrow_t(const std::string &x, RefType dom, RefType cod) {
    return mk::term_type(mk::arrow(x, std::move(dom), std::move(cod)));
}

RefType bool_iff(FormulaPtr p) {
    return mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Bool"), mk::iff(mk::eq(mk::lnu(), ltrue()), std::move(p))}));
}

/// The arrow part of a primitive's type.
TermPtr prim_arrow(Prim p) {
    auto Int = mk::tag_type("Int"), Str = mk::tag_type("Str"), Dict = mk::tag_type("Dict");
    auto Bool = mk::tag_type("Bool"), Top = mk::top_type();
    switch (p) {
    case Prim::Plus:
    case Prim::Minus: {
        Fn f = p == Prim::Plus ? Fn::Plus : Fn::Minus;
        auto cod = mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Int"), mk::eq(mk::lnu(), mk::fn(f, {lx("x"), lx("y")}))}));
        return mk::arrow("x", Int, arrow_t("y", Int, cod));
    }
    case Prim::Eq:
        return mk::arrow("x", Top, arrow_t("y", Top, bool_iff(mk::eq(lx("x"), lx("y")))));
    case Prim::Not:
        return mk::arrow("x", Bool,
                         mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Bool"),
                                           mk::iff(mk::eq(lx("x"), ltrue()), mk::eq(mk::lnu(), lfalse()))})));
    case Prim::Tag:
        return mk::arrow("x", Top, mk::ref(mk::eq(mk::lnu(), mk::tag(lx("x")))));
    case Prim::Has:
    case Prim::Mem:
        return mk::arrow("d", Dict, arrow_t("k", Str, bool_iff(mk::has(lx("d"), lx("k")))));
    case Prim::Get: {
        auto key = mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Str"), mk::has(lx("d"), mk::lnu())}));
        return mk::arrow("d", Dict, arrow_t("k", key, mk::ref(mk::eq(mk::lnu(), mk::sel(lx("d"), lx("k"))))));
    }
    case Prim::Set: {
        auto cod = mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Dict"),
                                     mk::atom(Pred::EqMod, {mk::lnu(), lx("d"), lx("k")}),
                                     mk::has(mk::lnu(), lx("k")), mk::eq(mk::sel(mk::lnu(), lx("k")), lx("x"))}));
        return mk::arrow("d", Dict, arrow_t("k", Str, arrow_t("x", Top, cod)));
    }
    case Prim::Keys: {
        auto elem = mk::ref(mk::and_({mk::tag_is(mk::lnu(), "Str"), mk::has(lx("d"), mk::lnu())}));
        return mk::arrow("d", Dict, mk::term_type(mk::ctor("List", {elem})));
    }
    case Prim::Fix: {
        auto A = mk::term_type(mk::tyvar("A"));
        return mk::arrow("g", arrow_t("y", A, A), A);
    }
    }
    throw std::logic_error("unknown primitive");
}

// ------------------------------------------------------------- instantiation

FormulaPtr inst_f(const FormulaPtr &p, const std::string &a, const RefType &t);

RefType inst_r(const RefType &r, const std::string &a, const RefType &t) { return RefType{inst_f(r.pred, a, t)}; }

TermPtr inst_u(const TermPtr &u, const std::string &a, const RefType &t) {
    return std::visit(overloaded{
                          [&](const TypeTerm::Arrow &x) -> TermPtr {
                              return mk::arrow(x.binder, inst_r(x.dom, a, t), inst_r(x.cod, a, t));
                          },
                          [&](const TypeTerm::TyVar &v) -> TermPtr {
                              return v.marked ? mk::tyvar(v.name) : u;
                          },
                          [&](const TypeTerm::Null &) -> TermPtr { return u; },
                          [&](const TypeTerm::CtorApp &c) -> TermPtr {
                              std::vector<RefType> args;
                              for (auto &r : c.args) args.push_back(inst_r(r, a, t));
                              return mk::ctor(c.ctor, std::move(args));
                          },
                      },
                      u->v);
}

FormulaPtr inst_f(const FormulaPtr &p, const std::string &a, const RefType &t) {
    return std::visit(overloaded{
                          [&](const Formula::HasType &h) -> FormulaPtr {
                              if (auto *v = std::get_if<TypeTerm::TyVar>(&h.term->v); v && v->name == a)
                                  return embed_at(t, h.lw);
                              return mk::has_type(h.lw, inst_u(h.term, a, t));
                          },
                          [&](const Formula::And &x) -> FormulaPtr {
                              std::vector<FormulaPtr> ps;
                              for (auto &q : x.ps) ps.push_back(inst_f(q, a, t));
                              return mk::and_(std::move(ps));
                          },
                          [&](const Formula::Or &x) -> FormulaPtr {
                              std::vector<FormulaPtr> ps;
                              for (auto &q : x.ps) ps.push_back(inst_f(q, a, t));
                              return mk::or_(std::move(ps));
                          },
                          [&](const Formula::Not &n) -> FormulaPtr { return mk::not_(inst_f(n.p, a, t)); },
                          [&](const Formula::Implies &i) -> FormulaPtr {
                              return mk::implies(inst_f(i.p, a, t), inst_f(i.q, a, t));
                          },
                          [&](const Formula::Iff &i) -> FormulaPtr {
                              return mk::iff(inst_f(i.p, a, t), inst_f(i.q, a, t));
                          },
                          [&](const auto &) -> FormulaPtr { return p; },
                      },
                      p->v);
}

bool has_marks(const RefType &t);

bool has_marks_u(const TypeTerm &u) {
    return std::visit(overloaded{
                          [&](const TypeTerm::Arrow &x) { return has_marks(x.dom) || has_marks(x.cod); },
                          [&](const TypeTerm::TyVar &v) { return v.marked; },
                          [&](const TypeTerm::Null &) { return false; },
                          [&](const TypeTerm::CtorApp &c) {
                              for (auto &r : c.args)
                                  if (has_marks(r)) return true;
                              return false;
                          },
                      },
                      u.v);
}

bool has_marks_f(const Formula &p) {
    return std::visit(overloaded{
                          [&](const Formula::HasType &h) { return has_marks_u(*h.term); },
                          [&](const Formula::And &a) {
                              for (auto &q : a.ps)
                                  if (has_marks_f(*q)) return true;
                              return false;
                          },
                          [&](const Formula::Or &a) {
                              for (auto &q : a.ps)
                                  if (has_marks_f(*q)) return true;
                              return false;
                          },
                          [&](const Formula::Not &n) { return has_marks_f(*n.p); },
                          [&](const Formula::Implies &i) { return has_marks_f(*i.p) || has_marks_f(*i.q); },
                          [&](const Formula::Iff &i) { return has_marks_f(*i.p) || has_marks_f(*i.q); },
                          [&](const auto &) { return false; },
                      },
                      p.v);
}

bool has_marks(const RefType &t) { return has_marks_f(*t.pred); }

const DatatypeDef &def_of(const DefEnv &defs, const std::string &c) {
    auto it = defs.find(c);
    if (it == defs.end()) throw TypeError("T-Fold", "unknown constructor " + c);
    return it->second;
}

RefType inst_all(RefType t, const DatatypeDef &d, const std::vector<RefType> &targs) {
    for (size_t i = 0; i < d.params.size() && i < targs.size(); ++i) t = inst_r(t, d.params[i].tyvar, targs[i]);
    return strip_marks(t);
}

}  // namespace

// ---------------------------------------------------------- constant types

Scheme const_type(Prim p) {
    auto u = prim_arrow(p);
    if (p == Prim::Fix) return Scheme{{"A"}, mk::term_type(u)};
    return Scheme::mono(mk::ref(mk::and_({mk::eq(mk::lnu(), mk::lv(mk::prim(p))), mk::has_type(mk::lnu(), u)})));
}

Scheme const_type(const Const &c) {
    auto single = [&](ValuePtr w) { return Scheme::mono(mk::ref(mk::eq(mk::lnu(), mk::lv(std::move(w))))); };
    return std::visit(overloaded{
                          [&](const Const::Int &x) { return single(mk::int_(x.z)); },
                          [&](const Const::Bool &x) { return single(mk::bool_(x.b)); },
                          [&](const Const::Str &x) { return single(mk::str(x.s)); },
                          [&](const Const::Null &) { return single(mk::null()); },
                          [&](const Const::EmptyDict &) { return single(mk::empty()); },
                          [&](const Const::PrimOp &x) { return const_type(x.op); },
                          [&](const Const::Partial &x) {
                              TermPtr u = prim_arrow(x.op);
                              RefType cur = mk::term_type(u);
                              for (auto &a : x.args) {
                                  auto *arr = as_arrow_type(cur);
                                  if (!arr) throw std::logic_error("partial application beyond arity");
                                  cur = subst_value(arr->cod, arr->binder, a);
                              }
                              return Scheme::mono(cur);
                          },
                      },
                      c.v);
}

RefType inst(const RefType &s, const std::string &a, const RefType &t) { return strip_marks(inst_r(s, a, t)); }

Scheme inst(const Scheme &s, const RefType &t) {
    if (s.tyvars.empty()) throw TypeError("T-Inst", "type instantiation of a monomorphic type");
    return Scheme{{s.tyvars.begin() + 1, s.tyvars.end()}, inst(s.body, s.tyvars.front(), t)};
}

FormulaPtr unfold(const DefEnv &defs, const std::string &ctor, const std::vector<RefType> &targs) {
    auto &d = def_of(defs, ctor);
    std::vector<FormulaPtr> body{mk::tag_is(mk::lnu(), "Dict")};
    for (auto &f : d.fields)
        body.push_back(embed_at(inst_all(f.type, d, targs), mk::sel(mk::lnu(), mk::lv(mk::str(f.name)))));
    return mk::implies(mk::not_(mk::eq(mk::lnu(), mk::lv(mk::null()))), mk::and_(std::move(body)));
}

FormulaPtr fold(const DefEnv &defs, const std::string &ctor, const std::vector<RefType> &targs,
                const std::vector<ValuePtr> &args) {
    auto &d = def_of(defs, ctor);
    if (args.size() != d.fields.size())
        throw TypeError("T-Fold", ctor + " expects " + std::to_string(d.fields.size()) + " arguments");
    std::vector<FormulaPtr> ps{mk::not_(mk::eq(mk::lnu(), mk::lv(mk::null()))), mk::tag_is(mk::lnu(), "Dict"),
                               mk::has_type(mk::lnu(), mk::ctor(ctor, targs))};
    for (size_t j = 0; j < d.fields.size(); ++j)
        ps.push_back(mk::eq(mk::sel(mk::lnu(), mk::lv(mk::str(d.fields[j].name))), mk::lv(args[j])));
    return mk::and_(std::move(ps));
}

// ------------------------------------------------------------------- Elim

namespace {

struct Elim {
    const std::string &x;
    const RefType &s;
    bool strict;
    LValPtr alias;  // replacement for x, when S is (or contains) a singleton

    static bool is_var(const LValPtr &l, const std::string &n) {
        if (auto *v = std::get_if<ValuePtr>(&l->v))
            if (auto *var = std::get_if<Value::Var>(&(*v)->v)) return var->name == n;
        return false;
    }
    static bool is_bool(const LValPtr &l, bool b) {
        if (auto *v = std::get_if<ValuePtr>(&l->v))
            if (auto *c = std::get_if<Const>(&(*v)->v))
                if (auto *bb = std::get_if<Const::Bool>(&c->v)) return bb->b == b;
        return false;
    }

    /// p when S = {Bool(v) /\ (v = true <=> p)}
    FormulaPtr flag() const {
        auto *a = std::get_if<Formula::And>(&s.pred->v);
        if (!a || a->ps.size() != 2) return nullptr;
        if (canonical_key(*a->ps[0]) != canonical_key(*mk::tag_is(mk::lnu(), "Bool"))) return nullptr;
        auto *i = std::get_if<Formula::Iff>(&a->ps[1]->v);
        if (!i) return nullptr;
        auto *e = std::get_if<Formula::Atom>(&i->p->v);
        if (!e || e->pred != Pred::Eq || !is_var(e->args[0], kNuStr) || !is_bool(e->args[1], true)) return nullptr;
        if (free_vars_of(*i->q).count(kNuStr)) return nullptr;
        return i->q;
    }

    std::optional<LValPtr> lval(const LValPtr &l) const {
        if (!mentions_l(l)) return l;
        if (is_var(l, x)) {
            if (alias) return alias;
            return std::nullopt;
        }
        if (auto *f = std::get_if<LogicalValue::FnApp>(&l->v)) {
            std::vector<LValPtr> args;
            for (auto &a : f->args) {
                auto r = lval(a);
                if (!r) return std::nullopt;
                args.push_back(*r);
            }
            return mk::fn(f->fn, std::move(args));
        }
        if (!alias) return std::nullopt;
        auto r = subst_lval(l, x, alias);
        return r;
    }

    bool mentions_l(const LValPtr &l) const {
        NameSet fv;
        free_vars(*l, fv);
        return fv.count(x) > 0;
    }

    std::optional<RefType> ref(const RefType &t) const {
        auto p = formula(t.pred);
        if (!p) return std::nullopt;
        return RefType{*p};
    }

    std::optional<TermPtr> term(const TermPtr &u) const {
        return std::visit(overloaded{
                              [&](const TypeTerm::Arrow &a) -> std::optional<TermPtr> {
                                  auto d = ref(a.dom), c = ref(a.cod);
                                  if (!d || !c) return std::nullopt;
                                  return mk::arrow(a.binder, *d, *c);
                              },
                              [&](const TypeTerm::CtorApp &c) -> std::optional<TermPtr> {
                                  std::vector<RefType> args;
                                  for (auto &r : c.args) {
                                      auto e = ref(r);
                                      if (!e) return std::nullopt;
                                      args.push_back(*e);
                                  }
                                  return mk::ctor(c.ctor, std::move(args));
                              },
                              [&](const auto &) -> std::optional<TermPtr> { return u; },
                          },
                          u->v);
    }

    using R = std::optional<FormulaPtr>;

    R all(const std::vector<FormulaPtr> &ps, std::vector<FormulaPtr> &out) const {
        for (auto &q : ps) {
            auto r = formula(q);
            if (!r) return std::nullopt;
            out.push_back(*r);
        }
        return mk::top();
    }

    R formula(const FormulaPtr &p) const {
        if (!mentions(*p, x)) return p;
        return std::visit(
            overloaded{
                [&](const Formula::Atom &a) -> R {
                    if (a.pred == Pred::Eq) {
                        // v = x
                        if (is_var(a.args[0], kNuStr) && is_var(a.args[1], x)) return s.pred;
                        // x = true, x = false
                        for (bool b : {true, false}) {
                            if (!is_var(a.args[0], x) || !is_bool(a.args[1], b)) continue;
                            if (auto q = flag()) return b ? q : mk::not_(q);
                            if (alias) return mk::eq(alias, mk::lv(mk::bool_(b)));
                            return std::nullopt;
                        }
                    }
                    std::vector<LValPtr> args;
                    for (auto &l : a.args) {
                        auto r = lval(l);
                        if (!r) return std::nullopt;
                        args.push_back(*r);
                    }
                    return mk::atom(a.pred, std::move(args));
                },
                [&](const Formula::HasType &h) -> R {
                    auto l = lval(h.lw);
                    auto u = term(h.term);
                    if (!l || !u) return std::nullopt;
                    return mk::has_type(*l, *u);
                },
                [&](const Formula::And &a) -> R {
                    std::vector<FormulaPtr> out;
                    if (!all(a.ps, out)) return std::nullopt;
                    return std::make_shared<Formula>(Formula{Formula::And{std::move(out)}});
                },
                [&](const Formula::Implies &i) -> R {
                    auto l = formula(i.p), r = formula(i.q);
                    if (!l || !r) return std::nullopt;
                    return mk::implies(*l, *r);
                },
                [&](const Formula::Or &a) -> R {
                    if (strict) return std::nullopt;
                    std::vector<FormulaPtr> out;
                    if (!all(a.ps, out)) return std::nullopt;
                    return std::make_shared<Formula>(Formula{Formula::Or{std::move(out)}});
                },
                [&](const Formula::Not &n) -> R {
                    if (strict) return std::nullopt;
                    auto r = formula(n.p);
                    if (!r) return std::nullopt;
                    return mk::not_(*r);
                },
                [&](const Formula::Iff &i) -> R {
                    if (strict) return std::nullopt;
                    auto l = formula(i.p), r = formula(i.q);
                    if (!l || !r) return std::nullopt;
                    return mk::iff(*l, *r);
                },
                [&](const auto &) -> R { return p; },
            },
            p->v);
    }
};

/// lw when the refinement is exactly `v = lw` (strict) or has such a
/// top-level conjunct.
LValPtr singleton(const RefType &s, const std::string &x, bool strict) {
    auto ok = [&](const Formula &p) -> LValPtr {
        auto *a = std::get_if<Formula::Atom>(&p.v);
        if (!a || a->pred != Pred::Eq) return nullptr;
        if (!Elim::is_var(a->args[0], kNuStr)) return nullptr;
        NameSet fv;
        free_vars(*a->args[1], fv);
        if (fv.count(kNuStr) || fv.count(x)) return nullptr;
        if (strict) {
            auto *v = std::get_if<ValuePtr>(&a->args[1]->v);
            if (!v || !std::holds_alternative<Value::Var>((*v)->v)) return nullptr;
        }
        return a->args[1];
    };
    if (auto r = ok(*s.pred)) return r;
    if (strict) return nullptr;
    for (auto &c : conjuncts(s.pred))
        if (auto r = ok(*c)) return r;
    return nullptr;
}

}  // namespace

std::optional<RefType> Checker::elim(const std::string &x, const Scheme &s, const RefType &t) {
    if (!mentions(t, x)) return t;
    if (!s.is_mono()) return std::nullopt;
    bool strict = st_.opts.strict_elim;
    Elim el{x, s.body, strict, singleton(s.body, x, strict)};
    auto r = el.ref(t);
    if (!r || mentions(*r, x)) return std::nullopt;
    return r;
}

// ----------------------------------------------------------------- checker

struct Checker::Where {
    Checker &c;
    Where(Checker &ch, const std::string &b) : c(ch) { c.where_.push_back(b); }
    ~Where() { c.where_.pop_back(); }
};

void Checker::fail(const std::string &rule, const std::string &msg, bool with_sub) {
    std::string m = msg;
    TypeError e(rule, m, where_.empty() ? std::string{} : where_.back());
    if (with_sub && subty_.failure()) {
        auto &f = *subty_.failure();
        e = TypeError(rule, msg + " (" + f.rule + ": " + f.message + ")", e.binder);
        e.clause = f.clause;
        e.candidates = f.candidates;
    }
    throw e;
}

void Checker::check_wf(const TypeEnv &g, const Scheme &s, const std::string &rule) {
    try {
        check_type(g, st_.defs, s);
    } catch (const WfError &e) {
        fail(rule, std::string("ill-formed type ") + to_string(s) + ": " + e.what());
    }
}

void Checker::require_sub(const TypeEnv &g, const Scheme &s1, const Scheme &s2, const std::string &rule,
                          const std::string &what) {
    if (!subty_.sub(g, s1, s2))
        fail(rule, what + ": " + to_string(s1) + " is not a subtype of " + to_string(s2), true);
}

namespace {
RefType guard_ty(const ValuePtr &w, bool b) { return mk::ref(mk::eq(mk::lv(w), mk::lv(mk::bool_(b)))); }
}  // namespace

Scheme Checker::synth(const TypeEnv &g, const ExprPtr &e) {
    if (st_.inconsistent(g)) return Scheme::mono(mk::ref(mk::bot()));
    return std::visit(
        overloaded{
            [&](const Expr::Val &v) { return synth_value(g, v.w); },
            [&](const Expr::App &a) { return synth_app(g, a.fn, a.arg); },
            [&](const Expr::TApp &a) {
                auto s = synth_value(g, a.fn);
                if (s.is_mono()) fail("TS-TApp", "type instantiation of a monomorphic value " + to_string(a.fn));
                check_wf(g, Scheme::mono(a.ty), "TS-TApp");
                return inst(s, a.ty);
            },
            [&](const Expr::If &i) {
                convert(g, i.guard, mk::tag_type("Bool"));
                auto s1 = synth(g.guard(embed_at(guard_ty(i.guard, true), mk::lnu())), i.then_e);
                auto s2 = synth(g.guard(embed_at(guard_ty(i.guard, false), mk::lnu())), i.else_e);
                if (!s1.is_mono() || !s2.is_mono()) fail("TS-If", "branches of a conditional must be monomorphic");
                auto w = mk::lv(i.guard);
                return Scheme::mono(mk::ref(
                    mk::and_({mk::implies(mk::eq(w, mk::lv(mk::bool_(true))), s1.body.pred),
                              mk::implies(mk::eq(w, mk::lv(mk::bool_(false))), s2.body.pred)})));
            },
            [&](const Expr::Let &l) {
                Scheme s;
                std::string kind = l.ann ? "TS-LetAnn" : "TS-LetBare";
                {
                    Where w(*this, l.binder);
                    if (l.ann) {
                        check_wf(g, *l.ann, "TS-LetAnn");
                        convert(g, l.rhs, *l.ann);
                        s = *l.ann;
                    } else {
                        s = synth(g, l.rhs);
                    }
                }
                if (record.count(l.binder)) recorded[l.binder] = s;
                auto t = synth(subty_.extend(g, l.binder, s), l.body);
                if (is_wf(g, st_.defs, t)) return t;
                if (t.is_mono())
                    if (auto r = elim(l.binder, s, t.body); r && is_wf(g, st_.defs, Scheme::mono(*r)))
                        return Scheme::mono(*r);
                return Scheme::mono(mk::top_type());
            },
        },
        e->v);
}

Scheme Checker::synth_value(const TypeEnv &g, const ValuePtr &w) {
    return std::visit(
        overloaded{
            [&](const Value::Var &v) -> Scheme {
                auto *s = g.lookup(v.name);
                if (!s) fail("TS-Var", "unbound variable " + v.name);
                if (!s->is_mono()) return *s;
                return Scheme::mono(mk::ref(mk::eq(mk::lnu(), mk::lvar(v.name))));
            },
            [&](const Const &c) -> Scheme { return const_type(c); },
            [&](const Value::DictExt &d) -> Scheme {
                convert(g, d.base, mk::tag_type("Dict"));
                convert(g, d.key, mk::tag_type("Str"));
                synth_value(g, d.val);
                return Scheme::mono(mk::ref(mk::eq(mk::lnu(), mk::lv(w))));
            },
            [&](const Value::Fun &f) -> Scheme {
                RefType t1 = f.ann ? *f.ann : mk::top_type();
                std::string rule = f.ann ? "TS-FunAnn" : "TS-FunBare";
                if (f.ann) check_wf(g, Scheme::mono(t1), rule);
                auto t2 = synth(subty_.extend(g, f.binder, Scheme::mono(t1)), f.body);
                if (!t2.is_mono()) fail(rule, "function bodies must have monomorphic types");
                return Scheme::mono(mk::term_type(mk::arrow(f.binder, t1, t2.body)));
            },
            [&](const Value::TFun &f) -> Scheme {
                auto s = synth(g.tyvar(f.tyvar), f.body);
                std::vector<std::string> tvs{f.tyvar};
                tvs.insert(tvs.end(), s.tyvars.begin(), s.tyvars.end());
                return Scheme{tvs, s.body};
            },
            [&](const Value::New &n) -> Scheme { return synth_new(g, n); },
        },
        w->v);
}

std::vector<TermPtr> Checker::arrows_of(const TypeEnv &g, const ValuePtr &f, Scheme &ft) {
    ft = synth_value(g, f);
    if (!ft.is_mono()) return {};
    std::vector<TermPtr> out;
    for (auto &u : subty_.must_flow(g, ft.body))
        if (std::holds_alternative<TypeTerm::Arrow>(u->v)) out.push_back(u);
    return out;
}

namespace {
std::string show(const std::vector<TermPtr> &us) {
    std::string s;
    for (auto &u : us) s += (s.empty() ? "" : ", ") + to_string(u);
    return s;
}
std::vector<std::string> shows(const std::vector<TermPtr> &us) {
    std::vector<std::string> out;
    for (auto &u : us) out.push_back(to_string(u));
    return out;
}
}  // namespace

Scheme Checker::synth_app(const TypeEnv &g, const ValuePtr &f, const ValuePtr &a) {
    Scheme ft;
    auto us = arrows_of(g, f, ft);
    if (!ft.is_mono()) fail("TS-App1", "polymorphic function " + to_string(f) + " must be instantiated");
    if (us.empty()) fail("TS-App1", to_string(f) + " is not known to be a function");
    auto result = [&](const TermPtr &u) {
        auto &arr = std::get<TypeTerm::Arrow>(u->v);
        return Scheme::mono(subst_value(arr.cod, arr.binder, a));
    };
    // TS-App1: filter by the synthesized argument type.
    std::optional<SubFailure> why;
    std::optional<Scheme> t2;
    try {
        t2 = synth_value(g, a);
    } catch (const TypeError &) {
    }
    if (t2 && t2->is_mono()) {
        std::vector<TermPtr> hits;
        for (auto &u : us) {
            if (subty_.sub(g, t2->body, std::get<TypeTerm::Arrow>(u->v).dom))
                hits.push_back(u);
            else if (!why)
                why = subty_.failure();
        }
        if (hits.size() == 1) return result(hits[0]);
    }
    // TS-App2: filter by conversion of the argument.
    std::vector<TermPtr> hits;
    std::optional<TypeError> first;
    for (auto &u : us) {
        try {
            convert(g, a, std::get<TypeTerm::Arrow>(u->v).dom);
            hits.push_back(u);
        } catch (const TypeError &e) {
            if (!first) first = e;
        }
    }
    if (hits.size() == 1) return result(hits[0]);
    if (hits.size() > 1) {
        TypeError e("TS-App2", "ambiguous application of " + to_string(f) + ": several arrows apply: " + show(hits),
                    where_.empty() ? "" : where_.back());
        e.candidates = shows(hits);
        throw e;
    }
    std::string msg = "no arrow of " + to_string(f) + " accepts the argument " + to_string(a);
    TypeError e("TS-App1", msg, where_.empty() ? "" : where_.back());
    if (why) {
        e = TypeError("TS-App1", msg + " (" + why->rule + ": " + why->message + ")", e.binder);
        e.clause = why->clause;
        e.candidates = why->candidates;
    } else if (first) {
        e = TypeError(first->rule, first->what(), first->binder);
        e.clause = first->clause;
        e.candidates = first->candidates;
    }
    throw e;
}

namespace {

bool match_ref(const RefType &pat, const RefType &act, std::map<std::string, RefType> &out);

bool match_term(const TermPtr &pat, const TermPtr &act, std::map<std::string, RefType> &out) {
    if (auto *pa = std::get_if<TypeTerm::Arrow>(&pat->v)) {
        auto *aa = std::get_if<TypeTerm::Arrow>(&act->v);
        return aa && match_ref(pa->dom, aa->dom, out) && match_ref(pa->cod, aa->cod, out);
    }
    if (auto *pc = std::get_if<TypeTerm::CtorApp>(&pat->v)) {
        auto *ac = std::get_if<TypeTerm::CtorApp>(&act->v);
        if (!ac || ac->ctor != pc->ctor || ac->args.size() != pc->args.size()) return false;
        for (size_t i = 0; i < pc->args.size(); ++i)
            if (!match_ref(pc->args[i], ac->args[i], out)) return false;
        return true;
    }
    return !has_marks_u(*pat);
}

bool match_ref(const RefType &pat, const RefType &act, std::map<std::string, RefType> &out) {
    if (!has_marks(pat)) return true;
    auto pu = as_term_type(pat);
    if (!pu) return false;
    if (auto *v = std::get_if<TypeTerm::TyVar>(&(*pu)->v); v && v->marked) {
        out[v->name] = act;
        return true;
    }
    auto au = as_term_type(act);
    return au && match_term(*pu, *au, out);
}

}  // namespace

Scheme Checker::synth_new(const TypeEnv &g, const Value::New &n) {
    auto it = st_.defs.find(n.ctor);
    if (it == st_.defs.end()) fail("TS-Fold", "unknown constructor " + n.ctor);
    auto &d = it->second;
    if (n.args.size() != d.fields.size())
        fail("TS-Fold", n.ctor + " expects " + std::to_string(d.fields.size()) + " arguments");
    std::vector<RefType> targs;
    if (n.targs) {
        targs = *n.targs;
        if (targs.size() != d.params.size()) fail("TS-Fold", "wrong number of type arguments for " + n.ctor);
        for (auto &t : targs) check_wf(g, Scheme::mono(t), "TS-Fold");
    } else if (!d.params.empty()) {
        std::map<std::string, RefType> found;
        for (size_t j = 0; j < d.fields.size(); ++j) {
            auto &pat = d.fields[j].type;
            if (!has_marks(pat)) continue;
            auto pu = as_term_type(pat);
            if (pu)
                if (auto *v = std::get_if<TypeTerm::TyVar>(&(*pu)->v); v && v->marked) {
                    auto s = synth_value(g, n.args[j]);
                    if (!s.is_mono()) fail("TS-Fold", "cannot infer a type argument from a polymorphic value");
                    found[v->name] = s.body;
                    continue;
                }
            bool ok = false;
            if (pu)
                for (auto &u : subty_.must_flow(g, mk::ref(mk::eq(mk::lnu(), mk::lv(n.args[j]))))) {
                    std::map<std::string, RefType> tmp;
                    if (match_term(*pu, u, tmp)) {
                        for (auto &[k, t] : tmp) found[k] = t;
                        ok = true;
                        break;
                    }
                }
            if (!ok)
                fail("TS-Fold", "cannot infer the type arguments of " + n.ctor + " from field " + d.fields[j].name);
        }
        for (auto &p : d.params) {
            auto f = found.find(p.tyvar);
            if (f == found.end()) fail("TS-Fold", "type arguments of " + n.ctor + " must be given explicitly");
            targs.push_back(f->second);
        }
    }
    for (size_t j = 0; j < d.fields.size(); ++j) convert(g, n.args[j], inst_all(d.fields[j].type, d, targs));
    return Scheme::mono(mk::ref(fold(st_.defs, n.ctor, targs, n.args)));
}

void Checker::convert(const TypeEnv &g, const ExprPtr &e, const Scheme &s) {
    if (st_.inconsistent(g)) return;
    if (auto *i = std::get_if<Expr::If>(&e->v)) {
        convert(g, i->guard, mk::tag_type("Bool"));
        convert(g.guard(embed_at(guard_ty(i->guard, true), mk::lnu())), i->then_e, s);
        convert(g.guard(embed_at(guard_ty(i->guard, false), mk::lnu())), i->else_e, s);
        return;
    }
    if (auto *l = std::get_if<Expr::Let>(&e->v)) {
        Scheme sx;
        {
            Where w(*this, l->binder);
            if (l->ann) {
                check_wf(g, *l->ann, "TC-LetAnn");
                convert(g, l->rhs, *l->ann);
                sx = *l->ann;
            } else {
                sx = synth(g, l->rhs);
            }
        }
        if (record.count(l->binder)) recorded[l->binder] = sx;
        convert(subty_.extend(g, l->binder, sx), l->body, s);
        return;
    }
    if (!s.is_mono()) {
        auto *v = std::get_if<Expr::Val>(&e->v);
        if (v)
            if (auto *tf = std::get_if<Value::TFun>(&v->w->v)) {
                Scheme rest{{s.tyvars.begin() + 1, s.tyvars.end()}, rename_tyvar(s.body, s.tyvars.front(), tf->tyvar)};
                convert(g.tyvar(tf->tyvar), tf->body, rest);
                return;
            }
        require_sub(g, synth(g, e), s, "TC-Sub", "cannot check " + to_string(e) + " against a polymorphic type");
        return;
    }
    if (auto *a = std::get_if<Expr::App>(&e->v)) return convert_app(g, a->fn, a->arg, s);
    if (auto *v = std::get_if<Expr::Val>(&e->v)) {
        if (auto *f = std::get_if<Value::Fun>(&v->w->v)) {
            std::string rule = f->ann ? "TC-FunAnn" : "TC-FunBare";
            auto *arr = as_arrow_type(s.body);
            if (!arr && f->ann) {
                require_sub(g, synth_value(g, v->w), s, rule, "function has the wrong type");
                return;
            }
            if (!arr) fail(rule, "a function can only be checked against an arrow type, not " + to_string(s));
            auto cod = subst_value(arr->cod, arr->binder, mk::var(f->binder));
            if (f->ann) {
                check_wf(g, Scheme::mono(*f->ann), rule);
                require_sub(g, Scheme::mono(arr->dom), Scheme::mono(*f->ann), rule,
                            "annotation on " + f->binder + " does not accept the expected argument type");
            }
            convert(subty_.extend(g, f->binder, Scheme::mono(arr->dom)), f->body, Scheme::mono(cod));
            return;
        }
        std::string rule = std::holds_alternative<Value::Var>(v->w->v) ? "TC-Var" : "TC-Const";
        require_sub(g, synth_value(g, v->w), s, rule, "value " + to_string(v->w) + " has the wrong type");
        return;
    }
    require_sub(g, synth(g, e), s, "TC-Sub", "expression has the wrong type");
}

void Checker::convert_app(const TypeEnv &g, const ValuePtr &f, const ValuePtr &a, const Scheme &s) {
    std::optional<TypeError> err;
    auto here = [&] { return where_.empty() ? std::string{} : where_.back(); };
    // TC-App1
    try {
        Scheme ft;
        auto us = arrows_of(g, f, ft);
        std::vector<TermPtr> hits;
        std::optional<TypeError> first;
        for (auto &u : us) {
            try {
                convert(g, a, std::get<TypeTerm::Arrow>(u->v).dom);
                hits.push_back(u);
            } catch (const TypeError &e) {
                if (!first) first = e;
            }
        }
        if (hits.size() == 1) {
            auto &arr = std::get<TypeTerm::Arrow>(hits[0]->v);
            auto res = Scheme::mono(subst_value(arr.cod, arr.binder, a));
            if (subty_.sub(g, res, s)) return;
            std::string msg = "result of applying " + to_string(f) + " to " + to_string(a) + ", " +
                              to_string(res) + ", is not a subtype of " + to_string(s);
            err = TypeError("TC-App1", msg, here());
            if (auto &fl = subty_.failure()) {
                err = TypeError("TC-App1", msg + " (" + fl->rule + ": " + fl->message + ")", here());
                err->clause = fl->clause;
                err->candidates = fl->candidates;
            }
        } else if (hits.size() > 1) {
            err = TypeError("TC-App1", "ambiguous application of " + to_string(f) + ": " + show(hits), here());
            err->candidates = shows(hits);
        } else if (first) {
            err = first;
        } else {
            err = TypeError("TC-App1", to_string(f) + " is not known to be a function", here());
        }
    } catch (const TypeError &e) {
        err = e;
    }
    // TC-App2
    try {
        auto t2 = synth_value(g, a);
        if (t2.is_mono()) {
            auto z = st_.fresh("z");
            convert(g, f, mk::term_type(mk::arrow(z, t2.body, s.body)));
            return;
        }
    } catch (const TypeError &) {
    }
    throw *err;
}

// ----------------------------------------------------------- initial env

namespace {

void prims_of(const Expr &e, std::set<Prim> &out);

void prims_of(const Value &w, std::set<Prim> &out) {
    std::visit(overloaded{
                   [&](const Const &c) {
                       if (auto *p = std::get_if<Const::PrimOp>(&c.v)) out.insert(p->op);
                   },
                   [&](const Value::DictExt &d) {
                       prims_of(*d.base, out);
                       prims_of(*d.key, out);
                       prims_of(*d.val, out);
                   },
                   [&](const Value::Fun &f) { prims_of(*f.body, out); },
                   [&](const Value::TFun &f) { prims_of(*f.body, out); },
                   [&](const Value::New &n) {
                       for (auto &a : n.args) prims_of(*a, out);
                   },
                   [&](const Value::Var &) {},
               },
               w.v);
}

void prims_of(const Expr &e, std::set<Prim> &out) {
    std::visit(overloaded{
                   [&](const Expr::Val &v) { prims_of(*v.w, out); },
                   [&](const Expr::App &a) {
                       prims_of(*a.fn, out);
                       prims_of(*a.arg, out);
                   },
                   [&](const Expr::TApp &a) { prims_of(*a.fn, out); },
                   [&](const Expr::If &i) {
                       prims_of(*i.guard, out);
                       prims_of(*i.then_e, out);
                       prims_of(*i.else_e, out);
                   },
                   [&](const Expr::Let &l) {
                       prims_of(*l.rhs, out);
                       prims_of(*l.body, out);
                   },
               },
               e.v);
}

}  // namespace

TypeEnv Checker::initial_env(const ExprPtr &e) {
    std::set<Prim> ps;
    prims_of(*e, ps);
    TypeEnv g;
    for (auto p : ps)
        if (p != Prim::Fix) g = g.guard(mk::has_type(mk::lv(mk::prim(p)), prim_arrow(p)));
    return g.guard(mk::has_type(mk::lv(mk::null()), mk::null_term()));
}

CheckResult check_program(CheckerState &st, const Program &p) {
    Checker c(st);
    c.record.insert(p.toplevel.begin(), p.toplevel.end());
    CheckResult r;
    r.scheme = c.synth(c.initial_env(p.body), p.body);
    for (auto &x : p.toplevel) {
        auto it = c.recorded.find(x);
        if (it == c.recorded.end()) continue;
        auto o = p.original.find(x);
        r.toplevel.emplace_back(o == p.original.end() ? x : o->second, it->second);
    }
    return r;
}

}  // namespace duck
