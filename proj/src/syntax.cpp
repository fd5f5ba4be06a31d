#include "duckcheck/syntax.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace duck {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::string kNuStr{kNu};

}  // namespace

// ------------------------------------------------------------- primitives

int prim_arity(Prim p) {
    switch (p) {
    case Prim::Not:
    case Prim::Tag:
    case Prim::Keys:
    case Prim::Fix:
        return 1;
    case Prim::Set:
        return 3;
    default:
        return 2;
    }
}

std::string_view prim_name(Prim p) {
    switch (p) {
    case Prim::Plus: return "+";
    case Prim::Minus: return "-";
    case Prim::Eq: return "=";
    case Prim::Not: return "not";
    case Prim::Tag: return "tag";
    case Prim::Has: return "has";
    case Prim::Get: return "get";
    case Prim::Set: return "set";
    case Prim::Keys: return "keys";
    case Prim::Fix: return "fix";
    case Prim::Mem: return "mem";
    }
    return "?";
}

const std::vector<Prim> &all_prims() {
    static const std::vector<Prim> ps = {Prim::Plus, Prim::Minus, Prim::Eq,  Prim::Not,
                                         Prim::Tag,  Prim::Has,   Prim::Get, Prim::Set,
                                         Prim::Keys, Prim::Fix,   Prim::Mem};
    return ps;
}

std::optional<Prim> prim_from_name(std::string_view name) {
    for (Prim p : all_prims())
        if (prim_name(p) == name) return p;
    return std::nullopt;
}

int fn_arity(Fn f) {
    switch (f) {
    case Fn::Tag: return 1;
    case Fn::Ext: return 3;
    default: return 2;
    }
}

int pred_arity(Pred p) { return p == Pred::EqMod ? 3 : 2; }

std::string_view fn_name(Fn f) {
    switch (f) {
    case Fn::Sel: return "sel";
    case Fn::Tag: return "tag";
    case Fn::Plus: return "plus";
    case Fn::Minus: return "minus";
    case Fn::Ext: return "ext";
    }
    return "?";
}

std::string_view pred_name(Pred p) {
    switch (p) {
    case Pred::Eq: return "=";
    case Pred::Lt: return "<";
    case Pred::Le: return "<=";
    case Pred::Has: return "has";
    case Pred::EqMod: return "eqmod";
    }
    return "?";
}

// ----------------------------------------------------------------- builders

namespace mk {
ValuePtr var(std::string name) {
    return std::make_shared<Value>(Value{Value::Var{std::move(name)}});
}
ValuePtr nu() { return var(kNuStr); }
static ValuePtr cst(Const c) { return std::make_shared<Value>(Value{std::move(c)}); }
ValuePtr int_(std::int64_t z) { return cst(Const{Const::Int{z}}); }
ValuePtr bool_(bool b) { return cst(Const{Const::Bool{b}}); }
ValuePtr str(std::string s) { return cst(Const{Const::Str{std::move(s)}}); }
ValuePtr null() { return cst(Const{Const::Null{}}); }
ValuePtr empty() { return cst(Const{Const::EmptyDict{}}); }
ValuePtr prim(Prim p) { return cst(Const{Const::PrimOp{p}}); }
ValuePtr partial(Prim p, std::vector<ValuePtr> args) {
    return cst(Const{Const::Partial{p, std::move(args)}});
}
ValuePtr ext(ValuePtr d, ValuePtr k, ValuePtr w) {
    return std::make_shared<Value>(Value{Value::DictExt{std::move(d), std::move(k), std::move(w)}});
}
ValuePtr fun(std::string x, std::optional<RefType> ann, ExprPtr body) {
    return std::make_shared<Value>(Value{Value::Fun{std::move(x), std::move(ann), std::move(body)}});
}
ValuePtr tfun(std::string a, ExprPtr body) {
    return std::make_shared<Value>(Value{Value::TFun{std::move(a), std::move(body)}});
}
ValuePtr new_(std::string ctor, std::optional<std::vector<RefType>> targs,
              std::vector<ValuePtr> args) {
    return std::make_shared<Value>(
        Value{Value::New{std::move(ctor), std::move(targs), std::move(args)}});
}

ExprPtr val(ValuePtr w) { return std::make_shared<Expr>(Expr{Expr::Val{std::move(w)}}); }
ExprPtr app(ValuePtr f, ValuePtr a) {
    return std::make_shared<Expr>(Expr{Expr::App{std::move(f), std::move(a)}});
}
ExprPtr tapp(ValuePtr f, RefType t) {
    return std::make_shared<Expr>(Expr{Expr::TApp{std::move(f), std::move(t)}});
}
ExprPtr if_(ValuePtr g, ExprPtr a, ExprPtr b) {
    return std::make_shared<Expr>(Expr{Expr::If{std::move(g), std::move(a), std::move(b)}});
}
ExprPtr let(std::string x, std::optional<Scheme> ann, ExprPtr rhs, ExprPtr body) {
    return std::make_shared<Expr>(
        Expr{Expr::Let{std::move(x), std::move(ann), std::move(rhs), std::move(body)}});
}

LValPtr lv(ValuePtr w) { return std::make_shared<LogicalValue>(LogicalValue{std::move(w)}); }
LValPtr lnu() { return lv(nu()); }
LValPtr lvar(std::string name) { return lv(var(std::move(name))); }
LValPtr fn(Fn f, std::vector<LValPtr> args) {
    if (static_cast<int>(args.size()) != fn_arity(f))
        throw std::invalid_argument("arity mismatch for " + std::string(fn_name(f)));
    return std::make_shared<LogicalValue>(LogicalValue{LogicalValue::FnApp{f, std::move(args)}});
}
LValPtr sel(LValPtr d, LValPtr k) { return fn(Fn::Sel, {std::move(d), std::move(k)}); }
LValPtr tag(LValPtr x) { return fn(Fn::Tag, {std::move(x)}); }

static FormulaPtr fml(Formula f) { return std::make_shared<Formula>(std::move(f)); }
FormulaPtr atom(Pred p, std::vector<LValPtr> args) {
    if (static_cast<int>(args.size()) != pred_arity(p))
        throw std::invalid_argument("arity mismatch for " + std::string(pred_name(p)));
    return fml(Formula{Formula::Atom{p, std::move(args)}});
}
FormulaPtr eq(LValPtr a, LValPtr b) { return atom(Pred::Eq, {std::move(a), std::move(b)}); }
FormulaPtr has(LValPtr d, LValPtr k) { return atom(Pred::Has, {std::move(d), std::move(k)}); }
FormulaPtr has_type(LValPtr lw, TermPtr u) {
    return fml(Formula{Formula::HasType{std::move(lw), std::move(u)}});
}
FormulaPtr and_(std::vector<FormulaPtr> ps) {
    std::vector<FormulaPtr> kept;
    for (auto &p : ps) {
        if (is_true(*p)) continue;
        if (is_false(*p)) return bot();
        if (auto *a = std::get_if<Formula::And>(&p->v)) {
            for (auto &q : a->ps) kept.push_back(q);
            continue;
        }
        kept.push_back(std::move(p));
    }
    if (kept.empty()) return top();
    if (kept.size() == 1) return kept.front();
    return fml(Formula{Formula::And{std::move(kept)}});
}
FormulaPtr or_(std::vector<FormulaPtr> ps) {
    std::vector<FormulaPtr> kept;
    for (auto &p : ps) {
        if (is_false(*p)) continue;
        if (is_true(*p)) return top();
        if (auto *o = std::get_if<Formula::Or>(&p->v)) {
            for (auto &q : o->ps) kept.push_back(q);
            continue;
        }
        kept.push_back(std::move(p));
    }
    if (kept.empty()) return bot();
    if (kept.size() == 1) return kept.front();
    return fml(Formula{Formula::Or{std::move(kept)}});
}
FormulaPtr not_(FormulaPtr p) { return fml(Formula{Formula::Not{std::move(p)}}); }
FormulaPtr implies(FormulaPtr p, FormulaPtr q) {
    return fml(Formula{Formula::Implies{std::move(p), std::move(q)}});
}
FormulaPtr iff(FormulaPtr p, FormulaPtr q) {
    return fml(Formula{Formula::Iff{std::move(p), std::move(q)}});
}
FormulaPtr top() {
    static const FormulaPtr t = fml(Formula{Formula::True{}});
    return t;
}
FormulaPtr bot() {
    static const FormulaPtr f = fml(Formula{Formula::False{}});
    return f;
}
FormulaPtr tag_is(LValPtr lw, std::string name) { return eq(tag(std::move(lw)), lv(str(std::move(name)))); }

static TermPtr term(TypeTerm t) { return std::make_shared<TypeTerm>(std::move(t)); }
TermPtr arrow(std::string x, RefType dom, RefType cod) {
    return term(TypeTerm{TypeTerm::Arrow{std::move(x), std::move(dom), std::move(cod)}});
}
TermPtr tyvar(std::string a, bool marked) { return term(TypeTerm{TypeTerm::TyVar{std::move(a), marked}}); }
TermPtr null_term() { return term(TypeTerm{TypeTerm::Null{}}); }
TermPtr ctor(std::string c, std::vector<RefType> args) {
    return term(TypeTerm{TypeTerm::CtorApp{std::move(c), std::move(args)}});
}

RefType ref(FormulaPtr p) { return RefType{std::move(p)}; }
RefType top_type() { return RefType{top()}; }
RefType tag_type(std::string name) { return RefType{tag_is(lnu(), std::move(name))}; }
RefType term_type(TermPtr u) { return RefType{has_type(lnu(), std::move(u))}; }
}  // namespace mk

// --------------------------------------------------------------- inspection

bool is_value_expr(const Expr &e) { return std::holds_alternative<Expr::Val>(e.v); }
bool is_true(const Formula &p) { return std::holds_alternative<Formula::True>(p.v); }
bool is_false(const Formula &p) { return std::holds_alternative<Formula::False>(p.v); }

static bool is_nu(const LogicalValue &lw) {
    if (auto *w = std::get_if<ValuePtr>(&lw.v))
        if (auto *x = std::get_if<Value::Var>(&(*w)->v)) return x->name == kNu;
    return false;
}

std::optional<TermPtr> as_term_type(const RefType &t) {
    if (auto *h = std::get_if<Formula::HasType>(&t.pred->v))
        if (is_nu(*h->lw)) return h->term;
    return std::nullopt;
}

const TypeTerm::Arrow *as_arrow_type(const RefType &t) {
    if (auto *h = std::get_if<Formula::HasType>(&t.pred->v))
        if (is_nu(*h->lw)) return std::get_if<TypeTerm::Arrow>(&h->term->v);
    return nullptr;
}

std::vector<FormulaPtr> conjuncts(const FormulaPtr &p) {
    std::vector<FormulaPtr> out;
    if (auto *a = std::get_if<Formula::And>(&p->v)) {
        for (auto &q : a->ps)
            for (auto &r : conjuncts(q)) out.push_back(r);
    } else if (!is_true(*p)) {
        out.push_back(p);
    }
    return out;
}

// ----------------------------------------------------------- free variables

void free_vars(const Value &w, NameSet &out) {
    std::visit(overloaded{
                   [&](const Value::Var &x) { out.insert(x.name); },
                   [&](const Const &c) {
                       if (auto *p = std::get_if<Const::Partial>(&c.v))
                           for (auto &a : p->args) free_vars(*a, out);
                   },
                   [&](const Value::DictExt &d) {
                       free_vars(*d.base, out);
                       free_vars(*d.key, out);
                       free_vars(*d.val, out);
                   },
                   [&](const Value::Fun &f) {
                       NameSet inner;
                       free_vars(*f.body, inner);
                       inner.erase(f.binder);
                       if (f.ann) free_vars(*f.ann, inner);
                       out.insert(inner.begin(), inner.end());
                   },
                   [&](const Value::TFun &f) { free_vars(*f.body, out); },
                   [&](const Value::New &n) {
                       if (n.targs)
                           for (auto &t : *n.targs) free_vars(t, out);
                       for (auto &a : n.args) free_vars(*a, out);
                   },
               },
               w.v);
}

void free_vars(const Expr &e, NameSet &out) {
    std::visit(overloaded{
                   [&](const Expr::Val &v) { free_vars(*v.w, out); },
                   [&](const Expr::App &a) {
                       free_vars(*a.fn, out);
                       free_vars(*a.arg, out);
                   },
                   [&](const Expr::TApp &a) {
                       free_vars(*a.fn, out);
                       free_vars(a.ty, out);
                   },
                   [&](const Expr::If &i) {
                       free_vars(*i.guard, out);
                       free_vars(*i.then_e, out);
                       free_vars(*i.else_e, out);
                   },
                   [&](const Expr::Let &l) {
                       if (l.ann) free_vars(*l.ann, out);
                       free_vars(*l.rhs, out);
                       NameSet inner;
                       free_vars(*l.body, inner);
                       inner.erase(l.binder);
                       out.insert(inner.begin(), inner.end());
                   },
               },
               e.v);
}

void free_vars(const LogicalValue &lw, NameSet &out) {
    if (auto *w = std::get_if<ValuePtr>(&lw.v)) {
        free_vars(**w, out);
        return;
    }
    for (auto &a : std::get<LogicalValue::FnApp>(lw.v).args) free_vars(*a, out);
}

void free_vars(const Formula &p, NameSet &out) {
    std::visit(overloaded{
                   [&](const Formula::Atom &a) {
                       for (auto &x : a.args) free_vars(*x, out);
                   },
                   [&](const Formula::HasType &h) {
                       free_vars(*h.lw, out);
                       free_vars(*h.term, out);
                   },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) free_vars(*q, out);
                   },
                   [&](const Formula::Or &a) {
                       for (auto &q : a.ps) free_vars(*q, out);
                   },
                   [&](const Formula::Not &n) { free_vars(*n.p, out); },
                   [&](const Formula::Implies &i) {
                       free_vars(*i.p, out);
                       free_vars(*i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       free_vars(*i.p, out);
                       free_vars(*i.q, out);
                   },
                   [&](const Formula::True &) {},
                   [&](const Formula::False &) {},
               },
               p.v);
}

void free_vars(const TypeTerm &u, NameSet &out) {
    std::visit(overloaded{
                   [&](const TypeTerm::Arrow &a) {
                       free_vars(a.dom, out);
                       NameSet inner;
                       free_vars(a.cod, inner);
                       inner.erase(a.binder);
                       out.insert(inner.begin(), inner.end());
                   },
                   [&](const TypeTerm::TyVar &) {},
                   [&](const TypeTerm::Null &) {},
                   [&](const TypeTerm::CtorApp &c) {
                       for (auto &t : c.args) free_vars(t, out);
                   },
               },
               u.v);
}

void free_vars(const RefType &t, NameSet &out) {
    NameSet inner;
    free_vars(*t.pred, inner);
    inner.erase(kNuStr);
    out.insert(inner.begin(), inner.end());
}

void free_vars(const Scheme &s, NameSet &out) { free_vars(s.body, out); }

NameSet free_vars_of(const Formula &p) {
    NameSet s;
    free_vars(p, s);
    return s;
}
NameSet free_vars_of(const RefType &t) {
    NameSet s;
    free_vars(t, s);
    return s;
}
NameSet free_vars_of(const Expr &e) {
    NameSet s;
    free_vars(e, s);
    return s;
}
NameSet free_vars_of(const Value &w) {
    NameSet s;
    free_vars(w, s);
    return s;
}

void free_tyvars(const TypeTerm &u, NameSet &out) {
    std::visit(overloaded{
                   [&](const TypeTerm::Arrow &a) {
                       free_tyvars(a.dom, out);
                       free_tyvars(a.cod, out);
                   },
                   [&](const TypeTerm::TyVar &v) { out.insert(v.name); },
                   [&](const TypeTerm::Null &) {},
                   [&](const TypeTerm::CtorApp &c) {
                       for (auto &t : c.args) free_tyvars(t, out);
                   },
               },
               u.v);
}

void free_tyvars(const Formula &p, NameSet &out) {
    std::visit(overloaded{
                   [&](const Formula::Atom &) {},
                   [&](const Formula::HasType &h) { free_tyvars(*h.term, out); },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) free_tyvars(*q, out);
                   },
                   [&](const Formula::Or &a) {
                       for (auto &q : a.ps) free_tyvars(*q, out);
                   },
                   [&](const Formula::Not &n) { free_tyvars(*n.p, out); },
                   [&](const Formula::Implies &i) {
                       free_tyvars(*i.p, out);
                       free_tyvars(*i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       free_tyvars(*i.p, out);
                       free_tyvars(*i.q, out);
                   },
                   [&](const Formula::True &) {},
                   [&](const Formula::False &) {},
               },
               p.v);
}

void free_tyvars(const RefType &t, NameSet &out) { free_tyvars(*t.pred, out); }

void free_tyvars(const Scheme &s, NameSet &out) {
    NameSet inner;
    free_tyvars(s.body, inner);
    for (auto &a : s.tyvars) inner.erase(a);
    out.insert(inner.begin(), inner.end());
}

bool mentions(const Formula &p, const std::string &x) { return free_vars_of(p).count(x) > 0; }
bool mentions(const RefType &t, const std::string &x) { return free_vars_of(t).count(x) > 0; }

// ------------------------------------------------------------- substitution
//
// One generic walker parameterized by what replaces the variable: a Value
// (general substitution) or a LogicalValue (only meaningful inside formulas).

namespace {

std::string fresh_away(const std::string &base, const NameSet &avoid1, const NameSet &avoid2) {
    std::string n = base + "'";
    while (avoid1.count(n) || avoid2.count(n)) n += "'";
    return n;
}

struct Subst {
    std::string x;
    ValuePtr w;   // set when substituting a value
    LValPtr lw;   // always set
    NameSet fv;   // free variables of the replacement

    ValuePtr value(const ValuePtr &v) const;
    ExprPtr expr(const ExprPtr &e) const;
    LValPtr lval(const LValPtr &l) const;
    FormulaPtr formula(const FormulaPtr &p) const;
    RefType reftype(const RefType &t) const;
    TermPtr term(const TermPtr &u) const;
    Scheme scheme(const Scheme &s) const;

    bool is_nu_subst() const { return x == kNu; }
};

// Does the value mention x free?
bool value_mentions(const Value &v, const std::string &x) { return free_vars_of(v).count(x) > 0; }

ValuePtr Subst::value(const ValuePtr &v) const {
    if (!value_mentions(*v, x)) return v;
    return std::visit(
        overloaded{
            [&](const Value::Var &) -> ValuePtr {
                if (w) return w;
                throw std::logic_error("cannot place a logical term inside a program value");
            },
            [&](const Const &c) -> ValuePtr {
                auto &p = std::get<Const::Partial>(c.v);
                std::vector<ValuePtr> args;
                for (auto &a : p.args) args.push_back(value(a));
                return mk::partial(p.op, std::move(args));
            },
            [&](const Value::DictExt &d) -> ValuePtr {
                return mk::ext(value(d.base), value(d.key), value(d.val));
            },
            [&](const Value::Fun &f) -> ValuePtr {
                std::optional<RefType> ann;
                if (f.ann) ann = reftype(*f.ann);
                if (f.binder == x) return mk::fun(f.binder, ann, f.body);
                if (fv.count(f.binder)) {
                    std::string nb = fresh_away(f.binder, fv, free_vars_of(*f.body));
                    ExprPtr body = subst_value(f.body, f.binder, mk::var(nb));
                    return mk::fun(nb, ann, expr(body));
                }
                return mk::fun(f.binder, ann, expr(f.body));
            },
            [&](const Value::TFun &f) -> ValuePtr { return mk::tfun(f.tyvar, expr(f.body)); },
            [&](const Value::New &n) -> ValuePtr {
                std::optional<std::vector<RefType>> targs;
                if (n.targs) {
                    targs.emplace();
                    for (auto &t : *n.targs) targs->push_back(reftype(t));
                }
                std::vector<ValuePtr> args;
                for (auto &a : n.args) args.push_back(value(a));
                return mk::new_(n.ctor, std::move(targs), std::move(args));
            },
        },
        v->v);
}

ExprPtr Subst::expr(const ExprPtr &e) const {
    return std::visit(
        overloaded{
            [&](const Expr::Val &v) -> ExprPtr { return mk::val(value(v.w)); },
            [&](const Expr::App &a) -> ExprPtr { return mk::app(value(a.fn), value(a.arg)); },
            [&](const Expr::TApp &a) -> ExprPtr { return mk::tapp(value(a.fn), reftype(a.ty)); },
            [&](const Expr::If &i) -> ExprPtr {
                return mk::if_(value(i.guard), expr(i.then_e), expr(i.else_e));
            },
            [&](const Expr::Let &l) -> ExprPtr {
                std::optional<Scheme> ann;
                if (l.ann) ann = scheme(*l.ann);
                ExprPtr rhs = expr(l.rhs);
                if (l.binder == x) return mk::let(l.binder, ann, rhs, l.body);
                if (fv.count(l.binder)) {
                    std::string nb = fresh_away(l.binder, fv, free_vars_of(*l.body));
                    ExprPtr body = subst_value(l.body, l.binder, mk::var(nb));
                    return mk::let(nb, ann, rhs, expr(body));
                }
                return mk::let(l.binder, ann, rhs, expr(l.body));
            },
        },
        e->v);
}

LValPtr Subst::lval(const LValPtr &l) const {
    if (auto *v = std::get_if<ValuePtr>(&l->v)) {
        const Value &val = **v;
        if (auto *var = std::get_if<Value::Var>(&val.v))
            return var->name == x ? lw : l;
        if (!value_mentions(val, x)) return l;
        if (w) return mk::lv(value(*v));
        // A logical term is substituted into a program value: only dictionary
        // extension can be lifted into the logic.
        if (auto *d = std::get_if<Value::DictExt>(&val.v)) {
            LValPtr b = lval(mk::lv(d->base)), k = lval(mk::lv(d->key)), u = lval(mk::lv(d->val));
            auto val_of = [](const LValPtr &p) -> ValuePtr {
                if (auto *q = std::get_if<ValuePtr>(&p->v)) return *q;
                return nullptr;
            };
            ValuePtr bv = val_of(b), kv = val_of(k), uv = val_of(u);
            if (bv && kv && uv) return mk::lv(mk::ext(bv, kv, uv));
            return mk::fn(Fn::Ext, {b, k, u});
        }
        throw std::logic_error("cannot place a logical term inside a program value");
    }
    auto &f = std::get<LogicalValue::FnApp>(l->v);
    std::vector<LValPtr> args;
    bool changed = false;
    for (auto &a : f.args) {
        args.push_back(lval(a));
        changed = changed || args.back() != a;
    }
    if (!changed) return l;
    return mk::fn(f.fn, std::move(args));
}

FormulaPtr Subst::formula(const FormulaPtr &p) const {
    return std::visit(
        overloaded{
            [&](const Formula::Atom &a) -> FormulaPtr {
                std::vector<LValPtr> args;
                for (auto &q : a.args) args.push_back(lval(q));
                return mk::atom(a.pred, std::move(args));
            },
            [&](const Formula::HasType &h) -> FormulaPtr {
                return mk::has_type(lval(h.lw), term(h.term));
            },
            [&](const Formula::And &a) -> FormulaPtr {
                std::vector<FormulaPtr> ps;
                for (auto &q : a.ps) ps.push_back(formula(q));
                return std::make_shared<Formula>(Formula{Formula::And{std::move(ps)}});
            },
            [&](const Formula::Or &a) -> FormulaPtr {
                std::vector<FormulaPtr> ps;
                for (auto &q : a.ps) ps.push_back(formula(q));
                return std::make_shared<Formula>(Formula{Formula::Or{std::move(ps)}});
            },
            [&](const Formula::Not &n) -> FormulaPtr { return mk::not_(formula(n.p)); },
            [&](const Formula::Implies &i) -> FormulaPtr {
                return mk::implies(formula(i.p), formula(i.q));
            },
            [&](const Formula::Iff &i) -> FormulaPtr { return mk::iff(formula(i.p), formula(i.q)); },
            [&](const Formula::True &) -> FormulaPtr { return p; },
            [&](const Formula::False &) -> FormulaPtr { return p; },
        },
        p->v);
}

RefType Subst::reftype(const RefType &t) const {
    // The value variable is rebound by every refinement.
    if (is_nu_subst()) return t;
    if (!mentions(t, x)) return t;
    if (fv.count(kNuStr))
        throw std::logic_error("substitution would capture the value variable");
    return RefType{formula(t.pred)};
}

TermPtr Subst::term(const TermPtr &u) const {
    return std::visit(
        overloaded{
            [&](const TypeTerm::Arrow &a) -> TermPtr {
                RefType dom = reftype(a.dom);
                if (a.binder == x) return mk::arrow(a.binder, dom, a.cod);
                if (fv.count(a.binder)) {
                    std::string nb = fresh_away(a.binder, fv, free_vars_of(a.cod));
                    RefType cod = subst_value(a.cod, a.binder, mk::var(nb));
                    return mk::arrow(nb, dom, reftype(cod));
                }
                return mk::arrow(a.binder, dom, reftype(a.cod));
            },
            [&](const TypeTerm::TyVar &) -> TermPtr { return u; },
            [&](const TypeTerm::Null &) -> TermPtr { return u; },
            [&](const TypeTerm::CtorApp &c) -> TermPtr {
                std::vector<RefType> args;
                for (auto &t : c.args) args.push_back(reftype(t));
                return mk::ctor(c.ctor, std::move(args));
            },
        },
        u->v);
}

Scheme Subst::scheme(const Scheme &s) const { return Scheme{s.tyvars, reftype(s.body)}; }

Subst make_value_subst(const std::string &x, const ValuePtr &w) {
    Subst s{x, w, mk::lv(w), {}};
    free_vars(*w, s.fv);
    return s;
}

Subst make_lval_subst(const std::string &x, const LValPtr &lw) {
    Subst s{x, nullptr, lw, {}};
    if (auto *v = std::get_if<ValuePtr>(&lw->v)) s.w = *v;
    free_vars(*lw, s.fv);
    return s;
}

}  // namespace

ExprPtr subst_value(const ExprPtr &e, const std::string &x, const ValuePtr &w) {
    return make_value_subst(x, w).expr(e);
}
ValuePtr subst_value(const ValuePtr &v, const std::string &x, const ValuePtr &w) {
    return make_value_subst(x, w).value(v);
}
FormulaPtr subst_value(const FormulaPtr &p, const std::string &x, const ValuePtr &w) {
    if (!mentions(*p, x)) return p;
    return make_value_subst(x, w).formula(p);
}
RefType subst_value(const RefType &t, const std::string &x, const ValuePtr &w) {
    return make_value_subst(x, w).reftype(t);
}
Scheme subst_value(const Scheme &s, const std::string &x, const ValuePtr &w) {
    return make_value_subst(x, w).scheme(s);
}
TermPtr subst_value(const TermPtr &u, const std::string &x, const ValuePtr &w) {
    return make_value_subst(x, w).term(u);
}

FormulaPtr subst_lval(const FormulaPtr &p, const std::string &x, const LValPtr &lw) {
    if (!mentions(*p, x)) return p;
    return make_lval_subst(x, lw).formula(p);
}
LValPtr subst_lval(const LValPtr &l, const std::string &x, const LValPtr &lw) {
    return make_lval_subst(x, lw).lval(l);
}
RefType subst_lval(const RefType &t, const std::string &x, const LValPtr &lw) {
    return make_lval_subst(x, lw).reftype(t);
}
TermPtr subst_lval(const TermPtr &u, const std::string &x, const LValPtr &lw) {
    return make_lval_subst(x, lw).term(u);
}

FormulaPtr subst_nu(const FormulaPtr &p, const LValPtr &lw) { return subst_lval(p, kNuStr, lw); }

FormulaPtr embed_at(const RefType &t, const LValPtr &lw) { return subst_nu(t.pred, lw); }

// -------------------------------------------------------- type var renaming

namespace {
FormulaPtr rename_tv(const FormulaPtr &p, const std::string &from, const std::string &to);

TermPtr rename_tv(const TermPtr &u, const std::string &from, const std::string &to) {
    return std::visit(
        overloaded{
            [&](const TypeTerm::Arrow &a) -> TermPtr {
                return mk::arrow(a.binder, RefType{rename_tv(a.dom.pred, from, to)},
                                 RefType{rename_tv(a.cod.pred, from, to)});
            },
            [&](const TypeTerm::TyVar &v) -> TermPtr {
                return v.name == from ? mk::tyvar(to, v.marked) : u;
            },
            [&](const TypeTerm::Null &) -> TermPtr { return u; },
            [&](const TypeTerm::CtorApp &c) -> TermPtr {
                std::vector<RefType> args;
                for (auto &t : c.args) args.push_back(RefType{rename_tv(t.pred, from, to)});
                return mk::ctor(c.ctor, std::move(args));
            },
        },
        u->v);
}

FormulaPtr rename_tv(const FormulaPtr &p, const std::string &from, const std::string &to) {
    return std::visit(
        overloaded{
            [&](const Formula::HasType &h) -> FormulaPtr {
                return mk::has_type(h.lw, rename_tv(h.term, from, to));
            },
            [&](const Formula::And &a) -> FormulaPtr {
                std::vector<FormulaPtr> ps;
                for (auto &q : a.ps) ps.push_back(rename_tv(q, from, to));
                return std::make_shared<Formula>(Formula{Formula::And{std::move(ps)}});
            },
            [&](const Formula::Or &a) -> FormulaPtr {
                std::vector<FormulaPtr> ps;
                for (auto &q : a.ps) ps.push_back(rename_tv(q, from, to));
                return std::make_shared<Formula>(Formula{Formula::Or{std::move(ps)}});
            },
            [&](const Formula::Not &n) -> FormulaPtr { return mk::not_(rename_tv(n.p, from, to)); },
            [&](const Formula::Implies &i) -> FormulaPtr {
                return mk::implies(rename_tv(i.p, from, to), rename_tv(i.q, from, to));
            },
            [&](const Formula::Iff &i) -> FormulaPtr {
                return mk::iff(rename_tv(i.p, from, to), rename_tv(i.q, from, to));
            },
            [&](const auto &) -> FormulaPtr { return p; },
        },
        p->v);
}
}  // namespace

RefType rename_tyvar(const RefType &t, const std::string &from, const std::string &to) {
    return RefType{rename_tv(t.pred, from, to)};
}

Scheme rename_tyvar(const Scheme &s, const std::string &from, const std::string &to) {
    for (auto &a : s.tyvars)
        if (a == from) return s;
    return Scheme{s.tyvars, rename_tyvar(s.body, from, to)};
}

// ------------------------------------------------------------------ printing

std::string quote_string(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

namespace {

// Printer with an optional binder renaming (used for canonical keys).
struct Printer {
    bool canonical = false;
    std::map<std::string, std::string> ren;
    int depth = 0;

    std::string name(const std::string &n) const {
        auto it = ren.find(n);
        return it == ren.end() ? n : it->second;
    }

    // Runs `body` with `binder` renamed; returns the printed binder.
    template <class F>
    std::string bind(const std::string &binder, F &&body) {
        if (!canonical) {
            body(binder);
            return binder;
        }
        std::string nb = "#" + std::to_string(depth++);
        auto old = ren.find(binder);
        std::optional<std::string> saved;
        if (old != ren.end()) saved = old->second;
        ren[binder] = nb;
        body(nb);
        if (saved)
            ren[binder] = *saved;
        else
            ren.erase(binder);
        --depth;
        return nb;
    }

    void cst(std::ostream &os, const Const &c) {
        std::visit(overloaded{
                       [&](const Const::Int &i) { os << i.z; },
                       [&](const Const::Bool &b) { os << (b.b ? "true" : "false"); },
                       [&](const Const::Str &s) { os << quote_string(s.s); },
                       [&](const Const::Null &) { os << "null"; },
                       [&](const Const::EmptyDict &) { os << "{}"; },
                       [&](const Const::PrimOp &p) { os << "(" << prim_name(p.op) << ")"; },
                       [&](const Const::Partial &p) {
                           os << "(" << prim_name(p.op);
                           for (auto &a : p.args) {
                               os << " ";
                               value(os, *a);
                           }
                           os << ")";
                       },
                   },
                   c.v);
    }

    void value(std::ostream &os, const Value &w) {
        std::visit(overloaded{
                       [&](const Value::Var &x) { os << name(x.name); },
                       [&](const Const &c) { cst(os, c); },
                       [&](const Value::DictExt &d) {
                           os << "(";
                           value(os, *d.base);
                           os << " ++ {";
                           value(os, *d.key);
                           os << ": ";
                           value(os, *d.val);
                           os << "})";
                       },
                       [&](const Value::Fun &f) {
                           os << "(fun ";
                           std::string ann;
                           if (f.ann) ann = reftype(*f.ann);
                           bind(f.binder, [&](const std::string &b) {
                               if (f.ann)
                                   os << "(" << b << " :: " << ann << ")";
                               else
                                   os << b;
                               os << " -> ";
                               expr(os, *f.body);
                           });
                           os << ")";
                       },
                       [&](const Value::TFun &f) {
                           os << "(/\\" << f.tyvar << ". ";
                           expr(os, *f.body);
                           os << ")";
                       },
                       [&](const Value::New &n) {
                           os << "new " << n.ctor;
                           if (n.targs) {
                               os << "[";
                               for (size_t i = 0; i < n.targs->size(); ++i)
                                   os << (i ? ", " : "") << reftype((*n.targs)[i]);
                               os << "]";
                           }
                           os << "(";
                           for (size_t i = 0; i < n.args.size(); ++i) {
                               if (i) os << ", ";
                               value(os, *n.args[i]);
                           }
                           os << ")";
                       },
                   },
                   w.v);
    }

    void expr(std::ostream &os, const Expr &e) {
        std::visit(overloaded{
                       [&](const Expr::Val &v) { value(os, *v.w); },
                       [&](const Expr::App &a) {
                           value(os, *a.fn);
                           os << " ";
                           value(os, *a.arg);
                       },
                       [&](const Expr::TApp &a) {
                           value(os, *a.fn);
                           os << " [" << reftype(a.ty) << "]";
                       },
                       [&](const Expr::If &i) {
                           os << "(if ";
                           value(os, *i.guard);
                           os << " then ";
                           expr(os, *i.then_e);
                           os << " else ";
                           expr(os, *i.else_e);
                           os << ")";
                       },
                       [&](const Expr::Let &l) {
                           os << "(let ";
                           std::string ann;
                           if (l.ann) ann = scheme(*l.ann);
                           std::ostringstream rhs;
                           expr(rhs, *l.rhs);
                           bind(l.binder, [&](const std::string &b) {
                               os << b;
                               if (l.ann) os << " :: " << ann;
                               os << " = " << rhs.str() << " in ";
                               expr(os, *l.body);
                           });
                           os << ")";
                       },
                   },
                   e.v);
    }

    void lval(std::ostream &os, const LogicalValue &lw) {
        if (auto *w = std::get_if<ValuePtr>(&lw.v)) {
            value(os, **w);
            return;
        }
        auto &f = std::get<LogicalValue::FnApp>(lw.v);
        if (f.fn == Fn::Plus || f.fn == Fn::Minus) {
            os << "(";
            lval(os, *f.args[0]);
            os << (f.fn == Fn::Plus ? " + " : " - ");
            lval(os, *f.args[1]);
            os << ")";
            return;
        }
        os << fn_name(f.fn) << "(";
        for (size_t i = 0; i < f.args.size(); ++i) {
            if (i) os << ", ";
            lval(os, *f.args[i]);
        }
        os << ")";
    }

    void nary(std::ostream &os, const std::vector<FormulaPtr> &ps, const char *op) {
        os << "(";
        for (size_t i = 0; i < ps.size(); ++i) {
            if (i) os << op;
            formula(os, *ps[i]);
        }
        os << ")";
    }

    void formula(std::ostream &os, const Formula &p) {
        std::visit(overloaded{
                       [&](const Formula::Atom &a) {
                           if (a.pred == Pred::Has || a.pred == Pred::EqMod) {
                               os << pred_name(a.pred) << "(";
                               for (size_t i = 0; i < a.args.size(); ++i) {
                                   if (i) os << ", ";
                                   lval(os, *a.args[i]);
                               }
                               os << ")";
                           } else {
                               lval(os, *a.args[0]);
                               os << " " << pred_name(a.pred) << " ";
                               lval(os, *a.args[1]);
                           }
                       },
                       [&](const Formula::HasType &h) {
                           lval(os, *h.lw);
                           os << " :: ";
                           term(os, *h.term);
                       },
                       [&](const Formula::And &a) { nary(os, a.ps, " /\\ "); },
                       [&](const Formula::Or &a) { nary(os, a.ps, " \\/ "); },
                       [&](const Formula::Not &n) {
                           os << "not (";
                           formula(os, *n.p);
                           os << ")";
                       },
                       [&](const Formula::Implies &i) {
                           os << "(";
                           formula(os, *i.p);
                           os << " => ";
                           formula(os, *i.q);
                           os << ")";
                       },
                       [&](const Formula::Iff &i) {
                           os << "(";
                           formula(os, *i.p);
                           os << " <=> ";
                           formula(os, *i.q);
                           os << ")";
                       },
                       [&](const Formula::True &) { os << "true"; },
                       [&](const Formula::False &) { os << "false"; },
                   },
                   p.v);
    }

    void term(std::ostream &os, const TypeTerm &u) {
        std::visit(overloaded{
                       [&](const TypeTerm::Arrow &a) {
                           os << "(";
                           std::string dom = reftype(a.dom);
                           bind(a.binder, [&](const std::string &b) {
                               os << b << ":" << dom << " -> " << reftype(a.cod);
                           });
                           os << ")";
                       },
                       [&](const TypeTerm::TyVar &v) {
                           if (v.marked && !canonical) os << "*";
                           os << v.name;
                       },
                       [&](const TypeTerm::Null &) { os << "Null"; },
                       [&](const TypeTerm::CtorApp &c) {
                           os << c.ctor << "[";
                           for (size_t i = 0; i < c.args.size(); ++i)
                               os << (i ? ", " : "") << reftype(c.args[i]);
                           os << "]";
                       },
                   },
                   u.v);
    }

    std::string reftype(const RefType &t) {
        std::ostringstream os;
        os << "{v | ";
        formula(os, *t.pred);
        os << "}";
        return os.str();
    }

    std::string scheme(const Scheme &s) {
        std::ostringstream os;
        for (auto &a : s.tyvars) os << "forall " << a << ". ";
        os << reftype(s.body);
        return os.str();
    }
};

template <class F>
std::string print_with(bool canonical, F &&f) {
    Printer pr;
    pr.canonical = canonical;
    std::ostringstream os;
    f(pr, os);
    return os.str();
}

}  // namespace

std::string to_string(const Value &w) {
    return print_with(false, [&](Printer &p, std::ostream &os) { p.value(os, w); });
}
std::string to_string(const Expr &e) {
    return print_with(false, [&](Printer &p, std::ostream &os) { p.expr(os, e); });
}
std::string to_string(const LogicalValue &lw) {
    return print_with(false, [&](Printer &p, std::ostream &os) { p.lval(os, lw); });
}
std::string to_string(const Formula &f) {
    return print_with(false, [&](Printer &p, std::ostream &os) { p.formula(os, f); });
}
std::string to_string(const TypeTerm &u) {
    return print_with(false, [&](Printer &p, std::ostream &os) { p.term(os, u); });
}
std::string to_string(const RefType &t) {
    return print_with(false, [&](Printer &p, std::ostream &os) { os << p.reftype(t); });
}
std::string to_string(const Scheme &s) {
    return print_with(false, [&](Printer &p, std::ostream &os) { os << p.scheme(s); });
}

std::string to_string(const DatatypeDef &d) {
    std::ostringstream os;
    os << "type " << d.ctor << "[";
    for (size_t i = 0; i < d.params.size(); ++i) {
        auto &p = d.params[i];
        if (i) os << ", ";
        os << (p.variance == Variance::Co ? "+" : p.variance == Variance::Contra ? "-" : "=");
        if (p.marked) os << "*";
        os << p.tyvar;
    }
    os << "]{";
    for (size_t i = 0; i < d.fields.size(); ++i)
        os << (i ? ", " : "") << d.fields[i].name << ": " << to_string(d.fields[i].type);
    os << "}";
    return os.str();
}

std::string canonical_key(const TermPtr &u) {
    return print_with(true, [&](Printer &p, std::ostream &os) { p.term(os, *u); });
}
std::string canonical_key(const RefType &t) {
    return print_with(true, [&](Printer &p, std::ostream &os) { os << p.reftype(t); });
}
std::string canonical_key(const Formula &f) {
    return print_with(true, [&](Printer &p, std::ostream &os) { p.formula(os, f); });
}
std::string canonical_key(const Value &w) {
    return print_with(true, [&](Printer &p, std::ostream &os) { p.value(os, w); });
}
std::string canonical_key(const Expr &e) {
    return print_with(true, [&](Printer &p, std::ostream &os) { p.expr(os, e); });
}
std::string canonical_key(const LogicalValue &lw) {
    return print_with(true, [&](Printer &p, std::ostream &os) { p.lval(os, lw); });
}

bool alpha_equal(const TermPtr &a, const TermPtr &b) { return canonical_key(a) == canonical_key(b); }
bool alpha_equal(const RefType &a, const RefType &b) { return canonical_key(a) == canonical_key(b); }
bool alpha_equal(const ExprPtr &a, const ExprPtr &b) { return canonical_key(*a) == canonical_key(*b); }

// -------------------------------------------------------- alpha canonical

namespace {

struct Canon {
    int depth = 0;
    std::map<std::string, std::string> ren;

    template <class F>
    auto bind(const std::string &binder, F &&body) {
        std::string nb = "#" + std::to_string(depth++);
        auto it = ren.find(binder);
        std::optional<std::string> saved;
        if (it != ren.end()) saved = it->second;
        ren[binder] = nb;
        auto r = body(nb);
        if (saved)
            ren[binder] = *saved;
        else
            ren.erase(binder);
        --depth;
        return r;
    }

    ValuePtr value(const ValuePtr &w) {
        return std::visit(
            overloaded{
                [&](const Value::Var &x) -> ValuePtr {
                    auto it = ren.find(x.name);
                    return it == ren.end() ? w : mk::var(it->second);
                },
                [&](const Const &c) -> ValuePtr {
                    if (auto *p = std::get_if<Const::Partial>(&c.v)) {
                        std::vector<ValuePtr> args;
                        for (auto &a : p->args) args.push_back(value(a));
                        return mk::partial(p->op, std::move(args));
                    }
                    return w;
                },
                [&](const Value::DictExt &d) -> ValuePtr {
                    return mk::ext(value(d.base), value(d.key), value(d.val));
                },
                [&](const Value::Fun &f) -> ValuePtr {
                    std::optional<RefType> ann;
                    if (f.ann) ann = reftype(*f.ann);
                    return bind(f.binder, [&](const std::string &b) {
                        return mk::fun(b, ann, expr(f.body));
                    });
                },
                [&](const Value::TFun &f) -> ValuePtr { return mk::tfun(f.tyvar, expr(f.body)); },
                [&](const Value::New &n) -> ValuePtr {
                    std::optional<std::vector<RefType>> targs;
                    if (n.targs) {
                        targs.emplace();
                        for (auto &t : *n.targs) targs->push_back(reftype(t));
                    }
                    std::vector<ValuePtr> args;
                    for (auto &a : n.args) args.push_back(value(a));
                    return mk::new_(n.ctor, std::move(targs), std::move(args));
                },
            },
            w->v);
    }

    ExprPtr expr(const ExprPtr &e) {
        return std::visit(
            overloaded{
                [&](const Expr::Val &v) -> ExprPtr { return mk::val(value(v.w)); },
                [&](const Expr::App &a) -> ExprPtr { return mk::app(value(a.fn), value(a.arg)); },
                [&](const Expr::TApp &a) -> ExprPtr { return mk::tapp(value(a.fn), reftype(a.ty)); },
                [&](const Expr::If &i) -> ExprPtr {
                    return mk::if_(value(i.guard), expr(i.then_e), expr(i.else_e));
                },
                [&](const Expr::Let &l) -> ExprPtr {
                    std::optional<Scheme> ann;
                    if (l.ann) ann = Scheme{l.ann->tyvars, reftype(l.ann->body)};
                    ExprPtr rhs = expr(l.rhs);
                    return bind(l.binder, [&](const std::string &b) {
                        return mk::let(b, ann, rhs, expr(l.body));
                    });
                },
            },
            e->v);
    }

    LValPtr lval(const LValPtr &l) {
        if (auto *w = std::get_if<ValuePtr>(&l->v)) return mk::lv(value(*w));
        auto &f = std::get<LogicalValue::FnApp>(l->v);
        std::vector<LValPtr> args;
        for (auto &a : f.args) args.push_back(lval(a));
        return mk::fn(f.fn, std::move(args));
    }

    FormulaPtr formula(const FormulaPtr &p) {
        return std::visit(
            overloaded{
                [&](const Formula::Atom &a) -> FormulaPtr {
                    std::vector<LValPtr> args;
                    for (auto &q : a.args) args.push_back(lval(q));
                    return mk::atom(a.pred, std::move(args));
                },
                [&](const Formula::HasType &h) -> FormulaPtr {
                    return mk::has_type(lval(h.lw), term(h.term));
                },
                [&](const Formula::And &a) -> FormulaPtr {
                    std::vector<FormulaPtr> ps;
                    for (auto &q : a.ps) ps.push_back(formula(q));
                    return std::make_shared<Formula>(Formula{Formula::And{std::move(ps)}});
                },
                [&](const Formula::Or &a) -> FormulaPtr {
                    std::vector<FormulaPtr> ps;
                    for (auto &q : a.ps) ps.push_back(formula(q));
                    return std::make_shared<Formula>(Formula{Formula::Or{std::move(ps)}});
                },
                [&](const Formula::Not &n) -> FormulaPtr { return mk::not_(formula(n.p)); },
                [&](const Formula::Implies &i) -> FormulaPtr {
                    return mk::implies(formula(i.p), formula(i.q));
                },
                [&](const Formula::Iff &i) -> FormulaPtr {
                    return mk::iff(formula(i.p), formula(i.q));
                },
                [&](const auto &) -> FormulaPtr { return p; },
            },
            p->v);
    }

    RefType reftype(const RefType &t) { return RefType{formula(t.pred)}; }

    TermPtr term(const TermPtr &u) {
        return std::visit(
            overloaded{
                [&](const TypeTerm::Arrow &a) -> TermPtr {
                    RefType dom = reftype(a.dom);
                    return bind(a.binder, [&](const std::string &b) {
                        return mk::arrow(b, dom, reftype(a.cod));
                    });
                },
                [&](const TypeTerm::TyVar &v) -> TermPtr { return mk::tyvar(v.name); },
                [&](const TypeTerm::Null &) -> TermPtr { return u; },
                [&](const TypeTerm::CtorApp &c) -> TermPtr {
                    std::vector<RefType> args;
                    for (auto &t : c.args) args.push_back(reftype(t));
                    return mk::ctor(c.ctor, std::move(args));
                },
            },
            u->v);
    }
};

}  // namespace

TermPtr alpha_canonical(const TermPtr &u) {
    Canon c;
    return c.term(u);
}

RefType strip_marks(const RefType &t) {
    struct Strip {
        FormulaPtr formula(const FormulaPtr &p) {
            return std::visit(
                overloaded{
                    [&](const Formula::HasType &h) -> FormulaPtr {
                        return mk::has_type(h.lw, term(h.term));
                    },
                    [&](const Formula::And &a) -> FormulaPtr {
                        std::vector<FormulaPtr> ps;
                        for (auto &q : a.ps) ps.push_back(formula(q));
                        return std::make_shared<Formula>(Formula{Formula::And{std::move(ps)}});
                    },
                    [&](const Formula::Or &a) -> FormulaPtr {
                        std::vector<FormulaPtr> ps;
                        for (auto &q : a.ps) ps.push_back(formula(q));
                        return std::make_shared<Formula>(Formula{Formula::Or{std::move(ps)}});
                    },
                    [&](const Formula::Not &n) -> FormulaPtr { return mk::not_(formula(n.p)); },
                    [&](const Formula::Implies &i) -> FormulaPtr {
                        return mk::implies(formula(i.p), formula(i.q));
                    },
                    [&](const Formula::Iff &i) -> FormulaPtr {
                        return mk::iff(formula(i.p), formula(i.q));
                    },
                    [&](const auto &) -> FormulaPtr { return p; },
                },
                p->v);
        }
        TermPtr term(const TermPtr &u) {
            return std::visit(
                overloaded{
                    [&](const TypeTerm::Arrow &a) -> TermPtr {
                        return mk::arrow(a.binder, RefType{formula(a.dom.pred)},
                                         RefType{formula(a.cod.pred)});
                    },
                    [&](const TypeTerm::TyVar &v) -> TermPtr { return mk::tyvar(v.name); },
                    [&](const TypeTerm::Null &) -> TermPtr { return u; },
                    [&](const TypeTerm::CtorApp &k) -> TermPtr {
                        std::vector<RefType> args;
                        for (auto &a : k.args) args.push_back(RefType{formula(a.pred)});
                        return mk::ctor(k.ctor, std::move(args));
                    },
                },
                u->v);
        }
    } s;
    return RefType{s.formula(t.pred)};
}

// -------------------------------------------------------------------- erase

ValuePtr erase(const ValuePtr &w) {
    return std::visit(
        overloaded{
            [&](const Value::Var &) -> ValuePtr { return w; },
            [&](const Const &c) -> ValuePtr {
                if (auto *p = std::get_if<Const::Partial>(&c.v)) {
                    std::vector<ValuePtr> args;
                    for (auto &a : p->args) args.push_back(erase(a));
                    return mk::partial(p->op, std::move(args));
                }
                return w;
            },
            [&](const Value::DictExt &d) -> ValuePtr {
                return mk::ext(erase(d.base), erase(d.key), erase(d.val));
            },
            [&](const Value::Fun &f) -> ValuePtr { return mk::fun(f.binder, std::nullopt, erase(f.body)); },
            [&](const Value::TFun &f) -> ValuePtr { return mk::tfun(f.tyvar, erase(f.body)); },
            [&](const Value::New &n) -> ValuePtr {
                std::vector<ValuePtr> args;
                for (auto &a : n.args) args.push_back(erase(a));
                return mk::new_(n.ctor, std::nullopt, std::move(args));
            },
        },
        w->v);
}

ExprPtr erase(const ExprPtr &e) {
    return std::visit(
        overloaded{
            [&](const Expr::Val &v) -> ExprPtr { return mk::val(erase(v.w)); },
            [&](const Expr::App &a) -> ExprPtr { return mk::app(erase(a.fn), erase(a.arg)); },
            [&](const Expr::TApp &a) -> ExprPtr { return mk::tapp(erase(a.fn), a.ty); },
            [&](const Expr::If &i) -> ExprPtr {
                return mk::if_(erase(i.guard), erase(i.then_e), erase(i.else_e));
            },
            [&](const Expr::Let &l) -> ExprPtr {
                return mk::let(l.binder, std::nullopt, erase(l.rhs), erase(l.body));
            },
        },
        e->v);
}

}  // namespace duck
