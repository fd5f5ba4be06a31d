#include "duckcheck/eval.hpp"

#include "util.hpp"

namespace duck {

using detail::overloaded;

namespace {

const Const *as_const(const ValuePtr &w) { return std::get_if<Const>(&w->v); }

std::optional<std::int64_t> as_int(const ValuePtr &w) {
    if (auto *c = as_const(w))
        if (auto *i = std::get_if<Const::Int>(&c->v)) return i->z;
    return std::nullopt;
}

std::optional<bool> as_bool(const ValuePtr &w) {
    if (auto *c = as_const(w))
        if (auto *b = std::get_if<Const::Bool>(&c->v)) return b->b;
    return std::nullopt;
}

const std::string *as_str(const ValuePtr &w) {
    if (auto *c = as_const(w))
        if (auto *s = std::get_if<Const::Str>(&c->v)) return &s->s;
    return nullptr;
}

bool is_dict(const ValuePtr &w, const DefEnv &defs) { return dict_lookup(w, "", &defs).has_value(); }

std::optional<ExprPtr> apply_full(const DefEnv &defs, Prim p, const std::vector<ValuePtr> &a) {
    using R = std::optional<ExprPtr>;
    auto v = [](ValuePtr w) -> R { return mk::val(std::move(w)); };
    switch (p) {
    case Prim::Plus:
    case Prim::Minus: {
        auto x = as_int(a[0]), y = as_int(a[1]);
        if (!x || !y) return std::nullopt;
        std::int64_t r;
        bool ovf = p == Prim::Plus ? __builtin_add_overflow(*x, *y, &r) : __builtin_sub_overflow(*x, *y, &r);
        if (ovf) return std::nullopt;
        return v(mk::int_(r));
    }
    case Prim::Eq:
        return v(mk::bool_(value_equal(a[0], a[1])));
    case Prim::Not: {
        auto b = as_bool(a[0]);
        if (!b) return std::nullopt;
        return v(mk::bool_(!*b));
    }
    case Prim::Tag: {
        auto t = literal_tag(*a[0]);
        if (!t) return std::nullopt;
        return v(mk::str(*t));
    }
    case Prim::Has:
    case Prim::Mem: {
        auto *k = as_str(a[1]);
        if (!k) return std::nullopt;
        auto r = dict_lookup(a[0], *k, &defs);
        if (!r) return std::nullopt;
        return v(mk::bool_(*r != nullptr));
    }
    case Prim::Get: {
        auto *k = as_str(a[1]);
        if (!k) return std::nullopt;
        auto r = dict_lookup(a[0], *k, &defs);
        if (!r || !*r) return std::nullopt;
        return v(*r);
    }
    case Prim::Set: {
        if (!as_str(a[1]) || !is_dict(a[0], defs)) return std::nullopt;
        return v(mk::ext(a[0], a[1], a[2]));
    }
    case Prim::Keys: {
        auto ks = dict_keys(a[0], &defs);
        if (!ks) return std::nullopt;
        ValuePtr l = mk::null();
        for (auto it = ks->rbegin(); it != ks->rend(); ++it) l = mk::new_("List", std::nullopt, {mk::str(*it), l});
        return v(l);
    }
    case Prim::Fix: {
        // fix f = fun y -> let r = fix f in let g = f r in g y
        auto body = mk::let("r", std::nullopt, mk::app(mk::prim(Prim::Fix), a[0]),
                            mk::let("g", std::nullopt, mk::app(a[0], mk::var("r")), mk::app(mk::var("g"), mk::var("y"))));
        return v(mk::fun("y", std::nullopt, body));
    }
    }
    return std::nullopt;
}

}  // namespace

std::optional<ExprPtr> delta(const DefEnv &defs, const Const &c, const ValuePtr &w) {
    Prim p;
    std::vector<ValuePtr> args;
    if (auto *op = std::get_if<Const::PrimOp>(&c.v)) {
        p = op->op;
    } else if (auto *pa = std::get_if<Const::Partial>(&c.v)) {
        p = pa->op;
        args = pa->args;
    } else {
        return std::nullopt;
    }
    args.push_back(w);
    if (static_cast<int>(args.size()) < prim_arity(p)) return mk::val(mk::partial(p, std::move(args)));
    return apply_full(defs, p, args);
}

StepResult step(const DefEnv &defs, const ExprPtr &e) {
    auto stepped = [](ExprPtr n) { return StepResult{StepResult::Kind::Stepped, std::move(n), nullptr, {}}; };
    auto stuck = [](std::string why) { return StepResult{StepResult::Kind::Stuck, nullptr, nullptr, std::move(why)}; };
    return std::visit(
        overloaded{
            [&](const Expr::Val &v) { return StepResult{StepResult::Kind::Value, nullptr, v.w, {}}; },
            [&](const Expr::App &a) {
                if (auto *f = std::get_if<Value::Fun>(&a.fn->v)) return stepped(subst_value(f->body, f->binder, a.arg));
                if (auto *c = as_const(a.fn)) {
                    if (auto r = delta(defs, *c, a.arg)) return stepped(*r);
                    return stuck("primitive " + to_string(a.fn) + " is undefined on " + to_string(a.arg));
                }
                return stuck(to_string(a.fn) + " is not a function");
            },
            [&](const Expr::TApp &a) {
                if (auto *f = std::get_if<Value::TFun>(&a.fn->v)) return stepped(f->body);
                if (auto *c = as_const(a.fn))
                    if (auto *op = std::get_if<Const::PrimOp>(&c->v); op && op->op == Prim::Fix) return stepped(mk::val(a.fn));
                return stuck(to_string(a.fn) + " is not a type function");
            },
            [&](const Expr::If &i) {
                auto b = as_bool(i.guard);
                if (!b) return stuck("condition " + to_string(i.guard) + " is not a boolean");
                return stepped(*b ? i.then_e : i.else_e);
            },
            [&](const Expr::Let &l) {
                if (auto *v = std::get_if<Expr::Val>(&l.rhs->v)) return stepped(subst_value(l.body, l.binder, v->w));
                auto r = step(defs, l.rhs);
                if (r.kind == StepResult::Kind::Stuck) return r;
                return stepped(mk::let(l.binder, l.ann, r.next, l.body));
            },
        },
        e->v);
}

EvalOutcome eval(const DefEnv &defs, const ExprPtr &e, long fuel, std::ostream *trace) {
    ExprPtr cur = e;
    long n = 0;
    for (;;) {
        if (auto *v = std::get_if<Expr::Val>(&cur->v)) return {EvalOutcome::Kind::Value, v->w, {}, cur, n};
        if (n >= fuel) return {EvalOutcome::Kind::OutOfFuel, nullptr, "out of fuel", cur, n};
        auto r = step(defs, cur);
        if (r.kind == StepResult::Kind::Stuck) return {EvalOutcome::Kind::Stuck, nullptr, r.reason, cur, n};
        ++n;
        cur = r.next;
        if (trace) {
            auto s = to_string(cur);
            if (s.size() > 240) s = s.substr(0, 240) + " ...";
            *trace << n << ": " << s << "\n";
        }
    }
}

namespace {

bool has_type_pred(const Formula &p) {
    return std::visit(overloaded{
                          [](const Formula::HasType &) { return true; },
                          [](const Formula::And &a) {
                              for (auto &q : a.ps)
                                  if (has_type_pred(*q)) return true;
                              return false;
                          },
                          [](const Formula::Or &a) {
                              for (auto &q : a.ps)
                                  if (has_type_pred(*q)) return true;
                              return false;
                          },
                          [](const Formula::Not &n) { return has_type_pred(*n.p); },
                          [](const Formula::Implies &i) { return has_type_pred(*i.p) || has_type_pred(*i.q); },
                          [](const Formula::Iff &i) { return has_type_pred(*i.p) || has_type_pred(*i.q); },
                          [](const auto &) { return false; },
                      },
                      p.v);
}

}  // namespace

FormulaPtr ground_part(const FormulaPtr &p) {
    std::vector<FormulaPtr> keep;
    for (auto &c : conjuncts(p))
        if (!has_type_pred(*c)) keep.push_back(c);
    return mk::and_(std::move(keep));
}

ProbeReport soundness_probe(const DefEnv &defs, const ExprPtr &e, const Scheme &s, long fuel) {
    ProbeReport r{eval(defs, e, fuel), std::nullopt};
    if (r.outcome.kind == EvalOutcome::Kind::Stuck)
        throw SoundnessViolation("well-typed program got stuck: " + r.outcome.reason + " at " + to_string(r.outcome.last));
    if (r.outcome.kind != EvalOutcome::Kind::Value || !s.is_mono()) return r;
    GroundModel m;
    m.defs = &defs;
    m.vars[std::string(kNu)] = r.outcome.value;
    r.refinement = eval_ground(ground_part(s.body.pred), m);
    if (*r.refinement == Truth::False)
        throw SoundnessViolation("result " + to_string(r.outcome.value) + " contradicts its type " + to_string(s));
    return r;
}

}  // namespace duck
