#include "duckcheck/subtyping.hpp"

#include "duckcheck/typing.hpp"
#include "util.hpp"

#include <algorithm>

namespace duck {

using detail::overloaded;

// ------------------------------------------------------------------ state

CheckerState::CheckerState(DefEnv d, SolverConfig cfg, CheckOptions o)
    : defs(std::move(d)), solver(std::move(cfg), boxes), opts(o) {}

std::string CheckerState::fresh(const std::string &base) { return base + "#" + std::to_string(next_++); }

bool CheckerState::valid(const TypeEnv &g, const FormulaPtr &goal) {
    return solver.check_valid({embed_env(g)}, goal) == Verdict::Valid;
}

bool CheckerState::inconsistent(const TypeEnv &g) {
    auto e = embed_env(g);
    auto key = canonical_key(*e);
    auto it = inconsistent_.find(key);
    if (it != inconsistent_.end()) return it->second;
    bool r = solver.check_valid({e}, mk::bot()) == Verdict::Valid;
    inconsistent_.emplace(key, r);
    return r;
}

// --------------------------------------------------------------- subtyper

struct Subtyper::Depth {
    Subtyper &s;
    explicit Depth(Subtyper &t) : s(t) {
        if (s.depth_++ == 0) s.fuel_ = s.st_.opts.fuel;
    }
    ~Depth() { --s.depth_; }
};

void Subtyper::tick() {
    if (--fuel_ < 0) throw FuelExhausted("subtyping exceeded its recursion budget");
}

namespace {

void top_terms(const Formula &p, std::vector<TermPtr> &out) {
    std::visit(overloaded{
                   [&](const Formula::HasType &h) { out.push_back(h.term); },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) top_terms(*q, out);
                   },
                   [&](const Formula::Or &a) {
                       for (auto &q : a.ps) top_terms(*q, out);
                   },
                   [&](const Formula::Not &n) { top_terms(*n.p, out); },
                   [&](const Formula::Implies &i) {
                       top_terms(*i.p, out);
                       top_terms(*i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       top_terms(*i.p, out);
                       top_terms(*i.q, out);
                   },
                   [&](const auto &) {},
               },
               p.v);
}

}  // namespace

std::vector<TermPtr> Subtyper::type_terms(const TypeEnv &g) {
    std::vector<TermPtr> raw;
    for (auto &e : g.entries()) {
        if (e.kind == EnvEntry::Kind::Bind && e.scheme.is_mono())
            top_terms(*e.scheme.body.pred, raw);
        else if (e.kind == EnvEntry::Kind::Guard)
            top_terms(*e.guard, raw);
    }
    std::map<int, TermPtr> byid;
    for (auto &u : raw) byid.emplace(st_.boxes.box(u), u);
    std::vector<TermPtr> out;
    for (auto &[id, u] : byid) out.push_back(u);
    return out;
}

std::vector<TermPtr> Subtyper::must_flow(const TypeEnv &g, const RefType &t, const UsedSet &used,
                                         bool ctors_only) {
    auto x = st_.fresh("mf");
    auto g1 = g.bind(x, Scheme::mono(t));
    std::vector<TermPtr> cands;
    for (auto &u : type_terms(g1)) {
        if (ctors_only && !std::holds_alternative<TypeTerm::CtorApp>(u->v)) continue;
        if (st_.opts.used_guard && used.count(st_.boxes.box(u))) continue;
        cands.push_back(u);
    }
    if (cands.empty()) return {};
    std::vector<FormulaPtr> goals;
    for (auto &u : cands) goals.push_back(mk::has_type(mk::lvar(x), u));
    auto vs = st_.solver.check_valid_many({embed_env(g1)}, goals);
    std::vector<TermPtr> out;
    for (size_t i = 0; i < cands.size(); ++i)
        if (vs[i] == Verdict::Valid) out.push_back(cands[i]);
    return out;
}

bool Subtyper::imp(const TypeEnv &g, const Clause &c, const UsedSet &used) {
    Depth d(*this);
    tick();
    auto gq = g.guard(c.q);
    // CA-Valid
    if (st_.valid(gq, c.consequent())) return true;
    // CA-ImpSyn
    std::vector<std::string> tried;
    for (auto &[lw, uj] : c.r) {
        auto extracted = must_flow(gq, mk::ref(mk::eq(mk::lnu(), lw)), used);
        UsedSet used2 = used;
        for (auto &u : extracted) used2.insert(st_.boxes.box(u));
        for (auto &u : extracted) {
            if (syn_sub(gq, u, uj, used2)) return true;
            tried.push_back(to_string(u));
        }
    }
    if (!failure_ || failure_->rule != "UA-Arrow" || depth_ == 1) {
        std::string msg = "cannot prove " + to_string(clause_formula(c));
        failure_ = SubFailure{"CA-ImpSyn", msg, to_string(clause_formula(c)), tried};
    }
    return false;
}

bool Subtyper::sub(const TypeEnv &g, const Scheme &s1, const Scheme &s2, const UsedSet &used) {
    Depth d(*this);
    tick();
    if (s1.tyvars.size() != s2.tyvars.size()) {
        failure_ = SubFailure{"SA-Poly", "quantifier counts differ", std::nullopt, {}};
        return false;
    }
    if (!s1.is_mono()) {
        // SA-Poly: align the bound variables.
        TypeEnv h = g;
        RefType b1 = s1.body, b2 = s2.body;
        for (size_t i = 0; i < s1.tyvars.size(); ++i) {
            auto a = st_.fresh(s1.tyvars[i]);
            b1 = rename_tyvar(b1, s1.tyvars[i], a);
            b2 = rename_tyvar(b2, s2.tyvars[i], a);
            h = h.tyvar(a);
        }
        return sub(h, b1, b2, used);
    }
    // SA-Mono
    auto x = st_.fresh("s");
    auto p1 = embed_at(s1.body, mk::lvar(x));
    auto p2 = embed_at(s2.body, mk::lvar(x));
    auto h = g.bind(x, Scheme::mono(mk::top_type())).guard(p1);
    if (st_.valid(h, p2)) return true;
    std::vector<Clause> cs;
    try {
        cs = normalize(p2);
    } catch (const CnfBlowup &e) {
        failure_ = SubFailure{"SA-Mono", e.what(), std::nullopt, {}};
        return false;
    }
    for (auto &c : cs)
        if (!imp(h, c, used)) return false;
    return true;
}

bool Subtyper::syn_sub(const TypeEnv &g, const TermPtr &u1, const TermPtr &u2, const UsedSet &used) {
    Depth d(*this);
    tick();
    auto no = [&](const std::string &rule, const std::string &msg) {
        failure_ = SubFailure{rule, msg, std::nullopt, {}};
        return false;
    };
    if (auto *a1 = std::get_if<TypeTerm::TyVar>(&u1->v)) {
        auto *a2 = std::get_if<TypeTerm::TyVar>(&u2->v);
        if (a2 && a1->name == a2->name) return true;
        return no("UA-Var", to_string(u1) + " is not " + to_string(u2));
    }
    if (std::holds_alternative<TypeTerm::Null>(u1->v)) {
        if (std::holds_alternative<TypeTerm::CtorApp>(u2->v)) return true;
        return no("UA-Null", "null is not a " + to_string(u2));
    }
    if (auto *f1 = std::get_if<TypeTerm::Arrow>(&u1->v)) {
        auto *f2 = std::get_if<TypeTerm::Arrow>(&u2->v);
        if (!f2) return no("UA-Arrow", to_string(u1) + " is not " + to_string(u2));
        auto z = st_.fresh(f2->binder);
        auto cod1 = subst_value(f1->cod, f1->binder, mk::var(z));
        auto cod2 = subst_value(f2->cod, f2->binder, mk::var(z));
        if (!sub(g, f2->dom, f1->dom, used)) return false;
        return sub(extend(g, z, Scheme::mono(f2->dom)), cod1, cod2, used);
    }
    auto &c1 = std::get<TypeTerm::CtorApp>(u1->v);
    auto *c2 = std::get_if<TypeTerm::CtorApp>(&u2->v);
    if (!c2 || c1.ctor != c2->ctor || c1.args.size() != c2->args.size())
        return no("UA-Datatype", to_string(u1) + " is not " + to_string(u2));
    auto it = st_.defs.find(c1.ctor);
    if (it == st_.defs.end()) return no("UA-Datatype", "unknown constructor " + c1.ctor);
    auto &ps = it->second.params;
    for (size_t i = 0; i < c1.args.size(); ++i) {
        auto v = i < ps.size() ? ps[i].variance : Variance::Bi;
        if ((v == Variance::Co || v == Variance::Bi) && !sub(g, c1.args[i], c2->args[i], used)) return false;
        if ((v == Variance::Contra || v == Variance::Bi) && !sub(g, c2->args[i], c1.args[i], used)) return false;
    }
    return true;
}

TypeEnv Subtyper::extend(const TypeEnv &g, const std::string &x, const Scheme &s) {
    auto g1 = g.bind(x, s);
    if (!s.is_mono()) return g1;
    auto cs = must_flow(g1, mk::ref(mk::eq(mk::lnu(), mk::lvar(x))), {}, true);
    std::vector<FormulaPtr> gs;
    auto lx = mk::lvar(x);
    for (auto &u : cs) {
        auto &c = std::get<TypeTerm::CtorApp>(u->v);
        gs.push_back(subst_nu(unfold(st_.defs, c.ctor, c.args), lx));
        auto it = st_.defs.find(c.ctor);
        if (it == st_.defs.end()) continue;
        std::vector<FormulaPtr> hs;
        for (auto &f : it->second.fields) hs.push_back(mk::has(lx, mk::lv(mk::str(f.name))));
        gs.push_back(mk::implies(mk::not_(mk::eq(lx, mk::lv(mk::null()))), mk::and_(hs)));
    }
    if (gs.empty()) return g1;
    return g1.guard(mk::and_(gs));
}

}  // namespace duck
