#include "duckcheck/wellformed.hpp"

#include "util.hpp"

#include <functional>

namespace duck {

using detail::overloaded;

namespace {

const std::string kNuStr{kNu};

void check_terms(const TypeEnv &g, const DefEnv &defs, const Formula &p);

void check_term(const TypeEnv &g, const DefEnv &defs, const TypeTerm &u) {
    std::visit(overloaded{
                   [&](const TypeTerm::Arrow &a) {
                       check_terms(g, defs, *a.dom.pred);
                       check_terms(g, defs, *a.cod.pred);
                   },
                   [&](const TypeTerm::TyVar &v) {
                       if (!g.has_tyvar(v.name)) throw WfError("type variable " + v.name + " is not in scope");
                   },
                   [&](const TypeTerm::Null &) {},
                   [&](const TypeTerm::CtorApp &c) {
                       auto it = defs.find(c.ctor);
                       if (it == defs.end()) throw WfError("unknown type constructor " + c.ctor);
                       if (it->second.params.size() != c.args.size())
                           throw WfError("constructor " + c.ctor + " expects " +
                                         std::to_string(it->second.params.size()) + " type arguments");
                       for (auto &a : c.args) check_terms(g, defs, *a.pred);
                   },
               },
               u.v);
}

void check_terms(const TypeEnv &g, const DefEnv &defs, const Formula &p) {
    std::visit(overloaded{
                   [&](const Formula::HasType &h) { check_term(g, defs, *h.term); },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) check_terms(g, defs, *q);
                   },
                   [&](const Formula::Or &a) {
                       for (auto &q : a.ps) check_terms(g, defs, *q);
                   },
                   [&](const Formula::Not &n) { check_terms(g, defs, *n.p); },
                   [&](const Formula::Implies &i) {
                       check_terms(g, defs, *i.p);
                       check_terms(g, defs, *i.q);
                   },
                   [&](const Formula::Iff &i) {
                       check_terms(g, defs, *i.p);
                       check_terms(g, defs, *i.q);
                   },
                   [&](const auto &) {},
               },
               p.v);
}

}  // namespace

void check_formula(const TypeEnv &g, const DefEnv &defs, const FormulaPtr &p, bool allow_nu) {
    for (auto &x : free_vars_of(*p)) {
        if (x == kNuStr) {
            if (!allow_nu) throw WfError("the value variable is not bound here");
            continue;
        }
        if (!g.binds(x)) throw WfError("variable " + x + " is not in scope");
    }
    check_terms(g, defs, *p);
}

void check_type(const TypeEnv &g, const DefEnv &defs, const RefType &t) { check_formula(g, defs, t.pred, true); }

void check_type(const TypeEnv &g, const DefEnv &defs, const Scheme &s) {
    TypeEnv h = g;
    for (auto &a : s.tyvars) h = h.tyvar(a);
    check_type(h, defs, s.body);
}

bool is_wf(const TypeEnv &g, const DefEnv &defs, const Scheme &s) {
    try {
        check_type(g, defs, s);
        return true;
    } catch (const WfError &) {
        return false;
    }
}

// ------------------------------------------------------------------- poles

namespace {
Polarity flip(Polarity t) { return t == kPos ? kNeg : kPos; }
}  // namespace

Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const RefType &t) {
    return poles(defs, a, theta, *t.pred);
}

Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const Formula &p) {
    return std::visit(overloaded{
                          [&](const Formula::HasType &h) { return poles(defs, a, theta, *h.term); },
                          [&](const Formula::And &x) {
                              Poles r = 0;
                              for (auto &q : x.ps) r |= poles(defs, a, theta, *q);
                              return r;
                          },
                          [&](const Formula::Or &x) {
                              Poles r = 0;
                              for (auto &q : x.ps) r |= poles(defs, a, theta, *q);
                              return r;
                          },
                          [&](const Formula::Not &n) { return poles(defs, a, flip(theta), *n.p); },
                          [&](const Formula::Implies &i) {
                              return poles(defs, a, flip(theta), *i.p) | poles(defs, a, theta, *i.q);
                          },
                          [&](const Formula::Iff &i) {
                              return poles(defs, a, kPos, *i.p) | poles(defs, a, kNeg, *i.p) |
                                     poles(defs, a, kPos, *i.q) | poles(defs, a, kNeg, *i.q);
                          },
                          [&](const auto &) -> Poles { return 0; },
                      },
                      p.v);
}

Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const TypeTerm &u) {
    return std::visit(overloaded{
                          [&](const TypeTerm::Arrow &x) {
                              return poles(defs, a, flip(theta), x.dom) | poles(defs, a, theta, x.cod);
                          },
                          [&](const TypeTerm::TyVar &v) -> Poles { return v.name == a ? theta : 0u; },
                          [&](const TypeTerm::Null &) -> Poles { return 0; },
                          [&](const TypeTerm::CtorApp &c) {
                              Poles r = 0;
                              auto it = defs.find(c.ctor);
                              if (it == defs.end()) throw WfError("unknown type constructor " + c.ctor);
                              auto &ps = it->second.params;
                              for (size_t i = 0; i < c.args.size() && i < ps.size(); ++i) {
                                  switch (ps[i].variance) {
                                  case Variance::Co: r |= poles(defs, a, theta, c.args[i]); break;
                                  case Variance::Contra: r |= poles(defs, a, flip(theta), c.args[i]); break;
                                  case Variance::Bi:
                                      r |= poles(defs, a, kPos, c.args[i]) | poles(defs, a, kNeg, c.args[i]);
                                      break;
                                  }
                              }
                              return r;
                          },
                      },
                      u.v);
}

bool variance_ok(const DefEnv &defs, const DatatypeDef &d) {
    for (auto &p : d.params) {
        Poles r = 0;
        for (auto &f : d.fields) r |= poles(defs, p.tyvar, kPos, f.type);
        if (p.variance == Variance::Co && (r & kNeg)) return false;
        if (p.variance == Variance::Contra && (r & kPos)) return false;
    }
    return true;
}

namespace {

void count_marks(const Formula &p, std::map<std::string, int> &out);

void count_marks_term(const TypeTerm &u, std::map<std::string, int> &out) {
    std::visit(overloaded{
                   [&](const TypeTerm::Arrow &a) {
                       count_marks(*a.dom.pred, out);
                       count_marks(*a.cod.pred, out);
                   },
                   [&](const TypeTerm::TyVar &v) {
                       if (v.marked) ++out[v.name];
                   },
                   [&](const TypeTerm::Null &) {},
                   [&](const TypeTerm::CtorApp &c) {
                       for (auto &a : c.args) count_marks(*a.pred, out);
                   },
               },
               u.v);
}

void count_marks(const Formula &p, std::map<std::string, int> &out) {
    std::visit(overloaded{
                   [&](const Formula::HasType &h) { count_marks_term(*h.term, out); },
                   [&](const Formula::And &a) {
                       for (auto &q : a.ps) count_marks(*q, out);
                   },
                   [&](const Formula::Or &a) {
                       for (auto &q : a.ps) count_marks(*q, out);
                   },
                   [&](const Formula::Not &n) { count_marks(*n.p, out); },
                   [&](const Formula::Implies &i) {
                       count_marks(*i.p, out);
                       count_marks(*i.q, out);
                   },
                   [&](const Formula::Iff &i) {
                       count_marks(*i.p, out);
                       count_marks(*i.q, out);
                   },
                   [&](const auto &) {},
               },
               p.v);
}

}  // namespace

void check_typedef(const DefEnv &defs, const DatatypeDef &d) {
    DefEnv with = defs;
    with[d.ctor] = d;
    TypeEnv g;
    std::set<std::string> seen;
    for (auto &p : d.params) {
        if (!seen.insert(p.tyvar).second) throw WfError("duplicate type parameter " + p.tyvar);
        g = g.tyvar(p.tyvar);
    }
    std::set<std::string> fields;
    for (auto &f : d.fields) {
        if (!fields.insert(f.name).second) throw WfError("duplicate field " + f.name);
        try {
            check_type(g, with, f.type);
        } catch (const WfError &e) {
            throw WfError("field " + f.name + " of " + d.ctor + ": " + e.what());
        }
    }
    if (!variance_ok(with, d)) throw WfError("declared variances of " + d.ctor + " disagree with field types");

    std::map<std::string, int> marks;
    for (auto &f : d.fields) count_marks(*f.type.pred, marks);
    size_t marked = 0;
    for (auto &p : d.params) {
        int n = marks.count(p.tyvar) ? marks[p.tyvar] : 0;
        if (p.marked) {
            ++marked;
            if (n != 1) throw WfError("parameter " + p.tyvar + " of " + d.ctor + " must have exactly one marked occurrence");
        } else if (n != 0) {
            throw WfError("parameter " + p.tyvar + " of " + d.ctor + " has a marked occurrence but is not marked");
        }
    }
    if (marked != 0 && marked != d.params.size())
        throw WfError("either all or none of the parameters of " + d.ctor + " must be marked");
}

}  // namespace duck
