#pragma once

// Bidirectional type checking: synthesis, conversion, constant types,
// constructed data (fold/unfold/instantiation) and variable elimination.

#include "duckcheck/frontend.hpp"
#include "duckcheck/subtyping.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace duck {

struct TypeError : std::runtime_error {
    std::string rule;
    std::string binder;  // innermost enclosing binder, for source positions
    std::optional<std::string> clause;
    std::vector<std::string> candidates;
    TypeError(std::string rule, const std::string &msg, std::string binder = {});
};

/// ty(c)
Scheme const_type(const Const &c);
Scheme const_type(Prim p);

/// Replaces the type variable a by t in s (markers are dropped).
RefType inst(const RefType &s, const std::string &a, const RefType &t);
/// Instantiates the outermost quantifier of a scheme.
Scheme inst(const Scheme &s, const RefType &t);

/// nu != null => (tag(nu) = "Dict" /\ ... field types at sel(nu, f) ...)
FormulaPtr unfold(const DefEnv &defs, const std::string &ctor, const std::vector<RefType> &targs);
/// nu != null /\ tag(nu) = "Dict" /\ nu :: C[T] /\ sel(nu, f_j) = w_j
FormulaPtr fold(const DefEnv &defs, const std::string &ctor, const std::vector<RefType> &targs,
                const std::vector<ValuePtr> &args);

class Checker {
public:
    explicit Checker(CheckerState &st) : st_(st), subty_(st) {}

    Scheme synth(const TypeEnv &g, const ExprPtr &e);
    void convert(const TypeEnv &g, const ExprPtr &e, const Scheme &s);
    void convert(const TypeEnv &g, const ValuePtr &w, const RefType &t) {
        convert(g, mk::val(w), Scheme::mono(t));
    }

    /// Removes x : s from the type t; nullopt when the applicable cases fail.
    std::optional<RefType> elim(const std::string &x, const Scheme &s, const RefType &t);

    /// Guards `c :: U_c` for the primitives occurring in e, and null :: Null.
    TypeEnv initial_env(const ExprPtr &e);

    Subtyper &subtyper() { return subty_; }

    /// Let binders whose schemes should be recorded (top-level names).
    std::set<std::string> record;
    std::map<std::string, Scheme> recorded;

private:
    CheckerState &st_;
    Subtyper subty_;
    std::vector<std::string> where_;

    struct Where;
    [[noreturn]] void fail(const std::string &rule, const std::string &msg, bool with_sub = false);

    Scheme synth_value(const TypeEnv &g, const ValuePtr &w);
    Scheme synth_app(const TypeEnv &g, const ValuePtr &f, const ValuePtr &a);
    Scheme synth_new(const TypeEnv &g, const Value::New &n);
    void convert_app(const TypeEnv &g, const ValuePtr &f, const ValuePtr &a, const Scheme &s);
    std::vector<TermPtr> arrows_of(const TypeEnv &g, const ValuePtr &f, Scheme &ft);
    void require_sub(const TypeEnv &g, const Scheme &s1, const Scheme &s2, const std::string &rule,
                     const std::string &what);
    void check_wf(const TypeEnv &g, const Scheme &s, const std::string &rule);
};

struct CheckResult {
    Scheme scheme;
    /// Schemes of the top-level bindings, keyed by surface name, in order.
    std::vector<std::pair<std::string, Scheme>> toplevel;
};

CheckResult check_program(CheckerState &st, const Program &p);

}  // namespace duck
