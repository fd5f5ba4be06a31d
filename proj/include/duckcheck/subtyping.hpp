#pragma once

// Algorithmic subtyping: clause implication, syntactic subtyping between
// type terms, and the must-flow extraction of type terms from environments.

#include "duckcheck/logic.hpp"
#include "duckcheck/smt.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace duck {

struct CheckOptions {
    /// Restrict Elim to the printed cases.
    bool strict_elim = false;
    /// Test-only: when false, must-flow ignores the set of terms already used
    /// on the current path, so cyclic environments recurse until fuel runs out.
    bool used_guard = true;
    /// Recursion budget for one top-level subtyping question.
    long fuel = 100000;
};

struct FuelExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shared state of one checking session.
struct CheckerState {
    DefEnv defs;
    BoxTable boxes;
    SolverSession solver;
    CheckOptions opts;

    CheckerState(DefEnv d, SolverConfig cfg, CheckOptions o = {});

    std::string fresh(const std::string &base);

    /// [[g]] /\ hyps => goal
    bool valid(const TypeEnv &g, const FormulaPtr &goal);
    bool inconsistent(const TypeEnv &g);

private:
    int next_ = 0;
    std::map<std::string, bool> inconsistent_;
};

/// Why the most recent subtyping question failed.
struct SubFailure {
    std::string rule;
    std::string message;
    std::optional<std::string> clause;
    std::vector<std::string> candidates;
};

using UsedSet = std::set<int>;  // box ids

class Subtyper {
public:
    explicit Subtyper(CheckerState &st) : st_(st) {}

    /// Top-level type terms of bindings and guards, in box order.
    std::vector<TermPtr> type_terms(const TypeEnv &g);
    /// Type terms U (not in `used`) such that every value of type t has type U.
    std::vector<TermPtr> must_flow(const TypeEnv &g, const RefType &t, const UsedSet &used = {},
                                   bool ctors_only = false);

    bool imp(const TypeEnv &g, const Clause &c, const UsedSet &used = {});
    bool sub(const TypeEnv &g, const Scheme &s1, const Scheme &s2, const UsedSet &used = {});
    bool sub(const TypeEnv &g, const RefType &t1, const RefType &t2, const UsedSet &used = {}) {
        return sub(g, Scheme::mono(t1), Scheme::mono(t2), used);
    }
    bool syn_sub(const TypeEnv &g, const TermPtr &u1, const TermPtr &u2, const UsedSet &used = {});

    /// Binds x : s and adds the unfolding of every constructed type x must have.
    TypeEnv extend(const TypeEnv &g, const std::string &x, const Scheme &s);

    const std::optional<SubFailure> &failure() const { return failure_; }

private:
    CheckerState &st_;
    std::optional<SubFailure> failure_;
    int depth_ = 0;
    long fuel_ = 0;

    void tick();
    struct Depth;
};

}  // namespace duck
