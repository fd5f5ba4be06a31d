#pragma once

// Environments, clause normalization, embedding of types and environments,
// type-term boxing, ground axiom instantiation and a concrete-model formula
// evaluator.

#include "duckcheck/syntax.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace duck {

using DefEnv = std::map<std::string, DatatypeDef>;

struct EnvEntry {
    enum class Kind { Bind, TyVar, Guard };
    Kind kind;
    std::string name;   // Bind / TyVar
    Scheme scheme;      // Bind
    FormulaPtr guard;   // Guard
};

/// Ordered typing environment. Extension returns a new environment.
class TypeEnv {
public:
    const std::vector<EnvEntry> &entries() const { return entries_; }

    TypeEnv bind(const std::string &x, Scheme s) const;
    TypeEnv tyvar(const std::string &a) const;
    TypeEnv guard(FormulaPtr p) const;

    const Scheme *lookup(const std::string &x) const;
    bool has_tyvar(const std::string &a) const;
    bool binds(const std::string &x) const { return lookup(x) != nullptr; }

private:
    std::vector<EnvEntry> entries_;
};

// ------------------------------------------------------------- clauses

/// q => (lw_1 :: U_1 \/ ... \/ lw_n :: U_n); empty consequent is false.
struct Clause {
    FormulaPtr q;
    std::vector<std::pair<LValPtr, TermPtr>> r;

    FormulaPtr consequent() const;
};

struct CnfBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rewrites implies/iff into and/or/not.
FormulaPtr lower(const FormulaPtr &p);

/// Naive CNF followed by clause rearrangement. Non-type-predicate literals
/// are negated into the antecedent; positive type predicates form the
/// consequent. A negated type predicate has nowhere else to go and is placed
/// in the antecedent as a positive atom.
std::vector<Clause> normalize(const FormulaPtr &p, std::size_t cap = 4096);

/// The formula a clause stands for: not q \/ r.
FormulaPtr clause_formula(const Clause &c);

// ------------------------------------------------------------- embedding

FormulaPtr embed_type(const Scheme &s);
FormulaPtr embed_env(const TypeEnv &g);

// --------------------------------------------------------------- boxing

/// Assigns each alpha-equivalence class of type terms a stable id.
class BoxTable {
public:
    int box(const TermPtr &u);
    /// -1 when the term has never been boxed.
    int find(const TermPtr &u) const;
    const TermPtr &term(int id) const { return terms_.at(static_cast<size_t>(id)); }
    std::size_t size() const { return terms_.size(); }

private:
    std::map<std::string, int> ids_;
    std::vector<TermPtr> terms_;
};

// ------------------------------------------------------ axiom instantiation

struct InstantiationBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The tag constant a literal value carries, if it is a literal whose tag is
/// fixed by the tag table.
std::optional<std::string> literal_tag(const Value &w);

/// Collects every logical-value subterm of the formulas (deduplicated by
/// structure, in first-occurrence order).
std::vector<LValPtr> ground_terms(const std::vector<FormulaPtr> &fs);

/// Ground instances of the dictionary axioms, the tag table, the boolean
/// values assumption and pairwise distinctness of string constants, drawn
/// from `terms`. Integer coherence lives in the solver encoding.
std::vector<FormulaPtr> instantiate_axioms(const std::vector<LValPtr> &terms,
                                           std::size_t cap = 100000);

/// All axioms needed for a query over the given formulas.
std::vector<FormulaPtr> axioms_for(const std::vector<FormulaPtr> &fs, std::size_t cap = 100000);

// ----------------------------------------------------------- ground eval

enum class Truth { False, True, Stuck };

struct GroundModel {
    std::map<std::string, ValuePtr> vars;
    const DefEnv *defs = nullptr;
};

Truth eval_ground(const FormulaPtr &p, const GroundModel &m);
/// Evaluates a logical value to a closed value; nullptr when stuck.
ValuePtr eval_lval(const LValPtr &lw, const GroundModel &m);

/// Structural equality of closed values (alpha-equivalence for functions).
bool value_equal(const ValuePtr &a, const ValuePtr &b);

/// Field lookup in a dictionary or constructed value; nullptr if absent,
/// std::nullopt if the value is not a dictionary.
std::optional<ValuePtr> dict_lookup(const ValuePtr &d, const std::string &k, const DefEnv *defs);
/// Distinct keys, outermost extension first; nullopt if not a dictionary.
std::optional<std::vector<std::string>> dict_keys(const ValuePtr &d, const DefEnv *defs);

}  // namespace duck
