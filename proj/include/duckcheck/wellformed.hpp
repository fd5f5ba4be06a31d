#pragma once

// Well-formedness of formulas, types and datatype definitions; polarity
// analysis for variance checking.

#include "duckcheck/logic.hpp"

#include <stdexcept>
#include <string>

namespace duck {

struct WfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Free variables must be bound in g (the value variable only when
/// `allow_nu`), type variables must be in scope and constructors defined
/// with the right arity.
void check_formula(const TypeEnv &g, const DefEnv &defs, const FormulaPtr &p, bool allow_nu = false);
void check_type(const TypeEnv &g, const DefEnv &defs, const RefType &t);
void check_type(const TypeEnv &g, const DefEnv &defs, const Scheme &s);
bool is_wf(const TypeEnv &g, const DefEnv &defs, const Scheme &s);

enum Polarity : unsigned { kPos = 1, kNeg = 2 };
using Poles = unsigned;  // bit set of Polarity

Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const RefType &t);
Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const Formula &p);
Poles poles(const DefEnv &defs, const std::string &a, Polarity theta, const TypeTerm &u);

/// Declared variances agree with the polarities of each parameter's
/// occurrences in the field types.
bool variance_ok(const DefEnv &defs, const DatatypeDef &d);

/// Field types well-formed under the parameters, variances respected and
/// markers placed once per parameter (all parameters or none).
void check_typedef(const DefEnv &defs, const DatatypeDef &d);

}  // namespace duck
