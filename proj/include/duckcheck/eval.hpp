#pragma once

// Small-step call-by-value semantics over A-normal expressions, the
// primitive interpretation delta, a fuelled driver and a progress probe.

#include "duckcheck/logic.hpp"

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace duck {

struct StepResult {
    enum class Kind { Stepped, Value, Stuck };
    Kind kind;
    ExprPtr next;       // Stepped
    ValuePtr value;     // Value
    std::string reason; // Stuck
};

/// delta(c, w); nullopt when undefined (the argument is off the domain).
std::optional<ExprPtr> delta(const DefEnv &defs, const Const &c, const ValuePtr &w);

StepResult step(const DefEnv &defs, const ExprPtr &e);

struct EvalOutcome {
    enum class Kind { Value, Stuck, OutOfFuel };
    Kind kind;
    ValuePtr value;
    std::string reason;
    ExprPtr last;  // the stuck (or last reached) expression
    long steps = 0;
};

/// Iterates `step` at most `fuel` times. With `trace`, writes one line per step.
EvalOutcome eval(const DefEnv &defs, const ExprPtr &e, long fuel, std::ostream *trace = nullptr);

struct SoundnessViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProbeReport {
    EvalOutcome outcome;
    /// Truth of the ground, has-type-free part of the result refinement.
    std::optional<Truth> refinement;
};

/// Evaluates a checked program; throws SoundnessViolation when it gets stuck
/// or its result contradicts the ground part of the synthesized type.
ProbeReport soundness_probe(const DefEnv &defs, const ExprPtr &e, const Scheme &s, long fuel);

/// Conjuncts of p with no type predicates anywhere inside.
FormulaPtr ground_part(const FormulaPtr &p);

}  // namespace duck
