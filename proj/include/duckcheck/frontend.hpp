#pragma once

// Surface language: parsing, type abbreviations, binder renaming and
// A-normalization into core expressions.

#include "duckcheck/logic.hpp"
#include "duckcheck/syntax.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace duck {

struct Pos {
    int line = 0, col = 0;
};

struct ParseError : std::runtime_error {
    Pos pos;
    std::vector<std::string> expected;
    ParseError(Pos p, const std::string &msg, std::vector<std::string> exp = {});
};

struct DuplicateCtor : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------- surface AST

struct SExpr;
using SExprPtr = std::shared_ptr<const SExpr>;

struct SExpr {
    struct Var { std::string name; };
    /// Literal constants, including primitive operators.
    struct Lit { ValuePtr c; };
    struct Dict { std::vector<std::pair<std::string, SExprPtr>> fields; };
    struct Fun {
        std::string binder;
        std::optional<RefType> ann;
        SExprPtr body;
    };
    struct TFun { std::string tyvar; SExprPtr body; };
    struct App { SExprPtr fn, arg; };
    struct TApp { SExprPtr fn; RefType ty; };
    struct If { SExprPtr guard, then_e, else_e; };
    struct Let {
        std::string binder;
        std::optional<Scheme> ann;
        SExprPtr rhs, body;
    };
    struct New {
        std::string ctor;
        std::optional<std::vector<RefType>> targs;
        std::vector<SExprPtr> args;
    };
    struct Get { SExprPtr dict, key; };

    std::variant<Var, Lit, Dict, Fun, TFun, App, TApp, If, Let, New, Get> v;
    Pos pos;
};

struct SourceProgram {
    std::vector<DatatypeDef> typedefs;
    SExprPtr body;
    /// Names bound by top-level lets, in order (surface names).
    std::vector<std::string> toplevel;
};

/// Parses a whole program.
SourceProgram parse(const std::string &text);
/// Parses a single type annotation (scheme syntax).
Scheme parse_scheme(const std::string &text);
/// Parses a formula (the inside of `{v | ...}`).
FormulaPtr parse_formula(const std::string &text);

/// Surface printer; its output reparses to an alpha-equivalent tree.
std::string print_surface(const SExpr &e);

/// Binder renaming: every binder gets a program-unique name distinct from
/// the value variable; type annotations follow the renaming.
struct Renamed {
    SExprPtr body;
    std::map<std::string, std::string> original;  // unique -> surface name
    std::vector<std::string> toplevel;            // unique names
};
Renamed rename_binders(const SourceProgram &p);

/// A-normalization. Compound subexpressions are bound to fresh `_tN`
/// temporaries; lets in right-hand sides float outwards. `positions`
/// receives a source position for every let binder it produces.
ExprPtr anf_normalize(const SExprPtr &e, std::map<std::string, Pos> *positions = nullptr);

struct Program {
    DefEnv defs;
    ExprPtr body;
    std::map<std::string, Pos> positions;
    std::vector<std::string> toplevel;            // unique names, in order
    std::map<std::string, std::string> original;  // unique -> surface name
};

/// The built-in List[+*A] definition: hd : A, tl : List[*A].
DatatypeDef builtin_list();

/// parse, validate typedefs, rename and A-normalize.
Program load_program(const std::string &text);

}  // namespace duck
