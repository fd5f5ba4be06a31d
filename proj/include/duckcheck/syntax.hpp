#pragma once

// Core abstract syntax: values, A-normal expressions, the refinement logic
// (logical values, formulas, type terms) and type schemes.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace duck {

/// Name of the distinguished value variable. It never appears as a program
/// binder because the frontend renames binders away from it.
inline constexpr std::string_view kNu = "v";

enum class Prim { Plus, Minus, Eq, Not, Tag, Has, Get, Set, Keys, Fix, Mem };

int prim_arity(Prim p);
std::string_view prim_name(Prim p);
std::optional<Prim> prim_from_name(std::string_view name);
const std::vector<Prim> &all_prims();

struct Value;
struct Expr;
struct Formula;
struct TypeTerm;
struct LogicalValue;

using ValuePtr = std::shared_ptr<const Value>;
using ExprPtr = std::shared_ptr<const Expr>;
using FormulaPtr = std::shared_ptr<const Formula>;
using TermPtr = std::shared_ptr<const TypeTerm>;
using LValPtr = std::shared_ptr<const LogicalValue>;

/// {v | pred}
struct RefType {
    FormulaPtr pred;
};

/// forall tyvars. body   (empty tyvars = monotype)
struct Scheme {
    std::vector<std::string> tyvars;
    RefType body;

    bool is_mono() const { return tyvars.empty(); }
    static Scheme mono(RefType t) { return Scheme{{}, std::move(t)}; }
};

// ---------------------------------------------------------------- constants

struct Const {
    struct Int { std::int64_t z; };
    struct Bool { bool b; };
    struct Str { std::string s; };
    struct Null {};
    struct EmptyDict {};
    struct PrimOp { Prim op; };
    /// A curried primitive waiting for more arguments.
    struct Partial {
        Prim op;
        std::vector<ValuePtr> args;
    };
    std::variant<Int, Bool, Str, Null, EmptyDict, PrimOp, Partial> v;
};

// ------------------------------------------------------------------- values

struct Value {
    struct Var { std::string name; };
    struct DictExt { ValuePtr base, key, val; };
    struct Fun {
        std::string binder;
        std::optional<RefType> ann;
        ExprPtr body;
    };
    struct TFun {
        std::string tyvar;
        ExprPtr body;
    };
    struct New {
        std::string ctor;
        std::optional<std::vector<RefType>> targs;
        std::vector<ValuePtr> args;
    };
    std::variant<Var, Const, DictExt, Fun, TFun, New> v;
};

// -------------------------------------------------------------- expressions

struct Expr {
    struct Val { ValuePtr w; };
    struct App { ValuePtr fn, arg; };
    struct TApp { ValuePtr fn; RefType ty; };
    struct If { ValuePtr guard; ExprPtr then_e, else_e; };
    struct Let {
        std::string binder;
        std::optional<Scheme> ann;
        ExprPtr rhs, body;
    };
    std::variant<Val, App, TApp, If, Let> v;
};

// ---------------------------------------------------------------- the logic

enum class Fn { Sel, Tag, Plus, Minus, Ext };
enum class Pred { Eq, Lt, Le, Has, EqMod };

int fn_arity(Fn f);
int pred_arity(Pred p);
std::string_view fn_name(Fn f);
std::string_view pred_name(Pred p);

struct LogicalValue {
    struct FnApp {
        Fn fn;
        std::vector<LValPtr> args;
    };
    std::variant<ValuePtr, FnApp> v;
};

struct Formula {
    struct Atom { Pred pred; std::vector<LValPtr> args; };
    struct HasType { LValPtr lw; TermPtr term; };
    struct And { std::vector<FormulaPtr> ps; };
    struct Or { std::vector<FormulaPtr> ps; };
    struct Not { FormulaPtr p; };
    struct Implies { FormulaPtr p, q; };
    struct Iff { FormulaPtr p, q; };
    struct True {};
    struct False {};
    std::variant<Atom, HasType, And, Or, Not, Implies, Iff, True, False> v;
};

struct TypeTerm {
    struct Arrow { std::string binder; RefType dom, cod; };
    /// `marked` only appears inside datatype field types; it is ignored by
    /// equality, boxing and printing of canonical keys.
    struct TyVar { std::string name; bool marked = false; };
    struct Null {};
    struct CtorApp { std::string ctor; std::vector<RefType> args; };
    std::variant<Arrow, TyVar, Null, CtorApp> v;
};

// ------------------------------------------------------- datatype definitions

enum class Variance { Co, Contra, Bi };

struct TypeParam {
    Variance variance = Variance::Co;
    std::string tyvar;
    bool marked = false;
};

struct Field {
    std::string name;
    RefType type;
};

struct DatatypeDef {
    std::string ctor;
    std::vector<TypeParam> params;
    std::vector<Field> fields;
};

// ----------------------------------------------------------------- builders

namespace mk {
ValuePtr var(std::string name);
ValuePtr nu();
ValuePtr int_(std::int64_t z);
ValuePtr bool_(bool b);
ValuePtr str(std::string s);
ValuePtr null();
ValuePtr empty();
ValuePtr prim(Prim p);
ValuePtr partial(Prim p, std::vector<ValuePtr> args);
ValuePtr ext(ValuePtr d, ValuePtr k, ValuePtr w);
ValuePtr fun(std::string x, std::optional<RefType> ann, ExprPtr body);
ValuePtr tfun(std::string a, ExprPtr body);
ValuePtr new_(std::string ctor, std::optional<std::vector<RefType>> targs,
              std::vector<ValuePtr> args);

ExprPtr val(ValuePtr w);
ExprPtr app(ValuePtr f, ValuePtr a);
ExprPtr tapp(ValuePtr f, RefType t);
ExprPtr if_(ValuePtr g, ExprPtr a, ExprPtr b);
ExprPtr let(std::string x, std::optional<Scheme> ann, ExprPtr rhs, ExprPtr body);

LValPtr lv(ValuePtr w);
LValPtr lnu();
LValPtr lvar(std::string name);
LValPtr fn(Fn f, std::vector<LValPtr> args);
LValPtr sel(LValPtr d, LValPtr k);
LValPtr tag(LValPtr x);

FormulaPtr atom(Pred p, std::vector<LValPtr> args);
FormulaPtr eq(LValPtr a, LValPtr b);
FormulaPtr has(LValPtr d, LValPtr k);
FormulaPtr has_type(LValPtr lw, TermPtr u);
FormulaPtr and_(std::vector<FormulaPtr> ps);
FormulaPtr or_(std::vector<FormulaPtr> ps);
FormulaPtr not_(FormulaPtr p);
FormulaPtr implies(FormulaPtr p, FormulaPtr q);
FormulaPtr iff(FormulaPtr p, FormulaPtr q);
FormulaPtr top();
FormulaPtr bot();
/// tag(lw) = "name"
FormulaPtr tag_is(LValPtr lw, std::string name);

TermPtr arrow(std::string x, RefType dom, RefType cod);
TermPtr tyvar(std::string a, bool marked = false);
TermPtr null_term();
TermPtr ctor(std::string c, std::vector<RefType> args);

RefType ref(FormulaPtr p);
RefType top_type();
RefType tag_type(std::string name);  // {v | tag(v) = name}
RefType term_type(TermPtr u);        // {v | v :: u}
}  // namespace mk

// ------------------------------------------------------------ inspection

bool is_value_expr(const Expr &e);
bool is_true(const Formula &p);
bool is_false(const Formula &p);

/// The atom `v :: U` when the type is syntactically exactly that.
std::optional<TermPtr> as_term_type(const RefType &t);
/// The arrow when the type is syntactically `{v | v :: x:T1 -> T2}`.
const TypeTerm::Arrow *as_arrow_type(const RefType &t);

/// Top-level conjuncts (flattening nested And, dropping `true`).
std::vector<FormulaPtr> conjuncts(const FormulaPtr &p);

// ------------------------------------------------------------ free variables

using NameSet = std::set<std::string>;

void free_vars(const Value &w, NameSet &out);
void free_vars(const Expr &e, NameSet &out);
void free_vars(const LogicalValue &lw, NameSet &out);
/// Free term variables, including `v` when free.
void free_vars(const Formula &p, NameSet &out);
void free_vars(const TypeTerm &u, NameSet &out);
/// Free term variables of a refinement type; `v` is bound and excluded.
void free_vars(const RefType &t, NameSet &out);
void free_vars(const Scheme &s, NameSet &out);

NameSet free_vars_of(const Formula &p);
NameSet free_vars_of(const RefType &t);
NameSet free_vars_of(const Expr &e);
NameSet free_vars_of(const Value &w);

void free_tyvars(const Formula &p, NameSet &out);
void free_tyvars(const RefType &t, NameSet &out);
void free_tyvars(const TypeTerm &u, NameSet &out);
void free_tyvars(const Scheme &s, NameSet &out);

bool mentions(const Formula &p, const std::string &x);
bool mentions(const RefType &t, const std::string &x);

// -------------------------------------------------------------- substitution

/// Capture-avoiding substitution of a value for a term variable.
ExprPtr subst_value(const ExprPtr &e, const std::string &x, const ValuePtr &w);
ValuePtr subst_value(const ValuePtr &v, const std::string &x, const ValuePtr &w);
FormulaPtr subst_value(const FormulaPtr &p, const std::string &x, const ValuePtr &w);
RefType subst_value(const RefType &t, const std::string &x, const ValuePtr &w);
Scheme subst_value(const Scheme &s, const std::string &x, const ValuePtr &w);
TermPtr subst_value(const TermPtr &u, const std::string &x, const ValuePtr &w);

/// Substitution of an arbitrary logical value for a variable inside the logic.
/// Dictionary-extension values whose operands become non-values are promoted
/// to the logical `ext` function.
FormulaPtr subst_lval(const FormulaPtr &p, const std::string &x, const LValPtr &lw);
LValPtr subst_lval(const LValPtr &l, const std::string &x, const LValPtr &lw);
RefType subst_lval(const RefType &t, const std::string &x, const LValPtr &lw);
TermPtr subst_lval(const TermPtr &u, const std::string &x, const LValPtr &lw);

/// p[lw / v]
FormulaPtr subst_nu(const FormulaPtr &p, const LValPtr &lw);
/// Embedding of a type at a logical value: [[{v|p}]](lw) = p[lw/v].
FormulaPtr embed_at(const RefType &t, const LValPtr &lw);

/// Renames a type variable (free occurrences only).
RefType rename_tyvar(const RefType &t, const std::string &from, const std::string &to);
Scheme rename_tyvar(const Scheme &s, const std::string &from, const std::string &to);

// ---------------------------------------------------- canonical forms, erase

TermPtr alpha_canonical(const TermPtr &u);
/// Structural key of the alpha-canonical form; equal iff alpha-equivalent.
std::string canonical_key(const TermPtr &u);
std::string canonical_key(const RefType &t);
std::string canonical_key(const Formula &p);
std::string canonical_key(const Value &w);
std::string canonical_key(const Expr &e);
std::string canonical_key(const LogicalValue &lw);

bool alpha_equal(const TermPtr &a, const TermPtr &b);
bool alpha_equal(const RefType &a, const RefType &b);
bool alpha_equal(const ExprPtr &a, const ExprPtr &b);

ExprPtr erase(const ExprPtr &e);
ValuePtr erase(const ValuePtr &w);

/// Strips datatype occurrence markers.
RefType strip_marks(const RefType &t);

// ------------------------------------------------------------------ printing

std::string to_string(const Value &w);
std::string to_string(const Expr &e);
std::string to_string(const LogicalValue &lw);
std::string to_string(const Formula &p);
std::string to_string(const TypeTerm &u);
std::string to_string(const RefType &t);
std::string to_string(const Scheme &s);
std::string to_string(const DatatypeDef &d);
std::string quote_string(const std::string &s);

inline std::string to_string(const ValuePtr &w) { return to_string(*w); }
inline std::string to_string(const ExprPtr &e) { return to_string(*e); }
inline std::string to_string(const LValPtr &l) { return to_string(*l); }
inline std::string to_string(const FormulaPtr &p) { return to_string(*p); }
inline std::string to_string(const TermPtr &u) { return to_string(*u); }

}  // namespace duck
