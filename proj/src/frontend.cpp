#include "duckcheck/frontend.hpp"

#include "duckcheck/wellformed.hpp"
#include "util.hpp"

#include <cctype>
#include <functional>
#include <sstream>

namespace duck {

using detail::overloaded;

ParseError::ParseError(Pos p, const std::string &msg, std::vector<std::string> exp)
    : std::runtime_error(std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg), pos(p),
      expected(std::move(exp)) {}

namespace {

const std::string kNuStr{kNu};

// ------------------------------------------------------------------ lexer

enum class Tok { Int, Str, Id, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    Pos pos;
    std::int64_t z = 0;
};

const std::vector<std::string> kSymbols = {
    "<=>", "::", "->", "=>", "/\\", "\\/", "!=", "<=", ">=", "++", "(", ")", "[", "]", "{", "}",
    ",", ":", "=", "<", ">", "+", "-", "*", "|", ".", "~",
};

std::vector<Token> lex(const std::string &s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        Pos p{line, col};
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            Token t{Tok::Int, s.substr(i, j - i), p};
            try {
                t.z = std::stoll(t.text);
            } catch (const std::exception &) {
                throw ParseError(p, "integer literal out of range");
            }
            out.push_back(t);
            adv(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\''))
                ++j;
            out.push_back(Token{Tok::Id, s.substr(i, j - i), p});
            adv(j - i);
            continue;
        }
        if (c == '"') {
            std::string v;
            size_t j = i + 1;
            while (true) {
                if (j >= s.size()) throw ParseError(p, "unterminated string literal");
                if (s[j] == '"') break;
                if (s[j] == '\\' && j + 1 < s.size()) {
                    char e = s[j + 1];
                    v += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                    j += 2;
                    continue;
                }
                v += s[j++];
            }
            out.push_back(Token{Tok::Str, v, p});
            adv(j + 1 - i);
            continue;
        }
        bool matched = false;
        for (auto &sym : kSymbols) {
            if (s.compare(i, sym.size(), sym) == 0) {
                out.push_back(Token{Tok::Sym, sym, p});
                adv(sym.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError(p, std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{Tok::End, "", Pos{line, col}});
    return out;
}

const std::set<std::string> kKeywords = {"let", "rec", "in", "if", "then", "else", "fun", "tfun",
                                         "new", "type", "forall", "true", "false", "null", "not"};

bool is_upper_id(const Token &t) {
    return t.kind == Tok::Id && std::isupper(static_cast<unsigned char>(t.text[0]));
}

// ----------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(const std::string &text) : toks_(lex(text)) {}

    SourceProgram program() {
        SourceProgram p;
        while (is_kw("type")) p.typedefs.push_back(typedef_());
        if (at_end()) throw err("expected a program body", {"let", "expression"});
        p.body = expr(&p.toplevel);
        if (!at_end()) throw err("unexpected '" + cur().text + "'", {"end of input"});
        return p;
    }

    Scheme scheme_only() {
        auto s = scheme();
        expect_end();
        return s;
    }

    FormulaPtr formula_only() {
        auto f = formula();
        expect_end();
        return f;
    }

private:
    std::vector<Token> toks_;
    size_t i_ = 0;
    int fresh_ = 0;

    const Token &cur() const { return toks_[i_]; }
    const Token &peek(size_t k = 1) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at_end() const { return cur().kind == Tok::End; }
    bool is_sym(const char *s, size_t k = 0) const {
        auto &t = peek(k);
        return t.kind == Tok::Sym && t.text == s;
    }
    bool is_kw(const char *s, size_t k = 0) const {
        auto &t = peek(k);
        return t.kind == Tok::Id && t.text == s;
    }
    ParseError err(const std::string &msg, std::vector<std::string> exp = {}) const {
        return ParseError(cur().pos, msg, std::move(exp));
    }
    void expect_sym(const char *s) {
        if (!is_sym(s)) throw err(std::string("expected '") + s + "'", {s});
        ++i_;
    }
    void expect_kw(const char *s) {
        if (!is_kw(s)) throw err(std::string("expected '") + s + "'", {s});
        ++i_;
    }
    void expect_end() {
        if (!at_end()) throw err("unexpected '" + cur().text + "'", {"end of input"});
    }
    std::string ident() {
        if (cur().kind != Tok::Id || kKeywords.count(cur().text))
            throw err("expected an identifier", {"identifier"});
        return toks_[i_++].text;
    }
    std::string fresh_binder() { return "_a" + std::to_string(fresh_++); }

    template <class F>
    auto attempt(F &&f) -> std::optional<decltype(f())> {
        auto save = i_;
        try {
            return f();
        } catch (const ParseError &) {
            i_ = save;
            return std::nullopt;
        }
    }

    // --------------------------------------------------------- typedefs

    DatatypeDef typedef_() {
        expect_kw("type");
        DatatypeDef d;
        if (!is_upper_id(cur())) throw err("expected a constructor name", {"constructor"});
        d.ctor = toks_[i_++].text;
        if (is_sym("[")) {
            ++i_;
            while (true) {
                TypeParam tp;
                if (is_sym("+")) tp.variance = Variance::Co;
                else if (is_sym("-")) tp.variance = Variance::Contra;
                else if (is_sym("=")) tp.variance = Variance::Bi;
                else throw err("expected a variance annotation", {"+", "-", "="});
                ++i_;
                if (is_sym("*")) {
                    tp.marked = true;
                    ++i_;
                }
                tp.tyvar = ident();
                d.params.push_back(tp);
                if (is_sym(",")) {
                    ++i_;
                    continue;
                }
                expect_sym("]");
                break;
            }
        }
        expect_sym("{");
        while (!is_sym("}")) {
            Field f;
            f.name = ident();
            expect_sym(":");
            f.type = type();
            d.fields.push_back(f);
            if (!is_sym(",")) break;
            ++i_;
        }
        expect_sym("}");
        // A marked occurrence marks its parameter.
        for (auto &f : d.fields) {
            NameSet marked;
            collect_marked(f.type, marked);
            for (auto &tp : d.params)
                if (marked.count(tp.tyvar)) tp.marked = true;
        }
        return d;
    }

    static void collect_marked(const RefType &t, NameSet &out);

    // ------------------------------------------------------------ types

    Scheme scheme() {
        if (is_kw("forall")) {
            ++i_;
            std::vector<std::string> as;
            while (true) {
                as.push_back(ident());
                if (is_sym(",")) {
                    ++i_;
                    continue;
                }
                break;
            }
            expect_sym(".");
            auto inner = scheme();
            as.insert(as.end(), inner.tyvars.begin(), inner.tyvars.end());
            return Scheme{as, inner.body};
        }
        return Scheme::mono(type());
    }

    RefType type() {
        std::string binder;
        if (cur().kind == Tok::Id && !kKeywords.count(cur().text) && !is_upper_id(cur()) && is_sym(":", 1)) {
            binder = ident();
            ++i_;
        }
        auto dom = atom_type();
        if (is_sym("->")) {
            ++i_;
            auto cod = type();
            if (binder.empty()) binder = fresh_binder();
            return mk::term_type(mk::arrow(binder, dom, cod));
        }
        if (!binder.empty()) throw err("expected '->' after a named domain", {"->"});
        return dom;
    }

    RefType atom_type() {
        if (is_sym("{")) {
            ++i_;
            if (is_kw("v") && is_sym("|", 1)) i_ += 2;
            auto f = formula();
            expect_sym("}");
            return mk::ref(f);
        }
        if (is_sym("(")) {
            ++i_;
            auto t = type();
            expect_sym(")");
            return t;
        }
        if (is_sym("*")) {
            ++i_;
            return mk::term_type(mk::tyvar(ident(), true));
        }
        if (is_upper_id(cur())) {
            auto name = toks_[i_++].text;
            if (is_sym("[")) {
                ++i_;
                std::vector<RefType> args;
                while (true) {
                    args.push_back(type());
                    if (is_sym(",")) {
                        ++i_;
                        continue;
                    }
                    break;
                }
                expect_sym("]");
                return mk::term_type(mk::ctor(name, args));
            }
            if (auto a = abbreviation(name)) return *a;
            return mk::term_type(mk::tyvar(name));
        }
        throw err("expected a type", {"{", "(", "type name"});
    }

    static std::optional<RefType> abbreviation(const std::string &n) {
        if (n == "Int" || n == "Bool" || n == "Str" || n == "Dict") return mk::tag_type(n);
        if (n == "Top") return mk::top_type();
        if (n == "IorB") return mk::ref(mk::or_({mk::tag_is(mk::lnu(), "Int"), mk::tag_is(mk::lnu(), "Bool")}));
        if (n == "Null") return mk::ref(mk::eq(mk::lnu(), mk::lv(mk::null())));
        return std::nullopt;
    }

    // --------------------------------------------------------- formulas

    FormulaPtr formula() {
        auto p = implication();
        if (is_sym("<=>")) {
            ++i_;
            return mk::iff(p, implication());
        }
        return p;
    }

    FormulaPtr implication() {
        auto p = disjunction();
        if (is_sym("=>")) {
            ++i_;
            return mk::implies(p, implication());
        }
        return p;
    }

    FormulaPtr disjunction() {
        std::vector<FormulaPtr> ps{conjunction()};
        while (is_sym("\\/")) {
            ++i_;
            ps.push_back(conjunction());
        }
        return ps.size() == 1 ? ps[0] : mk_or(ps);
    }

    FormulaPtr conjunction() {
        std::vector<FormulaPtr> ps{unary()};
        while (is_sym("/\\")) {
            ++i_;
            ps.push_back(unary());
        }
        return ps.size() == 1 ? ps[0] : mk_and(ps);
    }

    // Builders that keep the parsed shape (no constant folding).
    static FormulaPtr mk_and(std::vector<FormulaPtr> ps) {
        return std::make_shared<Formula>(Formula{Formula::And{std::move(ps)}});
    }
    static FormulaPtr mk_or(std::vector<FormulaPtr> ps) {
        return std::make_shared<Formula>(Formula{Formula::Or{std::move(ps)}});
    }

    FormulaPtr unary() {
        if (is_kw("not") || is_sym("~")) {
            ++i_;
            return mk::not_(unary());
        }
        return fatom();
    }

    FormulaPtr fatom() {
        if (auto p = attempt([&] { return comparison(); })) return *p;
        if (is_kw("true")) {
            ++i_;
            return mk::top();
        }
        if (is_kw("false")) {
            ++i_;
            return mk::bot();
        }
        if (is_sym("(")) {
            ++i_;
            auto p = formula();
            expect_sym(")");
            return p;
        }
        if (is_kw("has") && is_sym("(", 1)) {
            i_ += 2;
            auto a = lval();
            expect_sym(",");
            auto b = lval();
            expect_sym(")");
            return mk::has(a, b);
        }
        if (is_kw("eqmod") && is_sym("(", 1)) {
            i_ += 2;
            auto a = lval();
            expect_sym(",");
            auto b = lval();
            expect_sym(",");
            auto c = lval();
            expect_sym(")");
            return mk::atom(Pred::EqMod, {a, b, c});
        }
        if (is_kw("fld") && is_sym("(", 1)) {
            i_ += 2;
            auto a = lval();
            expect_sym(",");
            auto b = lval();
            expect_sym(",");
            auto t = type();
            expect_sym(")");
            return mk_and({mk::tag_is(a, "Dict"), mk::tag_is(b, "Str"), mk::has(a, b), embed_at(t, mk::sel(a, b))});
        }
        if (is_upper_id(cur()) && is_sym("(", 1)) {
            auto name = cur().text;
            auto ab = abbreviation(name);
            if (!ab) throw err("unknown abbreviation '" + name + "'");
            i_ += 2;
            auto a = lval();
            expect_sym(")");
            return embed_at(*ab, a);
        }
        throw err("expected a formula", {"atom", "(", "not", "true", "false"});
    }

    FormulaPtr comparison() {
        auto a = lval();
        if (is_sym("::")) {
            ++i_;
            if (is_kw("Null") && !is_sym("[", 1)) {
                ++i_;
                return mk::has_type(a, mk::null_term());
            }
            auto t = type();
            if (auto u = as_term_type(t)) return mk::has_type(a, *u);
            return embed_at(t, a);
        }
        static const std::vector<std::string> rels = {"=", "!=", "<", "<=", ">", ">="};
        for (auto &r : rels) {
            if (is_sym(r.c_str())) {
                ++i_;
                auto b = lval();
                if (r == "=") return mk::eq(a, b);
                if (r == "!=") return mk::not_(mk::eq(a, b));
                if (r == "<") return mk::atom(Pred::Lt, {a, b});
                if (r == "<=") return mk::atom(Pred::Le, {a, b});
                if (r == ">") return mk::atom(Pred::Lt, {b, a});
                return mk::atom(Pred::Le, {b, a});
            }
        }
        throw err("expected a relation", {"=", "!=", "<", "<=", ">", ">=", "::"});
    }

    LValPtr lval() {
        auto a = lval_atom();
        while (is_sym("+") || is_sym("-")) {
            bool plus = is_sym("+");
            ++i_;
            a = mk::fn(plus ? Fn::Plus : Fn::Minus, {a, lval_atom()});
        }
        return a;
    }

    LValPtr lval_atom() {
        auto &t = cur();
        if (t.kind == Tok::Int) {
            ++i_;
            return mk::lv(mk::int_(t.z));
        }
        if (t.kind == Tok::Str) {
            ++i_;
            return mk::lv(mk::str(t.text));
        }
        if (is_sym("-") && peek().kind == Tok::Int) {
            auto z = peek().z;
            i_ += 2;
            return mk::lv(mk::int_(-z));
        }
        if (is_sym("{") && is_sym("}", 1)) {
            i_ += 2;
            return mk::lv(mk::empty());
        }
        if (is_sym("(")) {
            ++i_;
            auto a = lval();
            expect_sym(")");
            return a;
        }
        if (t.kind == Tok::Id) {
            if (t.text == "true" || t.text == "false") {
                ++i_;
                return mk::lv(mk::bool_(t.text == "true"));
            }
            if (t.text == "null") {
                ++i_;
                return mk::lv(mk::null());
            }
            if ((t.text == "sel" || t.text == "tag" || t.text == "ext") && is_sym("(", 1)) {
                auto name = t.text;
                i_ += 2;
                std::vector<LValPtr> as{lval()};
                while (is_sym(",")) {
                    ++i_;
                    as.push_back(lval());
                }
                expect_sym(")");
                Fn f = name == "sel" ? Fn::Sel : name == "tag" ? Fn::Tag : Fn::Ext;
                if (static_cast<int>(as.size()) != fn_arity(f)) throw err("wrong number of arguments to " + name);
                return mk::fn(f, as);
            }
            if (!kKeywords.count(t.text) && !is_upper_id(t) && !is_sym("(", 1)) {
                ++i_;
                return mk::lvar(t.text);
            }
        }
        throw err("expected a logical value", {"value"});
    }

    // ------------------------------------------------------ expressions

    SExprPtr node(SExpr::Lit l, Pos p) { return std::make_shared<SExpr>(SExpr{std::move(l), p}); }
    template <class T>
    SExprPtr node(T t, Pos p) {
        return std::make_shared<SExpr>(SExpr{std::move(t), p});
    }

    struct Param {
        std::string name;
        std::optional<RefType> ann;
    };

    std::vector<Param> params() {
        std::vector<Param> ps;
        while (true) {
            if (is_sym("(") && peek().kind == Tok::Id && (is_sym("::", 2) || is_sym(":", 2))) {
                ++i_;
                Param p{ident(), std::nullopt};
                ++i_;
                p.ann = type();
                expect_sym(")");
                ps.push_back(p);
            } else if (cur().kind == Tok::Id && !kKeywords.count(cur().text) && !is_upper_id(cur())) {
                ps.push_back(Param{ident(), std::nullopt});
            } else {
                break;
            }
        }
        return ps;
    }

    SExprPtr lambdas(const std::vector<Param> &ps, size_t from, SExprPtr body, Pos p) {
        for (size_t k = ps.size(); k-- > from;) body = node(SExpr::Fun{ps[k].name, ps[k].ann, body}, p);
        return body;
    }

    SExprPtr expr(std::vector<std::string> *toplevel = nullptr) {
        auto p = cur().pos;
        if (is_kw("let")) return let_(toplevel);
        if (is_kw("if")) {
            ++i_;
            auto g = expr();
            expect_kw("then");
            auto a = expr();
            expect_kw("else");
            auto b = expr();
            return node(SExpr::If{g, a, b}, p);
        }
        if (is_kw("fun")) {
            ++i_;
            auto ps = params();
            if (ps.empty()) throw err("expected a parameter", {"identifier", "("});
            expect_sym("->");
            return lambdas(ps, 0, expr(), p);
        }
        if (is_kw("tfun")) {
            ++i_;
            auto a = ident();
            expect_sym("->");
            return node(SExpr::TFun{a, expr()}, p);
        }
        return cmp();
    }

    SExprPtr let_(std::vector<std::string> *toplevel) {
        auto p = cur().pos;
        expect_kw("let");
        bool rec = false;
        if (is_kw("rec")) {
            rec = true;
            ++i_;
        }
        auto name = ident();
        auto ps = params();
        std::optional<Scheme> ann;
        if (is_sym("::")) {
            ++i_;
            ann = ps.empty() ? scheme() : Scheme::mono(type());
        }
        expect_sym("=");
        auto rhs = expr();

        if (!ps.empty()) {
            bool all = ann.has_value();
            for (auto &q : ps) all = all && q.ann.has_value();
            if (all) {
                RefType t = ann->body;
                for (size_t k = ps.size(); k-- > 0;) t = mk::term_type(mk::arrow(ps[k].name, *ps[k].ann, t));
                ann = Scheme::mono(t);
            } else if (ann) {
                throw ParseError(p, "a result annotation requires annotated parameters");
            }
            rhs = lambdas(ps, 0, rhs, p);
        }
        if (rec) {
            if (!ann) throw ParseError(p, "recursive definitions need a type annotation");
            // let rec f :: forall A. T = e  ~>  let f :: forall A. T = /\A. fix [T] (fun f -> e)
            auto fix = node(SExpr::Lit{mk::prim(Prim::Fix)}, p);
            SExprPtr r = node(SExpr::App{node(SExpr::TApp{fix, ann->body}, p), node(SExpr::Fun{name, std::nullopt, rhs}, p)}, p);
            for (size_t k = ann->tyvars.size(); k-- > 0;) r = node(SExpr::TFun{ann->tyvars[k], r}, p);
            rhs = r;
        } else if (ann && !ann->is_mono()) {
            for (size_t k = ann->tyvars.size(); k-- > 0;) rhs = node(SExpr::TFun{ann->tyvars[k], rhs}, p);
        }

        if (toplevel) toplevel->push_back(name);
        SExprPtr body;
        if (is_kw("in")) {
            ++i_;
            body = expr(toplevel);
        } else if (is_kw("let")) {
            body = let_(toplevel);
        } else if (at_end() || is_sym(")") || is_kw("then") || is_kw("else") || is_kw("in")) {
            body = node(SExpr::Var{name}, p);
        } else {
            throw err("expected 'in' or another definition", {"in", "let"});
        }
        return node(SExpr::Let{name, ann, rhs, body}, p);
    }

    SExprPtr prim_node(Prim op, Pos p) { return node(SExpr::Lit{mk::prim(op)}, p); }

    SExprPtr binop(Prim op, SExprPtr a, SExprPtr b, Pos p) {
        return node(SExpr::App{node(SExpr::App{prim_node(op, p), a}, p), b}, p);
    }

    SExprPtr cmp() {
        auto p = cur().pos;
        auto a = add();
        if (is_sym("=")) {
            ++i_;
            return binop(Prim::Eq, a, add(), p);
        }
        if (is_sym("!=")) {
            ++i_;
            auto e = binop(Prim::Eq, a, add(), p);
            return node(SExpr::App{prim_node(Prim::Not, p), e}, p);
        }
        return a;
    }

    SExprPtr add() {
        auto a = app();
        while (is_sym("+") || is_sym("-")) {
            auto p = cur().pos;
            auto op = is_sym("+") ? Prim::Plus : Prim::Minus;
            ++i_;
            a = binop(op, a, app(), p);
        }
        return a;
    }

    bool starts_atom() const {
        auto &t = cur();
        if (t.kind == Tok::Int || t.kind == Tok::Str) return true;
        if (t.kind == Tok::Sym) return t.text == "(" || t.text == "{";
        if (t.kind != Tok::Id) return false;
        if (t.text == "true" || t.text == "false" || t.text == "null" || t.text == "new" || t.text == "not")
            return true;
        return !kKeywords.count(t.text) && !is_upper_id(t);
    }

    SExprPtr app() {
        auto f = postfix();
        while (starts_atom()) {
            auto p = cur().pos;
            f = node(SExpr::App{f, postfix()}, p);
        }
        return f;
    }

    bool bracket_is_type() const {
        // called with cur() == '['
        auto &t = peek();
        if (t.kind == Tok::Id && (t.text == "forall" || is_upper_id(t))) return true;
        if (t.kind == Tok::Sym && t.text == "*") return true;
        if (t.kind == Tok::Sym && t.text == "{") {
            auto &u = peek(2);
            return !(u.kind == Tok::Str || (u.kind == Tok::Sym && u.text == "}"));
        }
        if (t.kind == Tok::Id && !kKeywords.count(t.text) && is_sym(":", 2)) return true;
        return false;
    }

    SExprPtr postfix() {
        auto e = atom();
        while (is_sym("[")) {
            auto p = cur().pos;
            if (bracket_is_type()) {
                ++i_;
                auto t = type();
                expect_sym("]");
                e = node(SExpr::TApp{e, t}, p);
            } else {
                ++i_;
                auto k = expr();
                expect_sym("]");
                e = node(SExpr::Get{e, k}, p);
            }
        }
        return e;
    }

    SExprPtr atom() {
        auto p = cur().pos;
        auto &t = cur();
        if (t.kind == Tok::Int) {
            ++i_;
            return node(SExpr::Lit{mk::int_(t.z)}, p);
        }
        if (t.kind == Tok::Str) {
            ++i_;
            return node(SExpr::Lit{mk::str(t.text)}, p);
        }
        if (is_sym("(")) {
            ++i_;
            for (auto [s, op] : {std::pair{"+", Prim::Plus}, std::pair{"-", Prim::Minus}, std::pair{"=", Prim::Eq}}) {
                if (is_sym(s) && is_sym(")", 1)) {
                    i_ += 2;
                    return prim_node(op, p);
                }
            }
            auto e = expr();
            expect_sym(")");
            return e;
        }
        if (is_sym("{")) {
            ++i_;
            SExpr::Dict d;
            while (!is_sym("}")) {
                if (cur().kind != Tok::Str) throw err("expected a string key", {"string"});
                auto k = toks_[i_++].text;
                expect_sym(":");
                d.fields.emplace_back(k, expr());
                if (!is_sym(",")) break;
                ++i_;
            }
            expect_sym("}");
            if (d.fields.empty()) return node(SExpr::Lit{mk::empty()}, p);
            return node(std::move(d), p);
        }
        if (t.kind == Tok::Id) {
            if (t.text == "true" || t.text == "false") {
                ++i_;
                return node(SExpr::Lit{mk::bool_(t.text == "true")}, p);
            }
            if (t.text == "null") {
                ++i_;
                return node(SExpr::Lit{mk::null()}, p);
            }
            if (t.text == "not") {
                ++i_;
                return prim_node(Prim::Not, p);
            }
            if (t.text == "new") {
                ++i_;
                SExpr::New n;
                if (!is_upper_id(cur())) throw err("expected a constructor name", {"constructor"});
                n.ctor = toks_[i_++].text;
                if (is_sym("[")) {
                    ++i_;
                    std::vector<RefType> ts;
                    while (true) {
                        ts.push_back(type());
                        if (is_sym(",")) {
                            ++i_;
                            continue;
                        }
                        break;
                    }
                    expect_sym("]");
                    n.targs = ts;
                }
                expect_sym("(");
                while (!is_sym(")")) {
                    n.args.push_back(expr());
                    if (!is_sym(",")) break;
                    ++i_;
                }
                expect_sym(")");
                return node(std::move(n), p);
            }
            if (!kKeywords.count(t.text) && !is_upper_id(t)) {
                ++i_;
                if (auto op = prim_from_name(t.text); op && *op != Prim::Plus && *op != Prim::Minus && *op != Prim::Eq)
                    return prim_node(*op, p);
                return node(SExpr::Var{t.text}, p);
            }
        }
        throw err("expected an expression", {"literal", "identifier", "(", "{", "new"});
    }
};

void Parser::collect_marked(const RefType &t, NameSet &out) {
    std::function<void(const Formula &)> fml;
    std::function<void(const TypeTerm &)> term = [&](const TypeTerm &u) {
        std::visit(overloaded{
                       [&](const TypeTerm::Arrow &a) {
                           fml(*a.dom.pred);
                           fml(*a.cod.pred);
                       },
                       [&](const TypeTerm::TyVar &v) {
                           if (v.marked) out.insert(v.name);
                       },
                       [&](const TypeTerm::Null &) {},
                       [&](const TypeTerm::CtorApp &c) {
                           for (auto &a : c.args) fml(*a.pred);
                       },
                   },
                   u.v);
    };
    fml = [&](const Formula &p) {
        std::visit(overloaded{
                       [&](const Formula::HasType &h) { term(*h.term); },
                       [&](const Formula::And &a) {
                           for (auto &q : a.ps) fml(*q);
                       },
                       [&](const Formula::Or &a) {
                           for (auto &q : a.ps) fml(*q);
                       },
                       [&](const Formula::Not &n) { fml(*n.p); },
                       [&](const Formula::Implies &i) {
                           fml(*i.p);
                           fml(*i.q);
                       },
                       [&](const Formula::Iff &i) {
                           fml(*i.p);
                           fml(*i.q);
                       },
                       [&](const auto &) {},
                   },
                   p.v);
    };
    fml(*t.pred);
}

}  // namespace

SourceProgram parse(const std::string &text) { return Parser(text).program(); }
Scheme parse_scheme(const std::string &text) { return Parser(text).scheme_only(); }
FormulaPtr parse_formula(const std::string &text) { return Parser(text).formula_only(); }

// ------------------------------------------------------------------ printer

namespace {

void print_expr(std::ostream &os, const SExpr &e) {
    std::visit(overloaded{
                   [&](const SExpr::Var &x) { os << x.name; },
                   [&](const SExpr::Lit &l) { os << to_string(*l.c); },
                   [&](const SExpr::Dict &d) {
                       os << "{";
                       for (size_t i = 0; i < d.fields.size(); ++i) {
                           os << (i ? ", " : "") << quote_string(d.fields[i].first) << ": ";
                           print_expr(os, *d.fields[i].second);
                       }
                       os << "}";
                   },
                   [&](const SExpr::Fun &f) {
                       os << "(fun ";
                       if (f.ann)
                           os << "(" << f.binder << " :: " << to_string(*f.ann) << ")";
                       else
                           os << f.binder;
                       os << " -> ";
                       print_expr(os, *f.body);
                       os << ")";
                   },
                   [&](const SExpr::TFun &f) {
                       os << "(tfun " << f.tyvar << " -> ";
                       print_expr(os, *f.body);
                       os << ")";
                   },
                   [&](const SExpr::App &a) {
                       os << "(";
                       print_expr(os, *a.fn);
                       os << " ";
                       print_expr(os, *a.arg);
                       os << ")";
                   },
                   [&](const SExpr::TApp &a) {
                       os << "(";
                       print_expr(os, *a.fn);
                       os << " [" << to_string(a.ty) << "])";
                   },
                   [&](const SExpr::If &i) {
                       os << "(if ";
                       print_expr(os, *i.guard);
                       os << " then ";
                       print_expr(os, *i.then_e);
                       os << " else ";
                       print_expr(os, *i.else_e);
                       os << ")";
                   },
                   [&](const SExpr::Let &l) {
                       os << "(let " << l.binder;
                       if (l.ann) os << " :: " << to_string(*l.ann);
                       os << " = ";
                       // the parser re-inserts the type abstractions a scheme implies
                       const SExpr *rhs = l.rhs.get();
                       if (l.ann)
                           for (auto &a : l.ann->tyvars) {
                               auto *t = std::get_if<SExpr::TFun>(&rhs->v);
                               if (!t || t->tyvar != a) break;
                               rhs = t->body.get();
                           }
                       print_expr(os, *rhs);
                       os << " in ";
                       print_expr(os, *l.body);
                       os << ")";
                   },
                   [&](const SExpr::New &n) {
                       os << "new " << n.ctor;
                       if (n.targs) {
                           os << "[";
                           for (size_t i = 0; i < n.targs->size(); ++i) os << (i ? ", " : "") << to_string((*n.targs)[i]);
                           os << "]";
                       }
                       os << "(";
                       for (size_t i = 0; i < n.args.size(); ++i) {
                           if (i) os << ", ";
                           print_expr(os, *n.args[i]);
                       }
                       os << ")";
                   },
                   [&](const SExpr::Get &g) {
                       os << "(";
                       print_expr(os, *g.dict);
                       os << ")[";
                       print_expr(os, *g.key);
                       os << "]";
                   },
               },
               e.v);
}

}  // namespace

std::string print_surface(const SExpr &e) {
    std::ostringstream os;
    print_expr(os, e);
    return os.str();
}

// ----------------------------------------------------------------- renaming

namespace {

class Renamer {
public:
    std::map<std::string, std::string> original;

    SExprPtr run(const SExprPtr &e) { return go(e); }

    std::string toplevel_name(const std::string &surface, size_t index) const {
        return index < tops_.size() ? tops_[index] : surface;
    }
    std::vector<std::string> tops_;
    bool record_tops = true;

private:
    std::vector<std::pair<std::string, std::string>> scope_;
    std::set<std::string> used_;

    std::string fresh(const std::string &base) {
        std::string n = base;
        int k = 1;
        while (n == kNu || used_.count(n)) n = base + "_" + std::to_string(k++);
        used_.insert(n);
        original[n] = base;
        return n;
    }

    std::optional<std::string> lookup(const std::string &x) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == x) return it->second;
        return std::nullopt;
    }

    RefType ty(const RefType &t) {
        RefType out = t;
        for (auto &x : free_vars_of(t))
            if (auto y = lookup(x); y && *y != x) out = subst_value(out, x, mk::var(*y));
        return out;
    }

    Scheme sch(const Scheme &s) { return Scheme{s.tyvars, ty(s.body)}; }

    SExprPtr mk(SExpr e) { return std::make_shared<SExpr>(std::move(e)); }

    SExprPtr go(const SExprPtr &e) {
        if (std::holds_alternative<SExpr::Let>(e->v)) return go_inner(e);
        bool saved = record_tops;
        record_tops = false;
        auto r = go_inner(e);
        record_tops = saved;
        return r;
    }

    SExprPtr go_inner(const SExprPtr &e) {
        auto p = e->pos;
        return std::visit(
            overloaded{
                [&](const SExpr::Var &x) {
                    auto y = lookup(x.name);
                    return mk(SExpr{SExpr::Var{y ? *y : x.name}, p});
                },
                [&](const SExpr::Lit &) { return e; },
                [&](const SExpr::Dict &d) {
                    SExpr::Dict o;
                    for (auto &[k, v] : d.fields) o.fields.emplace_back(k, go(v));
                    return mk(SExpr{o, p});
                },
                [&](const SExpr::Fun &f) {
                    std::optional<RefType> ann;
                    if (f.ann) ann = ty(*f.ann);
                    auto n = fresh(f.binder);
                    scope_.emplace_back(f.binder, n);
                    auto b = go(f.body);
                    scope_.pop_back();
                    return mk(SExpr{SExpr::Fun{n, ann, b}, p});
                },
                [&](const SExpr::TFun &f) { return mk(SExpr{SExpr::TFun{f.tyvar, go(f.body)}, p}); },
                [&](const SExpr::App &a) {
                    auto f = go(a.fn);
                    return mk(SExpr{SExpr::App{f, go(a.arg)}, p});
                },
                [&](const SExpr::TApp &a) { return mk(SExpr{SExpr::TApp{go(a.fn), ty(a.ty)}, p}); },
                [&](const SExpr::If &i) {
                    auto g = go(i.guard);
                    auto a = go(i.then_e);
                    return mk(SExpr{SExpr::If{g, a, go(i.else_e)}, p});
                },
                [&](const SExpr::Let &l) {
                    std::optional<Scheme> ann;
                    if (l.ann) ann = sch(*l.ann);
                    bool top = record_tops;
                    record_tops = false;
                    auto rhs = go(l.rhs);
                    auto n = fresh(l.binder);
                    if (top) tops_.push_back(n);
                    scope_.emplace_back(l.binder, n);
                    record_tops = top;
                    auto body = go(l.body);
                    scope_.pop_back();
                    return mk(SExpr{SExpr::Let{n, ann, rhs, body}, p});
                },
                [&](const SExpr::New &n) {
                    SExpr::New o{n.ctor, std::nullopt, {}};
                    if (n.targs) {
                        o.targs.emplace();
                        for (auto &t : *n.targs) o.targs->push_back(ty(t));
                    }
                    for (auto &a : n.args) o.args.push_back(go(a));
                    return mk(SExpr{o, p});
                },
                [&](const SExpr::Get &g) {
                    auto d = go(g.dict);
                    return mk(SExpr{SExpr::Get{d, go(g.key)}, p});
                },
            },
            e->v);
    }
};

}  // namespace

Renamed rename_binders(const SourceProgram &p) {
    Renamer r;
    Renamed out;
    out.body = r.run(p.body);
    out.original = r.original;
    out.toplevel = r.tops_;
    return out;
}

// ---------------------------------------------------------------------- ANF

namespace {

struct Binding {
    std::string name;
    std::optional<Scheme> ann;
    ExprPtr rhs;
};

class Anf {
public:
    explicit Anf(std::map<std::string, Pos> *pos) : pos_(pos) {}

    ExprPtr expr(const SExprPtr &e) {
        std::vector<Binding> bs;
        auto t = tail(e, bs);
        for (auto it = bs.rbegin(); it != bs.rend(); ++it) t = mk::let(it->name, it->ann, it->rhs, t);
        return t;
    }

private:
    std::map<std::string, Pos> *pos_;
    int next_ = 0;

    void note(const std::string &x, Pos p) {
        if (pos_) (*pos_)[x] = p;
    }

    ValuePtr value(const SExprPtr &e, std::vector<Binding> &bs) {
        auto t = tail(e, bs);
        if (auto *v = std::get_if<Expr::Val>(&t->v)) return v->w;
        auto x = "_t" + std::to_string(next_++);
        note(x, e->pos);
        bs.push_back(Binding{x, std::nullopt, t});
        return mk::var(x);
    }

    ExprPtr tail(const SExprPtr &e, std::vector<Binding> &bs) {
        return std::visit(
            overloaded{
                [&](const SExpr::Var &x) { return mk::val(mk::var(x.name)); },
                [&](const SExpr::Lit &l) { return mk::val(l.c); },
                [&](const SExpr::Dict &d) {
                    ValuePtr acc = mk::empty();
                    for (auto &[k, v] : d.fields) acc = mk::ext(acc, mk::str(k), value(v, bs));
                    return mk::val(acc);
                },
                [&](const SExpr::Fun &f) { return mk::val(mk::fun(f.binder, f.ann, expr(f.body))); },
                [&](const SExpr::TFun &f) { return mk::val(mk::tfun(f.tyvar, expr(f.body))); },
                [&](const SExpr::App &a) {
                    auto f = value(a.fn, bs);
                    return mk::app(f, value(a.arg, bs));
                },
                [&](const SExpr::TApp &a) { return mk::tapp(value(a.fn, bs), a.ty); },
                [&](const SExpr::If &i) {
                    auto g = value(i.guard, bs);
                    return mk::if_(g, expr(i.then_e), expr(i.else_e));
                },
                [&](const SExpr::Let &l) {
                    auto r = tail(l.rhs, bs);
                    note(l.binder, e->pos);
                    bs.push_back(Binding{l.binder, l.ann, r});
                    return tail(l.body, bs);
                },
                [&](const SExpr::New &n) {
                    std::vector<ValuePtr> args;
                    for (auto &a : n.args) args.push_back(value(a, bs));
                    return mk::val(mk::new_(n.ctor, n.targs, args));
                },
                [&](const SExpr::Get &g) {
                    auto d = value(g.dict, bs);
                    auto k = value(g.key, bs);
                    auto x = "_t" + std::to_string(next_++);
                    note(x, e->pos);
                    bs.push_back(Binding{x, std::nullopt, mk::app(mk::prim(Prim::Get), d)});
                    return mk::app(mk::var(x), k);
                },
            },
            e->v);
    }
};

}  // namespace

ExprPtr anf_normalize(const SExprPtr &e, std::map<std::string, Pos> *positions) {
    if (positions) {
        // errors outside any let are reported at the program's final expression
        auto t = e;
        while (auto *l = std::get_if<SExpr::Let>(&t->v)) t = l->body;
        (*positions)[""] = t->pos;
    }
    return Anf(positions).expr(e);
}

// --------------------------------------------------------------- programs

DatatypeDef builtin_list() {
    DatatypeDef d;
    d.ctor = "List";
    d.params.push_back(TypeParam{Variance::Co, "A", true});
    d.fields.push_back(Field{"hd", mk::term_type(mk::tyvar("A"))});
    d.fields.push_back(Field{"tl", mk::term_type(mk::ctor("List", {mk::term_type(mk::tyvar("A", true))}))});
    return d;
}

Program load_program(const std::string &text) {
    auto src = parse(text);
    Program out;
    out.defs.emplace("List", builtin_list());
    for (auto &d : src.typedefs) {
        if (out.defs.count(d.ctor)) throw DuplicateCtor("constructor " + d.ctor + " is already defined");
        out.defs.emplace(d.ctor, d);
        check_typedef(out.defs, d);
    }
    auto r = rename_binders(src);
    out.body = anf_normalize(r.body, &out.positions);
    out.toplevel = r.toplevel;
    out.original = r.original;
    return out;
}

}  // namespace duck
