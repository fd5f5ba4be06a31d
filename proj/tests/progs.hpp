#pragma once

// Random first-order program text and an A-normal-form predicate.

#include "gen.hpp"

#include "duckcheck/syntax.hpp"

#include <string>
#include <utility>
#include <vector>

namespace duck::test {

enum class K { Int, Bool, Str, Dict };

struct ProgGen {
    Rng &r;
    int next = 0;
    std::vector<std::pair<std::string, K>> vars;

    std::string var_of(K k) {
        std::vector<std::string> c;
        for (auto &[x, kk] : vars)
            if (kk == k) c.push_back(x);
        if (c.empty()) return {};
        return c[static_cast<size_t>(pick(r, static_cast<int>(c.size())))];
    }

    K any() { return static_cast<K>(pick(r, 4)); }

    std::string let(K k, int d) {
        K rk = any();
        std::string rhs = gen(rk, d - 1);
        std::string x = "x" + std::to_string(next++);
        vars.emplace_back(x, rk);
        std::string body = gen(k, d - 1);
        vars.pop_back();
        return "(let " + x + " = " + rhs + " in " + body + ")";
    }

    std::string gen(K k, int d) {
        // an occasional wrong-kind operand keeps stuck outcomes in the mix
        if (d > 0 && pick(r, 25) == 0) k = any();
        if (d <= 0 || pick(r, 4) == 0) {
            auto v = var_of(k);
            if (!v.empty() && pick(r, 2)) return v;
            switch (k) {
            case K::Int: return std::to_string(pick(r, 4));
            case K::Bool: return pick(r, 2) ? "true" : "false";
            case K::Str: return pick(r, 2) ? "\"a\"" : "\"b\"";
            case K::Dict: return "{}";
            }
        }
        int c = pick(r, 5);
        if (c == 0) return let(k, d);
        if (c == 1) return "(if " + gen(K::Bool, d - 1) + " then " + gen(k, d - 1) + " else " + gen(k, d - 1) + ")";
        switch (k) {
        case K::Int:
            switch (pick(r, 3)) {
            case 0: return "(" + gen(K::Int, d - 1) + " + " + gen(K::Int, d - 1) + ")";
            case 1: return "(" + gen(K::Int, d - 1) + " - " + gen(K::Int, d - 1) + ")";
            default: return "(" + gen(K::Dict, d - 1) + ")[" + gen(K::Str, d - 1) + "]";
            }
        case K::Bool:
            switch (pick(r, 4)) {
            case 0: return "(" + gen(K::Int, d - 1) + " = " + gen(K::Int, d - 1) + ")";
            case 1: return "(not " + gen(K::Bool, d - 1) + ")";
            case 2: return "(has " + gen(K::Dict, d - 1) + " " + gen(K::Str, d - 1) + ")";
            default: return "(tag " + gen(any(), d - 1) + " = \"Int\")";
            }
        case K::Str: return "(tag " + gen(any(), d - 1) + ")";
        case K::Dict:
            if (pick(r, 2)) return "{\"a\": " + gen(any(), d - 1) + ", \"b\": " + gen(K::Int, d - 1) + "}";
            return "(set " + gen(K::Dict, d - 1) + " " + gen(K::Str, d - 1) + " " + gen(any(), d - 1) + ")";
        }
        return "0";
    }
};

inline bool is_anf(const Expr &e);

inline bool value_anf(const Value &w) {
    if (auto *f = std::get_if<Value::Fun>(&w.v)) return is_anf(*f->body);
    if (auto *t = std::get_if<Value::TFun>(&w.v)) return is_anf(*t->body);
    return true;
}

inline bool is_anf(const Expr &e) {
    if (auto *v = std::get_if<Expr::Val>(&e.v)) return value_anf(*v->w);
    if (auto *a = std::get_if<Expr::App>(&e.v)) return value_anf(*a->fn) && value_anf(*a->arg);
    if (auto *i = std::get_if<Expr::If>(&e.v)) return is_anf(*i->then_e) && is_anf(*i->else_e);
    if (auto *l = std::get_if<Expr::Let>(&e.v)) return is_anf(*l->rhs) && is_anf(*l->body);
    return true;
}

}  // namespace duck::test
