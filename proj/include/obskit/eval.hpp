/**
 * @file eval.hpp
 * @brief Exact-rational and extended-precision floating evaluation.
 *
 * eval_exact refuses exp/ln/non-integer powers (NonRationalNode) — those
 * expressions are handled by the floating path, whose long double carries a
 * 64-bit significand on x86-64.
 */
#pragma once

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "obskit/expr.hpp"

namespace obskit {

using ExactPoint = std::unordered_map<Symbol, Rational>;
using FloatPoint = std::unordered_map<Symbol, long double>;

namespace detail {

inline Rational eval_exact_memo(Expr e, const ExactPoint &point,
                                std::unordered_map<Expr, Rational> &memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    Rational r;
    switch (e->kind) {
    case ExprKind::Constant:
        r = e->value;
        break;
    case ExprKind::Sym: {
        auto it = point.find(e->symbol);
        if (it == point.end())
            throw std::invalid_argument("eval_exact: unbound symbol " + e->symbol->display());
        r = it->second;
        break;
    }
    case ExprKind::Sum: {
        r = Rational(0);
        for (Expr a : e->args) r += eval_exact_memo(a, point, memo);
        break;
    }
    case ExprKind::Product: {
        r = Rational(1);
        for (Expr a : e->args) r *= eval_exact_memo(a, point, memo);
        break;
    }
    case ExprKind::Power: {
        Expr ex = e->args[1];
        if (!(ex->is_constant() && ex->value.is_integer()))
            throw NonRationalNode("eval_exact: non-integer power");
        Rational base = eval_exact_memo(e->args[0], point, memo);
        r = base.pow(ex->value.num());
        break;
    }
    case ExprKind::Exp:
    case ExprKind::Ln:
        throw NonRationalNode("eval_exact: exp/ln node");
    }
    memo.emplace(e, r);
    return r;
}

inline long double eval_float_memo(Expr e, const FloatPoint &point,
                                   std::unordered_map<Expr, long double> &memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    long double r = 0;
    switch (e->kind) {
    case ExprKind::Constant:
        r = e->value.to_long_double();
        break;
    case ExprKind::Sym: {
        auto it = point.find(e->symbol);
        if (it == point.end())
            throw std::invalid_argument("eval_float: unbound symbol " + e->symbol->display());
        r = it->second;
        break;
    }
    case ExprKind::Sum: {
        r = 0;
        for (Expr a : e->args) r += eval_float_memo(a, point, memo);
        break;
    }
    case ExprKind::Product: {
        r = 1;
        for (Expr a : e->args) r *= eval_float_memo(a, point, memo);
        break;
    }
    case ExprKind::Power:
        r = std::pow(eval_float_memo(e->args[0], point, memo),
                     eval_float_memo(e->args[1], point, memo));
        break;
    case ExprKind::Exp:
        r = std::exp(eval_float_memo(e->args[0], point, memo));
        break;
    case ExprKind::Ln:
        r = std::log(eval_float_memo(e->args[0], point, memo));
        break;
    }
    memo.emplace(e, r);
    return r;
}

} // namespace detail

/// Exact rational value; every symbol of e must be bound.
inline Rational eval_exact(Expr e, const ExactPoint &point) {
    std::unordered_map<Expr, Rational> memo;
    return detail::eval_exact_memo(e, point, memo);
}

/// long double value (>= 64-bit significand); every symbol must be bound.
inline long double eval_float(Expr e, const FloatPoint &point) {
    std::unordered_map<Expr, long double> memo;
    return detail::eval_float_memo(e, point, memo);
}

/// True when the expression uses only +, *, and integer powers — i.e. the
/// exact-modular rank path can evaluate it.
inline bool is_rational_expr(Expr e) {
    std::unordered_set<Expr> seen;
    std::vector<Expr> stack{e};
    while (!stack.empty()) {
        Expr cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        switch (cur->kind) {
        case ExprKind::Exp:
        case ExprKind::Ln:
            return false;
        case ExprKind::Power: {
            Expr ex = cur->args[1];
            if (!(ex->is_constant() && ex->value.is_integer())) return false;
            stack.push_back(cur->args[0]);
            break;
        }
        case ExprKind::Sum:
        case ExprKind::Product:
            for (Expr a : cur->args) stack.push_back(a);
            break;
        default:
            break;
        }
    }
    return true;
}

} // namespace obskit
