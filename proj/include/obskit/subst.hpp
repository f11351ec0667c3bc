/**
 * @file subst.hpp
 * @brief Simultaneous symbol substitution with re-normalization.
 */
#pragma once

#include <unordered_map>
#include <vector>

#include "obskit/expr.hpp"

namespace obskit {

using SubstMap = std::unordered_map<Symbol, Expr>;

namespace detail {

inline Expr substitute_memo(Expr e, const SubstMap &bind,
                            std::unordered_map<Expr, Expr> &memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    Expr result = e;
    switch (e->kind) {
    case ExprKind::Constant:
        break;
    case ExprKind::Sym: {
        auto it = bind.find(e->symbol);
        if (it != bind.end()) result = it->second; // unbound symbols pass through
        break;
    }
    case ExprKind::Sum:
    case ExprKind::Product: {
        std::vector<Expr> parts;
        parts.reserve(e->args.size());
        bool changed = false;
        for (Expr a : e->args) {
            Expr r = substitute_memo(a, bind, memo);
            changed |= (r != a);
            parts.push_back(r);
        }
        if (changed)
            result = (e->kind == ExprKind::Sum) ? add(std::move(parts)) : mul(std::move(parts));
        break;
    }
    case ExprKind::Power: {
        Expr b = substitute_memo(e->args[0], bind, memo);
        Expr x = substitute_memo(e->args[1], bind, memo);
        if (b != e->args[0] || x != e->args[1]) result = pow_of(b, x);
        break;
    }
    case ExprKind::Exp: {
        Expr a = substitute_memo(e->args[0], bind, memo);
        if (a != e->args[0]) result = exp_of(a);
        break;
    }
    case ExprKind::Ln: {
        Expr a = substitute_memo(e->args[0], bind, memo);
        if (a != e->args[0]) result = ln_of(a);
        break;
    }
    }
    memo.emplace(e, result);
    return result;
}

} // namespace detail

/// Simultaneous substitution; the result is normalized by construction.
/// Throws DivisionByZero if the substitution zeroes a denominator.
inline Expr substitute(Expr e, const SubstMap &bindings) {
    std::unordered_map<Expr, Expr> memo;
    return detail::substitute_memo(e, bindings, memo);
}

/// Substitute across a vector of expressions sharing one memo table.
inline std::vector<Expr> substitute_all(const std::vector<Expr> &es, const SubstMap &bindings) {
    std::unordered_map<Expr, Expr> memo;
    std::vector<Expr> out;
    out.reserve(es.size());
    for (Expr e : es) out.push_back(detail::substitute_memo(e, bindings, memo));
    return out;
}

} // namespace obskit
