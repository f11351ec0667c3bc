/**
 * @file affine.hpp
 * @brief Affine-in-inputs decomposition of dynamics and outputs.
 *
 * For f = f0 + sum_i f_ui*u_i + sum_i f_wi*w_i (and the same shape for the
 * outputs), extracts the input-free coefficient vectors and certifies the
 * reconstruction symbolically: the expanded residual must normalize to zero.
 */
#pragma once

#include <unordered_set>
#include <vector>

#include "obskit/diff.hpp"
#include "obskit/model.hpp"

namespace obskit {

struct AffineDecomposition {
    std::vector<Expr> f0, h0;               ///< drift with every input at 0
    std::vector<std::vector<Expr>> f_u, h_u; ///< [n_u] coefficient vectors
    std::vector<std::vector<Expr>> f_w, h_w; ///< [n_w] coefficient vectors
};

namespace detail {

inline bool mentions_any_input(Expr e, std::unordered_set<Expr> &seen) {
    if (!seen.insert(e).second) return false;
    if (e->kind == ExprKind::Sym)
        return e->symbol->kind == SymbolKind::KnownInputDeriv ||
               e->symbol->kind == SymbolKind::UnknownInputDeriv;
    for (Expr a : e->args)
        if (mentions_any_input(a, seen)) return true;
    return false;
}

inline bool mentions_any_input(Expr e) {
    std::unordered_set<Expr> seen;
    return mentions_any_input(e, seen);
}

} // namespace detail

/// Decompose a model affine in all of its inputs; throws NotAffine otherwise.
inline AffineDecomposition affine_decompose(const Model &m) {
    std::vector<Symbol> inputs;
    inputs.insert(inputs.end(), m.known_inputs.begin(), m.known_inputs.end());
    inputs.insert(inputs.end(), m.unknown_inputs.begin(), m.unknown_inputs.end());
    SubstMap inputs_to_zero;
    for (Symbol v : inputs) inputs_to_zero.emplace(v, zero());

    auto decompose_entry = [&](Expr e, std::vector<Expr> &coeffs) -> Expr {
        coeffs.clear();
        coeffs.reserve(inputs.size());
        for (Symbol v : inputs) {
            Expr c = diff(e, v);
            // Degree > 1, products of inputs, and inputs inside exp/ln/power
            // all leave an input symbol in the partial derivative.
            if (detail::mentions_any_input(c)) throw NotAffine(to_string(e));
            coeffs.push_back(c);
        }
        Expr base = substitute(e, inputs_to_zero);
        std::vector<Expr> residual_terms{e, neg(base)};
        for (std::size_t i = 0; i < inputs.size(); ++i)
            residual_terms.push_back(neg(mul2(coeffs[i], symref(inputs[i]))));
        if (expand(add(std::move(residual_terms))) != zero()) throw NotAffine(to_string(e));
        return base;
    };

    AffineDecomposition d;
    d.f_u.assign(m.n_u(), {});
    d.f_w.assign(m.n_w(), {});
    d.h_u.assign(m.n_u(), {});
    d.h_w.assign(m.n_w(), {});

    std::vector<Expr> coeffs;
    for (Expr e : m.dynamics) {
        d.f0.push_back(decompose_entry(e, coeffs));
        for (std::size_t i = 0; i < m.n_u(); ++i) d.f_u[i].push_back(coeffs[i]);
        for (std::size_t i = 0; i < m.n_w(); ++i) d.f_w[i].push_back(coeffs[m.n_u() + i]);
    }
    for (Expr e : m.outputs) {
        d.h0.push_back(decompose_entry(e, coeffs));
        for (std::size_t i = 0; i < m.n_u(); ++i) d.h_u[i].push_back(coeffs[i]);
        for (std::size_t i = 0; i < m.n_w(); ++i) d.h_w[i].push_back(coeffs[m.n_u() + i]);
    }
    return d;
}

} // namespace obskit
