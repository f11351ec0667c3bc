/**
 * @file augment.hpp
 * @brief State augmentation: parameters and unknown-input derivative chains.
 *
 * The l-augmented state vector is ordered derivative-order-major:
 *
 *     x_1..x_nx,  theta_1..theta_ntheta,  w_1..w_nw,  w_1'..,  ...,  w^(l)
 *
 * so the level-j basis is a prefix of the level-l basis for every j <= l.
 * Each unknown input w_i carries its own bound s_i: derivatives beyond s_i
 * are identically zero and are not appended. The dynamics row for w_i^(j) is
 * the symbol w_i^(j+1) when j < s_i, else 0; parameters have zero dynamics.
 */
#pragma once

#include <algorithm>
#include <vector>

#include "obskit/affine.hpp"
#include "obskit/model.hpp"

namespace obskit {

struct AugmentedSystem {
    int level = 0;                    ///< l
    std::vector<Symbol> basis;        ///< x^l, order-major
    std::vector<Expr> dynamics;       ///< f^l, aligned with basis
    std::vector<Expr> outputs;        ///< h (unchanged by augmentation)
    std::vector<std::size_t> prefix_sizes; ///< prefix_sizes[j] = n^j for j = 0..level

    bool has_affine_split = false;
    std::vector<Expr> f_xw;                ///< drift incl. w chain (known inputs at 0)
    std::vector<std::vector<Expr>> f_u;    ///< [n_u] direction fields over the basis
    std::vector<Expr> h_xw;                ///< outputs with known inputs at 0
    std::vector<std::vector<Expr>> h_u;    ///< [n_u] output feedthrough coefficients

    std::size_t n(int k) const { return prefix_sizes[std::min<std::size_t>(k, level)]; }
};

/// Highest unknown-input derivative bound (0 when the model has none).
inline int max_w_bound(const Model &m) {
    int s = 0;
    for (Symbol w : m.unknown_inputs) s = std::max(s, m.w_deriv_bound.at(w));
    return s;
}

/// Build the l-augmented system; l is capped at max_w_bound(m).
inline AugmentedSystem augment(const Model &m, int l) {
    AugmentedSystem a;
    a.level = std::min(l, max_w_bound(m));
    a.outputs = m.outputs;

    for (Symbol x : m.states) a.basis.push_back(x);
    for (Symbol th : m.parameters) a.basis.push_back(th);
    a.dynamics = m.dynamics;
    a.dynamics.resize(a.dynamics.size() + m.parameters.size(), zero());

    for (int j = 0; j <= a.level; ++j) {
        for (Symbol w : m.unknown_inputs) {
            const int s_i = m.w_deriv_bound.at(w);
            if (j > s_i) continue;
            a.basis.push_back(intern_symbol(w->name, SymbolKind::UnknownInputDeriv, j));
            a.dynamics.push_back(j < s_i
                                   ? symref(intern_symbol(w->name, SymbolKind::UnknownInputDeriv, j + 1))
                                   : zero());
        }
        a.prefix_sizes.push_back(a.basis.size());
    }
    return a;
}

/// Build the l-augmented system together with its affine split (for the
/// direct-feedthrough cascade). The drift keeps unknown inputs and the w
/// chain; each known input contributes one direction field.
inline AugmentedSystem augment_affine(const Model &m, const AffineDecomposition &ad, int l) {
    AugmentedSystem a = augment(m, l);
    a.has_affine_split = true;

    SubstMap u_to_zero;
    for (Symbol u : m.known_inputs) u_to_zero.emplace(u, zero());

    // Drift: dynamics with known inputs at zero. Substitution (rather than
    // reassembly from the decomposition) keeps entries structurally identical
    // to f^l when the model has no known inputs.
    a.f_xw = substitute_all(a.dynamics, u_to_zero);
    a.h_xw = substitute_all(a.outputs, u_to_zero);

    a.f_u.assign(m.n_u(), {});
    a.h_u = ad.h_u;
    for (std::size_t i = 0; i < m.n_u(); ++i) {
        a.f_u[i] = ad.f_u[i];
        a.f_u[i].resize(a.basis.size(), zero()); // parameters and w chain: zero
    }
    return a;
}

} // namespace obskit
