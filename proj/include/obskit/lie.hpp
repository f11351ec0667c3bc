/**
 * @file lie.hpp
 * @brief The two observability row recursions: extended Lie derivatives of
 *        the augmented outputs, and the direct-feedthrough cascade that
 *        branches along the drift and each known-input direction.
 *
 * Both recursions produce LieStage values; a stage's Jacobian against its
 * basis is the block of new matrix rows for that iteration.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "obskit/augment.hpp"
#include "obskit/diff.hpp"
#include "obskit/matrix.hpp"

namespace obskit {

struct LieStage {
    int k = 0;
    std::vector<Expr> rows_new;            ///< scalar functions added at this stage
    std::vector<std::string> provenance;   ///< direction trail per row, e.g. "h_xw[0]->f_u1"
    std::size_t rows_total = 0;            ///< cumulative kept rows through this stage
    std::size_t pruned_new = 0;            ///< rows pruned when forming this stage
    std::vector<Symbol> basis;             ///< Jacobian basis for this stage
};

/// Directional derivative of each entry of phi along the field f over basis.
inline std::vector<Expr> lie_derivative(const std::vector<Expr> &phi,
                                        const std::vector<Expr> &f,
                                        const std::vector<Symbol> &basis) {
    std::vector<Expr> out;
    out.reserve(phi.size());
    for (Expr p : phi) {
        std::vector<Expr> terms;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            if (f[j]->is_zero()) continue;
            Expr d = diff(p, basis[j]);
            if (d->is_zero()) continue;
            terms.push_back(mul2(d, f[j]));
        }
        out.push_back(add(std::move(terms)));
    }
    return out;
}

/// One extended-Lie transport step: the basis-directional derivative along
/// the augmented dynamics plus the known-input chain terms
/// sum_j d(.)/d u^(j) * u^(j+1), truncated by each input's derivative bound.
/// `stage` is the order of the derivative being formed (prev holds stage-1).
inline std::vector<Expr> extended_lie_step(const std::vector<Expr> &prev,
                                           const AugmentedSystem &aug, const Model &m,
                                           int stage) {
    std::vector<Expr> out;
    out.reserve(prev.size());
    for (Expr p : prev) {
        std::vector<Expr> terms;
        for (std::size_t j = 0; j < aug.basis.size(); ++j) {
            if (aug.dynamics[j]->is_zero()) continue;
            Expr d = diff(p, aug.basis[j]);
            if (d->is_zero()) continue;
            terms.push_back(mul2(d, aug.dynamics[j]));
        }
        for (Symbol u : m.known_inputs) {
            const int bound = m.u_deriv_bound.at(u);
            int jmax = stage - 1;                              // prev depends on u^(j), j < stage
            if (bound >= 0) jmax = std::min(jmax, bound - 1);  // u^(j+1) vanishes past the bound
            for (int j = 0; j <= jmax; ++j) {
                Expr d = diff(p, intern_symbol(u->name, SymbolKind::KnownInputDeriv, j));
                if (d->is_zero()) continue;
                terms.push_back(
                  mul2(d, symref(intern_symbol(u->name, SymbolKind::KnownInputDeriv, j + 1))));
            }
        }
        out.push_back(add(std::move(terms)));
    }
    return out;
}

/// Stage 0 of the extended-Lie recursion: the outputs themselves.
inline LieStage fispo_seed(const AugmentedSystem &aug) {
    LieStage s;
    s.k = 0;
    s.rows_new = aug.outputs;
    for (std::size_t j = 0; j < aug.outputs.size(); ++j)
        s.provenance.push_back("y" + std::to_string(j + 1));
    s.rows_total = s.rows_new.size();
    s.basis.assign(aug.basis.begin(), aug.basis.begin() + static_cast<std::ptrdiff_t>(aug.n(0)));
    return s;
}

/// Stage k -> k+1 of the extended-Lie recursion (m rows per stage, no pruning).
inline LieStage fispo_step(const LieStage &prev, const AugmentedSystem &aug, const Model &m) {
    LieStage s;
    s.k = prev.k + 1;
    s.rows_new = extended_lie_step(prev.rows_new, aug, m, s.k);
    for (const std::string &tag : prev.provenance) s.provenance.push_back("L(" + tag + ")");
    s.rows_total = prev.rows_total + s.rows_new.size();
    s.basis.assign(aug.basis.begin(), aug.basis.begin() + static_cast<std::ptrdiff_t>(aug.n(s.k)));
    return s;
}

namespace detail {

inline bool all_zero(const std::vector<Expr> &v) {
    for (Expr e : v)
        if (!e->is_zero()) return false;
    return true;
}

/// m*(1+n_u)^(k+1), saturating; the unpruned cascade row count of one stage.
inline std::size_t cascade_row_count(std::size_t m, std::size_t n_u, int k) {
    std::size_t r = m;
    for (int i = 0; i <= k; ++i) {
        const std::size_t factor = 1 + n_u;
        if (r > std::numeric_limits<std::size_t>::max() / factor)
            return std::numeric_limits<std::size_t>::max();
        r *= factor;
    }
    return r;
}

} // namespace detail

/// Known-input direction indices whose fields are not identically zero; only
/// these participate in the cascade recursion.
inline std::vector<std::size_t> orcdf_live_directions(const AugmentedSystem &aug) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < aug.f_u.size(); ++i)
        if (!detail::all_zero(aug.f_u[i])) live.push_back(i);
    return live;
}

/// Stage 0 of the cascade: the drift block h_xw plus one feedthrough block
/// per known input. Pruning is block-level: a feedthrough block that is
/// identically zero is dropped whole; incidental zero rows inside surviving
/// blocks are kept (they stay part of the recursion).
inline LieStage orcdf_seed(const AugmentedSystem &aug) {
    LieStage s;
    s.k = 0;
    const std::size_t m = aug.outputs.size();
    auto push_block = [&](const std::vector<Expr> &block, const std::string &tag) {
        if (detail::all_zero(block)) {
            s.pruned_new += block.size();
            return;
        }
        for (std::size_t j = 0; j < block.size(); ++j) {
            s.rows_new.push_back(block[j]);
            s.provenance.push_back(tag + "[" + std::to_string(j) + "]");
        }
    };
    push_block(aug.h_xw, "h_xw");
    for (std::size_t i = 0; i < aug.h_u.size(); ++i)
        push_block(aug.h_u[i], "h_u" + std::to_string(i + 1));
    s.rows_total = s.rows_new.size();
    s.pruned_new = detail::cascade_row_count(m, aug.h_u.size(), 0) - s.rows_new.size();
    s.basis.assign(aug.basis.begin(), aug.basis.begin() + static_cast<std::ptrdiff_t>(aug.n(0)));
    return s;
}

/// One cascade step: Lie derivatives of the previous stage's rows along the
/// drift and along every live known-input direction (dead directions are
/// pruned whole, matching the block-level policy).
inline LieStage orcdf_step(const LieStage &prev, const AugmentedSystem &aug,
                           const std::vector<std::size_t> &live_directions) {
    LieStage s;
    s.k = prev.k + 1;
    const std::size_t m = aug.outputs.size();

    auto push_block = [&](const std::vector<Expr> &block, const std::string &suffix) {
        for (std::size_t j = 0; j < block.size(); ++j) {
            s.rows_new.push_back(block[j]);
            s.provenance.push_back(prev.provenance[j] + suffix);
        }
    };
    push_block(lie_derivative(prev.rows_new, aug.f_xw, aug.basis), "->f_xw");
    for (std::size_t i : live_directions)
        push_block(lie_derivative(prev.rows_new, aug.f_u[i], aug.basis),
                   "->f_u" + std::to_string(i + 1));

    s.rows_total = prev.rows_total + s.rows_new.size();
    s.pruned_new = detail::cascade_row_count(m, aug.f_u.size(), s.k) - s.rows_new.size();
    s.basis.assign(aug.basis.begin(), aug.basis.begin() + static_cast<std::ptrdiff_t>(aug.n(s.k)));
    return s;
}

/// Convenience form mirroring the recursion one block list at a time.
inline std::vector<Expr> orcdf_stage(const std::vector<Expr> &delta_prev,
                                     const AugmentedSystem &aug) {
    std::vector<Expr> out = lie_derivative(delta_prev, aug.f_xw, aug.basis);
    for (std::size_t i : orcdf_live_directions(aug)) {
        std::vector<Expr> block = lie_derivative(delta_prev, aug.f_u[i], aug.basis);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

/// Jacobian of a stage's new rows against the stage basis.
inline ExprMatrix build_matrix_increment(const LieStage &stage) {
    ExprMatrix mat(0, stage.basis.size());
    for (Expr row : stage.rows_new) {
        std::vector<Expr> r;
        r.reserve(stage.basis.size());
        for (Symbol s : stage.basis) r.push_back(diff(row, s));
        mat.append_row(r);
    }
    return mat;
}

} // namespace obskit
