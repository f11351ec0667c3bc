/**
 * @file replicate.hpp
 * @brief Multi-experiment replication: duplicate states, inputs, and outputs
 *        with experiment-indexed names while sharing parameters.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "obskit/model.hpp"

namespace obskit {

/// Replicate a model for n_exp simultaneous experiments. Parameters are
/// shared; states/inputs/outputs get a "_e<k>" suffix per replica (outputs
/// replica-major). Throws std::invalid_argument for n_exp < 1 and
/// DuplicateSymbol when a suffixed name collides with a declared name.
inline Model replicate_for_experiments(const Model &m, int n_exp) {
    if (n_exp < 1) throw std::invalid_argument("replicate_for_experiments: n_exp must be >= 1");

    std::unordered_set<std::string> taken;
    for (const auto *vec : {&m.states, &m.parameters, &m.known_inputs, &m.unknown_inputs})
        for (Symbol s : *vec) taken.insert(s->name);
    for (const auto &[nm, v] : m.known_constants) taken.insert(nm);

    Model out;
    out.name = m.name;
    out.parameters = m.parameters;
    out.known_constants = m.known_constants;

    auto replica_symbol = [&](Symbol s, int e) {
        std::string nm = s->name + "_e" + std::to_string(e);
        if (!taken.insert(nm).second) throw DuplicateSymbol(nm);
        return intern_symbol(nm, s->kind, 0);
    };

    for (int e = 1; e <= n_exp; ++e) {
        SubstMap rename;
        for (Symbol x : m.states) {
            Symbol r = replica_symbol(x, e);
            out.states.push_back(r);
            rename.emplace(x, symref(r));
        }
        for (Symbol u : m.known_inputs) {
            Symbol r = replica_symbol(u, e);
            out.known_inputs.push_back(r);
            out.u_deriv_bound[r] = m.u_deriv_bound.at(u);
            rename.emplace(u, symref(r));
        }
        for (Symbol w : m.unknown_inputs) {
            Symbol r = replica_symbol(w, e);
            out.unknown_inputs.push_back(r);
            out.w_deriv_bound[r] = m.w_deriv_bound.at(w);
            rename.emplace(w, symref(r));
        }
        for (Expr f : m.dynamics) out.dynamics.push_back(substitute(f, rename));
        for (Expr h : m.outputs) out.outputs.push_back(substitute(h, rename));
    }
    out.excluded = m.excluded;
    return out;
}

} // namespace obskit
