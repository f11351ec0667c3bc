/**
 * @file algorithms.hpp
 * @brief Observability / identifiability / input-reconstructibility drivers.
 *
 * Both analyses share one driver shape: build the augmented system, generate
 * row blocks stage by stage, rank the growing Jacobian at generic points,
 * classify variables whose column deletion lowers the rank, and stop on the
 * first of: full rank, rank stagnation, the stage cap, or the time budget.
 *
 * Classification is monotone: once a variable tests positive at some stage it
 * keeps that verdict; negatives and undecideds are only assigned at
 * termination.
 */
#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "obskit/augment.hpp"
#include "obskit/lie.hpp"
#include "obskit/model.hpp"
#include "obskit/rank.hpp"
#include "obskit/replicate.hpp"

namespace obskit {

enum class Algorithm { Fispo, OrcDf };

enum class Termination { FullRank, RankStagnation, KmaxReached, TimeBudget };

enum class Verdict { Observable, Identifiable, Invertible, Unobservable, Undecided };

struct AnalysisOptions {
    Algorithm algorithm = Algorithm::Fispo;
    int kmax = -1;                   ///< max stage index; <0 picks 2 * (augmented dimension)
    double stage_time_budget = 0.0;  ///< seconds per stage; <=0 = unlimited (soft, checked at stage ends)
    double total_time_budget = 0.0;  ///< seconds overall; <=0 = unlimited (soft)
    RankConfig rank;
    bool classify_each_stage = true; ///< column tests every stage (else only at termination)
    int multiexp = 1;                ///< number of replicated experiments
};

struct IterationRecord {
    int k = 0;
    std::size_t rows = 0;    ///< cumulative kept rows through stage k
    std::size_t pruned = 0;  ///< cumulative pruned rows through stage k
    int rank = 0;
    std::size_t n_k = 0;     ///< columns ranked at stage k
    std::vector<std::string> newly_classified;  ///< variables receiving their verdict here
    double stage_seconds = 0.0;
};

struct Report {
    std::string model_name;
    Algorithm algorithm = Algorithm::Fispo;
    AnalysisOptions options;  ///< as run, with kmax resolved
    RankMethod method = RankMethod::ExactModular;
    std::vector<IterationRecord> iterations;
    std::vector<std::pair<std::string, Verdict>> verdicts;  ///< basis order, excluded omitted
    Termination termination = Termination::KmaxReached;
};

/// The verdict a variable earns when its column is essential.
inline Verdict positive_verdict(Symbol s) {
    switch (s->kind) {
        case SymbolKind::Parameter: return Verdict::Identifiable;
        case SymbolKind::UnknownInputDeriv: return Verdict::Invertible;
        default: return Verdict::Observable;
    }
}

/// Rank evaluation field for a model, decided once from its right-hand sides
/// and outputs (all later rows are derivatives of these, so rationality is
/// preserved).
inline RankMethod choose_method_for_model(const Model &m) {
    for (Expr e : m.dynamics)
        if (!is_rational_expr(e)) return RankMethod::FloatingSVD;
    for (Expr e : m.outputs)
        if (!is_rational_expr(e)) return RankMethod::FloatingSVD;
    return RankMethod::ExactModular;
}

/// Candidate columns (indices into the matrix) whose deletion lowers the
/// rank below `rank`; these variables are classified at this matrix.
inline std::vector<std::size_t> classify_variables(const ExprMatrix &m, int rank,
                                                   const std::vector<std::size_t> &candidates,
                                                   const RankConfig &cfg = {}) {
    IncrementalRank engine(choose_rank_method(m), cfg, m.cols());
    engine.add_rows(m);
    std::vector<int> without = engine.ranks_without(candidates);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (without[i] < rank) out.push_back(candidates[i]);
    return out;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct DriverState {
    const Model *model = nullptr;
    AugmentedSystem aug;
    std::vector<std::size_t> live_dirs;  // cascade only
    bool cascade = false;

    LieStage seed() const { return cascade ? orcdf_seed(aug) : fispo_seed(aug); }
    LieStage step(const LieStage &prev) const {
        return cascade ? orcdf_step(prev, aug, live_dirs) : fispo_step(prev, aug, *model);
    }
};

inline Report run_stages(const Model &m, AnalysisOptions opts, bool cascade) {
    const auto t_total = std::chrono::steady_clock::now();

    DriverState drv;
    drv.model = &m;
    drv.cascade = cascade;
    if (cascade) {
        AffineDecomposition ad = affine_decompose(m);  // throws NotAffine when unusable
        drv.aug = augment_affine(m, ad, max_w_bound(m));
        drv.live_dirs = orcdf_live_directions(drv.aug);
    } else {
        drv.aug = augment(m, max_w_bound(m));
    }

    const std::vector<Symbol> &basis = drv.aug.basis;
    if (opts.kmax < 0) opts.kmax = 2 * static_cast<int>(basis.size());

    Report rep;
    rep.model_name = m.name;
    rep.algorithm = cascade ? Algorithm::OrcDf : Algorithm::Fispo;
    rep.options = opts;
    rep.method = choose_method_for_model(m);

    std::unordered_set<std::string> excluded_names;
    for (Symbol s : m.excluded) excluded_names.insert(s->name);
    auto is_excluded = [&](Symbol s) { return excluded_names.count(s->name) != 0; };

    std::unordered_map<Symbol, Verdict> assigned;
    auto classify = [&](Symbol s, Verdict v, IterationRecord &rec) {
        assigned.emplace(s, v);
        rec.newly_classified.push_back(s->display());
    };
    auto label_remaining = [&](Verdict v, IterationRecord &rec) {
        for (Symbol s : basis)
            if (!is_excluded(s) && !assigned.count(s)) classify(s, v, rec);
    };

    IncrementalRank engine(rep.method, opts.rank, drv.aug.n(0));

    LieStage st = drv.seed();
    int prev_rank = -1;
    std::size_t prev_nk = 0;
    std::size_t pruned_cum = 0;

    for (int k = 0;; ++k) {
        const auto t_stage = std::chrono::steady_clock::now();

        engine.extend_cols(st.basis.size());
        const int r = engine.add_rows(build_matrix_increment(st));
        pruned_cum += st.pruned_new;

        IterationRecord rec;
        rec.k = k;
        rec.rows = st.rows_total;
        rec.pruned = pruned_cum;
        rec.rank = r;
        rec.n_k = st.basis.size();

        bool done = false;
        if (r == static_cast<int>(st.basis.size())) {
            // Full rank: every augmented variable is determined by the
            // outputs, and the basis tail beyond the current prefix consists
            // of derivatives of already-reconstructed signals.
            rep.termination = Termination::FullRank;
            for (Symbol s : basis)
                if (!is_excluded(s) && !assigned.count(s)) classify(s, positive_verdict(s), rec);
            done = true;
        } else {
            const bool stagnant = k >= 1 && r == prev_rank && st.basis.size() == prev_nk;
            const bool at_kmax = k >= opts.kmax;
            const bool over_budget =
              (opts.total_time_budget > 0 && seconds_since(t_total) > opts.total_time_budget) ||
              (opts.stage_time_budget > 0 && seconds_since(t_stage) > opts.stage_time_budget);
            const bool terminal = stagnant || at_kmax || over_budget;

            if (opts.classify_each_stage || terminal) {
                std::vector<std::size_t> query;
                for (std::size_t j = 0; j < st.basis.size(); ++j)
                    if (!is_excluded(st.basis[j]) && !assigned.count(st.basis[j])) query.push_back(j);
                std::vector<bool> drops = engine.columns_drop_rank(query);
                for (std::size_t i = 0; i < query.size(); ++i)
                    if (drops[i])
                        classify(st.basis[query[i]], positive_verdict(st.basis[query[i]]), rec);
            }

            if (stagnant) {
                rep.termination = Termination::RankStagnation;
                label_remaining(Verdict::Unobservable, rec);
                done = true;
            } else if (at_kmax) {
                rep.termination = Termination::KmaxReached;
                label_remaining(Verdict::Undecided, rec);
                done = true;
            } else if (over_budget ||
                       (opts.total_time_budget > 0 &&
                        seconds_since(t_total) > opts.total_time_budget) ||
                       (opts.stage_time_budget > 0 &&
                        seconds_since(t_stage) > opts.stage_time_budget)) {
                rep.termination = Termination::TimeBudget;
                label_remaining(Verdict::Undecided, rec);
                done = true;
            }
        }

        rec.stage_seconds = seconds_since(t_stage);
        rep.iterations.push_back(rec);
        if (done) break;

        prev_rank = r;
        prev_nk = st.basis.size();
        st = drv.step(st);
    }

    for (Symbol s : basis) {
        if (is_excluded(s)) continue;
        auto it = assigned.find(s);
        rep.verdicts.emplace_back(s->display(),
                                  it == assigned.end() ? Verdict::Undecided : it->second);
    }
    return rep;
}

} // namespace detail

/// Extended-Lie analysis: states, parameters, and unknown-input derivative
/// chains, with known-input derivatives entering stage by stage.
inline Report run_fispo(const Model &m, const AnalysisOptions &opts = {}) {
    return detail::run_stages(m, opts, /*cascade=*/false);
}

/// Direct-feedthrough cascade analysis; requires dynamics and outputs affine
/// in the known inputs (throws NotAffine otherwise).
inline Report run_orcdf(const Model &m, const AnalysisOptions &opts = {}) {
    return detail::run_stages(m, opts, /*cascade=*/true);
}

/// Entry point used by the command line: optional multi-experiment
/// replication, then the selected analysis.
inline Report analyze(const Model &m, const AnalysisOptions &opts = {}) {
    if (opts.multiexp > 1) {
        Model work = replicate_for_experiments(m, opts.multiexp);
        return opts.algorithm == Algorithm::OrcDf ? run_orcdf(work, opts) : run_fispo(work, opts);
    }
    return opts.algorithm == Algorithm::OrcDf ? run_orcdf(m, opts) : run_fispo(m, opts);
}

} // namespace obskit
