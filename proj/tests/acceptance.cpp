/**
 * @file acceptance.cpp
 * @brief One pass/fail line per shipped claim about the fixture models and
 *        the analysis engines; exits nonzero when any line fails.
 *
 * usage: obskit_acceptance <models-dir> [--stress]
 *
 * --stress extends the large signalling-pathway check from its mandatory
 * first iterations to the full five-stage run of both algorithms.
 */
#include <obskit.hpp>

#include "support/kalman_oracle.hpp"
#include "support/model_generators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace obskit;

namespace {

std::string g_models;

// Every Report produced anywhere in this run, kept with the model that
// produced it so the row-count property can audit all of them at the end.
// A deque keeps earlier references valid while later runs are appended.
std::deque<std::pair<Model, Report>> g_recorded;

const Report &record(const Model &m, Report rep) {
    g_recorded.emplace_back(m, std::move(rep));
    return g_recorded.back().second;
}

Model load_fixture(const std::string &name) {
    std::ifstream in(std::filesystem::path(g_models) / (name + ".txt"));
    if (!in) throw std::runtime_error("missing fixture: " + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), name);
}

/// Collects failure explanations; a criterion passes when none accrue.
struct Checker {
    std::vector<std::string> notes;

    void expect(bool cond, const std::string &what) {
        if (!cond) notes.push_back(what);
    }
    template <typename T, typename U>
    void equal(const T &got, const U &want, const std::string &what) {
        if (!(got == static_cast<T>(want))) {
            std::ostringstream os;
            os << what << ": got " << got << ", want " << want;
            notes.push_back(os.str());
        }
    }
};

std::vector<int> ranks_of(const Report &rep) {
    std::vector<int> out;
    for (const IterationRecord &it : rep.iterations) out.push_back(it.rank);
    return out;
}

std::vector<std::size_t> rows_of(const Report &rep) {
    std::vector<std::size_t> out;
    for (const IterationRecord &it : rep.iterations) out.push_back(it.rows);
    return out;
}

std::map<std::string, Verdict> verdict_map(const Report &rep) {
    return {rep.verdicts.begin(), rep.verdicts.end()};
}

bool classified_at(const Report &rep, int k, const std::string &name) {
    for (const IterationRecord &it : rep.iterations)
        if (it.k == k)
            for (const std::string &n : it.newly_classified)
                if (n == name) return true;
    return false;
}

template <typename T>
std::string seq(const std::vector<T> &v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

bool positive(Verdict v) {
    return v == Verdict::Observable || v == Verdict::Identifiable || v == Verdict::Invertible;
}

int g_failures = 0;

void criterion(const std::string &label, double budget_seconds,
               const std::function<void(Checker &)> &body) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception &e) {
        c.notes.push_back(std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0 && dt > budget_seconds) {
        std::ostringstream os;
        os << "runtime " << dt << "s exceeds budget " << budget_seconds << "s";
        c.notes.push_back(os.str());
    }

    const bool ok = c.notes.empty();
    if (!ok) ++g_failures;
    std::printf("%s  %-68s (%.2fs", ok ? "PASS" : "FAIL", label.c_str(), dt);
    if (budget_seconds > 0) std::printf(" / %gs budget", budget_seconds);
    std::printf(")\n");
    for (const std::string &note : c.notes) std::printf("      - %s\n", note.c_str());
    std::fflush(stdout);
}

// --------------------------------------------------------------- criteria ---

void two_compartment(Checker &c) {
    Model m = load_fixture("c2m");

    AnalysisOptions orc;
    orc.algorithm = Algorithm::OrcDf;
    const Report &cascade = record(m, run_orcdf(m, orc));
    c.equal(cascade.termination == Termination::FullRank, true, "cascade reaches full rank");
    c.equal(cascade.iterations.back().k, 3, "cascade terminating iteration");
    c.equal(cascade.iterations.back().rank, 6, "cascade final rank");
    c.equal(cascade.verdicts.size(), std::size_t{6}, "augmented variable count");
    for (const auto &[name, v] : cascade.verdicts)
        c.expect(positive(v), "cascade leaves '" + name + "' unclassified");

    const Report &lie = record(m, run_fispo(m));
    c.equal(lie.termination == Termination::FullRank, true, "extended-Lie reaches full rank");
    c.equal(lie.iterations.back().k, 5, "extended-Lie terminating iteration");
    c.equal(lie.iterations.back().rank, 6, "extended-Lie final rank");

    Model frozen = m;
    frozen.u_deriv_bound[m.known_inputs[0]] = 0;
    const Report &stalled = record(frozen, run_fispo(frozen));
    c.equal(stalled.termination == Termination::RankStagnation, true, "constant input stagnates");
    c.equal(stalled.iterations.back().rank, 5, "constant-input plateau rank");
    auto v = verdict_map(stalled);
    c.equal(v.at("x1") == Verdict::Observable, true, "x1 stays observable");
    for (const auto &[name, verdict] : v)
        if (name != "x1")
            c.expect(verdict == Verdict::Unobservable,
                     "'" + name + "' should be unobservable under a constant input");
}

void glucose_insulin(Checker &c) {
    Model m = load_fixture("bolie");
    const std::vector<std::string> pos = {"q1", "p1", "p3", "V_p"};
    const std::vector<std::string> neg = {"q2", "p2", "p4"};

    const Report &lie = record(m, run_fispo(m));
    const Report &cascade = record(m, run_orcdf(m));
    for (const Report *rep : {&lie, &cascade}) {
        auto v = verdict_map(*rep);
        for (const std::string &name : pos)
            c.expect(positive(v.at(name)), name + " should be classified");
        for (const std::string &name : neg)
            c.expect(v.at(name) == Verdict::Unobservable, name + " should be unobservable");
    }

    Model frozen = m;
    frozen.u_deriv_bound[m.known_inputs[0]] = 0;
    const Report &stalled = record(frozen, run_fispo(frozen));
    c.equal(stalled.iterations.back().rank, 5, "constant-input rank");
    for (const auto &[name, verdict] : stalled.verdicts)
        c.expect(!positive(verdict), "'" + name + "' classified despite the constant input");
}

void two_mass(Checker &c) {
    Model m = load_fixture("2dof");

    const Report &lie = record(m, run_fispo(m));
    const Report &cascade = record(m, run_orcdf(m));
    for (const Report *rep : {&lie, &cascade}) {
        c.equal(rep->termination == Termination::FullRank, true, "constant-disturbance full rank");
        c.equal(rep->iterations.back().rank, 8, "constant-disturbance rank");
        c.equal(rep->iterations.back().k, 3, "derivative order at full rank");
    }
    c.expect(classified_at(cascade, 1, "m2"), "m2 should classify at cascade iteration 1");

    Symbol w = find_model_symbol(m, "F2");
    int prev_lie_k = 0;
    for (int s = 1; s <= 5; ++s) {
        Model varying = m;
        varying.w_deriv_bound[w] = s;

        const Report &orc = record(varying, run_orcdf(varying));
        c.expect(orc.iterations.back().k <= 4,
                 "cascade needs more than 4 iterations at disturbance order " + std::to_string(s));

        const Report &fis = record(varying, run_fispo(varying));
        const int final_k = fis.iterations.back().k;
        c.expect(final_k >= prev_lie_k,
                 "extended-Lie terminating iteration decreased at disturbance order " +
                   std::to_string(s));
        prev_lie_k = final_k;
    }
}

void viral_dynamics(Checker &c) {
    Model known = load_fixture("hiv_known");

    const Report &cascade = record(known, run_orcdf(known));
    c.equal(cascade.termination == Termination::FullRank, true, "measured input: cascade full rank");
    c.equal(cascade.iterations.back().k, 2, "cascade derivative order");
    c.equal(cascade.iterations.back().rank, 8, "cascade final rank");
    c.equal(cascade.iterations.back().rows, std::size_t{14}, "cascade kept rows");

    const Report &lie = record(known, run_fispo(known));
    c.equal(lie.termination == Termination::FullRank, true, "measured input: extended-Lie full rank");
    c.equal(lie.iterations.back().k, 3, "extended-Lie derivative order");
    c.equal(lie.iterations.back().rank, 8, "extended-Lie final rank");
    c.equal(lie.iterations.back().rows, std::size_t{8}, "extended-Lie rows");

    for (int k = 0; k <= 1; ++k)
        c.equal(lie.iterations[static_cast<std::size_t>(k)].rank,
                cascade.iterations[static_cast<std::size_t>(k)].rank,
                "rank mismatch at iteration " + std::to_string(k));

    // Unmeasured input: the two analyses build literally the same stage
    // matrices (hash-consing makes equality pointer equality).
    Model unknown = load_fixture("hiv_unknown");
    AffineDecomposition ad = affine_decompose(unknown);
    AugmentedSystem af = augment_affine(unknown, ad, max_w_bound(unknown));
    AugmentedSystem ag = augment(unknown, max_w_bound(unknown));
    std::vector<std::size_t> live = orcdf_live_directions(af);
    LieStage fs = fispo_seed(ag);
    LieStage os = orcdf_seed(af);
    for (int k = 0; k <= 2; ++k) {
        if (k > 0) {
            fs = fispo_step(fs, ag, unknown);
            os = orcdf_step(os, af, live);
        }
        ExprMatrix a = build_matrix_increment(fs);
        ExprMatrix b = build_matrix_increment(os);
        c.equal(a.rows(), b.rows(), "stage " + std::to_string(k) + " row count");
        c.equal(a.cols(), b.cols(), "stage " + std::to_string(k) + " column count");
        bool same = a.rows() == b.rows() && a.cols() == b.cols();
        for (std::size_t r = 0; same && r < a.rows(); ++r)
            for (std::size_t col = 0; same && col < a.cols(); ++col)
                same = a.at(r, col) == b.at(r, col);
        c.expect(same, "stage " + std::to_string(k) + " matrices differ symbolically");
    }
    record(unknown, run_fispo(unknown));
    record(unknown, run_orcdf(unknown));
}

void toggle_switch(Checker &c) {
    Model m = load_fixture("ts");

    bool refused = false;
    try {
        run_orcdf(m);
    } catch (const NotAffine &) {
        refused = true;
    }
    c.expect(refused, "cascade should refuse the input-nonlinear model");

    c.equal(m.n_u(), std::size_t{2}, "measured input count");
    for (Symbol u : m.known_inputs)
        c.expect(m.u_deriv_bound.count(u) != 0 && m.u_deriv_bound.at(u) == 1,
                 "fixture should bound input '" + u->name + "' at derivative order 1");

    const Report &lie = record(m, run_fispo(m));
    c.equal(lie.termination == Termination::FullRank, true, "extended-Lie completes");
    auto v = verdict_map(lie);
    for (Symbol p : m.parameters)
        c.expect(v.at(p->name) == Verdict::Identifiable,
                 "parameter '" + p->name + "' should be identifiable");
}

void signalling_pathway(Checker &c, bool stress) {
    // Fixed experimental conditions: the pinned five-stage profile.
    Model fixed = load_fixture("jakstat");
    AnalysisOptions opts;
    opts.kmax = 5;
    const Report &lie = record(fixed, run_fispo(fixed, opts));
    const std::vector<std::size_t> want_rows = {15, 30, 45, 60, 75, 90};
    const std::vector<int> want_ranks = {12, 20, 28, 34, 39, 43};
    c.equal(seq(rows_of(lie)), seq(want_rows), "extended-Lie rows");
    c.equal(seq(ranks_of(lie)), seq(want_ranks), "extended-Lie ranks");

    // Conditions as constant measured inputs: cascade iterations 1..2 are
    // mandatory, 3..5 run under --stress.
    Model inputs = load_fixture("jakstat_inputs");
    opts.kmax = stress ? 5 : 2;
    const Report &cascade = record(inputs, run_orcdf(inputs, opts));
    const std::vector<int> deep_ranks = {13, 24, 35, 40, 42, 44};
    const std::vector<std::size_t> deep_rows = {30, 180, 930, 4680, 23430, 117180};
    const std::size_t stages = cascade.iterations.size();
    c.equal(stages, std::size_t(stress ? 6 : 3), "cascade stage count");
    for (std::size_t i = 0; i < stages && i < deep_ranks.size(); ++i) {
        c.equal(cascade.iterations[i].rank, deep_ranks[i],
                "cascade rank at iteration " + std::to_string(i));
        c.equal(cascade.iterations[i].rows, deep_rows[i],
                "cascade rows at iteration " + std::to_string(i));
    }
}

void closed_model_equivalence(Checker &c) {
    std::mt19937 rng(20260816);
    for (int trial = 0; trial < 50; ++trial) {
        Model m = parse_model(model_generators::random_closed_model(rng),
                              "rand" + std::to_string(trial));

        AugmentedSystem aug_f = augment(m, max_w_bound(m));
        AffineDecomposition ad = affine_decompose(m);
        AugmentedSystem aug_o = augment_affine(m, ad, max_w_bound(m));
        c.expect(aug_f.basis == aug_o.basis, "trial " + std::to_string(trial) + ": bases differ");

        std::vector<std::size_t> live = orcdf_live_directions(aug_o);
        LieStage sf = fispo_seed(aug_f);
        LieStage so = orcdf_seed(aug_o);
        bool same = true;
        for (int k = 0; same && k <= 3; ++k) {
            if (k > 0) {
                sf = fispo_step(sf, aug_f, m);
                so = orcdf_step(so, aug_o, live);
            }
            ExprMatrix a = build_matrix_increment(sf);
            ExprMatrix b = build_matrix_increment(so);
            same = a.rows() == b.rows() && a.cols() == b.cols();
            for (std::size_t r = 0; same && r < a.rows(); ++r)
                for (std::size_t col = 0; same && col < a.cols(); ++col)
                    same = a.at(r, col) == b.at(r, col);
        }
        c.expect(same, "trial " + std::to_string(trial) + ": stage matrices differ");

        const Report &rf = record(m, run_fispo(m));
        const Report &ro = record(m, run_orcdf(m));
        bool agree = rf.iterations.size() == ro.iterations.size() &&
                     rf.verdicts == ro.verdicts && rf.termination == ro.termination;
        for (std::size_t i = 0; agree && i < rf.iterations.size(); ++i)
            agree = rf.iterations[i].rows == ro.iterations[i].rows &&
                    rf.iterations[i].rank == ro.iterations[i].rank;
        c.expect(agree, "trial " + std::to_string(trial) + ": reports differ");
    }
}

void row_count_formulas(Checker &c) {
    c.expect(!g_recorded.empty(), "no runs were recorded");
    std::size_t audited = 0;
    for (const auto &[m, rep] : g_recorded) {
        const std::size_t m_eff = m.n_outputs();
        const std::size_t dirs = 1 + m.n_u();
        for (const IterationRecord &it : rep.iterations) {
            ++audited;
            if (rep.algorithm == Algorithm::Fispo) {
                c.expect(it.pruned == 0, rep.model_name + ": extended-Lie pruned rows");
                c.expect(it.rows == m_eff * static_cast<std::size_t>(it.k + 1),
                         rep.model_name + ": extended-Lie rows at k=" + std::to_string(it.k));
            } else {
                std::size_t expectd = 0, block = m_eff;
                for (int j = 0; j <= it.k; ++j) {
                    block *= dirs;
                    expectd += block;
                }
                c.expect(it.rows + it.pruned == expectd,
                         rep.model_name + ": cascade kept+pruned rows at k=" + std::to_string(it.k));
            }
        }
    }
    c.expect(audited > 0, "no iteration records audited");
}

void oracle_agreement(Checker &c) {
    std::mt19937 rng(987654321);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<int>> A, C;
        const std::string text = model_generators::random_lti(rng, A, C);

        kalman_oracle::Mat Aq(A.size(), std::vector<mpq_class>(A.size()));
        kalman_oracle::Mat Cq(C.size(), std::vector<mpq_class>(A.size()));
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = 0; j < A.size(); ++j) Aq[i][j] = A[i][j];
        for (std::size_t i = 0; i < C.size(); ++i)
            for (std::size_t j = 0; j < A.size(); ++j) Cq[i][j] = C[i][j];
        const int expected = kalman_oracle::observable_rank(Aq, Cq);

        Model m = parse_model(text, "lti" + std::to_string(trial));
        const Report &rep = record(m, run_fispo(m));
        c.equal(rep.iterations.back().rank, expected,
                "trial " + std::to_string(trial) + " rank vs oracle");
    }
}

void derivative_validation(Checker &c) {
    const long double h = 1e-7L;
    const double tol = 1e-6;
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> unit(1.0, 2.0);

    for (const std::string &name :
         {"c2m", "bolie", "2dof", "hiv_known", "hiv_unknown", "ts", "jakstat"}) {
        Model m = load_fixture(name);
        std::vector<Symbol> syms;
        for (const auto *vec : {&m.states, &m.parameters, &m.known_inputs, &m.unknown_inputs})
            syms.insert(syms.end(), vec->begin(), vec->end());

        std::vector<Expr> exprs = m.dynamics;
        exprs.insert(exprs.end(), m.outputs.begin(), m.outputs.end());

        for (Expr e : exprs) {
            FloatPoint at;
            for (Symbol s : syms) at[s] = static_cast<long double>(unit(rng));
            for (Symbol s : syms) {
                const long double sym = eval_float(diff(e, s), at);
                FloatPoint hi = at, lo = at;
                hi[s] += h;
                lo[s] -= h;
                const long double num = (eval_float(e, hi) - eval_float(e, lo)) / (2 * h);
                const double scale = std::max<double>(
                  1.0, std::max(std::fabs(static_cast<double>(sym)),
                                std::fabs(static_cast<double>(num))));
                if (std::fabs(static_cast<double>(sym - num)) / scale >= tol)
                    c.notes.push_back(name + ": d/d" + s->name + " mismatch");
            }
        }
    }
}

void seed_determinism(Checker &c) {
    const std::uint64_t seeds[] = {12345, 271828, 31337};
    struct Case {
        std::string fixture;
        Algorithm alg;
        int kmax;
    };
    const std::vector<Case> cases = {
      {"c2m", Algorithm::Fispo, -1},     {"c2m", Algorithm::OrcDf, -1},
      {"bolie", Algorithm::Fispo, -1},   {"bolie", Algorithm::OrcDf, -1},
      {"2dof", Algorithm::Fispo, -1},    {"2dof", Algorithm::OrcDf, -1},
      {"hiv_known", Algorithm::Fispo, -1},   {"hiv_known", Algorithm::OrcDf, -1},
      {"hiv_unknown", Algorithm::Fispo, -1}, {"hiv_unknown", Algorithm::OrcDf, -1},
      {"ts", Algorithm::Fispo, -1},
      {"jakstat", Algorithm::Fispo, 1},  {"jakstat", Algorithm::OrcDf, 1},
      {"jakstat_inputs", Algorithm::Fispo, 1}, {"jakstat_inputs", Algorithm::OrcDf, 1},
    };

    for (const Case &cs : cases) {
        Model m = load_fixture(cs.fixture);
        std::vector<Report> runs;
        for (std::uint64_t seed : seeds) {
            AnalysisOptions opts;
            opts.algorithm = cs.alg;
            opts.kmax = cs.kmax;
            opts.rank.seed = seed;
            runs.push_back(analyze(m, opts));
        }
        record(m, runs[0]);

        const std::string tag =
          cs.fixture + "/" + (cs.alg == Algorithm::Fispo ? "fispo" : "orcdf");
        for (std::size_t i = 1; i < runs.size(); ++i) {
            bool same = runs[0].iterations.size() == runs[i].iterations.size() &&
                        runs[0].verdicts == runs[i].verdicts &&
                        runs[0].termination == runs[i].termination;
            for (std::size_t j = 0; same && j < runs[0].iterations.size(); ++j) {
                const IterationRecord &a = runs[0].iterations[j];
                const IterationRecord &b = runs[i].iterations[j];
                same = a.k == b.k && a.rows == b.rows && a.pruned == b.pruned &&
                       a.rank == b.rank && a.n_k == b.n_k &&
                       a.newly_classified == b.newly_classified;
            }
            c.expect(same, tag + ": results differ between seeds");
        }
    }
}

} // namespace

int main(int argc, char **argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <models-dir> [--stress]\n", argv[0]);
        return 2;
    }
    g_models = argv[1];
    bool stress = false;
    for (int i = 2; i < argc; ++i)
        if (std::string(argv[i]) == "--stress") stress = true;

    std::printf("acceptance checks — fixtures: %s%s\n\n", g_models.c_str(),
                stress ? " (stress: full deep iterations)" : "");

    criterion("1. two-compartment: cascade k=3, extended-Lie k=5, plateau rank 5", 10,
              two_compartment);
    criterion("2. glucose-insulin: observable split, constant-input rank 5", 10, glucose_insulin);
    criterion("3. two-mass chain: full rank 8 at k=3, disturbance-order sweep", 60, two_mass);
    criterion("4. viral dynamics: orders 2/3 to full rank 8, matched cascades", 30,
              viral_dynamics);
    criterion("5. toggle switch: cascade refuses, bounded inputs identify all", 900,
              toggle_switch);
    criterion(std::string("6. signalling pathway: pinned row/rank profile") +
                (stress ? " (full)" : " (mandatory slice)"),
              7200, [&](Checker &c) { signalling_pathway(c, stress); });
    criterion("7a. closed models: cascade == extended-Lie, 50 random models", 0,
              closed_model_equivalence);
    criterion("7c. linear systems: engine rank == exact oracle, 100 systems", 0, oracle_agreement);
    criterion("7d. symbolic derivatives match central finite differences", 0,
              derivative_validation);
    criterion("7e. identical reports across rank-engine seeds, all fixtures", 0, seed_determinism);
    criterion("7b. kept+pruned row counts follow the block formulas, all runs", 0,
              row_count_formulas);

    std::printf("\n%s (%d failure%s)\n", g_failures == 0 ? "ALL CHECKS PASSED" : "CHECKS FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
