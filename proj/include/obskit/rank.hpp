/**
 * @file rank.hpp
 * @brief Generic-point rank of symbolic matrices.
 *
 * Symbol values are drawn from hashes of (seed, symbol identity), so results
 * are deterministic under any row/column construction order and any thread
 * count. Rational matrices are ranked exactly over the field F_p with
 * p = 2^61 - 1; matrices containing exp/ln or non-integer powers fall back to
 * long-double evaluation plus singular value decomposition.
 *
 * The IncrementalRank engine keeps per-trial echelon bases so that each new
 * block of rows costs one round of eliminations, and rank-without-a-column
 * queries run against the small pivot basis instead of the full matrix.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "obskit/common.hpp"
#include "obskit/eval.hpp"
#include "obskit/expr.hpp"
#include "obskit/matrix.hpp"

namespace obskit {

enum class RankMethod { ExactModular, FloatingSVD };

struct RankConfig {
    int trials = 3;               ///< independent evaluation points per query
    std::uint64_t seed = 12345;   ///< master seed; fully determines all points
    double rel_tol = 1e-9;        ///< singular value cutoff relative to the largest
    int max_reseeds = 3;          ///< full-replay retries after degenerate points
    unsigned threads = 0;         ///< worker threads for numeric work; 0 = hardware
};

struct TrialRecord {
    std::uint64_t seed = 0;
    std::string point_class;      ///< "modular", "float", or "degenerate"
    int rank = 0;
};

struct RankResult {
    int rank = 0;
    std::vector<TrialRecord> trials;
    RankMethod method = RankMethod::ExactModular;
};

namespace detail {

// ---------------------------------------------------------------- hashing

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Trial seed for trial index t of a (possibly reseeded) master seed.
inline std::uint64_t trial_seed(std::uint64_t master, int t) {
    return splitmix64(master ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(t + 1)));
}

/// Order-independent per-symbol hash mixed with the trial seed.
inline std::uint64_t symbol_hash(std::uint64_t tseed, Symbol s) {
    std::uint64_t h = fnv1a(s->name);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(s->order) * 0x9e3779b97f4a7c15ull));
    h = splitmix64(h ^ static_cast<std::uint64_t>(s->kind));
    return splitmix64(tseed ^ h);
}

// ----------------------------------------------------- F_p, p = 2^61 - 1

inline constexpr std::uint64_t kPrime = 2305843009213693951ull;

inline std::uint64_t addm(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;  // both < 2^61, no overflow in 64 bits
    return s >= kPrime ? s - kPrime : s;
}

inline std::uint64_t subm(std::uint64_t a, std::uint64_t b) {
    return a >= b ? a - b : a + kPrime - b;
}

inline std::uint64_t mulm(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % kPrime);
}

inline std::uint64_t powm(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    while (exp) {
        if (exp & 1) r = mulm(r, base);
        base = mulm(base, base);
        exp >>= 1;
    }
    return r;
}

/// Thrown internally when a trial's point hits a pole (zero denominator or
/// zero base with negative exponent); the trial is marked degenerate.
struct DegeneratePoint {};

inline std::uint64_t invm(std::uint64_t a) {
    if (a == 0) throw DegeneratePoint{};
    return powm(a, kPrime - 2);
}

inline std::uint64_t rational_mod(const Rational &r) {
    std::int64_t n = r.num() % static_cast<std::int64_t>(kPrime);
    if (n < 0) n += static_cast<std::int64_t>(kPrime);
    std::uint64_t d = static_cast<std::uint64_t>(r.den()) % kPrime;
    return mulm(static_cast<std::uint64_t>(n), invm(d));
}

/// Lazily populated evaluation point over F_p; residues land in [2, p-2].
struct ModPoint {
    std::uint64_t tseed = 0;
    std::unordered_map<Symbol, std::uint64_t> values;

    std::uint64_t get(Symbol s) {
        auto it = values.find(s);
        if (it != values.end()) return it->second;
        std::uint64_t v = 2 + symbol_hash(tseed, s) % (kPrime - 3);
        values.emplace(s, v);
        return v;
    }
};

inline std::uint64_t eval_mod(Expr e, ModPoint &point,
                              std::unordered_map<Expr, std::uint64_t> &memo) {
    auto it = memo.find(e);
    if (it != memo.end()) return it->second;
    std::uint64_t v = 0;
    switch (e->kind) {
        case ExprKind::Constant: v = rational_mod(e->value); break;
        case ExprKind::Sym: v = point.get(e->symbol); break;
        case ExprKind::Sum: {
            for (Expr a : e->args) v = addm(v, eval_mod(a, point, memo));
            break;
        }
        case ExprKind::Product: {
            v = 1;
            for (Expr a : e->args) v = mulm(v, eval_mod(a, point, memo));
            break;
        }
        case ExprKind::Power: {
            Expr ex = e->args[1];
            if (ex->kind != ExprKind::Constant || !ex->value.is_integer())
                throw NonRationalNode(to_string(e));
            std::uint64_t base = eval_mod(e->args[0], point, memo);
            long long n = ex->value.num();
            if (n < 0) {
                base = invm(base);  // throws DegeneratePoint on base == 0
                n = -n;
            }
            // Fermat: exponents reduce mod p-1 for nonzero bases.
            v = base == 0 ? 0 : powm(base, static_cast<std::uint64_t>(n) % (kPrime - 1));
            break;
        }
        case ExprKind::Exp:
        case ExprKind::Ln: throw NonRationalNode(to_string(e));
    }
    memo.emplace(e, v);
    return v;
}

/// Lazily populated floating evaluation point; values land in [1, 2).
struct FloatPointSource {
    std::uint64_t tseed = 0;
    FloatPoint values;

    long double get(Symbol s) {
        auto it = values.find(s);
        if (it != values.end()) return it->second;
        long double v =
          1.0L + static_cast<long double>(symbol_hash(tseed, s) >> 11) / 9007199254740992.0L;
        values.emplace(s, v);
        return v;
    }
};

inline long double eval_float_point(Expr e, FloatPointSource &point,
                                    std::unordered_map<Expr, long double> &memo) {
    auto it = memo.find(e);
    if (it != memo.end()) return it->second;
    long double v = 0;
    switch (e->kind) {
        case ExprKind::Constant: v = e->value.to_long_double(); break;
        case ExprKind::Sym: v = point.get(e->symbol); break;
        case ExprKind::Sum: {
            for (Expr a : e->args) v += eval_float_point(a, point, memo);
            break;
        }
        case ExprKind::Product: {
            v = 1;
            for (Expr a : e->args) v *= eval_float_point(a, point, memo);
            break;
        }
        case ExprKind::Power:
            v = std::pow(eval_float_point(e->args[0], point, memo),
                         eval_float_point(e->args[1], point, memo));
            break;
        case ExprKind::Exp: v = std::exp(eval_float_point(e->args[0], point, memo)); break;
        case ExprKind::Ln: v = std::log(eval_float_point(e->args[0], point, memo)); break;
    }
    if (!std::isfinite(static_cast<double>(v))) throw DegeneratePoint{};
    memo.emplace(e, v);
    return v;
}

// ------------------------------------------------------------ parallelism

/// Index-parallel loop; exceptions from workers are rethrown in the caller.
/// Work distribution does not affect results (each index is independent).
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (std::thread &t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// -------------------------------------------------------- per-trial state

/// Echelon basis over F_p, extended row by row. Pivot rows are normalized to
/// a leading 1, so eliminating a fresh row against them needs no divisions.
struct ModTrial {
    std::uint64_t tseed = 0;
    ModPoint point;
    std::unordered_map<Expr, std::uint64_t> memo;
    std::vector<std::vector<std::uint64_t>> pivot_rows;
    std::vector<std::size_t> pivot_cols;
    std::size_t cols = 0;
    bool dead = false;

    void extend_cols(std::size_t new_cols) {
        cols = new_cols;
        for (auto &r : pivot_rows) r.resize(new_cols, 0);
    }

    void add_row(std::vector<std::uint64_t> v) {
        v.resize(cols, 0);
        for (std::size_t i = 0; i < pivot_rows.size(); ++i) {
            std::uint64_t c = v[pivot_cols[i]];
            if (c == 0) continue;
            const auto &p = pivot_rows[i];
            for (std::size_t j = pivot_cols[i]; j < cols; ++j)
                if (p[j] != 0) v[j] = subm(v[j], mulm(c, p[j]));
        }
        std::size_t lead = cols;
        for (std::size_t j = 0; j < cols; ++j)
            if (v[j] != 0) {
                lead = j;
                break;
            }
        if (lead == cols) return;  // dependent row
        std::uint64_t inv = invm(v[lead]);
        for (std::size_t j = lead; j < cols; ++j)
            if (v[j] != 0) v[j] = mulm(v[j], inv);
        pivot_rows.push_back(std::move(v));
        pivot_cols.push_back(lead);
    }

    int rank() const { return static_cast<int>(pivot_rows.size()); }

    /// Rank of the pivot basis with one column deleted (spans the row space,
    /// so this equals the full matrix's rank without that column).
    int rank_without(std::size_t col) const {
        std::vector<std::vector<std::uint64_t>> rows = pivot_rows;
        std::size_t r = 0;
        for (std::size_t j = 0; j < cols && r < rows.size(); ++j) {
            if (j == col) continue;
            std::size_t pivot = rows.size();
            for (std::size_t i = r; i < rows.size(); ++i)
                if (rows[i][j] != 0) {
                    pivot = i;
                    break;
                }
            if (pivot == rows.size()) continue;
            std::swap(rows[r], rows[pivot]);
            std::uint64_t inv = invm(rows[r][j]);
            for (std::size_t i = r + 1; i < rows.size(); ++i) {
                std::uint64_t c = rows[i][j];
                if (c == 0) continue;
                std::uint64_t f = mulm(c, inv);
                for (std::size_t jj = j; jj < cols; ++jj)
                    if (jj != col && rows[r][jj] != 0)
                        rows[i][jj] = subm(rows[i][jj], mulm(f, rows[r][jj]));
            }
            ++r;
        }
        return static_cast<int>(r);
    }
};

/// Floating trial: evaluated rows are kept whole and ranked by SVD.
struct FloatTrial {
    std::uint64_t tseed = 0;
    FloatPointSource point;
    std::unordered_map<Expr, long double> memo;
    std::vector<std::vector<long double>> rows;
    std::size_t cols = 0;
    bool dead = false;

    void extend_cols(std::size_t new_cols) {
        cols = new_cols;
        for (auto &r : rows) r.resize(new_cols, 0.0L);
    }

    int svd_rank(double rel_tol, std::size_t skip_col) const {
        if (rows.empty() || cols == 0) return 0;
        const std::size_t ncols = skip_col < cols ? cols - 1 : cols;
        if (ncols == 0) return 0;
        Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> m(rows.size(), ncols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::size_t jj = 0;
            for (std::size_t j = 0; j < cols; ++j) {
                if (j == skip_col) continue;
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj++)) = rows[i][j];
            }
        }
        Eigen::JacobiSVD<decltype(m)> svd(m);
        const auto &sv = svd.singularValues();
        if (sv.size() == 0) return 0;
        const long double cutoff = static_cast<long double>(rel_tol) * sv(0);
        int r = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > cutoff) ++r;
        return r;
    }

    int rank(double rel_tol) const { return svd_rank(rel_tol, cols); }
};

} // namespace detail

/// Chooses the evaluation field for a matrix: exact modular arithmetic when
/// every entry is rational, floating SVD otherwise.
inline RankMethod choose_rank_method(const ExprMatrix &m) {
    for (Expr e : m.data())
        if (!is_rational_expr(e)) return RankMethod::FloatingSVD;
    return RankMethod::ExactModular;
}

/// Incremental generic-point rank over a growing matrix. Rows and columns
/// are appended across calls; every added row is archived symbolically so a
/// degenerate evaluation point can be replaced by replaying the whole matrix
/// at fresh points.
class IncrementalRank {
  public:
    IncrementalRank(RankMethod method, const RankConfig &cfg, std::size_t cols)
        : method_(method), cfg_(cfg), cols_(cols) {
        if (cfg_.trials < 1) cfg_.trials = 1;
        reset_trials();
    }

    RankMethod method() const { return method_; }
    std::size_t cols() const { return cols_; }

    void extend_cols(std::size_t new_cols) {
        if (new_cols < cols_) return;
        cols_ = new_cols;
        for (auto &t : mod_trials_) t.extend_cols(new_cols);
        for (auto &t : float_trials_) t.extend_cols(new_cols);
    }

    /// Appends a block of rows (each padded to the current width) and returns
    /// the updated rank. Throws DegenerateEvaluation if every trial keeps
    /// hitting poles after max_reseeds replays.
    int add_rows(const std::vector<std::vector<Expr>> &rows) {
        for (const auto &r : rows) archive_.push_back(r);
        append_to_trials(rows);
        while (all_dead()) {
            ++reseeds_;
            if (reseeds_ > cfg_.max_reseeds) throw DegenerateEvaluation();
            reset_trials();
            replay_archive();
        }
        return rank();
    }

    int add_rows(const ExprMatrix &m) {
        std::vector<std::vector<Expr>> rows;
        rows.reserve(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
        return add_rows(rows);
    }

    int rank() const {
        int r = 0;
        if (method_ == RankMethod::ExactModular) {
            for (const auto &t : mod_trials_)
                if (!t.dead) r = std::max(r, t.rank());
        } else {
            for (const auto &t : float_trials_)
                if (!t.dead) r = std::max(r, t.rank(cfg_.rel_tol));
        }
        return r;
    }

    /// Rank after deleting each queried column, aggregated over trials the
    /// same way rank() is. Queries run in parallel; results do not depend on
    /// the schedule.
    std::vector<int> ranks_without(const std::vector<std::size_t> &query) {
        std::vector<int> without(query.size(), 0);
        std::vector<std::pair<std::size_t, int>> plan;  // (query index, trial index)
        plan.reserve(query.size() * static_cast<std::size_t>(live_trials()));
        for (std::size_t q = 0; q < query.size(); ++q)
            for (int t = 0; t < cfg_.trials; ++t)
                if (!trial_dead(t)) plan.emplace_back(q, t);
        std::vector<int> per_job(plan.size(), 0);
        detail::parallel_for(plan.size(), cfg_.threads, [&](std::size_t i) {
            const auto [q, t] = plan[i];
            per_job[i] = method_ == RankMethod::ExactModular
                           ? mod_trials_[static_cast<std::size_t>(t)].rank_without(query[q])
                           : float_trials_[static_cast<std::size_t>(t)].svd_rank(cfg_.rel_tol,
                                                                                query[q]);
        });
        for (std::size_t i = 0; i < plan.size(); ++i)
            without[plan[i].first] = std::max(without[plan[i].first], per_job[i]);
        return without;
    }

    /// For each queried column: does deleting it lower the rank?
    std::vector<bool> columns_drop_rank(const std::vector<std::size_t> &query) {
        const int full = rank();
        std::vector<int> without = ranks_without(query);
        std::vector<bool> drops(query.size());
        for (std::size_t q = 0; q < query.size(); ++q) drops[q] = without[q] < full;
        return drops;
    }

    RankResult result() const {
        RankResult res;
        res.method = method_;
        res.rank = rank();
        for (int t = 0; t < cfg_.trials; ++t) {
            TrialRecord rec;
            rec.seed = detail::trial_seed(master_seed(), t);
            if (trial_dead(t)) {
                rec.point_class = "degenerate";
                rec.rank = 0;
            } else if (method_ == RankMethod::ExactModular) {
                rec.point_class = "modular";
                rec.rank = mod_trials_[static_cast<std::size_t>(t)].rank();
            } else {
                rec.point_class = "float";
                rec.rank = float_trials_[static_cast<std::size_t>(t)].rank(cfg_.rel_tol);
            }
            res.trials.push_back(rec);
        }
        return res;
    }

  private:
    std::uint64_t master_seed() const { return cfg_.seed + 1000ull * static_cast<std::uint64_t>(reseeds_); }

    bool trial_dead(int t) const {
        return method_ == RankMethod::ExactModular ? mod_trials_[static_cast<std::size_t>(t)].dead
                                                   : float_trials_[static_cast<std::size_t>(t)].dead;
    }

    int live_trials() const {
        int n = 0;
        for (int t = 0; t < cfg_.trials; ++t)
            if (!trial_dead(t)) ++n;
        return n;
    }

    bool all_dead() const { return live_trials() == 0; }

    void reset_trials() {
        mod_trials_.clear();
        float_trials_.clear();
        if (method_ == RankMethod::ExactModular) {
            mod_trials_.resize(static_cast<std::size_t>(cfg_.trials));
            for (int t = 0; t < cfg_.trials; ++t) {
                mod_trials_[static_cast<std::size_t>(t)].tseed = detail::trial_seed(master_seed(), t);
                mod_trials_[static_cast<std::size_t>(t)].point.tseed =
                  mod_trials_[static_cast<std::size_t>(t)].tseed;
                mod_trials_[static_cast<std::size_t>(t)].cols = cols_;
            }
        } else {
            float_trials_.resize(static_cast<std::size_t>(cfg_.trials));
            for (int t = 0; t < cfg_.trials; ++t) {
                float_trials_[static_cast<std::size_t>(t)].tseed = detail::trial_seed(master_seed(), t);
                float_trials_[static_cast<std::size_t>(t)].point.tseed =
                  float_trials_[static_cast<std::size_t>(t)].tseed;
                float_trials_[static_cast<std::size_t>(t)].cols = cols_;
            }
        }
    }

    /// Evaluates a row block in every live trial (trials run in parallel; a
    /// pole marks just that trial dead).
    void append_to_trials(const std::vector<std::vector<Expr>> &rows) {
        detail::parallel_for(static_cast<std::size_t>(cfg_.trials), cfg_.threads, [&](std::size_t t) {
            if (method_ == RankMethod::ExactModular) {
                detail::ModTrial &trial = mod_trials_[t];
                if (trial.dead) return;
                try {
                    for (const auto &row : rows) {
                        std::vector<std::uint64_t> v(cols_, 0);
                        for (std::size_t j = 0; j < row.size(); ++j)
                            v[j] = detail::eval_mod(row[j], trial.point, trial.memo);
                        trial.add_row(std::move(v));
                    }
                } catch (const detail::DegeneratePoint &) {
                    trial.dead = true;
                }
            } else {
                detail::FloatTrial &trial = float_trials_[t];
                if (trial.dead) return;
                try {
                    for (const auto &row : rows) {
                        std::vector<long double> v(cols_, 0.0L);
                        for (std::size_t j = 0; j < row.size(); ++j)
                            v[j] = detail::eval_float_point(row[j], trial.point, trial.memo);
                        trial.rows.push_back(std::move(v));
                    }
                } catch (const detail::DegeneratePoint &) {
                    trial.dead = true;
                }
            }
        });
    }

    void replay_archive() {
        append_to_trials(archive_);
    }

    RankMethod method_;
    RankConfig cfg_;
    std::size_t cols_ = 0;
    int reseeds_ = 0;
    std::vector<std::vector<Expr>> archive_;
    std::vector<detail::ModTrial> mod_trials_;
    std::vector<detail::FloatTrial> float_trials_;
};

/// One-shot generic-point rank of a symbolic matrix.
inline RankResult generic_rank(const ExprMatrix &m, const RankConfig &cfg = {}) {
    IncrementalRank engine(choose_rank_method(m), cfg, m.cols());
    engine.add_rows(m);
    return engine.result();
}

/// True iff deleting column col leaves the matrix with rank below base_rank.
inline bool column_elimination_test(const ExprMatrix &m, int base_rank, std::size_t col,
                                    const RankConfig &cfg = {}) {
    IncrementalRank engine(choose_rank_method(m), cfg, m.cols());
    engine.add_rows(m);
    return engine.ranks_without({col})[0] < base_rank;
}

} // namespace obskit
