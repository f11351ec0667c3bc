/**
 * @file diff.hpp
 * @brief Symbolic partial differentiation over the expression DAG.
 *
 * Results are memoized process-wide on (node, symbol): Lie-derivative
 * cascades differentiate the same shared subterms thousands of times, and the
 * cache turns that into pointer lookups. Rules:
 *
 *   d(a + b)   = da + db
 *   d(a * b)   = da*b + a*db            (n-ary product rule)
 *   d(a ^ b)   = a^b * (db*ln(a) + b*da/a)
 *   d(exp(a))  = exp(a) * da
 *   d(ln(a))   = da / a
 */
#pragma once

#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "obskit/expr.hpp"

namespace obskit {

namespace detail {

struct DiffKey {
    Expr e;
    Symbol s;
    bool operator==(const DiffKey &o) const { return e == o.e && s == o.s; }
};

struct DiffKeyHash {
    std::size_t operator()(const DiffKey &k) const {
        return hash_mix(k.e->hash, reinterpret_cast<std::size_t>(k.s));
    }
};

class DiffCache {
  public:
    static DiffCache &instance() {
        static DiffCache c;
        return c;
    }
    bool lookup(const DiffKey &k, Expr &out) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(k);
        if (it == map_.end()) return false;
        out = it->second;
        return true;
    }
    void store(const DiffKey &k, Expr v) {
        std::lock_guard<std::mutex> lock(mu_);
        map_.emplace(k, v);
    }

  private:
    std::mutex mu_;
    std::unordered_map<DiffKey, Expr, DiffKeyHash> map_;
};

} // namespace detail

inline Expr diff(Expr e, Symbol s) {
    const detail::DiffKey key{e, s};
    Expr cached;
    auto &cache = detail::DiffCache::instance();
    if (cache.lookup(key, cached)) return cached;

    Expr result;
    switch (e->kind) {
    case ExprKind::Constant:
        result = zero();
        break;
    case ExprKind::Sym:
        result = (e->symbol == s) ? one() : zero();
        break;
    case ExprKind::Sum: {
        std::vector<Expr> parts;
        parts.reserve(e->args.size());
        for (Expr a : e->args) parts.push_back(diff(a, s));
        result = add(std::move(parts));
        break;
    }
    case ExprKind::Product: {
        std::vector<Expr> parts;
        parts.reserve(e->args.size());
        for (std::size_t i = 0; i < e->args.size(); ++i) {
            Expr di = diff(e->args[i], s);
            if (di->is_zero()) continue;
            std::vector<Expr> term = e->args;
            term[i] = di;
            parts.push_back(mul(std::move(term)));
        }
        result = add(std::move(parts));
        break;
    }
    case ExprKind::Power: {
        Expr base = e->args[0], ex = e->args[1];
        Expr db = diff(base, s);
        Expr dx = diff(ex, s);
        Expr t1 = dx->is_zero() ? zero() : mul2(dx, ln_of(base));
        Expr t2 = db->is_zero() ? zero() : mul2(ex, mul2(db, pow_of(base, integer(-1))));
        result = mul2(e, add2(t1, t2));
        break;
    }
    case ExprKind::Exp:
        result = mul2(e, diff(e->args[0], s));
        break;
    case ExprKind::Ln:
        result = mul2(diff(e->args[0], s), pow_of(e->args[0], integer(-1)));
        break;
    default:
        result = zero();
        break;
    }
    cache.store(key, result);
    return result;
}

/// Dense row-major Jacobian: entry (i, j) = d v[i] / d syms[j].
inline std::vector<std::vector<Expr>> jacobian_rows(const std::vector<Expr> &v,
                                                    const std::vector<Symbol> &syms) {
    std::vector<std::vector<Expr>> rows;
    rows.reserve(v.size());
    for (Expr e : v) {
        std::vector<Expr> row;
        row.reserve(syms.size());
        for (Symbol s : syms) row.push_back(diff(e, s));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace obskit
