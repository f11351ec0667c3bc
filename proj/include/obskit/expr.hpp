/**
 * @file expr.hpp
 * @brief Hash-consed immutable expression DAG with structural normalization.
 *
 * Every node is interned in a process-wide table: structurally equal
 * expressions are the same pointer, so equality is O(1) and Lie-derivative
 * cascades share subterms instead of copying them. The smart constructors
 * (add/mul/pow_of/exp_of/ln_of) are the only way to build nodes and always
 * return normalized results:
 *
 *   - sums and products are flattened, constant-folded, and sorted under a
 *     total structural order;
 *   - like terms merge in sums (2x + 3x -> 5x) and like bases merge in
 *     products (x * x^2 -> x^3, x * x^-1 -> 1);
 *   - x^0 -> 1, x^1 -> x, 0*a -> 0, 1*a -> a, exp(0) -> 1, ln(1) -> 0;
 *   - quotients are products with negative powers.
 *
 * Normalization is structural only — no distribution of products over sums
 * and no rational-function GCD; generic-point rank does not need it and
 * large models cannot afford it. expand() (see below) distributes on demand
 * for the few places that must certify a symbolic zero.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "obskit/common.hpp"
#include "obskit/rational.hpp"
#include "obskit/symbol.hpp"

namespace obskit {

enum class ExprKind : std::uint8_t { Constant, Sym, Sum, Product, Power, Exp, Ln };

class ExprNode;
using Expr = const ExprNode *;

class ExprNode {
  public:
    ExprKind kind;
    Rational value;          ///< payload when kind == Constant
    Symbol symbol = nullptr; ///< payload when kind == Sym
    std::vector<Expr> args;  ///< operands; Power stores {base, exponent}
    std::size_t hash = 0;    ///< structural, deterministic across runs

    bool is_constant() const { return kind == ExprKind::Constant; }
    bool is_zero() const { return is_constant() && value.is_zero(); }
    bool is_one() const { return is_constant() && value.is_one(); }
};

namespace detail {

inline std::size_t hash_mix(std::size_t h, std::size_t v) {
    // splitmix64-style avalanche of the running state xor the new value
    std::uint64_t x = static_cast<std::uint64_t>(h) ^ (static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return static_cast<std::size_t>(x);
}

inline std::size_t hash_string(const std::string &s) {
    std::size_t h = 1469598103934665603ull; // FNV offset
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::size_t node_hash(const ExprNode &n) {
    std::size_t h = hash_mix(0, static_cast<std::size_t>(n.kind));
    switch (n.kind) {
    case ExprKind::Constant:
        h = hash_mix(h, static_cast<std::size_t>(n.value.num()));
        h = hash_mix(h, static_cast<std::size_t>(n.value.den()));
        break;
    case ExprKind::Sym:
        h = hash_mix(h, hash_string(n.symbol->name));
        h = hash_mix(h, static_cast<std::size_t>(n.symbol->order));
        h = hash_mix(h, static_cast<std::size_t>(n.symbol->kind));
        break;
    default:
        for (Expr a : n.args) h = hash_mix(h, a->hash);
        break;
    }
    return h;
}

inline bool node_equal(const ExprNode &a, const ExprNode &b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Constant: return a.value == b.value;
    case ExprKind::Sym: return a.symbol == b.symbol;
    default: return a.args == b.args; // children interned: pointer equality
    }
}

/// Process-wide intern table; nodes live until process exit.
class ExprPool {
  public:
    static ExprPool &instance() {
        static ExprPool pool;
        return pool;
    }

    Expr intern(ExprNode &&candidate) {
        candidate.hash = node_hash(candidate);
        auto holder = std::make_unique<ExprNode>(std::move(candidate));
        std::lock_guard<std::mutex> lock(mu_);
        auto [it, inserted] = set_.insert(std::move(holder));
        return it->get();
    }

  private:
    struct Hash {
        std::size_t operator()(const std::unique_ptr<ExprNode> &p) const { return p->hash; }
    };
    struct Eq {
        bool operator()(const std::unique_ptr<ExprNode> &a, const std::unique_ptr<ExprNode> &b) const {
            return node_equal(*a, *b);
        }
    };
    std::mutex mu_;
    std::unordered_set<std::unique_ptr<ExprNode>, Hash, Eq> set_;
};

} // namespace detail

// --- leaf constructors -------------------------------------------------------

inline Expr constant(const Rational &v) {
    ExprNode n;
    n.kind = ExprKind::Constant;
    n.value = v;
    return detail::ExprPool::instance().intern(std::move(n));
}

inline Expr integer(long long v) { return constant(Rational(v)); }

inline Expr symref(Symbol s) {
    ExprNode n;
    n.kind = ExprKind::Sym;
    n.symbol = s;
    return detail::ExprPool::instance().intern(std::move(n));
}

inline Expr zero() { return integer(0); }
inline Expr one() { return integer(1); }

// --- total structural order --------------------------------------------------

inline int expr_cmp(Expr a, Expr b) {
    if (a == b) return 0;
    if (a->kind != b->kind)
        return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
    switch (a->kind) {
    case ExprKind::Constant:
        if (a->value == b->value) return 0;
        return a->value < b->value ? -1 : 1;
    case ExprKind::Sym:
        return symbol_cmp(a->symbol, b->symbol);
    default: {
        const std::size_t n = std::min(a->args.size(), b->args.size());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = expr_cmp(a->args[i], b->args[i]); c != 0) return c;
        if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
        return 0;
    }
    }
}

inline bool expr_less(Expr a, Expr b) { return expr_cmp(a, b) < 0; }

// --- smart constructors ------------------------------------------------------

inline Expr add(std::vector<Expr> terms);
inline Expr mul(std::vector<Expr> factors);
inline Expr pow_of(Expr base, Expr exponent);

inline Expr add2(Expr a, Expr b) { return add({a, b}); }
inline Expr mul2(Expr a, Expr b) { return mul({a, b}); }

inline Expr exp_of(Expr a) {
    if (a->is_zero()) return one();
    if (a->kind == ExprKind::Ln) return a->args[0];
    ExprNode n;
    n.kind = ExprKind::Exp;
    n.args = {a};
    return detail::ExprPool::instance().intern(std::move(n));
}

inline Expr ln_of(Expr a) {
    if (a->is_one()) return zero();
    if (a->kind == ExprKind::Exp) return a->args[0];
    ExprNode n;
    n.kind = ExprKind::Ln;
    n.args = {a};
    return detail::ExprPool::instance().intern(std::move(n));
}

namespace detail {

/// Split a normalized term into (rational coefficient, non-constant core).
/// The core is nullptr for pure constants.
inline std::pair<Rational, Expr> coeff_split(Expr e) {
    if (e->is_constant()) return {e->value, nullptr};
    if (e->kind == ExprKind::Product && e->args.front()->is_constant()) {
        const auto &a = e->args;
        if (a.size() == 2) return {a[0]->value, a[1]};
        ExprNode n;
        n.kind = ExprKind::Product;
        n.args.assign(a.begin() + 1, a.end()); // already sorted, constant-free
        return {a[0]->value, ExprPool::instance().intern(std::move(n))};
    }
    return {Rational(1), e};
}

/// Split a normalized factor into (base, exponent).
inline std::pair<Expr, Expr> base_split(Expr e) {
    if (e->kind == ExprKind::Power) return {e->args[0], e->args[1]};
    return {e, one()};
}

inline Expr intern_nary(ExprKind kind, std::vector<Expr> args) {
    ExprNode n;
    n.kind = kind;
    n.args = std::move(args);
    return ExprPool::instance().intern(std::move(n));
}

} // namespace detail

inline Expr add(std::vector<Expr> terms) {
    // Flatten nested sums.
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (Expr t : terms) {
        if (t->kind == ExprKind::Sum)
            flat.insert(flat.end(), t->args.begin(), t->args.end());
        else
            flat.push_back(t);
    }
    // Merge like terms by their non-constant core.
    Rational c(0);
    std::unordered_map<Expr, Rational> by_core;
    std::vector<Expr> core_order; // first-seen order, re-sorted below
    for (Expr t : flat) {
        auto [coeff, core] = detail::coeff_split(t);
        if (core == nullptr) {
            c += coeff;
            continue;
        }
        auto [it, fresh] = by_core.emplace(core, coeff);
        if (fresh)
            core_order.push_back(core);
        else
            it->second += coeff;
    }
    std::vector<Expr> out;
    out.reserve(core_order.size() + 1);
    if (!c.is_zero()) out.push_back(constant(c));
    for (Expr core : core_order) {
        const Rational &coeff = by_core.at(core);
        if (coeff.is_zero()) continue;
        if (coeff.is_one())
            out.push_back(core);
        else if (core->kind == ExprKind::Product) {
            std::vector<Expr> p;
            p.reserve(core->args.size() + 1);
            p.push_back(constant(coeff));
            p.insert(p.end(), core->args.begin(), core->args.end());
            out.push_back(detail::intern_nary(ExprKind::Product, std::move(p)));
        } else {
            out.push_back(detail::intern_nary(ExprKind::Product, {constant(coeff), core}));
        }
    }
    if (out.empty()) return zero();
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end(), expr_less);
    return detail::intern_nary(ExprKind::Sum, std::move(out));
}

inline Expr mul(std::vector<Expr> factors) {
    // Flatten nested products.
    std::vector<Expr> flat;
    flat.reserve(factors.size());
    for (Expr f : factors) {
        if (f->kind == ExprKind::Product)
            flat.insert(flat.end(), f->args.begin(), f->args.end());
        else
            flat.push_back(f);
    }
    // Merge exponents per base; accumulate the rational coefficient.
    Rational c(1);
    std::unordered_map<Expr, std::vector<Expr>> by_base;
    std::vector<Expr> base_order;
    for (Expr f : flat) {
        if (f->is_constant()) {
            if (f->value.is_zero()) return zero();
            c *= f->value;
            continue;
        }
        auto [base, exponent] = detail::base_split(f);
        auto [it, fresh] = by_base.emplace(base, std::vector<Expr>{});
        if (fresh) base_order.push_back(base);
        it->second.push_back(exponent);
    }
    std::vector<Expr> out;
    out.reserve(base_order.size() + 1);
    for (Expr base : base_order) {
        auto &exps = by_base.at(base);
        Expr e = exps.size() == 1 ? exps.front() : add(std::move(exps));
        Expr factor = pow_of(base, e);
        if (factor->is_constant()) {
            if (factor->value.is_zero()) return zero();
            c *= factor->value;
        } else if (factor->kind == ExprKind::Product) {
            // pow_of may have split a collected power back into factors
            for (Expr g : factor->args) {
                if (g->is_constant())
                    c *= g->value;
                else
                    out.push_back(g);
            }
        } else {
            out.push_back(factor);
        }
    }
    if (c.is_zero()) return zero();
    if (out.empty()) return constant(c);
    std::sort(out.begin(), out.end(), expr_less);
    if (c.is_one()) {
        if (out.size() == 1) return out.front();
        return detail::intern_nary(ExprKind::Product, std::move(out));
    }
    std::vector<Expr> with_c;
    with_c.reserve(out.size() + 1);
    with_c.push_back(constant(c));
    with_c.insert(with_c.end(), out.begin(), out.end());
    return detail::intern_nary(ExprKind::Product, std::move(with_c));
}

inline Expr pow_of(Expr base, Expr exponent) {
    if (exponent->is_zero()) return one(); // 0^0 -> 1 by convention (generic treatment)
    if (exponent->is_one()) return base;
    if (base->is_zero()) {
        if (exponent->is_constant() && exponent->value < Rational(0))
            throw DivisionByZero("0 raised to a negative power");
        return zero(); // generic: positive or symbolic exponent
    }
    if (base->is_one()) return one();
    if (base->is_constant() && exponent->is_constant() && exponent->value.is_integer()) {
        try {
            return constant(base->value.pow(exponent->value.num()));
        } catch (const OverflowError &) {
            // keep symbolic; the modular evaluator handles it exactly
        }
    }
    if (base->kind == ExprKind::Power)
        return pow_of(base->args[0], mul2(base->args[1], exponent));
    if (base->kind == ExprKind::Product) {
        std::vector<Expr> parts;
        parts.reserve(base->args.size());
        for (Expr f : base->args) parts.push_back(pow_of(f, exponent));
        return mul(std::move(parts));
    }
    return detail::intern_nary(ExprKind::Power, {base, exponent});
}

inline Expr neg(Expr a) { return mul2(integer(-1), a); }
inline Expr sub(Expr a, Expr b) { return add2(a, neg(b)); }
inline Expr div_of(Expr a, Expr b) {
    if (b->is_zero()) throw DivisionByZero("division by symbolically-zero expression");
    return mul2(a, pow_of(b, integer(-1)));
}

// --- expansion (on-demand distribution, for symbolic-zero certification) -----

/// Distribute products over sums and expand small positive integer powers of
/// sums. Used where a structural zero must be certified (affine residuals);
/// not part of the canonical form.
inline Expr expand(Expr e) {
    switch (e->kind) {
    case ExprKind::Constant:
    case ExprKind::Sym: return e;
    case ExprKind::Sum: {
        std::vector<Expr> parts;
        parts.reserve(e->args.size());
        for (Expr a : e->args) parts.push_back(expand(a));
        return add(std::move(parts));
    }
    case ExprKind::Product: {
        // Running sum-of-products accumulator.
        std::vector<Expr> acc{one()};
        for (Expr a : e->args) {
            Expr f = expand(a);
            std::vector<Expr> terms =
              f->kind == ExprKind::Sum ? f->args : std::vector<Expr>{f};
            std::vector<Expr> next;
            next.reserve(acc.size() * terms.size());
            for (Expr x : acc)
                for (Expr t : terms) next.push_back(mul2(x, t));
            acc = std::move(next);
        }
        return add(std::move(acc));
    }
    case ExprKind::Power: {
        Expr base = expand(e->args[0]);
        Expr ex = expand(e->args[1]);
        constexpr long long kMaxExpandedPower = 6;
        if (base->kind == ExprKind::Sum && ex->is_constant() && ex->value.is_integer() &&
            ex->value.num() > 1 && ex->value.num() <= kMaxExpandedPower) {
            // Distribute term-by-term; multiplying the whole sum by itself
            // would just re-collect into the power being expanded.
            std::vector<Expr> acc{one()};
            for (long long i = 0; i < ex->value.num(); ++i) {
                std::vector<Expr> next;
                next.reserve(acc.size() * base->args.size());
                for (Expr x : acc)
                    for (Expr t : base->args) next.push_back(mul2(x, t));
                acc = std::move(next);
            }
            return add(std::move(acc));
        }
        return pow_of(base, ex);
    }
    case ExprKind::Exp: return exp_of(expand(e->args[0]));
    case ExprKind::Ln: return ln_of(expand(e->args[0]));
    }
    return e; // unreachable
}

// --- printing ----------------------------------------------------------------

inline std::string to_string(Expr e);

namespace detail {

inline std::string print_factor(Expr e);

inline std::string print_power(Expr e) {
    Expr base = e->args[0], ex = e->args[1];
    std::string b;
    const bool simple_base =
      (base->kind == ExprKind::Sym) || (base->kind == ExprKind::Exp) ||
      (base->kind == ExprKind::Ln) ||
      (base->is_constant() && base->value.is_integer() && !(base->value < Rational(0)));
    b = simple_base ? to_string(base) : "(" + to_string(base) + ")";
    std::string x;
    const bool simple_exp =
      (ex->kind == ExprKind::Sym) ||
      (ex->is_constant() && ex->value.is_integer() && !(ex->value < Rational(0)));
    x = simple_exp ? to_string(ex) : "(" + to_string(ex) + ")";
    return b + "^" + x;
}

inline std::string print_factor(Expr e) {
    if (e->kind == ExprKind::Sum) return "(" + to_string(e) + ")";
    if (e->kind == ExprKind::Power) return print_power(e);
    if (e->is_constant() && !e->value.is_integer()) return "(" + e->value.str() + ")";
    if (e->is_constant() && e->value < Rational(0)) return "(" + e->value.str() + ")";
    return to_string(e);
}

} // namespace detail

inline std::string to_string(Expr e) {
    switch (e->kind) {
    case ExprKind::Constant: return e->value.str();
    case ExprKind::Sym: return e->symbol->display();
    case ExprKind::Exp: return "exp(" + to_string(e->args[0]) + ")";
    case ExprKind::Ln: return "ln(" + to_string(e->args[0]) + ")";
    case ExprKind::Power: return detail::print_power(e);
    case ExprKind::Product: {
        auto [coeff, core] = detail::coeff_split(e);
        std::string s;
        if (coeff == Rational(-1))
            s = "-";
        else if (!coeff.is_one())
            s = detail::print_factor(constant(coeff)) + "*";
        if (core == nullptr) return coeff.str(); // pure-constant product: defensive only
        if (core->kind == ExprKind::Product) {
            bool first = true;
            for (Expr f : core->args) {
                if (!first) s += "*";
                s += detail::print_factor(f);
                first = false;
            }
        } else {
            s += detail::print_factor(core);
        }
        return s;
    }
    case ExprKind::Sum: {
        std::string s;
        bool first = true;
        for (Expr t : e->args) {
            auto [coeff, core] = detail::coeff_split(t);
            const bool negative = coeff < Rational(0);
            if (first) {
                s += to_string(t);
                first = false;
                continue;
            }
            if (negative) {
                Rational flipped = -coeff;
                Expr positive = core == nullptr ? constant(flipped)
                                                : mul2(constant(flipped), core);
                s += " - " + to_string(positive);
            } else {
                s += " + " + to_string(t);
            }
        }
        return s;
    }
    }
    return "?"; // unreachable
}

} // namespace obskit
