/**
 * @file rational.hpp
 * @brief Overflow-checked 64-bit rational numbers for expression constants.
 *
 * Model constants and the coefficients produced by differentiation stay tiny;
 * anything that would leave the int64 range throws OverflowError instead of
 * wrapping. Rank computation never relies on this type growing — the exact
 * path works in a prime field.
 */
#pragma once

#include <cstdint>
#include <string>

#include "obskit/common.hpp"

namespace obskit {

class Rational {
  public:
    Rational() = default;
    Rational(long long n) : num_(n) {} // NOLINT: implicit by design, mirrors integer literals
    Rational(long long n, long long d) { assign(n, d); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational &a, const Rational &b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational &a, const Rational &b) { return a + (-b); }
    friend Rational operator*(const Rational &a, const Rational &b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational &a, const Rational &b) {
        if (b.num_ == 0) throw DivisionByZero("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }

    Rational &operator+=(const Rational &o) { return *this = *this + o; }
    Rational &operator-=(const Rational &o) { return *this = *this - o; }
    Rational &operator*=(const Rational &o) { return *this = *this * o; }
    Rational &operator/=(const Rational &o) { return *this = *this / o; }

    friend bool operator==(const Rational &a, const Rational &b) {
        return a.num_ == b.num_ && a.den_ == b.den_; // both canonical
    }
    friend bool operator!=(const Rational &a, const Rational &b) { return !(a == b); }
    friend bool operator<(const Rational &a, const Rational &b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }

    /// Integer power; e may be negative (inverts, throws DivisionByZero on 0).
    Rational pow(long long e) const {
        Rational base = *this;
        if (e < 0) {
            if (num_ == 0) throw DivisionByZero("0 raised to a negative power");
            base = Rational(den_, num_);
            e = -e;
        }
        Rational r(1);
        while (e > 0) {
            if (e & 1) r *= base;
            base = (e > 1) ? base * base : base;
            e >>= 1;
        }
        return r;
    }

    long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

  private:
    using i128 = __int128;

    static i128 gcd128(i128 a, i128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static std::int64_t narrow(i128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw OverflowError();
        return static_cast<std::int64_t>(v);
    }

    static Rational make(i128 n, i128 d) {
        if (d == 0) throw DivisionByZero("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        if (n == 0) return Rational();
        i128 g = gcd128(n, d);
        Rational r;
        r.num_ = narrow(n / g);
        r.den_ = narrow(d / g);
        return r;
    }

    void assign(long long n, long long d) { *this = make(n, d); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1; // invariant: > 0, coprime with num_
};

} // namespace obskit
