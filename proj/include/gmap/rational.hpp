#pragma once

/**
 * rational.hpp
 * ------------
 * Exact arbitrary-precision rational arithmetic.
 *
 * Design:
 * - Always stored in lowest terms, denominator > 0, zero is 0/1.
 * - Total order consistent with the real order.
 * - Dyadic view: a rational is dyadic when its denominator is a power of two.
 *   Dyadics are what the group/monoid machinery cares about (breakpoints,
 *   slopes ±2^k); general rationals appear only as inputs to approximation.
 *
 * The integer backbone is boost::multiprecision::cpp_int; iterated map
 * composition squares denominators, so fixed-width integers are not an option.
 */

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <stdexcept>
#include <string>

namespace gmap {

using Int = boost::multiprecision::cpp_int;

class Rational {
    Int num_;  // carries the sign
    Int den_;  // always > 0

    void reduce() {
        if (den_ == 0)
            throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        Int g = boost::multiprecision::gcd(num_ < 0 ? Int(-num_) : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

public:
    Rational() : num_(0), den_(1) {}
    Rational(long n) : num_(n), den_(1) {}
    Rational(const Int& n) : num_(n), den_(1) {}
    Rational(const Int& n, const Int& d) : num_(n), den_(d) { reduce(); }
    Rational(long n, long d) : num_(n), den_(d) { reduce(); }

    const Int& num() const { return num_; }
    const Int& den() const { return den_; }

    /// p / 2^k
    static Rational dyadic(const Int& p, unsigned long k) {
        Int d = 1;
        d <<= k;
        return Rational(p, d);
    }

    /// 2^k for any integer k (negative gives 1/2^|k|).
    static Rational pow2(long k) {
        Int d = 1;
        if (k >= 0) {
            d <<= (unsigned long)k;
            return Rational(d);
        }
        d <<= (unsigned long)(-k);
        return Rational(Int(1), d);
    }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0)
            throw std::domain_error("Rational: division by zero");
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rational& operator+=(const Rational& b) { return *this = *this + b; }
    Rational& operator-=(const Rational& b) { return *this = *this - b; }
    Rational& operator*=(const Rational& b) { return *this = *this * b; }
    Rational& operator/=(const Rational& b) { return *this = *this / b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    /// Denominator is a power of two (0 and integers count as dyadic).
    bool is_dyadic() const {
        Int d = den_;
        // d > 0 and d & (d-1) == 0  <=>  power of two
        return (d & (d - 1)) == 0;
    }

    /// For dyadic values: the minimal k with (value * 2^k) an integer.
    /// Throws for non-dyadic values.
    unsigned long dyadic_exponent() const {
        if (!is_dyadic())
            throw std::domain_error("Rational: dyadic_exponent of non-dyadic");
        return boost::multiprecision::lsb(den_);  // den = 2^k, k = index of its single bit
    }

    /// k when the value equals 2^k exactly; nullopt otherwise. Requires value > 0.
    std::optional<long> log2_exact() const {
        if (sign() <= 0)
            throw std::domain_error("Rational: log2_exact of non-positive value");
        if (num_ == 1) {
            if ((den_ & (den_ - 1)) == 0)
                return -(long)boost::multiprecision::lsb(den_);
            return std::nullopt;
        }
        if (den_ == 1) {
            if ((num_ & (num_ - 1)) == 0)
                return (long)boost::multiprecision::lsb(num_);
            return std::nullopt;
        }
        return std::nullopt;
    }

    /// floor(log2(value)) for value > 0, exact.
    long floor_log2() const {
        if (sign() <= 0)
            throw std::domain_error("Rational: floor_log2 of non-positive value");
        long k = (long)boost::multiprecision::msb(num_) - (long)boost::multiprecision::msb(den_);
        // 2^k <= value < 2^(k+2); adjust down if needed
        if (*this < Rational::pow2(k))
            --k;
        else if (*this >= Rational::pow2(k + 1))
            ++k;
        return k;
    }

    double to_double() const {
        return num_.convert_to<double>() / den_.convert_to<double>();
    }

    /// Canonical text form: "p/q" in lowest terms, "/q" omitted when q = 1.
    std::string str() const {
        if (den_ == 1)
            return num_.str();
        return num_.str() + "/" + den_.str();
    }

    /// Accepts "p", "p/q", and the dyadic convenience form "p/2^k".
    static std::optional<Rational> parse(const std::string& s);
};

/// Dyadic view/validator: value = p / 2^k with p odd or k = 0.
struct Dyadic {
    Int p;
    unsigned long k;

    static std::optional<Dyadic> from(const Rational& r) {
        if (!r.is_dyadic())
            return std::nullopt;
        return Dyadic{r.num(), r.dyadic_exponent()};
    }
    Rational value() const { return Rational::dyadic(p, k); }
};

inline std::optional<Rational> Rational::parse(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            return Rational(Int(s));
        }
        std::string ns = s.substr(0, slash);
        std::string ds = s.substr(slash + 1);
        if (ns.empty() || ds.empty())
            return std::nullopt;
        Int n(ns);
        if (ds.size() > 2 && ds[0] == '2' && ds[1] == '^') {
            unsigned long k = std::stoul(ds.substr(2));
            return Rational::dyadic(n, k);
        }
        Int d(ds);
        if (d == 0)
            return std::nullopt;
        return Rational(n, d);
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace gmap
