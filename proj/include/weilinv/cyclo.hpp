#pragma once

#include <gmpxx.h>

#include <atomic>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numtheory.hpp"
#include "qmodz.hpp"

namespace weilinv {

using Rational = mpq_class;

inline Rational make_rational(i64 num, i64 den = 1) {
    Rational r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

inline std::string rational_str(const Rational& r) { return r.get_str(); }

class CycloOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Element of Q(zeta_M) in canonical form.
///
/// Coefficients live on the exponent basis where, for every prime power p^k || M,
/// the p-component of the exponent avoids the top digit 0 (p odd) or 1 (p = 2).
/// The order is always the conductor of the number, so equality is structural.
class CycloNumber {
public:
    using Terms = std::vector<std::pair<i64, Rational>>;

    CycloNumber() = default;
    CycloNumber(long n) { if (n != 0) terms_.emplace_back(0, Rational(n)); }
    CycloNumber(int n) : CycloNumber(static_cast<long>(n)) {}
    CycloNumber(const Rational& r) { if (sgn(r) != 0) terms_.emplace_back(0, r); }

    /// Upper bound on field orders; exceeding it raises CycloOverflow.
    static std::atomic<i64>& max_order() {
        static std::atomic<i64> bound{1000000};
        return bound;
    }

    static CycloNumber zeta(i64 order, i64 k) {
        std::map<i64, Rational> m;
        m[mod(k, order)] = 1;
        return from_map(order, std::move(m));
    }

    static CycloNumber e_of(const QmodZ& x) { return zeta(x.den(), x.num()); }
    static CycloNumber e_of(i64 num, i64 den) { return e_of(QmodZ(num, den)); }
    static CycloNumber e_of(const Rational& x) {
        mpz_class n = x.get_num(), d = x.get_den();
        mpz_class r = n % d;
        if (r < 0) r += d;
        if (!d.fits_slong_p()) throw CycloOverflow("e_of: denominator too large");
        return zeta(d.get_si(), r.get_si());
    }

    /// Positive square root of n >= 1 built from quadratic Gauss sums.
    static CycloNumber sqrt_int(i64 n) {
        if (n <= 0) throw std::invalid_argument("sqrt_int: argument must be positive");
        CycloNumber result(1L);
        i64 outer = 1;
        for (auto [p, e] : factorize(n)) {
            outer *= ipow(p, e / 2);
            if (e % 2) result = result * sqrt_prime(p);
        }
        return result * CycloNumber(static_cast<long>(outer));
    }

    i64 order() const { return order_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    std::optional<Rational> as_rational() const {
        if (order_ != 1) return std::nullopt;
        if (terms_.empty()) return Rational(0);
        return terms_.front().second;
    }

    std::complex<double> embed_complex() const {
        long double re = 0, im = 0;
        const long double two_pi = 6.283185307179586476925286766559L;
        for (const auto& [k, c] : terms_) {
            long double v = c.get_d();
            long double ang = two_pi * static_cast<long double>(k) / static_cast<long double>(order_);
            re += v * std::cos(ang);
            im += v * std::sin(ang);
        }
        return {static_cast<double>(re), static_cast<double>(im)};
    }

    /// Image under zeta -> zeta^a, gcd(a, order) = 1.
    CycloNumber galois(i64 a) const {
        std::map<i64, Rational> m;
        for (const auto& [k, c] : terms_) m[mod(k * a, order_)] += c;
        return from_map(order_, std::move(m));
    }
    CycloNumber conj() const { return galois(-1); }

    CycloNumber inverse() const {
        if (is_zero()) throw std::domain_error("CycloNumber: division by zero");
        if (order_ == 1) return CycloNumber(Rational(1 / terms_.front().second));
        CycloNumber others(1L);
        for (i64 a : units_mod(order_))
            if (a != 1) others = others * galois(a);
        auto norm = (*this * others).as_rational();
        if (!norm) throw std::logic_error("CycloNumber::inverse: norm not rational");
        return others * CycloNumber(Rational(1 / *norm));
    }

    friend CycloNumber operator+(const CycloNumber& a, const CycloNumber& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        i64 L = unify(a.order_, b.order_);
        std::map<i64, Rational> m;
        for (const auto& [k, c] : a.terms_) m[k * (L / a.order_)] += c;
        for (const auto& [k, c] : b.terms_) m[k * (L / b.order_)] += c;
        return from_map(L, std::move(m));
    }
    friend CycloNumber operator-(const CycloNumber& a) {
        CycloNumber r = a;
        for (auto& t : r.terms_) t.second = -t.second;
        return r;
    }
    friend CycloNumber operator-(const CycloNumber& a, const CycloNumber& b) { return a + (-b); }
    friend CycloNumber operator*(const CycloNumber& a, const CycloNumber& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.order_ == 1) return b.scaled(a.terms_.front().second);
        if (b.order_ == 1) return a.scaled(b.terms_.front().second);
        i64 L = unify(a.order_, b.order_);
        i64 sa = L / a.order_, sb = L / b.order_;
        std::map<i64, Rational> m;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) m[(ka * sa + kb * sb) % L] += ca * cb;
        return from_map(L, std::move(m));
    }
    friend CycloNumber operator/(const CycloNumber& a, const CycloNumber& b) {
        if (b.order_ == 1) {
            if (b.is_zero()) throw std::domain_error("CycloNumber: division by zero");
            return a.scaled(1 / b.terms_.front().second);
        }
        return a * b.inverse();
    }
    CycloNumber& operator+=(const CycloNumber& o) { return *this = *this + o; }
    CycloNumber& operator-=(const CycloNumber& o) { return *this = *this - o; }
    CycloNumber& operator*=(const CycloNumber& o) { return *this = *this * o; }

    friend bool operator==(const CycloNumber& a, const CycloNumber& b) {
        return a.order_ == b.order_ && a.terms_ == b.terms_;
    }

    CycloNumber scaled(const Rational& r) const {
        if (sgn(r) == 0) return {};
        CycloNumber out = *this;
        for (auto& t : out.terms_) t.second *= r;
        return out;
    }

    /// "sum(c * zeta{M}^k + ...)" with exponents ascending; zero prints as "0".
    std::string str() const {
        if (is_zero()) return "0";
        std::string s = "sum(";
        bool first = true;
        for (const auto& [k, c] : terms_) {
            if (!first) s += " + ";
            first = false;
            s += c.get_str() + " * zeta" + std::to_string(order_) + "^" + std::to_string(k);
        }
        return s + ")";
    }
    friend std::ostream& operator<<(std::ostream& os, const CycloNumber& x) { return os << x.str(); }

    /// Canonical form of sum c_k zeta_M^k given as an exponent map (exponents mod M).
    static CycloNumber from_map(i64 order, std::map<i64, Rational> m) {
        if (order <= 0) throw std::invalid_argument("CycloNumber: order must be positive");
        if (order > max_order().load()) throw CycloOverflow("cyclotomic order exceeds bound");
        reduce(order, m);
        return shrink(order, std::move(m));
    }

private:
    i64 order_ = 1;
    Terms terms_;

    static i64 unify(i64 a, i64 b) {
        i64 L = lcm64(a, b);
        if (L > max_order().load()) throw CycloOverflow("cyclotomic order exceeds bound");
        return L;
    }

    static CycloNumber sqrt_prime(i64 p) {
        if (p == 2) return zeta(8, 1) + zeta(8, 7);
        std::map<i64, Rational> m;
        for (i64 a = 1; a < p; ++a) m[a] = kronecker(a, p);
        CycloNumber g = from_map(p, std::move(m));
        if (p % 4 == 3) g = g * zeta(4, 3);
        if (g.embed_complex().real() < 0) g = -g;
        return g;
    }

    static void drop_zeros(std::map<i64, Rational>& m) {
        for (auto it = m.begin(); it != m.end();)
            it = (sgn(it->second) == 0) ? m.erase(it) : std::next(it);
    }

    /// Rewrite onto the canonical exponent basis, one prime at a time.
    static void reduce(i64 M, std::map<i64, Rational>& m) {
        drop_zeros(m);
        if (M == 1) return;
        for (auto [p, k] : factorize(M)) {
            i64 P = ipow(p, k), top = P / p, step = M / p;
            std::vector<std::pair<i64, Rational>> bad;
            for (const auto& [e, c] : m) {
                i64 digit = (e % P) / top;
                if ((p == 2 && digit == 1) || (p != 2 && digit == 0)) bad.emplace_back(e, c);
            }
            for (const auto& [e, c] : bad) {
                m.erase(e);
                for (i64 j = 1; j < p; ++j) m[(e + j * step) % M] -= c;
            }
            drop_zeros(m);
        }
    }

    /// Move to the smallest cyclotomic field containing the number.
    static CycloNumber shrink(i64 M, std::map<i64, Rational> m) {
        bool changed = true;
        while (changed && M > 1) {
            changed = false;
            for (auto [p, k] : factorize(M)) {
                std::map<i64, Rational> next;
                bool ok = true;
                if (k >= 2 || p == 2) {
                    for (const auto& [e, c] : m) {
                        if (e % p != 0) { ok = false; break; }
                        next[e / p] += c;
                    }
                } else {
                    i64 step = M / p;
                    std::map<i64, Rational> seen;
                    for (const auto& [e, c] : m) {
                        i64 e0 = e;
                        while (e0 % p != 0) e0 = (e0 + step) % M;
                        auto it = seen.find(e0);
                        if (it == seen.end()) seen.emplace(e0, c);
                        else if (it->second != c) { ok = false; break; }
                    }
                    if (ok) {
                        for (const auto& [e0, c] : seen) {
                            i64 members = 0;
                            for (i64 j = 0; j < p; ++j) members += m.count((e0 + j * step) % M);
                            if (members != p - 1) { ok = false; break; }
                            next[e0 / p] -= c;
                        }
                    }
                }
                if (!ok) continue;
                M /= p;
                m = std::move(next);
                reduce(M, m);
                changed = true;
                break;
            }
        }
        CycloNumber out;
        out.order_ = M;
        out.terms_.assign(m.begin(), m.end());
        if (out.terms_.empty()) out.order_ = 1;
        return out;
    }
};

}  // namespace weilinv
