#pragma once

#include <compare>
#include <numeric>
#include <ostream>
#include <string>

#include "numtheory.hpp"

namespace weilinv {

/// Element of Q/Z stored as num/den with 0 <= num < den and gcd(num, den) = 1.
class QmodZ {
public:
    QmodZ() = default;
    QmodZ(i64 num, i64 den) {
        if (den == 0) throw std::invalid_argument("QmodZ: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        num = mod(num, den);
        i64 g = std::gcd(num, den);
        num_ = num / g;
        den_ = den / g;
    }

    i64 num() const { return num_; }
    i64 den() const { return den_; }
    bool is_zero() const { return num_ == 0; }

    /// Integer k with this = k / n, requires den | n.
    i64 scaled(i64 n) const {
        if (n % den_ != 0) throw std::logic_error("QmodZ::scaled: denominator does not divide");
        return num_ * (n / den_);
    }

    friend QmodZ operator+(QmodZ a, QmodZ b) {
        i64 d = lcm64(a.den_, b.den_);
        return QmodZ(a.num_ * (d / a.den_) + b.num_ * (d / b.den_), d);
    }
    friend QmodZ operator-(QmodZ a) { return QmodZ(-a.num_, a.den_); }
    friend QmodZ operator-(QmodZ a, QmodZ b) { return a + (-b); }
    friend QmodZ operator*(i64 k, QmodZ a) {
        return QmodZ(static_cast<i64>((__int128)mod(k, a.den_) * a.num_ % a.den_), a.den_);
    }
    friend bool operator==(const QmodZ&, const QmodZ&) = default;
    friend auto operator<=>(const QmodZ& a, const QmodZ& b) {
        return (__int128)a.num_ * b.den_ <=> (__int128)b.num_ * a.den_;
    }

    std::string str() const {
        if (num_ == 0) return "0";
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    friend std::ostream& operator<<(std::ostream& os, const QmodZ& x) { return os << x.str(); }

private:
    i64 num_ = 0;
    i64 den_ = 1;
};

}  // namespace weilinv
