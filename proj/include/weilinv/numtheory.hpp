#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace weilinv {

using i64 = std::int64_t;

inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 lcm64(i64 a, i64 b) {
    if (a == 0 || b == 0) return 0;
    return a / std::gcd(a, b) * b;
}

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    while (e-- > 0) r *= b;
    return r;
}

inline i64 powmod(i64 b, i64 e, i64 m) {
    i64 r = 1 % m;
    b = mod(b, m);
    while (e > 0) {
        if (e & 1) r = static_cast<i64>((__int128)r * b % m);
        b = static_cast<i64>((__int128)b * b % m);
        e >>= 1;
    }
    return r;
}

/// Prime factorization by trial division, primes ascending.
inline std::vector<std::pair<i64, int>> factorize(i64 n) {
    if (n <= 0) throw std::invalid_argument("factorize: n must be positive");
    std::vector<std::pair<i64, int>> out;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline std::vector<i64> prime_divisors(i64 n) {
    std::vector<i64> out;
    for (auto [p, e] : factorize(n)) out.push_back(p);
    return out;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

/// If n = p^k for a prime p, returns (p, k); otherwise (0, 0). n = 1 gives (1, 0).
inline std::pair<i64, int> prime_power(i64 n) {
    if (n == 1) return {1, 0};
    auto f = factorize(n);
    if (f.size() != 1) return {0, 0};
    return f.front();
}

inline i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

inline i64 isqrt(i64 n) {
    if (n < 0) throw std::invalid_argument("isqrt of negative");
    i64 r = static_cast<i64>(__builtin_sqrtl(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline bool is_square(i64 n) {
    if (n < 0) return false;
    i64 r = isqrt(n);
    return r * r == n;
}

/// Kronecker symbol (a/n) for n >= 1.
inline int kronecker(i64 a, i64 n) {
    if (n <= 0) throw std::invalid_argument("kronecker: n must be positive");
    int result = 1;
    while (n % 2 == 0) {
        n /= 2;
        i64 r = mod(a, 8);
        if (r % 2 == 0) return 0;
        if (r == 3 || r == 5) result = -result;
    }
    // Jacobi symbol for odd n.
    a = mod(a, n);
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            i64 r = n % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

/// Multiplicative order-free lift: unit group (Z/n)^* listed ascending.
inline std::vector<i64> units_mod(i64 n) {
    std::vector<i64> out;
    for (i64 a = 1; a <= n; ++a)
        if (std::gcd(a % n, n) == 1) out.push_back(a % n);
    if (n == 1) out = {0};
    return out;
}

}  // namespace weilinv
