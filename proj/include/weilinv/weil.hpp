#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyclo.hpp"
#include "errors.hpp"
#include "fqm.hpp"
#include "sl2.hpp"

namespace weilinv {

/// Vector of C[D] stored densely over the element indices of its form.
struct GroupAlgebraVector {
    std::vector<CycloNumber> coeffs;

    GroupAlgebraVector() = default;
    explicit GroupAlgebraVector(std::size_t n) : coeffs(n) {}
    static GroupAlgebraVector basis(std::size_t n, int gamma) {
        GroupAlgebraVector v(n);
        v.coeffs.at(gamma) = CycloNumber(1);
        return v;
    }

    std::size_t size() const { return coeffs.size(); }
    CycloNumber& operator[](int i) { return coeffs[i]; }
    const CycloNumber& operator[](int i) const { return coeffs[i]; }
    bool is_zero() const {
        for (const auto& c : coeffs)
            if (!c.is_zero()) return false;
        return true;
    }
    std::vector<int> support() const {
        std::vector<int> s;
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            if (!coeffs[i].is_zero()) s.push_back(static_cast<int>(i));
        return s;
    }

    friend GroupAlgebraVector operator+(GroupAlgebraVector a, const GroupAlgebraVector& b) {
        check_internal(a.size() == b.size(), "vector sizes differ");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!b.coeffs[i].is_zero()) a.coeffs[i] += b.coeffs[i];
        return a;
    }
    friend GroupAlgebraVector operator-(GroupAlgebraVector a, const GroupAlgebraVector& b) {
        check_internal(a.size() == b.size(), "vector sizes differ");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!b.coeffs[i].is_zero()) a.coeffs[i] -= b.coeffs[i];
        return a;
    }
    friend GroupAlgebraVector operator*(const CycloNumber& s, GroupAlgebraVector a) {
        for (auto& c : a.coeffs)
            if (!c.is_zero()) c *= s;
        return a;
    }
    GroupAlgebraVector& operator+=(const GroupAlgebraVector& o) { return *this = *this + o; }
    friend bool operator==(const GroupAlgebraVector&, const GroupAlgebraVector&) = default;
};

/// (v, w) = sum v_γ conj(w_γ).
inline CycloNumber inner(const GroupAlgebraVector& v, const GroupAlgebraVector& w) {
    check_internal(v.size() == w.size(), "vector sizes differ");
    CycloNumber s;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!v.coeffs[i].is_zero() && !w.coeffs[i].is_zero()) s += v.coeffs[i] * w.coeffs[i].conj();
    return s;
}

/// Field order K = lcm(N, 8): contains e(q), e(sign/8) and every sqrt|D_c|.
inline i64 weil_field_order(const DiscriminantForm& D) { return lcm64(D.level(), 8); }

/// Smallest engine field containing the form's field and every entry of v.
inline i64 weil_field_order(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    i64 K = weil_field_order(D);
    for (const auto& c : v.coeffs)
        if (!c.is_zero()) K = lcm64(K, c.order());
    if (K > CycloNumber::max_order().load()) throw CycloOverflow("cyclotomic order exceeds bound");
    return K;
}

/// S-normalization e(sign/8)/sqrt|D|.
inline CycloNumber weil_scalar(const DiscriminantForm& D) {
    return CycloNumber::e_of(D.signature(), 8) / CycloNumber::sqrt_int(D.order());
}

// --- exact integer engine -----------------------------------------------------

/// Matrix-free action of the letters S, T, T^-1 on Z[ζ_K]-valued vectors.
///
/// A state holds `cols` vectors; entry (col, γ) is c^k times the integer polynomial
/// in ζ_K stored at a[(col n + γ) K .. +K), with c = e(sign/8)/sqrt|D|. Works for
/// odd signature too: words act letter by letter without any group relation.
class WeilEngine {
public:
    struct State {
        std::vector<i64> a;
        int cols = 1;
        int k = 0;
    };

    WeilEngine(const DiscriminantForm& D, i64 field_order = 0)
        : n_(D.size()), order_(D.order()), sig_(D.signature()), orders_(D.generator_orders()) {
        K_ = field_order ? field_order : weil_field_order(D);
        check_internal(K_ % 8 == 0 && K_ % D.level() == 0, "engine field order must contain the level and 8");
        strides_.assign(orders_.size(), 1);
        for (std::size_t i = orders_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * orders_[i];
        tshift_.resize(n_);
        for (int g = 0; g < n_; ++g) tshift_[g] = D.q_residue(g) * (K_ / D.level());
        // Character isomorphism: b(γ, β) = sum_i γ_i kappa_i(β) / d_i.
        kappa_.resize(n_);
        for (int beta = 0; beta < n_; ++beta) {
            i64 idx = 0;
            for (std::size_t i = 0; i < orders_.size(); ++i) {
                i64 d = orders_[i];
                QmodZ v = D.b(D.generator(static_cast<int>(i)), beta);
                check_internal(d % v.den() == 0, "engine: b(g_i, β) not in (1/d_i)Z");
                idx += v.num() * (d / v.den()) * strides_[i];
            }
            kappa_[beta] = static_cast<int>(idx);
        }
        build_reduction();
        c_ = weil_scalar(D);
    }

    i64 field_order() const { return K_; }
    int size() const { return n_; }

    State basis(int gamma) const {
        State s{std::vector<i64>(static_cast<std::size_t>(n_) * K_, 0), 1, 0};
        s.a[static_cast<std::size_t>(gamma) * K_] = 1;
        return s;
    }
    /// All basis vectors as columns (the identity matrix).
    State identity() const {
        State s{std::vector<i64>(static_cast<std::size_t>(n_) * n_ * K_, 0), n_, 0};
        for (int g = 0; g < n_; ++g) s.a[(static_cast<std::size_t>(g) * n_ + g) * K_] = 1;
        return s;
    }

    void apply(Letter l, State& s) const {
        switch (l) {
            case Letter::S: apply_S(s); break;
            case Letter::T: apply_T(s, 1); break;
            default: apply_T(s, -1); break;
        }
    }
    void apply_word(const std::vector<Letter>& word, State& s) const {
        for (std::size_t i = word.size(); i-- > 0;) apply(word[i], s);
    }

    /// T^dir: multiply entry γ by e(-dir q(γ)).
    void apply_T(State& s, int dir) const {
        for (int col = 0; col < s.cols; ++col)
            for (int g = 0; g < n_; ++g) {
                i64 shift = mod(dir * tshift_[g], K_);
                if (shift == 0) continue;
                i64* p = entry(s, col, g);
                std::rotate(p, p + shift, p + K_);
            }
    }

    /// S: w_β = c sum_γ e(b(γ, β)) v_γ, by a DFT along each cyclic factor.
    void apply_S(State& s) const {
        std::vector<i64> line, out;
        std::vector<__int128> acc(K_);
        for (int col = 0; col < s.cols; ++col) {
            i64* base = &s.a[static_cast<std::size_t>(col) * n_ * K_];
            for (std::size_t ax = 0; ax < orders_.size(); ++ax) {
                const i64 d = orders_[ax], st = strides_[ax], step = K_ / d;
                line.assign(static_cast<std::size_t>(d * K_), 0);
                for (i64 idx = 0; idx < n_; ++idx) {
                    if ((idx / st) % d != 0) continue;
                    for (i64 m = 0; m < d; ++m)
                        std::copy_n(base + (idx + m * st) * K_, K_, line.begin() + m * K_);
                    for (i64 j = 0; j < d; ++j) {
                        std::fill(acc.begin(), acc.end(), 0);
                        for (i64 m = 0; m < d; ++m) {
                            const i64* x = &line[m * K_];
                            i64 rot = (step * ((m * j) % d)) % K_;
                            for (i64 e = 0; e < K_; ++e)
                                if (x[e]) acc[(e + rot) % K_] += x[e];
                        }
                        i64* dst = base + (idx + j * st) * K_;
                        for (i64 e = 0; e < K_; ++e) dst[e] = narrow(acc[e]);
                    }
                }
            }
            out.assign(static_cast<std::size_t>(n_) * K_, 0);
            for (int beta = 0; beta < n_; ++beta)
                std::copy_n(base + static_cast<i64>(kappa_[beta]) * K_, K_, out.begin() + static_cast<i64>(beta) * K_);
            std::copy(out.begin(), out.end(), base);
        }
        s.k += 1;
        canonicalize(s);
        reduce_scale(s);
    }

    /// Rewrite every entry on the integral canonical basis of Z[ζ_K].
    void canonicalize(State& s) const {
        std::vector<__int128> acc(K_);
        const std::size_t entries = static_cast<std::size_t>(s.cols) * n_;
        for (std::size_t t = 0; t < entries; ++t) {
            i64* p = &s.a[t * K_];
            bool canonical = true;
            for (i64 e = 0; e < K_ && canonical; ++e)
                if (p[e] && !is_basis_[e]) canonical = false;
            if (canonical) continue;
            std::fill(acc.begin(), acc.end(), 0);
            for (i64 e = 0; e < K_; ++e) {
                if (!p[e]) continue;
                for (auto [f, sg] : reduction_[e]) acc[f] += static_cast<__int128>(sg) * p[e];
            }
            for (i64 e = 0; e < K_; ++e) p[e] = narrow(acc[e]);
        }
    }

    /// Use c^2 = e(sign/4)/|D| to lower k while every coefficient is divisible by |D|.
    void reduce_scale(State& s) const {
        while (s.k >= 2) {
            for (i64 x : s.a)
                if (x % order_ != 0) return;
            const i64 rot = mod(K_ * sig_ / 4, K_);
            const std::size_t entries = static_cast<std::size_t>(s.cols) * n_;
            for (auto& x : s.a) x /= order_;
            for (std::size_t t = 0; t < entries; ++t) {
                i64* p = &s.a[t * K_];
                if (rot) std::rotate(p, p + (K_ - rot), p + K_);
            }
            s.k -= 2;
            canonicalize(s);
        }
    }

    i64* entry(State& s, int col, int g) const { return &s.a[(static_cast<std::size_t>(col) * n_ + g) * K_]; }
    const i64* entry(const State& s, int col, int g) const { return &s.a[(static_cast<std::size_t>(col) * n_ + g) * K_]; }

    /// c^k, cached.
    const CycloNumber& scale_power(int k) const {
        while (static_cast<int>(powers_.size()) <= k)
            powers_.push_back(powers_.empty() ? CycloNumber(1) : powers_.back() * c_);
        return powers_[k];
    }

    CycloNumber polynomial(const i64* p, const Rational& factor = 1) const {
        std::map<i64, Rational> m;
        for (i64 e = 0; e < K_; ++e)
            if (p[e]) m[e] = Rational(static_cast<long>(p[e])) * factor;
        return CycloNumber::from_map(K_, std::move(m));
    }

    /// Column col of the state as an exact vector, divided by den.
    GroupAlgebraVector decode(const State& s, int col = 0, const Rational& inv_den = 1) const {
        GroupAlgebraVector v(n_);
        const CycloNumber& scale = scale_power(s.k);
        for (int g = 0; g < n_; ++g) {
            const i64* p = entry(s, col, g);
            bool nz = false;
            for (i64 e = 0; e < K_ && !nz; ++e) nz = p[e] != 0;
            if (nz) v[g] = polynomial(p, inv_den) * scale;
        }
        return v;
    }

    /// Integer encoding v = X / den with X over Z[ζ_K]; nullopt if an entry leaves Q(ζ_K).
    std::optional<std::pair<State, mpz_class>> encode(const GroupAlgebraVector& v) const {
        check_internal(static_cast<int>(v.size()) == n_, "vector does not match the form");
        mpz_class den = 1;
        for (const auto& c : v.coeffs) {
            if (c.is_zero()) continue;
            if (K_ % c.order() != 0) return std::nullopt;
            for (const auto& [e, r] : c.terms()) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), r.get_den_mpz_t());
        }
        State s{std::vector<i64>(static_cast<std::size_t>(n_) * K_, 0), 1, 0};
        for (int g = 0; g < n_; ++g) {
            const auto& c = v[g];
            for (const auto& [e, r] : c.terms()) {
                mpz_class x = r.get_num() * (den / r.get_den());
                if (!x.fits_slong_p()) throw Error(errc::bound_exceeded, "coefficient too large for the integer engine");
                s.a[static_cast<std::size_t>(g) * K_ + e * (K_ / c.order())] = x.get_si();
            }
        }
        return std::make_pair(std::move(s), den);
    }

    static i64 narrow(__int128 x) {
        if (x > INT64_MAX || x < INT64_MIN) throw Error(errc::bound_exceeded, "integer overflow in the Weil engine");
        return static_cast<i64>(x);
    }

private:
    int n_;
    i64 order_;
    int sig_;
    std::vector<i64> orders_, strides_;
    i64 K_ = 8;
    std::vector<i64> tshift_;
    std::vector<int> kappa_;
    std::vector<char> is_basis_;
    std::vector<std::vector<std::pair<i64, int>>> reduction_;
    CycloNumber c_;
    mutable std::vector<CycloNumber> powers_;

    /// reduction_[e]: ζ_K^e as a signed sum of basis exponents (prime by prime, as in CycloNumber).
    void build_reduction() {
        is_basis_.assign(K_, 1);
        reduction_.assign(K_, {});
        const auto primes = factorize(K_);
        for (i64 e = 0; e < K_; ++e) {
            std::map<i64, int> m{{e, 1}};
            for (auto [p, k] : primes) {
                i64 P = ipow(p, k), top = P / p, step = K_ / p;
                std::map<i64, int> next;
                for (auto [f, sg] : m) {
                    i64 digit = (f % P) / top;
                    bool bad = (p == 2 && digit == 1) || (p != 2 && digit == 0);
                    if (!bad) { next[f] += sg; continue; }
                    for (i64 j = 1; j < p; ++j) next[(f + j * step) % K_] -= sg;
                }
                m.clear();
                for (auto [f, sg] : next)
                    if (sg) m[f] = sg;
            }
            for (auto [f, sg] : m) reduction_[e].emplace_back(f, sg);
            is_basis_[e] = (m.size() == 1 && m.begin()->first == e && m.begin()->second == 1);
        }
    }
};

// --- reference path ------------------------------------------------------------

inline void require_even_signature(const DiscriminantForm& D) {
    if (!D.even_signature())
        throw Error(errc::odd_signature, "the Weil representation of SL2(Z) needs even signature");
}

/// ρ(T) v directly from e(-q(γ)).
inline GroupAlgebraVector rho_T_direct(const DiscriminantForm& D, const GroupAlgebraVector& v, int dir = 1) {
    GroupAlgebraVector w(D.size());
    for (int g = 0; g < D.size(); ++g)
        if (!v[g].is_zero()) w[g] = CycloNumber::e_of(-dir * D.q_residue(g), D.level()) * v[g];
    return w;
}

/// ρ(S) v directly from e(sign/8)/sqrt|D| sum_β e((γ, β)) e^β.
inline GroupAlgebraVector rho_S_direct(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    const i64 N = D.level();
    const CycloNumber c = weil_scalar(D);
    GroupAlgebraVector w(D.size());
    const auto supp = v.support();
    for (int beta = 0; beta < D.size(); ++beta) {
        std::vector<CycloNumber> by_residue(N);
        for (int g : supp) by_residue[D.b_residue(g, beta)] += v[g];
        CycloNumber s;
        for (i64 r = 0; r < N; ++r)
            if (!by_residue[r].is_zero()) s += CycloNumber::e_of(r, N) * by_residue[r];
        if (!s.is_zero()) w[beta] = c * s;
    }
    return w;
}

inline GroupAlgebraVector rho_word_direct(const DiscriminantForm& D, const std::vector<Letter>& word, GroupAlgebraVector v) {
    for (std::size_t i = word.size(); i-- > 0;) {
        if (word[i] == Letter::S) v = rho_S_direct(D, v);
        else v = rho_T_direct(D, v, word[i] == Letter::T ? 1 : -1);
    }
    return v;
}

// --- public representation operations ------------------------------------------------

/// ρ(word) v through the integer engine over the smallest field holding D and v.
inline GroupAlgebraVector rho_word(const DiscriminantForm& D, const std::vector<Letter>& word, const GroupAlgebraVector& v) {
    require_even_signature(D);
    WeilEngine eng(D, weil_field_order(D, v));
    auto enc = eng.encode(v);
    check_internal(enc.has_value(), "engine field does not contain the vector");
    eng.apply_word(word, enc->first);
    return eng.decode(enc->first, 0, Rational(1) / Rational(enc->second));
}

inline GroupAlgebraVector rho_S(const DiscriminantForm& D, const GroupAlgebraVector& v) { return rho_word(D, {Letter::S}, v); }
inline GroupAlgebraVector rho_T(const DiscriminantForm& D, const GroupAlgebraVector& v) { return rho_word(D, {Letter::T}, v); }

/// ρ(M) v via the Euclidean word of M.
inline GroupAlgebraVector rho(const DiscriminantForm& D, const Mat2& M, const GroupAlgebraVector& v) {
    return rho_word(D, word_decompose(M).word, v);
}

// --- projection onto invariants --------------------------------------------------------

/// Cusp label of the coset summand ρ(X): first column (a, c) of X^{-1} mod N, up to sign for N >= 3.
using CuspKey = std::pair<i64, i64>;

inline CuspKey normalize_cusp(i64 a, i64 c, i64 N) {
    CuspKey k{mod(a, N), mod(c, N)}, m{mod(-a, N), mod(-c, N)};
    return N >= 3 ? std::min(k, m) : k;
}

inline CuspKey cusp_of(const Mat2& X, i64 N) {
    Mat2 inv = X.inverse();
    return normalize_cusp(inv.a, inv.c, N);
}

/// All cusp labels of Gamma(N).
inline std::vector<CuspKey> cusps(i64 N) {
    std::vector<CuspKey> out;
    for (i64 a = 0; a < N; ++a)
        for (i64 c = 0; c < N; ++c) {
            if (std::gcd(std::gcd(a, c), N) != 1) continue;
            CuspKey k = normalize_cusp(a, c, N);
            if (k == CuspKey{a, c}) out.push_back(k);
        }
    return out;
}

namespace detail {

/// Sums, per cusp and per power of c, of the engine states over all of SL2(Z/N).
struct CuspSums {
    std::map<CuspKey, std::map<int, std::vector<i64>>> sums;
};

inline void add_checked(std::vector<i64>& acc, const std::vector<i64>& x) {
    if (acc.empty()) acc.assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (__builtin_add_overflow(acc[i], x[i], &acc[i])) throw Error(errc::bound_exceeded, "overflow accumulating the average");
}

inline CuspSums average_states(const WeilEngine& eng, const CosetTree& tree, const WeilEngine::State& start, bool by_cusp) {
    CuspSums out;
    const auto children = tree.children();
    std::function<void(int, const WeilEngine::State&)> visit = [&](int node, const WeilEngine::State& s) {
        CuspKey key = by_cusp ? cusp_of(tree.lift[node], tree.N) : CuspKey{0, 0};
        add_checked(out.sums[key][s.k], s.a);
        for (int ch : children[node]) {
            WeilEngine::State t = s;
            eng.apply(tree.letter[ch], t);
            visit(ch, t);
        }
    };
    visit(0, start);
    return out;
}

inline GroupAlgebraVector combine(const WeilEngine& eng, const std::map<int, std::vector<i64>>& by_k, const Rational& factor) {
    GroupAlgebraVector v(eng.size());
    for (const auto& [k, arr] : by_k) {
        WeilEngine::State s{arr, 1, k};
        v += eng.decode(s, 0, factor);
    }
    return v;
}

}  // namespace detail

/// inv_D(v) = average of ρ(M) v over SL2(Z/N); zero for odd signature.
inline GroupAlgebraVector inv(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    if (!D.even_signature()) return GroupAlgebraVector(D.size());
    WeilEngine eng(D, weil_field_order(D, v));
    auto enc = eng.encode(v);
    check_internal(enc.has_value(), "engine field does not contain the vector");
    CosetTree tree = enumerate_cosets(D.level());
    auto sums = detail::average_states(eng, tree, enc->first, false);
    Rational factor = Rational(1) / (Rational(enc->second) * Rational(static_cast<long>(tree.size())));
    return detail::combine(eng, sums.sums[{0, 0}], factor);
}

inline GroupAlgebraVector inv(const DiscriminantForm& D, int gamma) {
    return inv(D, GroupAlgebraVector::basis(D.size(), gamma));
}

/// Per-cusp summands of inv_D(e^γ), keyed by the cusp label; their sum is inv_D(e^γ).
inline std::map<CuspKey, GroupAlgebraVector> inv_by_cusp(const DiscriminantForm& D, int gamma) {
    std::map<CuspKey, GroupAlgebraVector> out;
    const i64 N = D.level();
    if (!D.even_signature()) {
        for (auto k : cusps(N)) out[k] = GroupAlgebraVector(D.size());
        return out;
    }
    WeilEngine eng(D);
    CosetTree tree = enumerate_cosets(N);
    auto sums = detail::average_states(eng, tree, eng.basis(gamma), true);
    Rational factor = Rational(1) / Rational(static_cast<long>(tree.size()));
    for (auto& [key, by_k] : sums.sums) out[key] = detail::combine(eng, by_k, factor);
    return out;
}

inline GroupAlgebraVector inv_at_cusp(const DiscriminantForm& D, int gamma, i64 a, i64 c) {
    const i64 N = D.level();
    if (std::gcd(std::gcd(mod(a, N), mod(c, N)), N) != 1)
        throw Error(errc::invalid_input, "cusp (a, c) must have order N in (Z/N)^2");
    if (!D.isotropic(gamma)) throw Error(errc::invalid_input, "γ must be isotropic");
    auto all = inv_by_cusp(D, gamma);
    auto it = all.find(normalize_cusp(a, c, N));
    return it == all.end() ? GroupAlgebraVector(D.size()) : it->second;
}

/// Isotropic elements I (indices, ascending).
inline std::vector<int> isotropic_indices(const DiscriminantForm& D) {
    std::vector<int> out;
    for (int g = 0; g < D.size(); ++g)
        if (D.isotropic(g)) out.push_back(g);
    return out;
}

/// Oracle dimension: sum over γ in I of the e^γ-coefficient of inv_D(e^γ).
inline i64 dim_by_projection(const DiscriminantForm& D) {
    if (!D.even_signature()) return 0;
    CycloNumber tr;
    for (int g : isotropic_indices(D)) tr += inv(D, g)[g];
    auto r = tr.as_rational();
    if (!r || r->get_den() != 1) throw Error(errc::internal, "trace of inv is not an integer: " + tr.str());
    return r->get_num().get_si();
}

inline mpz_class to_mpz(__int128 x) {
    const bool neg = x < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(x) : static_cast<unsigned __int128>(x);
    mpz_class hi = static_cast<unsigned long>(u >> 64), lo = static_cast<unsigned long>(u & ~0UL);
    mpz_class v = (hi << 64) + lo;
    return neg ? mpz_class(-v) : v;
}

inline Rational pow_rational(i64 base, int e) {
    Rational r = 1;
    for (int i = 0; i < std::abs(e); ++i) r *= Rational(static_cast<long>(base));
    return e >= 0 ? r : Rational(1) / r;
}

/// dim C[D]^Γ as the exact average of tr ρ(M), with tr factored over an orthogonal block splitting.
inline i64 dim_invariants(const DiscriminantForm& D) {
    if (!D.even_signature()) return 0;
    const i64 N = D.level(), K = weil_field_order(D);
    const auto blocks = orthogonal_blocks(D);
    std::vector<WeilEngine> engines;
    std::vector<WeilEngine::State> start;
    for (const auto& B : blocks) {
        engines.emplace_back(B, K);
        start.push_back(engines.back().identity());
    }
    CosetTree tree = enumerate_cosets(N);
    const auto children = tree.children();
    std::vector<Rational> acc[2] = {std::vector<Rational>(K), std::vector<Rational>(K)};
    std::vector<__int128> prod(K), next(K);

    auto accumulate = [&](int node, const std::vector<WeilEngine::State>& st) {
        std::fill(prod.begin(), prod.end(), 0);
        prod[0] = 1;
        i64 phase = 0;  // sum of j_B sign_B, in quarter turns
        mpz_class den = 1;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& eng = engines[b];
            std::vector<i64> tr(K, 0);
            for (int g = 0; g < blocks[b].size(); ++g) {
                const i64* p = eng.entry(st[b], g, g);
                for (i64 e = 0; e < K; ++e) tr[e] += p[e];
            }
            const int j = st[b].k / 2;
            check_internal(st[b].k % 2 == tree.s_count[node] % 2, "block scale parity mismatch");
            phase += static_cast<i64>(j) * blocks[b].signature();
            for (int r = 0; r < j; ++r) den *= static_cast<long>(blocks[b].order());
            std::fill(next.begin(), next.end(), 0);
            for (i64 x = 0; x < K; ++x) {
                if (!prod[x]) continue;
                for (i64 y = 0; y < K; ++y) {
                    if (!tr[y]) continue;
                    __int128 t;
                    if (__builtin_mul_overflow(prod[x], static_cast<__int128>(tr[y]), &t) ||
                        __builtin_add_overflow(next[(x + y) % K], t, &next[(x + y) % K]))
                        throw Error(errc::bound_exceeded, "overflow multiplying block traces");
                }
            }
            std::swap(prod, next);
        }
        const i64 rot = mod(K * phase / 4, K);
        auto& a = acc[tree.s_count[node] % 2];
        Rational inv_den = Rational(1) / Rational(den);
        for (i64 e = 0; e < K; ++e) {
            if (!prod[e]) continue;
            a[(e + rot) % K] += Rational(to_mpz(prod[e])) * inv_den;
        }
    };

    std::function<void(int, const std::vector<WeilEngine::State>&)> visit = [&](int node, const std::vector<WeilEngine::State>& st) {
        accumulate(node, st);
        for (int ch : children[node]) {
            auto t = st;
            for (std::size_t b = 0; b < blocks.size(); ++b) engines[b].apply(tree.letter[ch], t[b]);
            visit(ch, t);
        }
    };
    visit(0, start);

    auto to_cyclo = [&](const std::vector<Rational>& a) {
        std::map<i64, Rational> m;
        for (i64 e = 0; e < K; ++e)
            if (sgn(a[e]) != 0) m[e] = a[e];
        return CycloNumber::from_map(K, std::move(m));
    };
    CycloNumber total = to_cyclo(acc[0]) + weil_scalar(D) * to_cyclo(acc[1]);
    total = total.scaled(Rational(1) / Rational(static_cast<long>(tree.size())));
    auto r = total.as_rational();
    if (!r || r->get_den() != 1 || sgn(*r) < 0)
        throw Error(errc::internal, "dimension trace is not a non-negative integer: " + total.str());
    return r->get_num().get_si();
}

// --- ξ extraction ----------------------------------------------------------------

/// ξ with ρ(M) e^0 = ξ sqrt|D_c|/sqrt|D| sum_{β in D^{c*}} e(-a q_c(β)) e^β; checked on every β.
inline CycloNumber xi_factor(const DiscriminantForm& D, const Mat2& M) {
    require_even_signature(D);
    const GroupAlgebraVector w = rho(D, M, GroupAlgebraVector::basis(D.size(), 0));
    const i64 c = M.c;
    const auto sub = subgroup_Dc(D, c);
    const auto xc = find_xc(D, c);
    if (!xc) throw Error(errc::internal, "no 2-torsion representative of D^{c*}");
    const CycloNumber norm = CycloNumber::sqrt_int(static_cast<i64>(sub.kernel.size())) / CycloNumber::sqrt_int(D.order());
    std::optional<CycloNumber> xi;
    std::vector<char> in_star(D.size(), 0);
    for (int beta : sub.star) {
        in_star[beta] = 1;
        QmodZ qc = q_c(D, c, beta, *xc);
        CycloNumber expected = norm * CycloNumber::e_of(-mod(M.a, qc.den()) * qc.num(), qc.den());
        CycloNumber x = w[beta] / expected;
        if (xi && !(*xi == x)) throw Error(errc::internal, "ξ extraction differs across D^{c*} for this x_c");
        xi = x;
    }
    for (int g = 0; g < D.size(); ++g)
        if (!in_star[g] && !w[g].is_zero()) throw Error(errc::internal, "ρ(M) e^0 not supported on D^{c*}");
    if (!(*xi * xi->conj() == CycloNumber(1))) throw Error(errc::internal, "extracted ξ is not a root of unity");
    return *xi;
}

// --- closed forms ----------------------------------------------------------------------

/// Recognized single-family symbols with closed formulas.
struct Family {
    enum Kind { odd_prime, even_two, odd_two, odd_two_four, level_eight, trivial } kind;
    i64 p = 1;
    int n = 0, eps = 1, t = 0;
};

inline std::optional<Family> classify_family(const JordanSymbol& sym) {
    const auto& cs = sym.components();
    if (cs.empty()) return Family{Family::trivial};
    if (cs.size() == 1) {
        const auto& c = cs[0];
        if (c.k != 1) return std::nullopt;
        if (c.p != 2) return Family{Family::odd_prime, c.p, c.rank, c.sign, 0};
        if (c.even) return Family{Family::even_two, 2, c.rank, c.sign, 0};
        return Family{Family::odd_two, 2, c.rank, c.sign, c.t};
    }
    if (cs.size() == 2 && cs[0].q == 2 && !cs[0].even && cs[1].q == 4 && cs[1].even && cs[1].rank == 2 && cs[1].sign > 0)
        return Family{Family::odd_two_four, 2, cs[0].rank, cs[0].sign, cs[0].t};
    if (cs.size() == 3 && cs[0].q == 2 && !cs[0].even && cs[0].rank == 1 && cs[0].t == 1 && cs[0].sign > 0 &&
        cs[1].q == 4 && !cs[1].even && cs[1].rank == 1 && cs[2].q == 8 && cs[2].even && cs[2].rank == 2 && cs[2].sign > 0)
        return Family{Family::level_eight, 2, 1, cs[1].sign, cs[1].t};
    return std::nullopt;
}

/// Closed-form dim C[D]^Γ for the covered families; throws no_closed_form otherwise.
inline i64 dim_closed_form(const JordanSymbol& sym) {
    if (sym.signature() % 2) return 0;
    auto fam = classify_family(sym);
    if (!fam) throw Error(errc::no_closed_form, "no closed dimension formula for " + sym.str());
    const int n = fam->n, eps = fam->eps, t = fam->t;
    CycloNumber d;
    switch (fam->kind) {
        case Family::trivial: return 1;
        case Family::level_eight: return 1;
        case Family::odd_prime: {
            const i64 p = fam->p;
            if (n % 2 == 0)
                d = CycloNumber(make_rational(ipow(p, n - 1) - p, p * p - 1) + 1 +
                                pow_rational(kronecker(-1, p), n / 2) * eps * pow_rational(p, (n - 2) / 2));
            else
                d = CycloNumber(make_rational(ipow(p, n - 1) - 1, p * p - 1));
            break;
        }
        case Family::even_two:
            d = CycloNumber(make_rational(ipow(2, n - 1) + 1, 3) + eps * pow_rational(2, (n - 2) / 2));
            break;
        case Family::odd_two:
            if (mod(t, 4) != 0) return 0;
            d = CycloNumber(Rational(1, 3) * (pow_rational(2, n - 3) + 1) +
                            eps * (mod(t, 8) == 4 ? -1 : 1) * pow_rational(2, (n - 4) / 2));
            break;
        case Family::odd_two_four: {
            const int delta = mod(t, 4) == 0 ? kronecker(t - 1, 2) : 0;
            const Rational I = pow_rational(2, n + 2) + eps * pow_rational(2, (n + 2) / 2) * delta;
            const Rational I2 = pow_rational(2, n) + eps * pow_rational(2, (n + 2) / 2) * delta;
            CycloNumber et4 = CycloNumber::e_of(t, 4), e3t8 = CycloNumber::e_of(3 * t, 8);
            d = CycloNumber(I / 12) * (CycloNumber(1) + CycloNumber(eps) * e3t8 * CycloNumber(pow_rational(2, -n / 2)) * (CycloNumber(1) + et4)) +
                CycloNumber(I2 / 12) * et4;
            break;
        }
    }
    auto r = d.as_rational();
    if (!r || r->get_den() != 1) throw Error(errc::internal, "closed-form dimension is not an integer for " + sym.str());
    return r->get_num().get_si();
}

/// Closed-form inv_D(e^γ) for γ isotropic in D = from_jordan_symbol(sym); throws no_closed_form outside the families.
inline GroupAlgebraVector projection_closed_form(const JordanSymbol& sym, const DiscriminantForm& D, int gamma) {
    if (!D.isotropic(gamma)) throw Error(errc::invalid_input, "γ must be isotropic");
    auto fam = classify_family(sym);
    if (!fam) throw Error(errc::no_closed_form, "no closed projection formula for " + sym.str());
    GroupAlgebraVector v(D.size());
    if (!D.even_signature()) return v;
    const auto I = isotropic_indices(D);
    const int n = fam->n, eps = fam->eps, t = fam->t;
    const CycloNumber e_sig4 = CycloNumber::e_of(D.signature(), 4);
    auto add = [&](int mu, const CycloNumber& c) { v[mu] += c; };
    // c {e^μ + e(sign/4) e^{-μ}}
    auto add_pair = [&](int mu, const CycloNumber& c) {
        v[mu] += c;
        v[D.neg(mu)] += c * e_sig4;
    };
    // sum_{μ in γ^⊥ ∩ I} base e^μ - sum_{μ in I} e^μ, scaled.
    auto perp_term = [&](i64 base, const CycloNumber& coef) {
        for (int mu : I) add(mu, coef * CycloNumber(static_cast<long>((D.b_residue(mu, gamma) == 0 ? base : 0) - 1)));
    };
    switch (fam->kind) {
        case Family::trivial:
            v[0] = CycloNumber(1);
            break;
        case Family::odd_prime: {
            const i64 p = fam->p;
            const Rational inv_p21 = make_rational(1, p * p - 1);
            if (n % 2 == 0) {
                CycloNumber coef(pow_rational(kronecker(-1, p), n / 2) * eps * inv_p21 * pow_rational(p, -(n - 2) / 2));
                perp_term(p, coef);
                for (i64 a = 1; a < p; ++a) add(D.mul(a, gamma), CycloNumber(inv_p21));
            } else {
                CycloNumber coef(pow_rational(kronecker(-1, p), (n + 1) / 2) * kronecker(2, p) * eps * inv_p21 *
                                 pow_rational(p, -(n - 3) / 2));
                for (int mu : I) {
                    QmodZ b = D.b(mu, gamma);
                    i64 j = b.num() * (p / b.den());
                    if (int ls = kronecker(j, p)) add(mu, coef * CycloNumber(ls));
                }
                for (i64 a = 1; a < p; ++a)
                    add(D.mul(a, gamma), CycloNumber(inv_p21 * kronecker(a, p)));
            }
            break;
        }
        case Family::even_two: {
            CycloNumber coef(Rational(eps, 3) * pow_rational(2, -(n - 2) / 2));
            perp_term(2, coef);
            add(gamma, CycloNumber(Rational(1, 3)));
            break;
        }
        case Family::odd_two: {
            if (n % 2 || mod(t, 4) != 0) break;
            const int x2 = *find_xc(D, 2);
            add(gamma, CycloNumber(Rational(1, 6)));
            add(D.add(gamma, x2), CycloNumber(Rational(1, 6)));
            CycloNumber coef(Rational(eps * (mod(t, 8) == 4 ? -1 : 1), 6) * pow_rational(2, -(n - 4) / 2));
            perp_term(2, coef);
            break;
        }
        case Family::odd_two_four: {
            const int x2 = *find_xc(D, 2);
            const auto sub = subgroup_Dc(D, 2);
            add_pair(gamma, CycloNumber(Rational(1, 12)));
            for (int s : sub.star) {
                int mu = D.add(gamma, s);
                if (!D.isotropic(mu)) continue;
                add_pair(mu, CycloNumber(Rational(1, 24)) * CycloNumber::e_of(q_c(D, 2, s, x2)));
            }
            CycloNumber coef = CycloNumber(eps) * CycloNumber::e_of(3 * t, 8) * CycloNumber(Rational(1, 12) * pow_rational(2, -n / 2));
            for (int mu : I) add_pair(mu, coef * CycloNumber::e_of(-D.b_residue(mu, gamma), D.level()));
            break;
        }
        case Family::level_eight: {
            const int sig = D.signature();
            const i64 N = D.level();
            const CycloNumber sqrt2 = CycloNumber::sqrt_int(2);
            const CycloNumber c1 = CycloNumber::e_of(-sig, 8) / (CycloNumber(96) * sqrt2);
            for (int mu : I) {
                i64 b = D.b_residue(mu, gamma);
                CycloNumber f = CycloNumber::e_of(-b, N) * (CycloNumber(1) - CycloNumber::e_of(-4 * b, N));
                if (!f.is_zero()) add_pair(mu, c1 * f);
            }
            const int x2 = *find_xc(D, 2), x4 = *find_xc(D, 4);
            const auto star2 = subgroup_Dc(D, 2).star, star4 = subgroup_Dc(D, 4).star;
            const CycloNumber c2 = CycloNumber(eps) * CycloNumber::e_of(-t, 8) / (CycloNumber(192) * sqrt2);
            for (i64 a = 1; a < 8; a += 2) {
                int ag = D.mul(a, gamma);
                for (int s : star2) {
                    int mu = D.add(ag, s);
                    if (!D.isotropic(mu)) continue;
                    add_pair(mu, c2 * CycloNumber::e_of(q_c(D, 2, s, x2)) * CycloNumber::e_of((a - 1) / 2 * D.b_residue(mu, gamma), N));
                }
            }
            for (i64 a = 1; a < 8; a += 4) {
                int ag = D.mul(a, gamma);
                for (int s : star4) {
                    int mu = D.add(ag, s);
                    if (!D.isotropic(mu)) continue;
                    add_pair(mu, CycloNumber(Rational(1, 96)) * CycloNumber::e_of(q_c(D, 4, s, x4)) *
                                     CycloNumber::e_of((a - 1) / 4 * D.b_residue(mu, gamma), N));
                }
            }
            for (i64 a = 1; a < 8; a += 2) add(D.mul(a, gamma), CycloNumber(Rational(D.chi(a), 48)));
            break;
        }
    }
    return v;
}

}  // namespace weilinv
