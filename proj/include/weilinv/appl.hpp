#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fqm.hpp"
#include "fundamental.hpp"
#include "induct.hpp"
#include "jordan.hpp"
#include "weil.hpp"

namespace weilinv {

// --- weight-2 cusp forms at prime level ---------------------------------------------------

/// (p, ε, n) of a symbol p^{εn} with p prime and n even; throws otherwise.
inline std::tuple<i64, int, int> prime_level_even_rank(const JordanSymbol& sym) {
    const auto& cs = sym.components();
    if (cs.size() != 1 || cs[0].k != 1 || (cs[0].p == 2 && !cs[0].even))
        throw Error(errc::invalid_input, "S2 dimension needs a symbol p^{εn} of prime level");
    if (cs[0].rank % 2) throw Error(errc::invalid_input, "S2 dimension is only implemented for even n");
    return {cs[0].p, cs[0].sign, cs[0].rank};
}

/// Closed-form dim S_2(D) for D = p^{εn}, n even.
inline i64 dim_S2(const JordanSymbol& sym) {
    auto [p, eps, n] = prime_level_even_rank(sym);
    if (p <= 3) return 0;
    const Rational pn = pow_rational(p, n);
    const Rational r = (pn + 5) / 24 - pow_rational(p, n - 1) / 4 -
                       eps * pow_rational(kronecker(-1, p), n / 2) * make_rational(p - 5, 4) * pow_rational(p, (n - 2) / 2) +
                       (pow_rational(p, n - 1) - p) / (p * p - 1);
    Rational c = r;
    c.canonicalize();
    if (c.get_den() != 1 || sgn(c) < 0) throw Error(errc::internal, "S2 closed form is not a non-negative integer");
    return c.get_num().get_si();
}

/// Intermediate quantities of the trace evaluation on V = span{e^γ + e^{-γ}}.
struct S2Trace {
    i64 d = 0;                     // dim V
    i64 isotropic_classes = 0;     // |{γ in D/±1 : q(γ) = 0}|
    Rational alpha_T;
    CycloNumber trace_half_S;      // tr(e(1/2)ρ(S)) on V
    Rational alpha_half_S;
    CycloNumber trace_third_ST;    // tr(e(1/3)ρ(ST)) on V, the inverse of the order-3 matrix
    Rational alpha_third_ST_inv;
    i64 dim_invariants = 0;
    i64 dim = 0;
};

namespace detail {

/// Sum of eigenvalue arguments x_i in [0,1) of a unitary M on a space of dimension d with M^m = e(power_arg) I.
/// Multiplicities of e(x0 + k/m) follow from tr(M) alone for m in {1, 2, 3}.
inline Rational alpha_from_trace(i64 d, const CycloNumber& trace, int m, const Rational& power_arg) {
    Rational x0 = power_arg / m;  // power_arg in [0,1) keeps x0 in [0, 1/m)
    x0.canonicalize();
    const CycloNumber t = trace * CycloNumber::e_of(-x0);
    std::vector<Rational> mult(m);
    if (m == 1) {
        mult[0] = d;
    } else if (m == 2) {
        auto diff = t.as_rational();  // m0 - m1
        if (!diff) throw Error(errc::internal, "order-2 trace is not rational");
        mult[0] = (d + *diff) / 2;
        mult[1] = (d - *diff) / 2;
    } else if (m == 3) {
        // t = m0 + m1 ω + m2 ω² with ω = e(1/3): 2 Re t = 3 m0 - d and 2 Im t / √3 = m1 - m2, using i√3 = ω - ω².
        const CycloNumber i_sqrt3 = CycloNumber::e_of(1, 3) - CycloNumber::e_of(2, 3);
        auto twice_re = (t + t.conj()).as_rational();
        auto m1_minus_m2 = ((t - t.conj()) / i_sqrt3).as_rational();
        if (!twice_re || !m1_minus_m2) throw Error(errc::internal, "order-3 trace has non-rational parts");
        const Rational m0 = (d + *twice_re) / 3;
        mult[0] = m0;
        mult[1] = (d - m0 + *m1_minus_m2) / 2;
        mult[2] = (d - m0 - *m1_minus_m2) / 2;
    } else {
        throw Error(errc::internal, "unsupported order");
    }
    Rational alpha = 0;
    for (int k = 0; k < m; ++k) {
        Rational mk = mult[k];
        mk.canonicalize();
        if (mk.get_den() != 1 || sgn(mk) < 0) throw Error(errc::internal, "eigenvalue multiplicity is not a natural number");
        alpha += mk * (x0 + Rational(k, m));
    }
    alpha.canonicalize();
    return alpha;
}

}  // namespace detail

/// Freitag's dimension formula evaluated with exact traces of ρ_D restricted to V.
inline S2Trace dim_S2_trace_oracle(const DiscriminantForm& D) {
    require_even_signature(D);
    auto primes = prime_divisors(D.level());
    if (primes.size() != 1 || D.level() != primes[0]) throw Error(errc::invalid_input, "trace oracle needs prime level");
    const i64 N = D.level();
    S2Trace out;
    // Classes of D/±1 with their q residues; fixed points γ = -γ contribute a single basis vector.
    std::vector<i64> count_q(N, 0), count_fixed_q(N, 0);
    for (int g = 0; g < D.size(); ++g) {
        const int ng = D.neg(g);
        if (ng < g) continue;
        ++out.d;
        ++count_q[D.q_residue(g)];
        if (ng == g) ++count_fixed_q[D.q_residue(g)];
    }
    out.isotropic_classes = count_q[0];
    // ρ(T) e^γ = e(-q(γ)) e^γ, so the eigenvalue argument is frac(-q(γ)).
    for (i64 r = 0; r < N; ++r) out.alpha_T += Rational(count_q[r] * mod(-r, N), N);
    out.alpha_T.canonicalize();

    // Diagonal of ρ(S) on the class vector of γ: c (e(b(γ,γ)) + e(b(-γ,γ))) = c (e(2q) + e(-2q)), or c for γ = -γ.
    // Diagonal of ρ(ST): the same with the extra factor e(-q(γ)).
    const CycloNumber c = weil_scalar(D);
    CycloNumber trace_S, trace_ST;
    for (i64 r = 0; r < N; ++r) {
        const i64 moving = count_q[r] - count_fixed_q[r];
        const i64 fixed = count_fixed_q[r];
        if (moving + fixed == 0) continue;
        const CycloNumber two_cos = CycloNumber::e_of(2 * r, N) + CycloNumber::e_of(-2 * r, N);
        const CycloNumber diag = CycloNumber(static_cast<long>(moving)) * two_cos + CycloNumber(static_cast<long>(fixed));
        trace_S += diag;
        trace_ST += CycloNumber::e_of(-r, N) * diag;
    }
    trace_S *= c;
    trace_ST *= c;
    out.trace_half_S = CycloNumber(-1) * trace_S;
    out.trace_third_ST = CycloNumber::e_of(1, 3) * trace_ST;

    // ρ(S)² = ρ(Z) acts on V as e(sign/4); hence (e(1/2)ρ(S))² = e(sign/4) and (e(1/3)ρ(ST))^{-3} = e(-sign/4).
    const int sig = D.signature();
    const Rational z_arg = Rational(mod(sig, 4), 4);
    const Rational z_inv_arg = Rational(mod(-sig, 4), 4);
    out.alpha_half_S = detail::alpha_from_trace(out.d, out.trace_half_S, 2, z_arg);
    out.alpha_third_ST_inv = detail::alpha_from_trace(out.d, out.trace_third_ST.conj(), 3, z_inv_arg);
    out.dim_invariants = dim_invariants(D);

    Rational total = Rational(out.d, 6) + out.d - out.alpha_half_S - out.alpha_third_ST_inv - out.alpha_T -
                     out.isotropic_classes + out.dim_invariants;
    total.canonicalize();
    if (total.get_den() != 1) throw Error(errc::internal, "trace formula gives a non-integer dimension " + total.get_str());
    out.dim = total.get_num().get_si();
    return out;
}

inline S2Trace dim_S2_trace_oracle(const JordanSymbol& sym) {
    prime_level_even_rank(sym);
    return dim_S2_trace_oracle(from_jordan_symbol(sym));
}

// --- singular-weight Jacobi forms ----------------------------------------------------------

/// One generator of J_{n/2,L}: an overlattice M/L = H with the invariant of M'/M = H^⊥/H.
struct JacobiBasisEntry {
    IsotropicSubgroup overlattice;
    std::vector<int> section;              // quotient element -> representative in L'/L
    GroupAlgebraVector coefficients;       // integral invariant of M'/M
    GroupAlgebraVector lifted;             // its lift to L'/L
    int rank = 0;
    Rational weight;
};

struct JacobiBasis {
    GramForm lattice;
    std::vector<JacobiBasisEntry> entries;
    std::size_t span_rank = 0;
    bool odd_rank = false;
};

/// Exact positive-definiteness by the leading principal minors.
inline bool positive_definite(const IntMatrix& G) {
    const std::size_t n = G.size();
    std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M[i][j] = Rational(static_cast<long>(G[i][j]));
    for (std::size_t c = 0; c < n; ++c) {
        if (sgn(M[c][c]) <= 0) return false;
        for (std::size_t r = c + 1; r < n; ++r) {
            Rational f = M[r][c] / M[c][c];
            for (std::size_t j = c; j < n; ++j) M[r][j] -= f * M[c][j];
        }
    }
    return true;
}

/// Invariant of a quotient whose p-parts are all fundamental, as a tensor product of the part generators.
inline std::optional<GroupAlgebraVector> fundamental_product_invariant(const DiscriminantForm& Q) {
    if (!Q.even_signature()) return std::nullopt;
    const auto parts = p_part_decompose(Q);
    std::vector<std::vector<GroupAlgebraVector>> bases;
    for (const auto& part : parts) {
        auto desc = find_fundamental_form(part.p, part.form.square_class(), part.form.signature());
        if (!desc || !is_fundamental_quotient(part.form, *desc)) return std::nullopt;
        bases.push_back({generic_fundamental_vector(part.form, desc->uses_zero()).second});
    }
    if (parts.empty()) return GroupAlgebraVector::basis(1, 0);
    auto combined = tensor_combine(Q, parts, bases);
    check_internal(combined.size() == 1, "product invariant should be unique");
    return normalize_integer(combined.front());
}

/// Generators of J_{n/2,L} from the overlattices M with all p-parts of M'/M fundamental.
inline JacobiBasis jacobi_singular_basis(const IntMatrix& G) {
    if (!positive_definite(G)) throw Error(errc::invalid_input, "Gram matrix must be positive definite");
    JacobiBasis out{from_gram(G), {}, 0, false};
    const int n = static_cast<int>(G.size());
    if (n % 2) {
        out.odd_rank = true;
        return out;
    }
    const DiscriminantForm& D = out.lattice.form;
    if (mod(D.signature() - n, 8) != 0) throw Error(errc::internal, "signature of L'/L differs from the rank");
    std::vector<GroupAlgebraVector> lifted;
    for (const auto& H : isotropic_subgroups(D)) {
        auto Q = quotient(D, H);
        auto v = fundamental_product_invariant(Q.form);
        if (!v) continue;
        JacobiBasisEntry e{H, Q.section, *v, lift_up(D, Q, *v), n, make_rational(n, 2)};
        lifted.push_back(e.lifted);
        out.entries.push_back(std::move(e));
    }
    out.span_rank = exact_rank(lifted);
    return out;
}

/// Dual vectors y (α = G^{-1} y) with α²/2 <= bound, by Fincke-Pohst on G^{-1}; visitor gets (y, α²/2 as a Rational).
template <typename Visit>
void enumerate_dual_vectors(const IntMatrix& G, const Rational& bound, Visit&& visit) {
    const std::size_t n = G.size();
    const auto Ginv = rational_inverse(G);
    // Exact norm: y^T adj y / det with adj = det * G^{-1} integral.
    mpz_class det = 1;
    for (const auto& row : Ginv)
        for (const auto& x : row) det = lcm(det, mpz_class(x.get_den()));
    std::vector<std::vector<i64>> adj(n, std::vector<i64>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Rational a = Ginv[i][j] * det;
            a.canonicalize();
            if (!a.get_num().fits_slong_p()) throw Error(errc::bound_exceeded, "Gram inverse too large");
            adj[i][j] = a.get_num().get_si();
        }
    // Cholesky-type decomposition Q(y) = sum_i d_i (y_i + sum_{j>i} m_ij y_j)^2 of y^T G^{-1} y.
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    std::vector<double> dg(n);
    {
        std::vector<std::vector<double>> a(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a[i][j] = Ginv[i][j].get_d();
        for (std::size_t i = 0; i < n; ++i) {
            dg[i] = a[i][i];
            for (std::size_t j = i + 1; j < n; ++j) m[i][j] = a[i][j] / dg[i];
            for (std::size_t r = i + 1; r < n; ++r)
                for (std::size_t c = r; c < n; ++c) a[r][c] -= a[i][r] * a[i][c] / dg[i];
        }
    }
    const double limit = 2 * bound.get_d() * (1 + 1e-9) + 1e-9;
    std::vector<i64> y(n, 0);
    const mpz_class bound_scaled = mpz_class(2 * bound * det);  // y^T adj y <= 2 bound det
    auto rec = [&](auto&& self, int i, double remaining) -> void {
        if (i < 0) {
            __int128 acc = 0;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) acc += (__int128)y[r] * adj[r][c] * y[c];
            const mpz_class val = to_mpz(acc);
            if (val > bound_scaled) return;
            Rational half_norm(val, 2 * det);
            half_norm.canonicalize();
            visit(static_cast<const std::vector<i64>&>(y), half_norm);
            return;
        }
        double center = 0;
        for (std::size_t j = i + 1; j < n; ++j) center -= m[i][j] * y[j];
        const double radius = std::sqrt(std::max(0.0, remaining / dg[i])) + 1e-9;
        const i64 lo = static_cast<i64>(std::ceil(center - radius)), hi = static_cast<i64>(std::floor(center + radius));
        for (i64 v = lo; v <= hi; ++v) {
            y[i] = v;
            const double t = v - center;
            self(self, i - 1, remaining - dg[i] * t * t);
        }
        y[i] = 0;
    };
    rec(rec, static_cast<int>(n) - 1, limit);
}

/// Fourier coefficients c(0..P) of sum_γ v_γ θ_{γ+L}(τ) for an invariant v on L'/L (supported on isotropic γ).
inline std::vector<i64> theta_q_expansion(const GramForm& L, const GroupAlgebraVector& v, int precision) {
    if (precision < 0) throw Error(errc::invalid_input, "precision must be non-negative");
    if (precision > 64) throw Error(errc::bound_exceeded, "precision exceeds the enumeration bound");
    const auto supp = v.support();
    std::vector<i64> coef_int(L.form.size(), 0);
    for (int g : supp) {
        auto r = v[g].as_rational();
        if (!r || r->get_den() != 1) throw Error(errc::invalid_input, "theta expansion needs integral coefficients");
        if (!L.form.isotropic(g)) throw Error(errc::invalid_input, "coefficient outside the isotropic elements");
        coef_int[g] = r->get_num().get_si();
    }
    std::vector<i64> c(precision + 1, 0);
    enumerate_dual_vectors(L.gram, Rational(precision), [&](const std::vector<i64>& y, const Rational& half_norm) {
        const int g = L.element_of_dual(y);
        if (coef_int[g] == 0) return;
        check_internal(half_norm.get_den() == 1, "isotropic coset contains a vector of non-integral norm");
        c[half_norm.get_num().get_si()] += coef_int[g];
    });
    return c;
}

}  // namespace weilinv
