#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "appl.hpp"
#include "errors.hpp"
#include "fqm.hpp"
#include "fundamental.hpp"
#include "induct.hpp"
#include "jordan.hpp"
#include "weil.hpp"

namespace weilinv::cli {

using Json = nlohmann::ordered_json;

/// One invocation: a command on exactly one input form.
struct JobSpec {
    std::string command;
    std::optional<std::string> symbol;
    std::optional<std::string> gram_file;
    bool check = false;
    std::optional<i64> max_order;  // overrides WEILINV_MAX_ORDER and the default bound
    std::string format = "json";
    int precision = 5;  // theta coefficients for jacobi
};

struct Outcome {
    int exit_code = 0;
    Json document;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"dim", "invariants", "induced-basis", "verify", "s2dim", "jacobi"};
    return c;
}

/// Bounds from the environment: WEILINV_MAX_ORDER, WEILINV_MAX_LEVEL, WEILINV_MAX_CYCLO_ORDER.
inline void apply_env_overrides() {
    auto read = [](const char* name) -> std::optional<i64> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        char* end = nullptr;
        long long x = std::strtoll(v, &end, 10);
        if (*end != '\0' || x <= 0) throw Error(errc::invalid_input, std::string(name) + " must be a positive integer");
        return x;
    };
    if (auto x = read("WEILINV_MAX_ORDER")) brute_force_bound() = *x;
    if (auto x = read("WEILINV_MAX_LEVEL")) level_bound() = *x;
    if (auto x = read("WEILINV_MAX_CYCLO_ORDER")) CycloNumber::max_order() = *x;
}

// --- serialization ---------------------------------------------------------------------

inline std::string exact_str(const CycloNumber& c) {
    if (auto r = c.as_rational()) return r->get_str();
    return c.str();
}

inline Json element_json(const DiscriminantForm& D, int g) { return D.element(g).coeffs; }

/// Nonzero coefficients in element-index order.
inline Json vector_json(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    Json out = Json::array();
    for (int g : v.support()) out.push_back({{"element", element_json(D, g)}, {"coefficient", exact_str(v[g])}});
    return out;
}

inline std::string gram_str(const IntMatrix& G) {
    std::string s = "gram[";
    for (std::size_t i = 0; i < G.size(); ++i) {
        s += i ? ",[" : "[";
        for (std::size_t j = 0; j < G[i].size(); ++j) s += (j ? "," : "") + std::to_string(G[i][j]);
        s += "]";
    }
    return s + "]";
}

/// Input form with whatever extra structure its source provides.
struct LoadedForm {
    std::string label;
    DiscriminantForm form;
    std::optional<JordanSymbol> symbol;
    std::optional<GramForm> gram;
};

inline IntMatrix read_gram_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::invalid_input, "cannot open Gram file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw Error(errc::parse, "Gram file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_array() || j.empty()) throw Error(errc::parse, "Gram file must hold a non-empty array of arrays");
    IntMatrix G;
    for (const auto& row : j) {
        if (!row.is_array()) throw Error(errc::parse, "Gram file must hold a non-empty array of arrays");
        std::vector<i64> r;
        for (const auto& x : row) {
            if (!x.is_number_integer()) throw Error(errc::parse, "Gram entries must be integers");
            r.push_back(x.get<i64>());
        }
        G.push_back(std::move(r));
    }
    return G;
}

inline LoadedForm load_form(const JobSpec& spec) {
    if (spec.symbol.has_value() == spec.gram_file.has_value())
        throw Error(errc::invalid_input, "exactly one of --symbol and --gram is required");
    if (spec.symbol) {
        auto sym = JordanSymbol::parse(*spec.symbol);
        if (sym.order() > brute_force_bound().load()) throw Error(errc::bound_exceeded, "form order exceeds --max-order");
        return {sym.str().empty() ? "1" : sym.str(), from_jordan_symbol(sym), sym, std::nullopt};
    }
    auto G = read_gram_file(*spec.gram_file);
    auto gf = from_gram(G);
    return {gram_str(G), gf.form, std::nullopt, gf};
}

inline Json header(const LoadedForm& f) {
    const auto& D = f.form;
    return Json{{"form", f.label},
                {"order", D.order()},
                {"level", D.level()},
                {"signature", D.signature()},
                {"square_class", D.square_class() ? "square" : "non-square"}};
}

// --- commands --------------------------------------------------------------------------

inline Json cmd_dim(const LoadedForm& f, bool check, bool& ok) {
    Json out;
    const i64 d = f.form.even_signature() ? dim_invariants(f.form) : 0;
    out["dim"] = d;
    if (!check) return out;
    Json checks = Json::object();
    if (f.form.even_signature()) {
        const i64 proj = dim_by_projection(f.form);
        checks["projection"] = {{"value", proj}, {"pass", proj == d}};
        ok = ok && proj == d;
    }
    if (f.symbol) {
        try {
            const i64 cf = dim_closed_form(*f.symbol);
            checks["closed_form"] = {{"value", cf}, {"pass", cf == d}};
            ok = ok && cf == d;
        } catch (const Error& e) {
            if (e.code() != errc::no_closed_form) throw;
            checks["closed_form"] = {{"value", nullptr}, {"pass", nullptr}};
        }
    }
    out["checks"] = checks;
    return out;
}

inline Json cmd_invariants(const LoadedForm& f) {
    const auto& D = f.form;
    require_even_signature(D);
    std::vector<GroupAlgebraVector> projections;
    for (int g : isotropic_indices(D)) projections.push_back(inv(D, g));
    auto basis = independent_subset(projections);
    Json vs = Json::array();
    for (const auto& v : basis) vs.push_back(vector_json(D, v));
    return Json{{"dim", basis.size()}, {"basis", vs}};
}

inline Json cmd_induced(const LoadedForm& f) {
    const auto& D = f.form;
    require_even_signature(D);
    Json out;
    if (p_part_decompose(D).size() <= 1) {
        auto gens = induced_generating_set(D);
        Json arr = Json::array();
        std::vector<GroupAlgebraVector> vs;
        for (const auto& iv : gens) {
            Json h = Json::array();
            for (int g : iv.subgroup.generators) h.push_back(element_json(D, g));
            arr.push_back({{"subgroup_order", iv.subgroup.order()}, {"subgroup_generators", h}, {"vector", vector_json(D, iv.vector)}});
            vs.push_back(iv.vector);
        }
        out["generators"] = arr;
        out["rank"] = exact_rank(vs);
    } else {
        auto basis = invariant_basis(D);
        Json arr = Json::array();
        for (const auto& v : basis) arr.push_back({{"vector", vector_json(D, v)}});
        out["generators"] = arr;
        out["rank"] = exact_rank(basis);
    }
    out["dim"] = dim_invariants(D);
    return out;
}

inline Json cmd_s2dim(const LoadedForm& f) {
    if (!f.symbol) throw Error(errc::invalid_input, "s2dim needs --symbol");
    const i64 closed = dim_S2(*f.symbol);
    auto tr = dim_S2_trace_oracle(*f.symbol);
    return Json{{"dim_S2", closed},
                {"trace_oracle",
                 {{"dim", tr.dim},
                  {"d", tr.d},
                  {"trace_half_S", exact_str(tr.trace_half_S)},
                  {"alpha_half_S", tr.alpha_half_S.get_str()},
                  {"alpha_third_ST_inverse", tr.alpha_third_ST_inv.get_str()},
                  {"alpha_T", tr.alpha_T.get_str()},
                  {"isotropic_classes", tr.isotropic_classes},
                  {"dim_invariants", tr.dim_invariants}}},
                {"agree", closed == tr.dim}};
}

inline Json cmd_jacobi(const LoadedForm& f, int precision) {
    if (!f.gram) throw Error(errc::invalid_input, "jacobi needs --gram");
    auto J = jacobi_singular_basis(f.gram->gram);
    Json out;
    out["rank_L"] = f.gram->gram.size();
    if (J.odd_rank) {
        out["basis"] = Json::array();
        out["note"] = "odd rank: no Jacobi forms of singular weight";
        return out;
    }
    const auto& D = J.lattice.form;
    out["weight"] = make_rational(static_cast<i64>(f.gram->gram.size()), 2).get_str();
    Json arr = Json::array();
    for (const auto& e : J.entries) {
        Json h = Json::array();
        for (int g : e.overlattice.generators) h.push_back(element_json(D, g));
        auto theta = theta_q_expansion(J.lattice, e.lifted, precision);
        arr.push_back({{"overlattice_generators", h},
                       {"overlattice_index", e.overlattice.order()},
                       {"vector", vector_json(D, e.lifted)},
                       {"theta_coefficients", theta}});
    }
    out["basis"] = arr;
    out["rank"] = J.span_rank;
    out["dim"] = dim_invariants(D);
    return out;
}

/// Property battery on one form; each entry reports pass and a counterexample when it fails.
inline Json cmd_verify(const LoadedForm& f, bool& ok) {
    const auto& D = f.form;
    Json props = Json::array();
    auto report = [&](const std::string& name, bool pass, const std::string& detail = "") {
        Json p{{"property", name}, {"pass", pass}};
        if (!pass) p["counterexample"] = detail;
        props.push_back(p);
        ok = ok && pass;
    };
    auto milgram = D.gauss_sum(1) == CycloNumber::e_of(D.signature(), 8) * CycloNumber::sqrt_int(D.order());
    report("milgram", milgram, "gauss sum " + D.gauss_sum(1).str());
    if (f.symbol) report("symbol_signature", f.symbol->signature() == D.signature(), "symbol gives " + std::to_string(f.symbol->signature()));
    if (!D.even_signature()) return Json{{"properties", props}, {"note", "odd signature: representation checks skipped"}};

    std::mt19937_64 rng(12345);
    auto random_vector = [&]() {
        std::uniform_int_distribution<int> coef(-3, 3);
        GroupAlgebraVector v(D.size());
        for (int g = 0; g < D.size(); ++g)
            if (int c = coef(rng)) v[g] = CycloNumber(c);
        return v;
    };
    const int trials = D.order() <= 64 ? 4 : 2;
    for (int i = 0; i < trials; ++i) {
        auto v = random_vector();
        auto s2 = rho_word(D, {Letter::S, Letter::S}, v);
        GroupAlgebraVector z(D.size());
        for (int g = 0; g < D.size(); ++g) z[D.neg(g)] = CycloNumber::e_of(D.signature(), 4) * v[g];
        report("S^2 = Z", s2 == z, "trial " + std::to_string(i));
        auto st3 = rho_word(D, {Letter::S, Letter::T, Letter::S, Letter::T, Letter::S, Letter::T}, v);
        report("(ST)^3 = S^2", st3 == s2, "trial " + std::to_string(i));
        report("engine = direct", rho_S(D, v) == rho_S_direct(D, v), "trial " + std::to_string(i));
        auto w = random_vector();
        report("unitary", inner(rho_S(D, v), rho_S(D, w)) == inner(v, w), "trial " + std::to_string(i));
    }
    const auto I = isotropic_indices(D);
    const int gamma = I[std::min<std::size_t>(1, I.size() - 1)];
    auto p = inv(D, gamma);
    report("inv idempotent", inv(D, p) == p, "γ index " + std::to_string(gamma));
    report("inv invariant", rho_S(D, p) == p && rho_T(D, p) == p, "γ index " + std::to_string(gamma));
    const i64 d = dim_invariants(D);
    const i64 dp = dim_by_projection(D);
    report("dim trace = projection", d == dp, std::to_string(d) + " vs " + std::to_string(dp));
    if (f.symbol) {
        try {
            const i64 cf = dim_closed_form(*f.symbol);
            report("dim closed form", cf == d, std::to_string(cf) + " vs " + std::to_string(d));
        } catch (const Error& e) {
            if (e.code() != errc::no_closed_form) throw;
        }
    }
    const std::size_t rank = exact_rank(invariant_basis(D));
    report("main theorem span", static_cast<i64>(rank) == d, "rank " + std::to_string(rank) + " vs dim " + std::to_string(d));
    auto subgroups = isotropic_subgroups(D);
    if (subgroups.size() > 1) {
        const auto& H = subgroups[1];
        auto Q = quotient(D, H);
        GroupAlgebraVector u(Q.form.size());
        for (int g = 0; g < Q.form.size(); ++g) u[g] = CycloNumber(g % 3 - 1);
        auto v = random_vector();
        report("lift/descend adjoint", inner(lift_up(D, Q, u), v) == inner(u, descend(D, Q, v)), "H of order " + std::to_string(H.order()));
        if (Q.form.even_signature())
            report("lift intertwines S", rho_S(D, lift_up(D, Q, u)) == lift_up(D, Q, rho_S(Q.form, u)), "H of order " + std::to_string(H.order()));
    }
    return Json{{"properties", props}};
}

/// Runs one job; errors become {"error": {"code", "message"}} with exit status 2.
inline Outcome run(const JobSpec& spec) {
    Outcome out;
    try {
        apply_env_overrides();
        if (spec.max_order) {
            if (*spec.max_order <= 0) throw Error(errc::invalid_input, "--max-order must be positive");
            brute_force_bound() = *spec.max_order;
        }
        if (std::find(commands().begin(), commands().end(), spec.command) == commands().end())
            throw Error(errc::invalid_input, "unknown command " + spec.command);
        auto f = load_form(spec);
        Json doc = header(f);
        bool ok = true;
        Json body;
        if (spec.command == "dim") body = cmd_dim(f, spec.check, ok);
        else if (spec.command == "invariants") body = cmd_invariants(f);
        else if (spec.command == "induced-basis") body = cmd_induced(f);
        else if (spec.command == "s2dim") body = cmd_s2dim(f);
        else if (spec.command == "jacobi") body = cmd_jacobi(f, spec.precision);
        else body = cmd_verify(f, ok);
        for (auto& [k, v] : body.items()) doc[k] = v;
        if (spec.command == "verify") doc["all_pass"] = ok;
        out.document = doc;
        out.exit_code = ok ? 0 : 1;
    } catch (const Error& e) {
        out.document = Json{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        out.exit_code = 2;
    } catch (const CycloOverflow& e) {
        out.document = Json{{"error", {{"code", errc::bound_exceeded}, {"message", e.what()}}}};
        out.exit_code = 2;
    }
    return out;
}

/// "key: value" lines; nested values are printed as compact JSON.
inline std::string render_text(const Json& doc) {
    std::ostringstream os;
    for (const auto& [k, v] : doc.items()) os << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    return os.str();
}

inline std::string render(const Outcome& o, const std::string& format) {
    return format == "text" ? render_text(o.document) : o.document.dump(2) + "\n";
}

}  // namespace weilinv::cli
