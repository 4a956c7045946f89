#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "numtheory.hpp"

namespace weilinv {

/// One Jordan component q^{±n}, q_II^{±n} or q_t^{±n}.
struct JordanComponent {
    i64 q = 1;       // prime power scale
    i64 p = 1;       // its prime
    int k = 0;       // q = p^k
    int rank = 0;
    int sign = 1;    // +1 or -1
    bool even = false;  // II marker, p = 2 only
    int t = 0;       // oddity subscript mod 8, odd 2-adic components only

    bool odd_two_adic() const { return p == 2 && !even; }
    bool square_scale() const { return k % 2 == 0; }
    i64 order() const { return ipow(q, rank); }
    i64 level() const { return odd_two_adic() ? 2 * q : q; }

    /// 4k term shared by p-excess and oddity: set iff q is not a square and the sign is negative.
    int sign_correction() const { return (!square_scale() && sign < 0) ? 4 : 0; }

    int p_excess() const { return p == 2 ? 0 : static_cast<int>(mod(rank * (q - 1) + sign_correction(), 8)); }
    int oddity() const {
        if (p != 2) return 0;
        return static_cast<int>(mod((even ? 0 : t) + sign_correction(), 8));
    }

    std::string str() const {
        std::string s = std::to_string(q);
        if (p == 2) s += even ? "_II" : "_" + std::to_string(t);
        s += sign > 0 ? "^+" : "^-";
        return s + std::to_string(rank);
    }
};

/// Subscripts t_i (odd residues mod 8) of rank-one pieces realizing q_t^{εn}; empty if none exist.
/// Prefers 1,...,1,t-(n-1); otherwise searches the last (at most three) pieces.
inline std::vector<int> split_odd_component(int t, int rank, int sign) {
    auto piece_sign = [](int ti) { return kronecker(ti, 2); };
    std::vector<int> out(rank, 1);
    int last = static_cast<int>(mod(t - (rank - 1), 8));
    if (last % 2 == 1 && piece_sign(last) == sign) {
        out.back() = last;
        return out;
    }
    const int free = std::min(rank, 3);
    const int prefix = rank - free;
    const int odd[4] = {1, 3, 5, 7};
    int combos = 1;
    for (int i = 0; i < free - 1; ++i) combos *= 4;
    for (int code = 0; code < combos; ++code) {
        int sum = prefix, sg = 1, c = code;
        for (int i = 0; i < free - 1; ++i) {
            int ti = odd[c % 4];
            c /= 4;
            out[prefix + i] = ti;
            sum += ti;
            sg *= piece_sign(ti);
        }
        int tl = static_cast<int>(mod(t - sum, 8));
        if (tl % 2 == 0 || sg * piece_sign(tl) != sign) continue;
        out.back() = tl;
        return out;
    }
    return {};
}

/// Formal genus symbol: at most one component per (scale, parity class), sorted by scale.
class JordanSymbol {
public:
    JordanSymbol() = default;
    explicit JordanSymbol(std::vector<JordanComponent> comps) : comps_(std::move(comps)) { normalize(); }

    static JordanSymbol parse(std::string_view text);

    const std::vector<JordanComponent>& components() const { return comps_; }
    bool trivial() const { return comps_.empty(); }

    i64 order() const {
        i64 r = 1;
        for (const auto& c : comps_) r *= c.order();
        return r;
    }
    i64 level() const {
        i64 r = 1;
        for (const auto& c : comps_) r = lcm64(r, c.level());
        return r;
    }
    int oddity() const {
        int s = 0;
        for (const auto& c : comps_) s += c.oddity();
        return static_cast<int>(mod(s, 8));
    }
    int p_excess(i64 p) const {
        int s = 0;
        for (const auto& c : comps_) if (c.p == p) s += c.p_excess();
        return static_cast<int>(mod(s, 8));
    }
    /// Signature from oddity and p-excesses.
    int signature() const {
        int s = oddity();
        for (const auto& c : comps_) s -= c.p_excess();
        return static_cast<int>(mod(s, 8));
    }

    std::string str() const {
        std::string s;
        for (const auto& c : comps_) {
            if (!s.empty()) s += ".";
            s += c.str();
        }
        return s;
    }

    /// Orthogonal sum of two symbols.
    friend JordanSymbol operator+(const JordanSymbol& a, const JordanSymbol& b) {
        std::vector<JordanComponent> all = a.comps_;
        all.insert(all.end(), b.comps_.begin(), b.comps_.end());
        return JordanSymbol(std::move(all));
    }

private:
    std::vector<JordanComponent> comps_;

    void normalize() {
        std::map<std::pair<i64, bool>, JordanComponent> merged;
        for (const auto& c : comps_) {
            auto key = std::make_pair(c.q, c.p == 2 && c.even);
            auto it = merged.find(key);
            if (it == merged.end()) { merged.emplace(key, c); continue; }
            it->second.rank += c.rank;
            it->second.sign *= c.sign;
            it->second.t = static_cast<int>(mod(it->second.t + c.t, 8));
        }
        comps_.clear();
        for (auto& [key, c] : merged) comps_.push_back(c);
        for (const auto& c : comps_) validate(c);
    }

    static void validate(const JordanComponent& c) {
        auto fail = [&](const std::string& why) {
            throw Error(errc::inconsistent_symbol, "component " + c.str() + ": " + why);
        };
        if (c.rank <= 0) fail("rank must be positive");
        if (c.p != 2 && c.even) fail("only 2-adic components can be even");
        if (c.even) {
            if (c.rank % 2) fail("even 2-adic components need even rank");
            return;
        }
        if (c.p != 2) return;
        if (mod(c.t - c.rank, 2) != 0) fail("subscript must have the parity of the rank");
        int t = static_cast<int>(mod(c.t, 8));
        if (c.rank == 1 && c.sign > 0 && t != 1 && t != 7) fail("rank 1 with sign + needs t = ±1 mod 8");
        if (c.rank == 1 && c.sign < 0 && t != 3 && t != 5) fail("rank 1 with sign - needs t = ±3 mod 8");
        if (c.rank == 2 && c.sign > 0 && t != 0 && t != 2 && t != 6) fail("rank 2 with sign + needs t in {0, ±2}");
        if (c.rank == 2 && c.sign < 0 && t != 4 && t != 2 && t != 6) fail("rank 2 with sign - needs t in {4, ±2}");
        if (split_odd_component(t, c.rank, c.sign).empty()) fail("no rank-one splitting exists");
    }
};

inline JordanSymbol JordanSymbol::parse(std::string_view text) {
    auto fail = [&](const std::string& why) {
        throw Error(errc::parse, "cannot parse genus symbol '" + std::string(text) + "': " + why);
    };
    std::vector<JordanComponent> comps;
    std::string s(text);
    // Accept the unicode minus sign as '-'.
    for (std::size_t pos; (pos = s.find("\xE2\x88\x92")) != std::string::npos;) s.replace(pos, 3, "-");
    if (s.empty()) return JordanSymbol();
    std::size_t i = 0;
    auto read_int = [&](bool allow_sign) -> i64 {
        bool neg = false;
        if (allow_sign && i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
        std::size_t start = i;
        i64 v = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            v = v * 10 + (s[i++] - '0');
            if (v > 1000000000) fail("number too large");
        }
        if (i == start) fail("expected a number at position " + std::to_string(start));
        return neg ? -v : v;
    };
    while (true) {
        JordanComponent c;
        c.q = read_int(false);
        auto [p, k] = prime_power(c.q);
        if (p <= 1) fail("scale " + std::to_string(c.q) + " is not a prime power > 1");
        c.p = p;
        c.k = k;
        bool has_sub = false;
        if (i < s.size() && s[i] == '_') {
            ++i;
            has_sub = true;
            if (s.compare(i, 2, "II") == 0) {
                c.even = true;
                i += 2;
            } else {
                c.t = static_cast<int>(mod(read_int(true), 8));
            }
        }
        if (p == 2 && !has_sub) fail("2-adic component needs a subscript t or II");
        if (p != 2 && has_sub) fail("odd components take no subscript");
        if (i >= s.size() || s[i] != '^') fail("expected '^' at position " + std::to_string(i));
        ++i;
        if (i >= s.size() || (s[i] != '+' && s[i] != '-')) fail("expected sign after '^'");
        c.sign = s[i++] == '+' ? 1 : -1;
        i64 n = read_int(false);
        if (n <= 0 || n > 64) fail("rank out of range");
        c.rank = static_cast<int>(n);
        comps.push_back(c);
        if (i == s.size()) break;
        if (s[i] != '.') fail("expected '.' at position " + std::to_string(i));
        ++i;
    }
    return JordanSymbol(std::move(comps));
}

}  // namespace weilinv
