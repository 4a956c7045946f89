#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace weilinv {

/// Error carrying a stable machine-readable code (used verbatim by the CLI).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* parse = "parse_error";
inline constexpr const char* inconsistent_symbol = "inconsistent_symbol";
inline constexpr const char* invalid_input = "invalid_input";
inline constexpr const char* bound_exceeded = "bound_exceeded";
inline constexpr const char* odd_signature = "odd_signature";
inline constexpr const char* no_closed_form = "no_closed_form";
inline constexpr const char* not_fundamental = "no_fundamental_form";
inline constexpr const char* internal = "internal_error";
}  // namespace errc

/// Cap on group orders handled by exhaustive loops.
inline std::atomic<std::int64_t>& brute_force_bound() {
    static std::atomic<std::int64_t> bound{10000};
    return bound;
}

/// Cap on the level N for which SL2(Z/N) is enumerated.
inline std::atomic<std::int64_t>& level_bound() {
    static std::atomic<std::int64_t> bound{60};
    return bound;
}

inline void check_internal(bool ok, const char* what) {
    if (!ok) throw Error(errc::internal, what);
}

}  // namespace weilinv
