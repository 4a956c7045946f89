#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <weilinv/cli.hpp>

using namespace weilinv;
using namespace weilinv::cli;

namespace {

/// Restores the global bounds that run() overwrites.
struct BoundGuard {
    i64 order = brute_force_bound().load(), level = level_bound().load(), cyclo = CycloNumber::max_order().load();
    ~BoundGuard() {
        brute_force_bound() = order;
        level_bound() = level;
        CycloNumber::max_order() = cyclo;
    }
};

Outcome run_symbol(const std::string& command, const std::string& symbol, bool check = false) {
    BoundGuard guard;
    JobSpec spec;
    spec.command = command;
    spec.symbol = symbol;
    spec.check = check;
    return run(spec);
}

std::string cli_path() {
    if (const char* p = std::getenv("WEILINV_CLI_PATH")) return p;
#ifdef WEILINV_CLI_PATH
    return WEILINV_CLI_PATH;
#else
    return "weilinv";
#endif
}

struct Process {
    int status = -1;
    std::string out;
};

Process execute_line(const std::string& line) {
    Process p;
    FILE* pipe = popen((line + " 2>/dev/null").c_str(), "r");
    if (!pipe) return p;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) p.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return p;
}

Process execute(const std::string& args) { return execute_line(cli_path() + " " + args); }

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path.string();
}

void expect_header(const Json& doc) {
    for (const char* key : {"form", "order", "level", "signature", "square_class"}) EXPECT_TRUE(doc.contains(key)) << key;
}

}  // namespace

TEST(Cli, DimExample) {
    const auto o = run_symbol("dim", "2_II^-4");
    EXPECT_EQ(o.exit_code, 0);
    expect_header(o.document);
    EXPECT_EQ(o.document["dim"], 1);
    EXPECT_EQ(o.document["order"], 16);
    EXPECT_EQ(o.document["square_class"], "square");
}

TEST(Cli, DimWithChecks) {
    const auto o = run_symbol("dim", "3^-4", true);
    EXPECT_EQ(o.exit_code, 0);
    EXPECT_EQ(o.document["checks"]["projection"]["pass"], true);
    EXPECT_EQ(o.document["checks"]["closed_form"]["pass"], true);
}

TEST(Cli, InducedBasisExample) {
    const auto o = run_symbol("induced-basis", "3^-4");
    ASSERT_EQ(o.exit_code, 0) << o.document.dump();
    const auto& gens = o.document["generators"];
    ASSERT_EQ(gens.size(), 1u);
    // p e^0 minus the sum over all isotropic elements, 0 included.
    const auto D = from_jordan_symbol("3^-4");
    const auto I = isotropic_indices(D);
    const auto& vec = gens[0]["vector"];
    ASSERT_EQ(vec.size(), I.size());
    EXPECT_EQ(vec[0]["element"], Json({0, 0, 0, 0}));
    EXPECT_EQ(vec[0]["coefficient"], "2");
    for (std::size_t i = 1; i < vec.size(); ++i) EXPECT_EQ(vec[i]["coefficient"], "-1");
    EXPECT_EQ(o.document["rank"], 1);
    EXPECT_EQ(o.document["dim"], 1);
}

TEST(Cli, InvariantsAndS2) {
    const auto inv = run_symbol("invariants", "5^+2");
    EXPECT_EQ(inv.exit_code, 0);
    EXPECT_EQ(inv.document["dim"], 2);
    EXPECT_EQ(inv.document["basis"].size(), 2u);
    const auto s2 = run_symbol("s2dim", "7^+2");
    EXPECT_EQ(s2.exit_code, 0);
    EXPECT_EQ(s2.document["dim_S2"], 1);
    EXPECT_EQ(s2.document["agree"], true);
    EXPECT_EQ(s2.document["trace_oracle"]["trace_half_S"], "-1");
}

TEST(Cli, VerifyPasses) {
    for (const char* s : {"2_II^-4", "3^-2", "2_2^+2.4_II^+2", "3^+1"}) {
        const auto o = run_symbol("verify", s);
        EXPECT_EQ(o.exit_code, 0) << s << o.document.dump();
        EXPECT_EQ(o.document["all_pass"], true) << s;
        for (const auto& p : o.document["properties"]) EXPECT_EQ(p["pass"], true) << s << p.dump();
    }
}

TEST(Cli, Errors) {
    const auto parse = run_symbol("dim", "bogus^^");
    EXPECT_EQ(parse.exit_code, 2);
    EXPECT_EQ(parse.document["error"]["code"], errc::parse);

    const auto odd = run_symbol("invariants", "2_1^+1");
    EXPECT_EQ(odd.exit_code, 2);
    EXPECT_EQ(odd.document["error"]["code"], errc::odd_signature);

    BoundGuard guard;
    JobSpec spec;
    spec.command = "dim";
    spec.symbol = "3^-4";
    spec.max_order = 10;
    const auto bound = run(spec);
    EXPECT_EQ(bound.exit_code, 2);
    EXPECT_EQ(bound.document["error"]["code"], errc::bound_exceeded);

    JobSpec none;
    none.command = "dim";
    EXPECT_EQ(run(none).document["error"]["code"], errc::invalid_input);
    JobSpec jac;
    jac.command = "jacobi";
    jac.symbol = "3^-2";
    EXPECT_EQ(run(jac).document["error"]["code"], errc::invalid_input);
}

TEST(Cli, GramInput) {
    BoundGuard guard;
    JobSpec spec;
    spec.command = "jacobi";
    spec.gram_file = temp_file("weilinv_e8.json",
                               "[[2,-1,0,0,0,0,0,0],[-1,2,-1,0,0,0,0,0],[0,-1,2,-1,0,0,0,-1],[0,0,-1,2,-1,0,0,0],"
                               "[0,0,0,-1,2,-1,0,0],[0,0,0,0,-1,2,-1,0],[0,0,0,0,0,-1,2,0],[0,0,-1,0,0,0,0,2]]");
    const auto o = run(spec);
    ASSERT_EQ(o.exit_code, 0) << o.document.dump();
    expect_header(o.document);
    EXPECT_EQ(o.document["order"], 1);
    EXPECT_EQ(o.document["weight"], "4");
    ASSERT_EQ(o.document["basis"].size(), 1u);
    EXPECT_EQ(o.document["basis"][0]["theta_coefficients"], Json({1, 240, 2160, 6720, 17520, 30240}));

    spec.gram_file = temp_file("weilinv_bad.json", "[[2, 1], \"x\"]");
    EXPECT_EQ(run(spec).document["error"]["code"], errc::parse);
    spec.gram_file = temp_file("weilinv_a1.json", "[[2]]");
    const auto odd = run(spec);
    EXPECT_EQ(odd.exit_code, 0);
    EXPECT_TRUE(odd.document["basis"].empty());
}

TEST(Cli, DeterministicInProcess) {
    for (const char* cmd : {"invariants", "induced-basis", "verify"}) {
        const auto a = run_symbol(cmd, "2_II^+2.3^-2"), b = run_symbol(cmd, "2_II^+2.3^-2");
        EXPECT_EQ(a.document.dump(), b.document.dump()) << cmd;
    }
}

TEST(Cli, TextFormat) {
    const auto o = run_symbol("dim", "3^-2");
    EXPECT_EQ(render(o, "text"), "form: 3^-2\norder: 9\nlevel: 3\nsignature: 0\nsquare_class: square\ndim: 2\n");
}

TEST(CliBinary, ExitCodesAndOutput) {
    const auto ok = execute("dim --symbol 2_II^-4");
    EXPECT_EQ(ok.status, 0);
    EXPECT_EQ(Json::parse(ok.out)["dim"], 1);
    const auto bad = execute("dim --symbol 'bogus^^'");
    EXPECT_NE(bad.status, 0);
    EXPECT_EQ(Json::parse(bad.out)["error"]["code"], errc::parse);
    EXPECT_NE(execute("nonsense").status, 0);
}

TEST(CliBinary, ByteIdenticalRuns) {
    for (const char* args : {"induced-basis --symbol 3^-4", "invariants --symbol 2_2^+2.4_II^+2", "verify --symbol 5^+2"}) {
        const auto a = execute(args), b = execute(args);
        EXPECT_EQ(a.status, 0) << args;
        EXPECT_EQ(a.out, b.out) << args;
        EXPECT_FALSE(a.out.empty()) << args;
    }
}

TEST(CliBinary, EnvironmentOverride) {
    const auto capped = execute_line("WEILINV_MAX_ORDER=50 " + cli_path() + " dim --symbol 3^-4");
    EXPECT_EQ(capped.status, 2);
    EXPECT_EQ(Json::parse(capped.out)["error"]["code"], errc::bound_exceeded);
    // An explicit flag wins over the environment.
    EXPECT_EQ(execute_line("WEILINV_MAX_ORDER=50 " + cli_path() + " dim --symbol 3^-4 --max-order 100").status, 0);
    const auto malformed = execute_line("WEILINV_MAX_ORDER=x " + cli_path() + " dim --symbol 3^-2");
    EXPECT_EQ(malformed.status, 2);
    EXPECT_EQ(Json::parse(malformed.out)["error"]["code"], errc::invalid_input);
}
