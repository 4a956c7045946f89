#include <iostream>

#include <CLI11.hpp>

#include <weilinv/cli.hpp>

int main(int argc, char** argv) {
    using namespace weilinv::cli;
    CLI::App app{"Invariants of Weil representations of finite quadratic modules"};
    app.require_subcommand(1);
    JobSpec spec;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name);
        auto* sym = sub->add_option("--symbol", spec.symbol, "genus symbol, e.g. 2_1^+1.4_5^-1.8_II^+2");
        auto* gram = sub->add_option("--gram", spec.gram_file, "JSON file holding the Gram matrix as an array of arrays");
        sym->excludes(gram);
        sub->add_flag("--check", spec.check, "cross-check against brute force and closed forms");
        sub->add_option("--max-order", spec.max_order, "bound on group orders for exhaustive loops")->check(CLI::PositiveNumber);
        sub->add_option("--format", spec.format, "output format")->check(CLI::IsMember({"json", "text"}));
        if (name == "jacobi") sub->add_option("--precision", spec.precision, "number of theta coefficients")->check(CLI::Range(0, 64));
        sub->callback([&spec, name] { spec.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const Outcome out = run(spec);
    std::cout << render(out, spec.format);
    return out.exit_code;
}
