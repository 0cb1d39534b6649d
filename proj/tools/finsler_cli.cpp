#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "finsler/app.hpp"

using namespace finsler;

namespace {

struct Overrides {
    std::optional<double> tol_douglas, tol_hamel, tol_class, margin;
    std::optional<int> grid, angles;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--tol-douglas", o.tol_douglas, "Douglas fit threshold");
    cmd->add_option("--tol-hamel", o.tol_hamel, "Hamel threshold (relative to |F_x|)");
    cmd->add_option("--tol-class", o.tol_class, "classification residual threshold");
    cmd->add_option("--grid", o.grid, "grid points per side");
    cmd->add_option("--angles", o.angles, "directions for the cubic fit");
    cmd->add_option("--seed", o.seed, "seed for random samples");
    cmd->add_option("--margin", o.margin, "exclusion band, fraction of the box size");
    cmd->add_option("--out", o.out, "report path (verify) or trace directory (trace)");
}

void apply(const Overrides& o, app::RunConfig& c) {
    if (o.tol_douglas) c.tol.douglas = *o.tol_douglas;
    if (o.tol_hamel) c.tol.hamel = *o.tol_hamel;
    if (o.tol_class) c.tol.cls = *o.tol_class;
    if (o.grid) c.grid = *o.grid;
    if (o.angles) c.angles = *o.angles;
    if (o.seed) c.seed = *o.seed;
    if (o.margin) c.margin = *o.margin;
}

void print_summary(const app::RunResult& r) {
    for (const auto& rep : r.reports) {
        std::cout << rep.check << ": " << rep.verdict << " (max " << rep.max_residual << ", tol " << rep.tolerance
                  << ", excluded " << rep.excluded << "/" << rep.points.size() << ")";
        if (rep.check == "closedness") std::cout << (rep.summary.at("closed") > 0.5 ? " closed" : " not closed");
        std::cout << "\n";
    }
    std::cout << "verdict: " << r.verdict << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Numeric checks for two-dimensional (alpha, beta) Finsler metrics"};
    cli.require_subcommand(1);

    std::string verify_path, trace_path;
    Overrides vo, to;
    auto* verify = cli.add_subcommand("verify", "run the checks listed in a config and write a JSON report");
    verify->add_option("config", verify_path, "config file")->required();
    add_overrides(verify, vo);
    auto* trace = cli.add_subcommand("trace", "integrate geodesics and write CSV traces");
    trace->add_option("config", trace_path, "config file")->required();
    add_overrides(trace, to);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : app::kConfigError;
    }

    try {
        if (*verify) {
            app::RunConfig c = app::load_config(verify_path);
            apply(vo, c);
            if (!vo.out.empty()) c.report_path = vo.out;
            const app::RunResult r = app::run_verify(c);
            print_summary(r);
            if (!c.report_path.empty()) std::ofstream(c.report_path) << r.report.dump(2) << "\n";
            return r.exit_code;
        }
        app::RunConfig c = app::load_config(trace_path);
        apply(to, c);
        if (!to.out.empty()) c.trace_dir = to.out;
        const app::TraceResult r = app::run_trace(c);
        const std::string summary = r.summary.dump(2);
        if (!c.trace_dir.empty())
            std::ofstream(std::filesystem::path(c.trace_dir) / "summary.json") << summary << "\n";
        std::cout << summary << "\n";
        return app::kPass;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return app::kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return app::kConfigError;
    }
}
