// spinbath CLI: kernel fitting, equilibration, scenario evolution, prepared
// states, trace-distance bounds and parameter scans. Exit codes: 0 success,
// 2 config error, 3 numerical failure.

#include "spinbath/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace spinbath;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw scen::ConfigError("cannot open output file " + path);
    return out;
}

scen::Scenario load_scenario(const std::string& config_path) {
    return scen::Scenario::from_config(scen::Config::parse_file(config_path));
}

int cmd_fit_bath(const std::string& config_path, const std::string& out_path) {
    const scen::Scenario s = load_scenario(config_path);
    const bath::CorrelationFit fit = bath::fit_correlation(
        s.bath, s.fit.horizon, s.fit.tol, s.fit.max_terms);
    fit.save_file(out_path);
    std::cout << "fit-bath: " << fit.size() << " terms, residual "
              << fit.residual << ", written to " << out_path << "\n";
    return 0;
}

bath::CorrelationFit fit_or_load(const scen::Scenario& s, const std::string& fit_path) {
    if (!fit_path.empty()) return bath::CorrelationFit::load_file(fit_path);
    if (s.bath.xi == 0.0) {
        bath::CorrelationFit fit;
        fit.sample_horizon = s.fit.horizon;
        fit.converged = true;
        return fit;
    }
    return bath::fit_correlation(s.bath, s.fit.horizon, s.fit.tol, s.fit.max_terms);
}

int cmd_equilibrate(const std::string& config_path, const std::string& fit_path,
                    const std::string& out_path) {
    const scen::Scenario s = load_scenario(config_path);
    const bath::CorrelationFit fit = fit_or_load(s, fit_path);
    const dyn::ExtendedState eq = dyn::equilibrate(
        fit, s.bath.beta, s.equilibrate.tol, s.equilibrate.t_max, s.controls);
    dyn::save_snapshot(eq, fit, out_path);
    std::cout << "equilibrate: <sigma_z> = " << obs::sigma_z_expectation(eq.rho)
              << ", snapshot written to " << out_path << "\n";
    return 0;
}

int cmd_evolve(const std::string& config_path, const std::string& fit_path,
               const std::string& out_path) {
    scen::Scenario s = load_scenario(config_path);
    std::optional<bath::CorrelationFit> fit;
    if (!fit_path.empty()) fit = bath::CorrelationFit::load_file(fit_path);
    const scen::ScenarioResult result =
        scen::run_scenario(s, fit ? &*fit : nullptr);
    auto out = open_out(out_path);
    result.series.write_csv(out);
    if (result.optimum)
        std::cout << "evolve: optimized duration " << result.optimum->duration
                  << ", error " << result.optimum->error << "\n";
    std::cout << "evolve: " << result.series.times.size()
              << " samples written to " << out_path << "\n";
    return 0;
}

int cmd_prepare(const std::string& config_path, const std::string& fit_path,
                const std::string& out_dir) {
    const scen::Scenario s = load_scenario(config_path);
    std::optional<bath::CorrelationFit> fit;
    if (!fit_path.empty()) fit = bath::CorrelationFit::load_file(fit_path);
    const scen::PreparedSet set =
        scen::prepare_and_store(s, fit ? &*fit : nullptr);
    scen::save_prepared(set, out_dir);
    std::cout << "prepare: pulse duration " << set.duration
              << ", trace distance A vs C "
              << obs::trace_distance(set.A.rho, set.C.rho)
              << ", snapshots in " << out_dir << "\n";
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& fit_path,
               const std::vector<std::string>& snapshot_paths,
               const std::string& out_path) {
    if (snapshot_paths.size() != 2)
        throw scen::ConfigError("bounds: exactly two --snapshot paths are required");
    const scen::Scenario s = load_scenario(config_path);
    const bath::CorrelationFit fit = fit_or_load(s, fit_path);
    dyn::ExtendedState a = dyn::load_snapshot(snapshot_paths[0], fit);
    dyn::ExtendedState b = dyn::load_snapshot(snapshot_paths[1], fit);
    a.t = b.t = 0.0;
    std::vector<double> grid;
    for (int i = 0; i < s.output_samples; ++i)
        grid.push_back(s.t_end * i / (s.output_samples - 1));
    const bounds::BoundSeries series = bounds::bound_series(
        a, b, fit, s.drive.value_or(dyn::DriveSpec::none()), s.t_end, grid,
        s.controls);
    auto out = open_out(out_path);
    series.write_csv(out);
    std::cout << "bounds: " << series.times.size() << " samples written to "
              << out_path << "\n";
    return 0;
}

int cmd_scan(const std::string& config_path, int threads,
             const std::string& out_path) {
    scen::ScanConfig cfg = scen::ScanConfig::from_config(
        scen::Config::parse_file(config_path));
    if (threads > 0) cfg.threads = threads;
    const scen::ScanGrid grid = scen::run_scan(cfg);
    auto out = open_out(out_path);
    grid.write_csv(out);
    std::cout << "scan: " << grid.cells.size() << " cells written to "
              << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinbath: driven two-level system coupled to a bosonic bath"};
    app.require_subcommand(1);

    std::string config_path, out_path, fit_path;
    std::vector<std::string> snapshot_paths;
    int threads = 0;
    unsigned seed = 0;  // reserved for reproducibility of randomized runs
    app.add_option("--seed", seed, "random seed (reserved)");

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "config file")->required();
        auto* out = sub->add_option("--out", out_path, "output path");
        if (needs_out) out->required();
        return sub;
    };

    auto* fit_bath = add_common(app.add_subcommand("fit-bath",
        "fit the bath correlation kernel and write the fit file"), true);
    auto* equilibrate = add_common(app.add_subcommand("equilibrate",
        "relax to the correlated thermal state and write a snapshot"), true);
    equilibrate->add_option("--fit", fit_path, "correlation fit file");
    auto* evolve = add_common(app.add_subcommand("evolve",
        "run a scenario and write a time-series CSV"), true);
    evolve->add_option("--fit", fit_path, "correlation fit file");
    auto* prepare = add_common(app.add_subcommand("prepare",
        "run the preparation pulse and store prepared snapshots"), true);
    prepare->add_option("--fit", fit_path, "correlation fit file");
    auto* bounds_cmd = add_common(app.add_subcommand("bounds",
        "trace-distance bounds between two stored snapshots"), true);
    bounds_cmd->add_option("--fit", fit_path, "correlation fit file");
    bounds_cmd->add_option("--snapshot", snapshot_paths, "snapshot file (twice)");
    auto* scan = add_common(app.add_subcommand("scan",
        "parameter scan over drive amplitude and coupling"), true);
    scan->add_option("--threads", threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_bath->parsed()) return cmd_fit_bath(config_path, out_path);
        if (equilibrate->parsed()) return cmd_equilibrate(config_path, fit_path, out_path);
        if (evolve->parsed()) return cmd_evolve(config_path, fit_path, out_path);
        if (prepare->parsed()) return cmd_prepare(config_path, fit_path, out_path);
        if (bounds_cmd->parsed())
            return cmd_bounds(config_path, fit_path, snapshot_paths, out_path);
        if (scan->parsed()) return cmd_scan(config_path, threads, out_path);
    } catch (const spinbath::scen::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
