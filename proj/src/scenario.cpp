#include "spinbath/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace spinbath::scen {

namespace {

CorrelationFit empty_fit(double horizon) {
    CorrelationFit fit;
    fit.sample_horizon = horizon;
    fit.residual = 0.0;
    fit.converged = true;
    return fit;
}

CorrelationFit make_fit(const BathSpec& bath, const FitControls& controls) {
    if (bath.xi == 0.0) return empty_fit(controls.horizon);
    return bath::fit_correlation(bath, controls.horizon, controls.tol,
                                 controls.max_terms);
}

double window_lo_default(double amplitude) { return amplitude > 10.0 ? 0.2 : 0.25; }
double window_hi_default(double amplitude) { return amplitude > 10.0 ? 1.2 : 1.5; }

}  // namespace

Scenario Scenario::from_config(const Config& cfg) {
    Scenario s;
    s.bath.xi = cfg.get_double("bath", "xi", s.bath.xi);
    s.bath.omega_c = cfg.get_double("bath", "omega_c", s.bath.omega_c);
    s.bath.beta = cfg.get_double("bath", "beta", s.bath.beta);

    s.fit.tol = cfg.get_double("fit", "tol", s.fit.tol);
    s.fit.max_terms = cfg.get_int("fit", "max_terms", s.fit.max_terms);
    s.fit.horizon = cfg.get_double("fit", "horizon", s.fit.horizon);

    if (cfg.has_section("drive")) {
        DriveSpec d;
        d.amplitude = cfg.get_double("drive", "amplitude");
        d.frequency = cfg.get_double("drive", "frequency", 2.0);
        d.rwa = cfg.get_bool("drive", "rwa", false);
        d.t_on = cfg.get_double("drive", "t_on", 0.0);
        d.t_off = cfg.get_double("drive", "t_off", d.t_on);
        s.drive = d;
    }

    s.initial_kind = cfg.get_string("initial", "kind", "C");
    s.initial_state = cfg.get_string("initial", "state", "ground");
    s.snapshot_path = cfg.get_string("initial", "snapshot", "");

    s.t_end = cfg.get_double("run", "t_end", s.t_end);
    s.output_samples = cfg.get_int("run", "output_samples", s.output_samples);
    s.controls.rtol = cfg.get_double("run", "rtol", s.controls.rtol);
    s.controls.atol = cfg.get_double("run", "atol", s.controls.atol);
    if (cfg.has("run", "max_step"))
        s.controls.max_step = cfg.get_double("run", "max_step");
    if (cfg.has("run", "observables"))
        s.observables = cfg.get_strings("run", "observables");
    if (cfg.has("run", "output_times"))
        s.explicit_output_times = cfg.get_doubles("run", "output_times");

    if (cfg.has_section("optimize")) {
        OptimizeSpec o;
        const std::string mode = cfg.get_string("optimize", "mode", "open_system");
        if (mode == "open_system") {
            o.mode = OptimizeMode::open_system;
        } else if (mode == "unitary_reference") {
            o.mode = OptimizeMode::unitary_reference;
        } else {
            throw ConfigError("optimize.mode: expected open_system or unitary_reference");
        }
        o.window_lo = cfg.get_double("optimize", "window_lo", 0.0);
        o.window_hi = cfg.get_double("optimize", "window_hi", 0.0);
        o.coarse_points = cfg.get_int("optimize", "coarse_points", 200);
        o.rel_tol = cfg.get_double("optimize", "rel_tol", 1e-6);
        s.optimize = o;
    }

    s.equilibrate.tol = cfg.get_double("equilibrate", "tol", s.equilibrate.tol);
    s.equilibrate.t_max = cfg.get_double("equilibrate", "t_max", s.equilibrate.t_max);

    s.validate();
    return s;
}

void Scenario::validate() const {
    bath.validate();
    if (fit.tol <= 0.0) throw ConfigError("fit.tol must be > 0");
    if (fit.max_terms < 1) throw ConfigError("fit.max_terms must be >= 1");
    if (fit.horizon <= 0.0) throw ConfigError("fit.horizon must be > 0");
    if (t_end < 0.0) throw ConfigError("run.t_end must be >= 0");
    if (output_samples < 2) throw ConfigError("run.output_samples must be >= 2");
    if (drive) {
        if (drive->amplitude < 0.0) throw ConfigError("drive.amplitude must be >= 0");
        if (drive->frequency <= 0.0) throw ConfigError("drive.frequency must be > 0");
        if (drive->t_on > drive->t_off)
            throw ConfigError("drive.t_on must be <= drive.t_off");
    }
    if (optimize && !drive)
        throw ConfigError("[optimize] requires a [drive] section");
    if (optimize && drive->amplitude <= 0.0)
        throw ConfigError("[optimize] requires drive.amplitude > 0");
    const bool known = initial_kind == "A" || initial_kind == "B" ||
                       initial_kind == "C" || initial_kind == "D" ||
                       initial_kind == "snapshot";
    if (!known)
        throw ConfigError("initial.kind: expected A, B, C, D or snapshot, got '" +
                          initial_kind + "'");
    if (initial_kind == "snapshot" && snapshot_path.empty())
        throw ConfigError("initial.kind = snapshot requires initial.snapshot = <path>");
}

std::vector<double> Scenario::output_grid(double t_start) const {
    if (!explicit_output_times.empty()) {
        auto grid = explicit_output_times;
        std::sort(grid.begin(), grid.end());
        return grid;
    }
    std::vector<double> grid;
    grid.reserve(output_samples);
    const double span = t_end - t_start;
    for (int i = 0; i < output_samples; ++i)
        grid.push_back(t_start + span * i / (output_samples - 1));

    if (drive && drive->amplitude > 0.0 && drive->t_off > drive->t_on) {
        const double a = std::max(t_start, drive->t_on);
        const double b = std::min(t_end, drive->t_off);
        if (b > a) {
            const double step = (2.0 * M_PI / drive->frequency) / 40.0;
            for (double t = a; t < b; t += step) grid.push_back(t);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               grid.end());
    return grid;
}

// ---------------------------------------------------------------------------
// Pulse duration optimization
// ---------------------------------------------------------------------------

PulseOptimum optimize_pulse_duration(const CorrelationFit& fit, double beta,
                                     const DriveSpec& drive,
                                     const ExtendedState& initial,
                                     const OptimizeSpec& spec,
                                     const IntegratorControls& controls) {
    if (drive.amplitude <= 0.0)
        throw std::invalid_argument("optimize_pulse_duration: drive amplitude must be > 0");
    (void)beta;

    const double unit = M_PI / drive.amplitude;
    const double lo =
        (spec.window_lo > 0.0 ? spec.window_lo : window_lo_default(drive.amplitude)) * unit;
    const double hi =
        (spec.window_hi > 0.0 ? spec.window_hi : window_hi_default(drive.amplitude)) * unit;
    const int n = std::max(spec.coarse_points, 200);

    // Drive held on for the whole search: the trajectory up to t = d with a
    // pulse window [0, d] equals the always-on trajectory, so one propagation
    // serves every coarse candidate.
    DriveSpec on = drive;
    on.t_on = 0.0;
    on.t_off = std::numeric_limits<double>::infinity();

    const CorrelationFit closed = empty_fit(fit.sample_horizon);
    ExtendedState objective_start;
    const CorrelationFit* objective_fit = nullptr;
    if (spec.mode == OptimizeMode::unitary_reference) {
        objective_start.rho = ops::ground_projector();
        objective_start.t = 0.0;
        objective_fit = &closed;
    } else {
        objective_start = initial;
        objective_start.t = 0.0;
        objective_fit = &fit;
    }

    auto objective = [&](double d) {
        const ExtendedState s =
            dyn::propagate(objective_start, *objective_fit, on, d, controls);
        return obs::preparation_error(s.rho);
    };

    std::vector<double> durations(n);
    for (int i = 0; i < n; ++i)
        durations[i] = lo + (hi - lo) * i / (n - 1);
    const auto snapshots =
        dyn::integrate(objective_start, *objective_fit, on, hi, durations, controls);
    int best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double err = obs::preparation_error(snapshots[i].rho);
        if (err < best_err) {
            best_err = err;
            best = i;
        }
    }
    if (best == 0 || best == n - 1)
        throw std::runtime_error(
            "optimize_pulse_duration: minimum sits on the search window boundary "
            "(duration " + std::to_string(durations[best]) +
            "); widen window_lo/window_hi");

    // Golden-section refinement inside the bracketing coarse cells.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = durations[best - 1], b = durations[best + 1];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while ((b - a) > spec.rel_tol * (0.5 * (a + b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    PulseOptimum result;
    result.duration = 0.5 * (a + b);
    result.objective_error = objective(result.duration);

    if (spec.mode == OptimizeMode::open_system) {
        result.error = result.objective_error;
    } else {
        ExtendedState open_start = initial;
        open_start.t = 0.0;
        const ExtendedState s =
            dyn::propagate(open_start, fit, on, result.duration, controls);
        result.error = obs::preparation_error(s.rho);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

namespace {

ExtendedState scenario_initial(const Scenario& scenario, const CorrelationFit& fit,
                               const ExtendedState* cached_equilibrium,
                               std::optional<ExtendedState>& equilibrium_storage) {
    using dyn::InitialKind;
    const double beta = scenario.bath.beta;
    if (scenario.initial_kind == "A" || scenario.initial_kind == "B") {
        const ExtendedState* eq = cached_equilibrium;
        if (!eq) {
            equilibrium_storage = dyn::equilibrate(
                fit, beta, scenario.equilibrate.tol, scenario.equilibrate.t_max,
                scenario.controls);
            eq = &*equilibrium_storage;
        }
        return dyn::build_initial(scenario.initial_kind == "A" ? InitialKind::A
                                                               : InitialKind::B,
                                  fit, beta, eq);
    }
    if (scenario.initial_kind == "C")
        return dyn::build_initial(InitialKind::C, fit, beta);
    if (scenario.initial_kind == "D") {
        const QubitOp rho = scenario.initial_state == "excited"
                                ? ops::excited_projector()
                                : ops::ground_projector();
        return dyn::build_initial(InitialKind::D, fit, beta, nullptr, &rho);
    }
    // snapshot
    ExtendedState snap = dyn::load_snapshot(scenario.snapshot_path, fit);
    snap.t = 0.0;
    return snap;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario,
                            const CorrelationFit* cached_fit,
                            const ExtendedState* cached_equilibrium) {
    scenario.validate();
    ScenarioResult result;
    result.fit = cached_fit ? *cached_fit : make_fit(scenario.bath, scenario.fit);

    std::optional<ExtendedState> equilibrium_storage;
    ExtendedState initial = scenario_initial(scenario, result.fit,
                                             cached_equilibrium, equilibrium_storage);
    initial.t = 0.0;
    result.initial_state = initial;

    DriveSpec drive = scenario.drive.value_or(DriveSpec::none());
    if (scenario.optimize) {
        result.optimum = optimize_pulse_duration(result.fit, scenario.bath.beta,
                                                 drive, initial, *scenario.optimize,
                                                 scenario.controls);
        drive.t_off = drive.t_on + result.optimum->duration;
    }

    Scenario grid_source = scenario;
    grid_source.drive = drive;
    const std::vector<double> grid = grid_source.output_grid(initial.t);
    const double t_end = std::max(scenario.t_end, grid.empty() ? 0.0 : grid.back());

    const auto snapshots =
        dyn::integrate(initial, result.fit, drive, t_end, grid, scenario.controls);
    result.final_state = snapshots.empty() ? initial : snapshots.back();

    obs::TimeSeries& series = result.series;
    series.times = grid;
    auto want = [&](const std::string& name) {
        return std::find(scenario.observables.begin(), scenario.observables.end(),
                         name) != scenario.observables.end();
    };
    if (want("sigma_z")) {
        auto& col = series.add_column("sigma_z");
        for (const auto& s : snapshots) col.push_back(obs::sigma_z_expectation(s.rho));
    }
    // add_column invalidates previously returned references, so gather each
    // group of columns locally before inserting them.
    if (want("bloch")) {
        std::vector<double> bx, by, bz;
        for (const auto& s : snapshots) {
            const auto v = ops::bloch_vector(s.rho);
            bx.push_back(v[0]);
            by.push_back(v[1]);
            bz.push_back(v[2]);
        }
        series.add_column("bloch_x") = std::move(bx);
        series.add_column("bloch_y") = std::move(by);
        series.add_column("bloch_z") = std::move(bz);
    }
    if (want("rho")) {
        std::vector<double> p, re, im;
        for (const auto& s : snapshots) {
            p.push_back(s.rho(0, 0).real());
            re.push_back(s.rho(0, 1).real());
            im.push_back(s.rho(0, 1).imag());
        }
        series.add_column("rho11") = std::move(p);
        series.add_column("re_rho12") = std::move(re);
        series.add_column("im_rho12") = std::move(im);
    }
    if (want("error")) {
        auto& col = series.add_column("error");
        for (const auto& s : snapshots) col.push_back(obs::preparation_error(s.rho));
    }
    return result;
}

PreparedSet prepare_and_store(const Scenario& scenario,
                              const CorrelationFit* cached_fit,
                              const ExtendedState* cached_equilibrium) {
    if (!scenario.drive || scenario.drive->amplitude <= 0.0)
        throw ConfigError("prepare_and_store: a drive with amplitude > 0 is required");

    PreparedSet set;
    set.fit = cached_fit ? *cached_fit : make_fit(scenario.bath, scenario.fit);

    std::optional<ExtendedState> equilibrium_storage;
    const ExtendedState* eq = cached_equilibrium;
    if (!eq) {
        equilibrium_storage =
            dyn::equilibrate(set.fit, scenario.bath.beta, scenario.equilibrate.tol,
                             scenario.equilibrate.t_max, scenario.controls);
        eq = &*equilibrium_storage;
    }

    ExtendedState initial_a =
        dyn::build_initial(dyn::InitialKind::A, set.fit, scenario.bath.beta, eq);
    ExtendedState initial_c =
        dyn::build_initial(dyn::InitialKind::C, set.fit, scenario.bath.beta);

    DriveSpec drive = *scenario.drive;
    drive.t_on = 0.0;
    if (scenario.optimize) {
        const PulseOptimum opt = optimize_pulse_duration(
            set.fit, scenario.bath.beta, drive, initial_a, *scenario.optimize,
            scenario.controls);
        set.duration = opt.duration;
    } else {
        set.duration = scenario.drive->t_off - scenario.drive->t_on;
        if (set.duration <= 0.0)
            throw ConfigError("prepare_and_store: drive window is empty and no "
                              "[optimize] block is present");
    }
    drive.t_off = set.duration;

    set.A = dyn::propagate(initial_a, set.fit, drive, set.duration, scenario.controls);
    set.C = dyn::propagate(initial_c, set.fit, drive, set.duration, scenario.controls);
    // Relabel the pulse-off time as t = 0 for the subsequent field-free runs.
    set.A.t = set.C.t = 0.0;
    set.A1 = dyn::build_initial(dyn::InitialKind::Factorized, set.fit,
                                scenario.bath.beta, nullptr, nullptr, &set.A);
    set.C1 = dyn::build_initial(dyn::InitialKind::Factorized, set.fit,
                                scenario.bath.beta, nullptr, nullptr, &set.C);
    const QubitOp excited = ops::excited_projector();
    set.D = dyn::build_initial(dyn::InitialKind::D, set.fit, scenario.bath.beta,
                               nullptr, &excited);
    return set;
}

void save_prepared(const PreparedSet& set, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    dyn::save_snapshot(set.A, set.fit, (fs::path(directory) / "prepared_A.snap").string());
    dyn::save_snapshot(set.A1, set.fit, (fs::path(directory) / "prepared_A1.snap").string());
    dyn::save_snapshot(set.C, set.fit, (fs::path(directory) / "prepared_C.snap").string());
    dyn::save_snapshot(set.C1, set.fit, (fs::path(directory) / "prepared_C1.snap").string());
    dyn::save_snapshot(set.D, set.fit, (fs::path(directory) / "prepared_D.snap").string());
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

ScanConfig ScanConfig::from_config(const Config& cfg) {
    ScanConfig sc;
    sc.omega_c = cfg.get_double("bath", "omega_c", sc.omega_c);
    sc.beta = cfg.get_double("bath", "beta", sc.beta);
    sc.fit.tol = cfg.get_double("fit", "tol", sc.fit.tol);
    sc.fit.max_terms = cfg.get_int("fit", "max_terms", sc.fit.max_terms);
    sc.fit.horizon = cfg.get_double("fit", "horizon", sc.fit.horizon);

    if (cfg.has("scan", "omega_r")) {
        sc.omega_r = cfg.get_doubles("scan", "omega_r");
    } else {
        const double lo = cfg.get_double("scan", "omega_r_min");
        const double hi = cfg.get_double("scan", "omega_r_max");
        const int n = cfg.get_int("scan", "omega_r_points", 10);
        for (int i = 0; i < n; ++i)
            sc.omega_r.push_back(lo * std::pow(hi / lo, n > 1 ? double(i) / (n - 1) : 0.0));
    }
    if (cfg.has("scan", "xi")) {
        sc.xi = cfg.get_doubles("scan", "xi");
    } else {
        const double lo = cfg.get_double("scan", "xi_min");
        const double hi = cfg.get_double("scan", "xi_max");
        const int n = cfg.get_int("scan", "xi_points", 10);
        for (int i = 0; i < n; ++i)
            sc.xi.push_back(lo * std::pow(hi / lo, n > 1 ? double(i) / (n - 1) : 0.0));
    }
    sc.drive_frequency = cfg.get_double("scan", "frequency", 2.0);

    const std::string mode = cfg.get_string("scan", "mode", "unitary_reference");
    if (mode == "unitary_reference") {
        sc.mode = OptimizeMode::unitary_reference;
    } else if (mode == "open_system") {
        sc.mode = OptimizeMode::open_system;
    } else {
        throw ConfigError("scan.mode: expected unitary_reference or open_system");
    }
    const std::string compare = cfg.get_string("scan", "compare", "none");
    if (compare == "none") {
        sc.compare = ScanCompare::none;
    } else if (compare == "rwa") {
        sc.compare = ScanCompare::rwa;
    } else if (compare == "initial_c") {
        sc.compare = ScanCompare::initial_c;
    } else {
        throw ConfigError("scan.compare: expected none, rwa or initial_c");
    }
    sc.allow_any_amplitude = cfg.get_bool("scan", "allow_any_amplitude", false);
    sc.threads = cfg.get_int("scan", "threads", 1);
    sc.controls.rtol = cfg.get_double("run", "rtol", sc.controls.rtol);
    sc.controls.atol = cfg.get_double("run", "atol", sc.controls.atol);
    sc.equilibrate.tol = cfg.get_double("equilibrate", "tol", sc.equilibrate.tol);
    sc.equilibrate.t_max = cfg.get_double("equilibrate", "t_max", sc.equilibrate.t_max);
    return sc;
}

ScanGrid run_scan(const ScanConfig& cfg) {
    if (cfg.omega_r.empty() || cfg.xi.empty())
        throw ConfigError("run_scan: empty axis");
    ScanGrid grid;
    grid.omega_r = cfg.omega_r;
    grid.xi = cfg.xi;
    grid.cells.resize(cfg.omega_r.size() * cfg.xi.size());

    // One kernel fit covers every coupling: C(t) is linear in xi, so the
    // amplitudes rescale exactly.
    const double xi_ref = *std::max_element(cfg.xi.begin(), cfg.xi.end());
    BathSpec ref_bath{xi_ref, cfg.omega_c, cfg.beta};
    const CorrelationFit ref_fit =
        xi_ref > 0.0 ? make_fit(ref_bath, cfg.fit) : empty_fit(cfg.fit.horizon);

    std::vector<CorrelationFit> fits;
    std::vector<ExtendedState> equilibria;
    for (double xi : cfg.xi) {
        fits.push_back(xi > 0.0 ? ref_fit.scaled_coupling(xi / xi_ref)
                                : empty_fit(cfg.fit.horizon));
        equilibria.push_back(dyn::equilibrate(fits.back(), cfg.beta,
                                              cfg.equilibrate.tol,
                                              cfg.equilibrate.t_max, cfg.controls));
    }

    auto run_cell = [&](std::size_t i_omega, std::size_t i_xi) {
        ScanCell& cell = grid.cells[i_omega * cfg.xi.size() + i_xi];
        cell.omega_r = cfg.omega_r[i_omega];
        cell.xi = cfg.xi[i_xi];
        try {
            const bool admissible = (cell.omega_r > 0.0 && cell.omega_r <= 1.0) ||
                                    cell.omega_r > 10.0;
            if (!admissible && !cfg.allow_any_amplitude)
                throw std::runtime_error(
                    "amplitude in the excluded band (1, 10]; set "
                    "allow_any_amplitude to override");

            const CorrelationFit& fit = fits[i_xi];
            const ExtendedState& eq = equilibria[i_xi];
            const ExtendedState initial_a =
                dyn::build_initial(dyn::InitialKind::A, fit, cfg.beta, &eq);

            DriveSpec drive;
            drive.amplitude = cell.omega_r;
            drive.frequency = cfg.drive_frequency;
            drive.t_on = 0.0;

            OptimizeSpec opt;
            opt.mode = cfg.mode;
            const PulseOptimum best = optimize_pulse_duration(
                fit, cfg.beta, drive, initial_a, opt, cfg.controls);
            cell.duration = best.duration;
            cell.error = best.error;

            if (cfg.compare == ScanCompare::rwa) {
                DriveSpec rwa = drive;
                rwa.rwa = true;
                rwa.t_off = M_PI / rwa.amplitude;  // RWA pi pulse
                const ExtendedState s = dyn::propagate(initial_a, fit, rwa,
                                                       rwa.t_off, cfg.controls);
                cell.error_difference = cell.error - obs::preparation_error(s.rho);
                DriveSpec full = drive;
                full.t_off = cell.duration;
                const ExtendedState own = dyn::propagate(initial_a, fit, full,
                                                         cell.duration, cfg.controls);
                cell.state_distance = obs::trace_distance(own.rho, s.rho);
            } else if (cfg.compare == ScanCompare::initial_c) {
                const ExtendedState initial_c =
                    dyn::build_initial(dyn::InitialKind::C, fit, cfg.beta);
                DriveSpec same = drive;
                same.t_off = cell.duration;
                const ExtendedState s = dyn::propagate(initial_c, fit, same,
                                                       cell.duration, cfg.controls);
                cell.error_difference = cell.error - obs::preparation_error(s.rho);
                const ExtendedState own = dyn::propagate(initial_a, fit, same,
                                                         cell.duration, cfg.controls);
                cell.state_distance = obs::trace_distance(own.rho, s.rho);
            }
            cell.converged = true;
        } catch (const std::exception& err) {
            cell.converged = false;
            cell.message = err.what();
        }
    };

    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < cfg.omega_r.size(); ++i)
            for (std::size_t j = 0; j < cfg.xi.size(); ++j) run_cell(i, j);
    } else {
        std::vector<std::future<void>> pending;
        std::size_t launched = 0;
        const std::size_t total = cfg.omega_r.size() * cfg.xi.size();
        while (launched < total || !pending.empty()) {
            while (launched < total &&
                   pending.size() < static_cast<std::size_t>(threads)) {
                const std::size_t idx = launched++;
                pending.push_back(std::async(std::launch::async, run_cell,
                                             idx / cfg.xi.size(), idx % cfg.xi.size()));
            }
            pending.front().get();
            pending.erase(pending.begin());
        }
    }
    return grid;
}

void ScanGrid::write_csv(std::ostream& out) const {
    out << "omega_r,xi,duration,error,error_difference,state_distance,converged,message\n";
    char buf[64];
    for (const auto& cell : cells) {
        std::string msg = cell.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        for (double v : {cell.omega_r, cell.xi, cell.duration, cell.error,
                         cell.error_difference, cell.state_distance}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ',';
        }
        out << (cell.converged ? 1 : 0) << ',' << msg << '\n';
    }
}

}  // namespace spinbath::scen
