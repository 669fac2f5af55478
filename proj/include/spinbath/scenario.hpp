// scenario.hpp — Declarative experiment layer: scenario configs, pulse
// duration optimization, prepared-state pipelines and parameter scans.

#pragma once

#include "spinbath/bounds.hpp"
#include "spinbath/config.hpp"
#include "spinbath/dynamics.hpp"
#include "spinbath/observables.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spinbath::scen {

using bath::BathSpec;
using bath::CorrelationFit;
using dyn::DriveSpec;
using dyn::ExtendedState;
using dyn::IntegratorControls;

enum class OptimizeMode { unitary_reference, open_system };

struct OptimizeSpec {
    OptimizeMode mode = OptimizeMode::open_system;
    // Search window in units of pi/Omega_R; zero means "pick by amplitude":
    // [0.25, 1.5] for Omega_R <= 10, [0.2, 1.2] above.
    double window_lo = 0.0;
    double window_hi = 0.0;
    int coarse_points = 200;
    double rel_tol = 1e-6;
};

struct PulseOptimum {
    double duration = 0.0;
    double error = 0.0;            // open-system error at the chosen duration
    double objective_error = 0.0;  // value of the minimized objective
};

struct FitControls {
    double tol = 1e-7;
    int max_terms = 6;
    double horizon = 30.0;
};

struct EquilibrateControls {
    double tol = 1e-10;
    double t_max = 500.0;
};

struct Scenario {
    BathSpec bath;
    FitControls fit;
    std::optional<DriveSpec> drive;
    std::string initial_kind = "C";  // A | B | C | D | snapshot
    std::string initial_state = "ground";  // for kind D: ground | excited
    std::string snapshot_path;
    double t_end = 20.0;
    int output_samples = 2000;
    std::vector<double> explicit_output_times;
    std::vector<std::string> observables{"sigma_z", "bloch", "rho", "error"};
    IntegratorControls controls;
    std::optional<OptimizeSpec> optimize;
    EquilibrateControls equilibrate;

    static Scenario from_config(const Config& cfg);
    void validate() const;

    // 2000 uniform samples plus >= 40 points per carrier period inside the
    // drive window.
    std::vector<double> output_grid(double t_start) const;
};

// Minimize the preparation error over pulse durations. unitary_reference:
// the objective is the closed-system error from the ground state; the
// reported open-system error is then evaluated at that duration from
// `initial`. open_system: the objective is the open-system error itself.
// Throws if the minimum sits on the window boundary.
PulseOptimum optimize_pulse_duration(const CorrelationFit& fit, double beta,
                                     const DriveSpec& drive,
                                     const ExtendedState& initial,
                                     const OptimizeSpec& spec,
                                     const IntegratorControls& controls = {});

struct ScenarioResult {
    obs::TimeSeries series;
    ExtendedState final_state;
    ExtendedState initial_state;
    CorrelationFit fit;
    std::optional<PulseOptimum> optimum;
};

// Fit (or reuse), build the initial state (equilibrating when kind A/B
// requires it), optionally optimize the pulse duration, propagate and sample.
ScenarioResult run_scenario(const Scenario& scenario,
                            const CorrelationFit* cached_fit = nullptr,
                            const ExtendedState* cached_equilibrium = nullptr);

// Prepared-state pipeline: run the preparation pulse from Initial-A and
// Initial-C; return the pulse-off snapshots and their factorized variants
// plus the ideal Prepared-D.
struct PreparedSet {
    ExtendedState A, A1, C, C1, D;
    double duration = 0.0;
    CorrelationFit fit;
};

PreparedSet prepare_and_store(const Scenario& scenario,
                              const CorrelationFit* cached_fit = nullptr,
                              const ExtendedState* cached_equilibrium = nullptr);
void save_prepared(const PreparedSet& set, const std::string& directory);

// ---------------------------------------------------------------------------
// Parameter scans
// ---------------------------------------------------------------------------

enum class ScanCompare { none, rwa, initial_c };

struct ScanConfig {
    std::vector<double> omega_r;  // drive amplitudes
    std::vector<double> xi;       // coupling constants
    double omega_c = 7.5;
    double beta = 10.0;
    double drive_frequency = 2.0;
    OptimizeMode mode = OptimizeMode::unitary_reference;
    ScanCompare compare = ScanCompare::none;
    FitControls fit;
    EquilibrateControls equilibrate;
    IntegratorControls controls;
    // Default admissible amplitude bands are (0, 1] and (10, inf).
    bool allow_any_amplitude = false;
    int threads = 1;

    static ScanConfig from_config(const Config& cfg);
};

struct ScanCell {
    double omega_r = 0.0;
    double xi = 0.0;
    double duration = 0.0;
    double error = 0.0;
    double error_difference = 0.0;  // signed, vs the requested reference
    double state_distance = 0.0;    // trace distance to the reference final state
    bool converged = false;
    std::string message;
};

struct ScanGrid {
    std::vector<double> omega_r;
    std::vector<double> xi;
    std::vector<ScanCell> cells;  // row-major: omega_r outer, xi inner

    const ScanCell& at(std::size_t i_omega, std::size_t i_xi) const {
        return cells[i_omega * xi.size() + i_xi];
    }
    void write_csv(std::ostream& out) const;
};

ScanGrid run_scan(const ScanConfig& cfg);

}  // namespace spinbath::scen
