// dynamics.hpp — Extended auxiliary Liouville-space propagator. The reduced
// density matrix rho and one auxiliary matrix K_k per kernel term evolve under
//
//   d rho/dt = L_s(t) rho - i [sigma_x, sum_k (K_k + K_k^dag)]
//   d K_k/dt = (L_s(t) + gamma_k) K_k - i alpha_k sigma_x rho
//
// with L_s(t) A = -i [H_s(t), A]. Only the K_k are carried; K_k^dag is their
// conjugate transpose, which satisfies the conjugated equation of motion.

#pragma once

#include "spinbath/bath.hpp"
#include "spinbath/qubit.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinbath::dyn {

using bath::CorrelationFit;

struct DriveSpec {
    double amplitude = 0.0;  // Rabi frequency Omega_R, units of Omega
    double frequency = 2.0;  // carrier omega_L, units of Omega (resonance: 2)
    bool rwa = false;
    double t_on = 0.0;
    double t_off = 0.0;

    bool active(double t) const {
        return amplitude > 0.0 && t >= t_on && t < t_off;
    }
    static DriveSpec none() { return {}; }
};

// H_s(t) = Omega sigma_z + drive term (zero outside the window).
QubitOp system_hamiltonian(const DriveSpec& drive, double t);

struct ExtendedState {
    QubitOp rho = QubitOp::Zero();
    std::vector<QubitOp> aux;  // one K_k per fit term
    double t = 0.0;
};

// Time derivative of the extended state under the coupled time-local system.
ExtendedState rhs(const ExtendedState& state, const CorrelationFit& fit,
                  const DriveSpec& drive);

struct IntegratorControls {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
};

struct StepSizeUnderflow : std::runtime_error {
    explicit StepSizeUnderflow(const std::string& msg) : std::runtime_error(msg) {}
};

// Adaptive Dormand-Prince 5(4) propagation to t_end; returns the final state.
ExtendedState propagate(const ExtendedState& state, const CorrelationFit& fit,
                        const DriveSpec& drive, double t_end,
                        const IntegratorControls& controls = {});

// As propagate, but also samples the state at the requested output times
// (dense interpolation). output_times must be nondecreasing and lie within
// [state.t, t_end].
std::vector<ExtendedState> integrate(const ExtendedState& state,
                                     const CorrelationFit& fit,
                                     const DriveSpec& drive, double t_end,
                                     const std::vector<double>& output_times,
                                     const IntegratorControls& controls = {});

struct EquilibrationNotConverged : std::runtime_error {
    double residual;
    EquilibrationNotConverged(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

// Field-free propagation from rho_s^eq (x) rho_b until every component's time
// derivative falls below tol_stationary (Frobenius norm per unit 1/Omega).
// The fixed point represents the correlated total thermal state to second
// order.
ExtendedState equilibrate(const CorrelationFit& fit, double beta,
                          double tol_stationary = 1e-10, double t_max = 500.0,
                          const IntegratorControls& controls = {});

enum class InitialKind { A, B, C, D, PreparedSnapshot, Factorized, ZeroRho, ZeroAux };

// A: equilibrium as stored; B: equilibrium's rho with aux = 0; C: Gibbs state
// of the bare system with aux = 0; D: given pure state with aux = 0;
// PreparedSnapshot: stored state as-is; Factorized: snapshot's rho with
// aux = 0 (the A1/C1 variants); ZeroRho / ZeroAux: difference objects for the
// bound propagations.
ExtendedState build_initial(InitialKind kind, const CorrelationFit& fit,
                            double beta,
                            const ExtendedState* equilibrium = nullptr,
                            const QubitOp* payload = nullptr,
                            const ExtendedState* snapshot = nullptr);

// Snapshot round-trip; refuses to load against a fit with a different
// fingerprint.
void save_snapshot(const ExtendedState& state, const CorrelationFit& fit,
                   const std::string& path);
ExtendedState load_snapshot(const std::string& path, const CorrelationFit& fit);

}  // namespace spinbath::dyn
