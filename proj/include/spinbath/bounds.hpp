// bounds.hpp — Linear-response propagations of the factorized (F) and
// correlation (I) parts of an initial difference, the resulting trace-distance
// sandwich I + F >= D >= |I - F|, and the witness flags derived from it.

#pragma once

#include "spinbath/dynamics.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spinbath::bounds {

using dyn::DriveSpec;
using dyn::ExtendedState;
using dyn::IntegratorControls;
using bath::CorrelationFit;

// Propagates (rho = rho_A - rho_B, aux = 0) and returns (1/2)||rho(t)||_1 at
// each output time. Both inputs must share the same start time.
std::vector<double> compute_F(const ExtendedState& state_a,
                              const ExtendedState& state_b,
                              const CorrelationFit& fit, const DriveSpec& drive,
                              double t_end, const std::vector<double>& output_times,
                              const IntegratorControls& controls = {});

// Propagates (rho = 0, aux = {K_k^A - K_k^B}) and returns the trace norm of
// the rho component, which tracks the effect of the initial correlation
// difference.
std::vector<double> compute_I(const ExtendedState& state_a,
                              const ExtendedState& state_b,
                              const CorrelationFit& fit, const DriveSpec& drive,
                              double t_end, const std::vector<double>& output_times,
                              const IntegratorControls& controls = {});

enum WitnessFlag : std::uint8_t {
    kNecessaryMet = 1,           // upper bound exceeds its initial value
    kSufficientMet = 2,          // lower bound exceeds its initial value
    kCorrelationWitness = 4,     // I(t) > 0: initial-correlation difference
    kTraceDistanceIncrease = 8,  // D(t) > D(t'): non-contractivity indicator
};

struct BoundSeries {
    std::vector<double> times;
    std::vector<double> D;
    std::vector<double> F;
    std::vector<double> I;
    std::vector<std::uint8_t> flags;

    double upper(std::size_t i) const { return I[i] + F[i]; }
    double lower(std::size_t i) const { return std::abs(I[i] - F[i]); }

    void write_csv(std::ostream& out) const;
};

struct SandwichViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs the full-difference propagation for D plus the F and I propagations
// and checks |I - F| <= D <= I + F at every output time. A violation beyond
// tolerance signals an integrator or decomposition bug.
BoundSeries bound_series(const ExtendedState& state_a, const ExtendedState& state_b,
                         const CorrelationFit& fit, const DriveSpec& drive,
                         double t_end, const std::vector<double>& output_times,
                         const IntegratorControls& controls = {},
                         double sandwich_tol = 1e-9);

// Fills the per-time witness flags. witness_tol is the absolute comparison
// floor on D/F/I values.
void witness_report(BoundSeries& series, double witness_tol = 1e-6);

}  // namespace spinbath::bounds
