#include "spinbath/bounds.hpp"

#include "spinbath/observables.hpp"

#include <ostream>
#include <sstream>

namespace spinbath::bounds {

namespace {

void check_compatible(const ExtendedState& a, const ExtendedState& b,
                      const CorrelationFit& fit) {
    if (a.aux.size() != fit.size() || b.aux.size() != fit.size())
        throw std::invalid_argument("bounds: aux length does not match fit");
    if (std::abs(a.t - b.t) > 1e-12)
        throw std::invalid_argument("bounds: states must share the same start time");
}

std::vector<double> propagate_trace_norm(const ExtendedState& diff,
                                         const CorrelationFit& fit,
                                         const DriveSpec& drive, double t_end,
                                         const std::vector<double>& output_times,
                                         const IntegratorControls& controls) {
    const auto snapshots =
        dyn::integrate(diff, fit, drive, t_end, output_times, controls);
    std::vector<double> norms;
    norms.reserve(snapshots.size());
    for (const auto& s : snapshots) norms.push_back(ops::trace_norm_half(s.rho));
    return norms;
}

}  // namespace

std::vector<double> compute_F(const ExtendedState& state_a,
                              const ExtendedState& state_b,
                              const CorrelationFit& fit, const DriveSpec& drive,
                              double t_end, const std::vector<double>& output_times,
                              const IntegratorControls& controls) {
    check_compatible(state_a, state_b, fit);
    ExtendedState diff;
    diff.t = state_a.t;
    diff.rho = state_a.rho - state_b.rho;
    diff.aux.assign(fit.size(), QubitOp::Zero());
    return propagate_trace_norm(diff, fit, drive, t_end, output_times, controls);
}

std::vector<double> compute_I(const ExtendedState& state_a,
                              const ExtendedState& state_b,
                              const CorrelationFit& fit, const DriveSpec& drive,
                              double t_end, const std::vector<double>& output_times,
                              const IntegratorControls& controls) {
    check_compatible(state_a, state_b, fit);
    ExtendedState diff;
    diff.t = state_a.t;
    diff.rho = QubitOp::Zero();
    diff.aux.resize(fit.size());
    for (std::size_t k = 0; k < fit.size(); ++k)
        diff.aux[k] = state_a.aux[k] - state_b.aux[k];
    return propagate_trace_norm(diff, fit, drive, t_end, output_times, controls);
}

BoundSeries bound_series(const ExtendedState& state_a, const ExtendedState& state_b,
                         const CorrelationFit& fit, const DriveSpec& drive,
                         double t_end, const std::vector<double>& output_times,
                         const IntegratorControls& controls, double sandwich_tol) {
    check_compatible(state_a, state_b, fit);

    ExtendedState diff;
    diff.t = state_a.t;
    diff.rho = state_a.rho - state_b.rho;
    diff.aux.resize(fit.size());
    for (std::size_t k = 0; k < fit.size(); ++k)
        diff.aux[k] = state_a.aux[k] - state_b.aux[k];

    BoundSeries series;
    series.times = output_times;
    series.D = propagate_trace_norm(diff, fit, drive, t_end, output_times, controls);
    series.F = compute_F(state_a, state_b, fit, drive, t_end, output_times, controls);
    series.I = compute_I(state_a, state_b, fit, drive, t_end, output_times, controls);

    for (std::size_t i = 0; i < series.times.size(); ++i) {
        if (series.D[i] > series.upper(i) + sandwich_tol ||
            series.D[i] < series.lower(i) - sandwich_tol) {
            std::ostringstream msg;
            msg << "bound_series: sandwich violated at t = " << series.times[i]
                << ": |I-F| = " << series.lower(i) << ", D = " << series.D[i]
                << ", I+F = " << series.upper(i);
            throw SandwichViolation(msg.str());
        }
    }
    witness_report(series);
    return series;
}

void witness_report(BoundSeries& series, double witness_tol) {
    series.flags.assign(series.times.size(), 0);
    if (series.times.empty()) return;
    const double upper0 = series.upper(0);
    const double lower0 = series.lower(0);
    const double d0 = series.D[0];
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        std::uint8_t f = 0;
        if (series.upper(i) > upper0 + witness_tol) f |= kNecessaryMet;
        if (series.lower(i) > lower0 + witness_tol) f |= kSufficientMet;
        if (series.I[i] > witness_tol) f |= kCorrelationWitness;
        if (series.D[i] > d0 + witness_tol) f |= kTraceDistanceIncrease;
        series.flags[i] = f;
    }
}

void BoundSeries::write_csv(std::ostream& out) const {
    out << "t,D,F,I,upper,lower,flags\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        obs::write_csv_row(out, {times[i], D[i], F[i], I[i], upper(i), lower(i),
                                 static_cast<double>(flags.empty() ? 0 : flags[i])});
    }
}

}  // namespace spinbath::bounds
