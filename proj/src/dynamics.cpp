#include "spinbath/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spinbath::dyn {

QubitOp system_hamiltonian(const DriveSpec& drive, double t) {
    QubitOp h = ops::sigma_z();
    if (!drive.active(t)) return h;
    if (drive.rwa) {
        const Complex phase = std::exp(Complex(0.0, -drive.frequency * t));
        h += 0.5 * drive.amplitude *
             (phase * ops::sigma_plus() + std::conj(phase) * ops::sigma_minus());
    } else {
        h += drive.amplitude * std::cos(drive.frequency * t) * ops::sigma_x();
    }
    return h;
}

ExtendedState rhs(const ExtendedState& state, const CorrelationFit& fit,
                  const DriveSpec& drive) {
    if (state.aux.size() != fit.size())
        throw std::invalid_argument("rhs: aux length does not match fit term count");
    const QubitOp h = system_hamiltonian(drive, state.t);
    const QubitOp sx = ops::sigma_x();

    ExtendedState deriv;
    deriv.t = state.t;
    QubitOp ksum = QubitOp::Zero();
    for (const auto& k : state.aux) ksum += k + k.adjoint();
    deriv.rho = ops::liouville_apply(h, state.rho) + ops::liouville_apply(sx, ksum);

    deriv.aux.resize(fit.size());
    for (std::size_t j = 0; j < fit.size(); ++j) {
        deriv.aux[j] = ops::liouville_apply(h, state.aux[j]) +
                       fit.terms[j].gamma * state.aux[j] -
                       Complex(0.0, 1.0) * fit.terms[j].alpha * sx * state.rho;
    }
    return deriv;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) on the flattened complex state vector
// ---------------------------------------------------------------------------

namespace {

using CVector = Eigen::VectorXcd;

CVector pack(const ExtendedState& state) {
    CVector y(4 * (1 + state.aux.size()));
    y.segment<4>(0) = Eigen::Map<const Eigen::Vector4cd>(state.rho.data());
    for (std::size_t j = 0; j < state.aux.size(); ++j)
        y.segment<4>(4 * (j + 1)) =
            Eigen::Map<const Eigen::Vector4cd>(state.aux[j].data());
    return y;
}

ExtendedState unpack(const CVector& y, double t) {
    ExtendedState state;
    state.t = t;
    state.rho = Eigen::Map<const QubitOp>(y.segment<4>(0).data());
    const std::size_t k = y.size() / 4 - 1;
    state.aux.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        state.aux[j] = Eigen::Map<const QubitOp>(y.segment<4>(4 * (j + 1)).data());
    return state;
}

struct Dopri5 {
    const CorrelationFit& fit;
    const DriveSpec& drive;

    CVector eval(double t, const CVector& y) const {
        return pack(rhs(unpack(y, t), fit, drive));
    }

    // One accepted step fills y1, k_last (FSAL) and the dense-output
    // coefficients.
    struct Step {
        double t0 = 0.0, h = 0.0;
        CVector r1, r2, r3, r4, r5;

        CVector interpolate(double t) const {
            const double theta = (t - t0) / h;
            const double theta1 = 1.0 - theta;
            return r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        }
    };

    bool try_step(double t, const CVector& y0, const CVector& k1, double h,
                  double rtol, double atol, CVector& y1, CVector& k7,
                  Step& dense, double& err) const {
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                                a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                                a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                                a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                                a65 = -5103.0 / 18656.0;
        static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                                a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                                a76 = 11.0 / 84.0;
        static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                                c5 = 8.0 / 9.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                                e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                                e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0,
                                d7 = 69997945.0 / 29380423.0;

        const CVector k2 = eval(t + c2 * h, y0 + h * (a21 * k1));
        const CVector k3 = eval(t + c3 * h, y0 + h * (a31 * k1 + a32 * k2));
        const CVector k4 = eval(t + c4 * h, y0 + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const CVector k5 =
            eval(t + c5 * h, y0 + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const CVector k6 = eval(
            t + h, y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y1 = y0 + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = eval(t + h, y1);

        const CVector errv =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < y0.size(); ++i) {
            const double sc =
                atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
            const double q = std::abs(errv(i)) / sc;
            sum += q * q;
        }
        err = std::sqrt(sum / static_cast<double>(y0.size()));
        if (err > 1.0) return false;

        dense.t0 = t;
        dense.h = h;
        dense.r1 = y0;
        dense.r2 = y1 - y0;
        dense.r3 = h * k1 - dense.r2;
        dense.r4 = dense.r2 - h * k7 - dense.r3;
        dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        return true;
    }
};

double initial_step_guess(double span, double max_step) {
    return std::min({1e-3, span, max_step});
}

// Propagate over [t0, t1] (no drive-window splitting here), invoking sink for
// each output time that falls inside an accepted step.
template <typename Sink>
CVector run_segment(const Dopri5& stepper, CVector y, double t0, double t1,
                    const IntegratorControls& controls, double max_step,
                    const std::vector<double>& output_times, std::size_t& out_idx,
                    Sink&& sink) {
    if (t1 <= t0) return y;
    double t = t0;
    double h = initial_step_guess(t1 - t0, max_step);
    CVector k1 = stepper.eval(t, y);
    while (t < t1) {
        h = std::min({h, max_step, t1 - t});
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            double max_rate = 0.0;
            for (const auto& term : stepper.fit.terms)
                max_rate = std::max(max_rate, std::abs(term.gamma.real()));
            std::ostringstream msg;
            msg << "integrate: step size underflow at t = " << t
                << " (max |Re gamma| = " << max_rate
                << ", drive amplitude = " << stepper.drive.amplitude << ")";
            throw StepSizeUnderflow(msg.str());
        }
        CVector y1, k7;
        Dopri5::Step dense;
        double err = 0.0;
        if (stepper.try_step(t, y, k1, h, controls.rtol, controls.atol, y1, k7,
                             dense, err)) {
            const double t_next = t + h;
            while (out_idx < output_times.size() &&
                   output_times[out_idx] <= t_next + 1e-14 * std::max(1.0, t_next)) {
                const double ts = std::min(output_times[out_idx], t_next);
                sink(ts, dense.interpolate(ts));
                ++out_idx;
            }
            t = t_next;
            y.swap(y1);
            k1.swap(k7);
            const double factor =
                err > 0.0 ? 0.9 * std::pow(err, -0.2)
                          : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return y;
}

std::vector<ExtendedState> integrate_impl(const ExtendedState& state,
                                          const CorrelationFit& fit,
                                          const DriveSpec& drive, double t_end,
                                          const std::vector<double>& output_times,
                                          const IntegratorControls& controls,
                                          ExtendedState* final_state) {
    if (state.aux.size() != fit.size())
        throw std::invalid_argument("integrate: aux length does not match fit");
    if (t_end < state.t)
        throw std::invalid_argument("integrate: t_end must be >= state.t");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (output_times[i] < state.t - 1e-12 || output_times[i] > t_end + 1e-12)
            throw std::invalid_argument("integrate: output time outside [t0, t_end]");
        if (i > 0 && output_times[i] < output_times[i - 1])
            throw std::invalid_argument("integrate: output times must be nondecreasing");
    }

    std::vector<ExtendedState> snapshots;
    snapshots.reserve(output_times.size());
    std::size_t out_idx = 0;
    // Output times equal to the start time are served directly.
    while (out_idx < output_times.size() &&
           output_times[out_idx] <= state.t + 1e-14 * std::max(1.0, state.t)) {
        ExtendedState s = state;
        s.t = output_times[out_idx];
        snapshots.push_back(std::move(s));
        ++out_idx;
    }

    CVector y = pack(state);
    auto sink = [&](double ts, const CVector& ys) {
        snapshots.push_back(unpack(ys, ts));
    };

    // The drive switches discontinuously at the window edges; integrate each
    // smooth segment separately with the drive held on or off for the whole
    // segment, so no RK stage straddles the jump.
    std::vector<double> breaks{state.t};
    if (drive.amplitude > 0.0) {
        for (double edge : {drive.t_on, drive.t_off})
            if (edge > state.t && edge < t_end) breaks.push_back(edge);
    }
    breaks.push_back(t_end);
    std::sort(breaks.begin(), breaks.end());

    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        double max_step = controls.max_step;
        DriveSpec segment_drive = DriveSpec::none();
        if (drive.active(0.5 * (a + b))) {
            segment_drive = drive;
            segment_drive.t_on = -std::numeric_limits<double>::infinity();
            segment_drive.t_off = std::numeric_limits<double>::infinity();
            // Resolve the carrier without the RWA.
            const double carrier = std::min(2.0 * M_PI / drive.frequency,
                                            2.0 * M_PI / drive.amplitude);
            max_step = std::min(max_step, 0.02 * carrier);
        }
        Dopri5 stepper{fit, segment_drive};
        y = run_segment(stepper, std::move(y), a, b, controls, max_step,
                        output_times, out_idx, sink);
    }
    // Serve any output times coinciding with t_end that the tolerance window
    // missed.
    while (out_idx < output_times.size()) {
        snapshots.push_back(unpack(y, output_times[out_idx]));
        ++out_idx;
    }
    if (final_state) *final_state = unpack(y, t_end);
    return snapshots;
}

}  // namespace

ExtendedState propagate(const ExtendedState& state, const CorrelationFit& fit,
                        const DriveSpec& drive, double t_end,
                        const IntegratorControls& controls) {
    ExtendedState final_state;
    integrate_impl(state, fit, drive, t_end, {}, controls, &final_state);
    return final_state;
}

std::vector<ExtendedState> integrate(const ExtendedState& state,
                                     const CorrelationFit& fit,
                                     const DriveSpec& drive, double t_end,
                                     const std::vector<double>& output_times,
                                     const IntegratorControls& controls) {
    return integrate_impl(state, fit, drive, t_end, output_times, controls,
                          nullptr);
}

ExtendedState equilibrate(const CorrelationFit& fit, double beta,
                          double tol_stationary, double t_max,
                          const IntegratorControls& controls) {
    ExtendedState state;
    state.rho = ops::gibbs_state(beta);
    state.aux.assign(fit.size(), QubitOp::Zero());
    state.t = 0.0;

    double coupling = 0.0;
    for (const auto& term : fit.terms) coupling = std::max(coupling, std::abs(term.alpha));
    if (coupling == 0.0) return state;  // decoupled bath: Gibbs state is exact

    const DriveSpec field_free = DriveSpec::none();
    // The stationarity residual bottoms out at the integration noise floor
    // (~rtol per unit time), so the propagation runs tighter than the
    // requested threshold.
    IntegratorControls tight = controls;
    tight.rtol = std::min(controls.rtol, 1e-2 * tol_stationary);
    tight.atol = std::min(controls.atol, 1e-3 * tol_stationary);
    auto residual_norm = [&](const ExtendedState& s) {
        const ExtendedState d = rhs(s, fit, field_free);
        double norm = d.rho.norm();
        for (const auto& k : d.aux) norm = std::max(norm, k.norm());
        return norm;
    };

    const double chunk = 5.0;
    double res = residual_norm(state);
    while (res > tol_stationary) {
        if (state.t >= t_max) {
            std::ostringstream msg;
            msg << "equilibrate: not converged by t = " << t_max
                << " (residual derivative norm " << res << ")";
            throw EquilibrationNotConverged(msg.str(), res);
        }
        state = propagate(state, fit, field_free,
                          std::min(state.t + chunk, t_max), tight);
        res = residual_norm(state);
    }
    state.t = 0.0;
    return state;
}

ExtendedState build_initial(InitialKind kind, const CorrelationFit& fit,
                            double beta, const ExtendedState* equilibrium,
                            const QubitOp* payload, const ExtendedState* snapshot) {
    ExtendedState state;
    state.t = 0.0;
    switch (kind) {
        case InitialKind::A:
            if (!equilibrium)
                throw std::invalid_argument("build_initial: A requires an equilibrated state");
            state = *equilibrium;
            state.t = 0.0;
            return state;
        case InitialKind::B:
            if (!equilibrium)
                throw std::invalid_argument("build_initial: B requires an equilibrated state");
            state.rho = equilibrium->rho;
            state.aux.assign(fit.size(), QubitOp::Zero());
            return state;
        case InitialKind::C:
            state.rho = ops::gibbs_state(beta);
            state.aux.assign(fit.size(), QubitOp::Zero());
            return state;
        case InitialKind::D:
            state.rho = payload ? *payload : ops::ground_projector();
            state.aux.assign(fit.size(), QubitOp::Zero());
            return state;
        case InitialKind::PreparedSnapshot:
            if (!snapshot)
                throw std::invalid_argument("build_initial: missing snapshot");
            state = *snapshot;
            return state;
        case InitialKind::Factorized:
            if (!snapshot)
                throw std::invalid_argument("build_initial: missing snapshot");
            state.rho = snapshot->rho;
            state.aux.assign(fit.size(), QubitOp::Zero());
            state.t = snapshot->t;
            return state;
        case InitialKind::ZeroRho:
            if (!snapshot)
                throw std::invalid_argument("build_initial: ZeroRho requires aux source");
            state = *snapshot;
            state.rho = QubitOp::Zero();
            return state;
        case InitialKind::ZeroAux:
            state.rho = payload ? *payload : QubitOp::Zero();
            state.aux.assign(fit.size(), QubitOp::Zero());
            return state;
    }
    throw std::logic_error("build_initial: unhandled kind");
}

void save_snapshot(const ExtendedState& state, const CorrelationFit& fit,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[256];
    out << "spinbath-snapshot v1\n";
    out << "fit_fingerprint " << fit.fingerprint() << "\n";
    std::snprintf(buf, sizeof(buf), "t %.17g\n", state.t);
    out << buf;
    out << "aux " << state.aux.size() << "\n";
    auto write_matrix = [&](const QubitOp& m) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                      m(0, 0).real(), m(0, 0).imag(), m(0, 1).real(), m(0, 1).imag(),
                      m(1, 0).real(), m(1, 0).imag(), m(1, 1).real(), m(1, 1).imag());
        out << buf;
    };
    write_matrix(state.rho);
    for (const auto& k : state.aux) write_matrix(k);
}

ExtendedState load_snapshot(const std::string& path, const CorrelationFit& fit) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != "spinbath-snapshot" || version != "v1")
        throw std::runtime_error("load_snapshot: unrecognized header in " + path);
    std::uint64_t fp = 0;
    in >> key >> fp;
    if (fp != fit.fingerprint())
        throw std::runtime_error(
            "load_snapshot: snapshot " + path +
            " was written against a different correlation fit");
    ExtendedState state;
    std::size_t n = 0;
    in >> key >> state.t;
    in >> key >> n;
    if (n != fit.size())
        throw std::runtime_error("load_snapshot: aux count does not match fit");
    auto read_matrix = [&](QubitOp& m) {
        double v[8];
        for (double& x : v) in >> x;
        m(0, 0) = Complex(v[0], v[1]);
        m(0, 1) = Complex(v[2], v[3]);
        m(1, 0) = Complex(v[4], v[5]);
        m(1, 1) = Complex(v[6], v[7]);
    };
    read_matrix(state.rho);
    state.aux.resize(n);
    for (auto& k : state.aux) read_matrix(k);
    if (!in) throw std::runtime_error("load_snapshot: truncated file " + path);
    return state;
}

}  // namespace spinbath::dyn
