#include "spinbath/bath.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>

namespace spinbath::bath {

double spectral_density(const BathSpec& spec, double omega) {
    spec.validate();
    if (omega < 0.0)
        throw std::invalid_argument("spectral_density: omega must be >= 0");
    return 0.5 * spec.xi * omega * std::exp(-omega / spec.omega_c);
}

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1].
constexpr double kKronrodNodes[15] = {
    -0.991455371120812639206854697526, -0.949107912342758524526189684048,
    -0.864864423359769072789712788641, -0.741531185599394439863864773281,
    -0.586087235467691130294144838259, -0.405845151377397166906606412077,
    -0.207784955007898467600689403773, 0.0,
    0.207784955007898467600689403773,  0.405845151377397166906606412077,
    0.586087235467691130294144838259,  0.741531185599394439863864773281,
    0.864864423359769072789712788641,  0.949107912342758524526189684048,
    0.991455371120812639206854697526};

constexpr double kKronrodWeights[15] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

// Gauss-7 weights matched to Kronrod nodes 1, 3, 5, ...
constexpr double kGaussWeights[7] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Panel {
    double a, b;
    Complex value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gk15(const F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Complex kronrod(0.0, 0.0), gauss(0.0, 0.0);
    for (int i = 0; i < 15; ++i) {
        const Complex fx = f(mid + half * kKronrodNodes[i]);
        kronrod += kKronrodWeights[i] * fx;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fx;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

// Adaptive Gauss-Kronrod on [0, omega_max]; the initial panel count resolves
// the cos(omega t) oscillation so each panel spans at most a quarter period.
template <typename F>
Complex integrate_oscillatory(const F& f, double omega_max, double t,
                              const QuadratureOptions& opts) {
    const int by_oscillation =
        static_cast<int>(std::ceil(2.0 * omega_max * std::abs(t) / M_PI));
    int n0 = std::max({16, by_oscillation, 64});
    n0 = std::min(n0 * std::max(1, opts.resolution), opts.max_panels);

    std::priority_queue<Panel> panels;
    Complex total(0.0, 0.0);
    double total_error = 0.0;
    double scale = 0.0;  // magnitude before oscillatory cancellation
    const double h = omega_max / n0;
    for (int i = 0; i < n0; ++i) {
        Panel p = gk15(f, i * h, (i + 1) * h);
        total += p.value;
        total_error += p.error;
        scale += std::abs(p.value);
        panels.push(p);
    }

    // At large t the integral is exponentially small relative to the
    // integrand, so the target is relative to the uncancelled magnitude.
    const double target = std::max({std::abs(total), scale, 1e-300});
    int count = n0;
    while (total_error > opts.rel_tol * target && count < opts.max_panels) {
        Panel worst = panels.top();
        panels.pop();
        total -= worst.value;
        total_error -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        for (Panel p : {gk15(f, worst.a, mid), gk15(f, mid, worst.b)}) {
            total += p.value;
            total_error += p.error;
            panels.push(p);
        }
        ++count;
    }
    if (total_error > 10.0 * opts.rel_tol * target)
        throw QuadratureError("correlation_function: quadrature did not converge",
                              total_error);
    return total;
}

}  // namespace

Complex correlation_function(const std::function<double(double)>& spectral,
                             double beta, double xi_over_beta_limit, double t,
                             double omega_max, const QuadratureOptions& opts) {
    auto integrand = [&](double w) -> Complex {
        double re;
        if (beta * w < 1e-6) {
            // J(w) coth(beta w / 2) -> xi/beta as w -> 0
            re = xi_over_beta_limit * std::cos(w * t);
        } else {
            re = spectral(w) * std::cos(w * t) / std::tanh(0.5 * beta * w);
        }
        const double im = -spectral(w) * std::sin(w * t);
        return Complex(re, im);
    };
    return integrate_oscillatory(integrand, omega_max, t, opts);
}

Complex correlation_function(const BathSpec& spec, double t,
                             const QuadratureOptions& opts) {
    spec.validate();
    if (spec.xi == 0.0) return Complex(0.0, 0.0);
    auto j = [&](double w) {
        return 0.5 * spec.xi * w * std::exp(-w / spec.omega_c);
    };
    // The limit value keeps the exponential cutoff so the small-omega branch
    // joins smoothly.
    auto limit = [&](double w) {
        return spec.xi / spec.beta * std::exp(-w / spec.omega_c);
    };
    auto integrand = [&](double w) -> Complex {
        double re;
        if (spec.beta * w < 1e-6) {
            re = limit(w) * std::cos(w * t);
        } else {
            re = j(w) * std::cos(w * t) / std::tanh(0.5 * spec.beta * w);
        }
        return Complex(re, -j(w) * std::sin(w * t));
    };
    return integrate_oscillatory(integrand, opts.cutoff_factor * spec.omega_c, t,
                                 opts);
}

// ---------------------------------------------------------------------------
// CorrelationFit
// ---------------------------------------------------------------------------

Complex CorrelationFit::eval(double t) const {
    Complex sum(0.0, 0.0);
    for (const auto& term : terms) sum += term.alpha * std::exp(term.gamma * t);
    return sum;
}

CorrelationFit CorrelationFit::scaled_coupling(double factor) const {
    CorrelationFit scaled = *this;
    for (auto& term : scaled.terms) term.alpha *= factor;
    // the normalized residual is invariant under amplitude rescaling
    return scaled;
}

namespace {

std::string canonical_text(const CorrelationFit& fit) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "h %.17g n %zu\n", fit.sample_horizon,
                  fit.terms.size());
    out << buf;
    for (const auto& term : fit.terms) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n",
                      term.alpha.real(), term.alpha.imag(), term.gamma.real(),
                      term.gamma.imag());
        out << buf;
    }
    return out.str();
}

}  // namespace

std::uint64_t CorrelationFit::fingerprint() const {
    // FNV-1a
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : canonical_text(*this)) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

void CorrelationFit::save(std::ostream& out) const {
    char buf[160];
    out << "spinbath-correlation-fit v1\n";
    std::snprintf(buf, sizeof(buf), "horizon %.17g\n", sample_horizon);
    out << buf;
    std::snprintf(buf, sizeof(buf), "residual %.17g\n", residual);
    out << buf;
    out << "converged " << (converged ? 1 : 0) << "\n";
    out << "terms " << terms.size() << "\n";
    for (const auto& term : terms) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n",
                      term.alpha.real(), term.alpha.imag(), term.gamma.real(),
                      term.gamma.imag());
        out << buf;
    }
}

CorrelationFit CorrelationFit::load(std::istream& in) {
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != "spinbath-correlation-fit" || version != "v1")
        throw std::runtime_error("CorrelationFit::load: unrecognized header");
    CorrelationFit fit;
    std::size_t n = 0;
    int conv = 0;
    in >> key >> fit.sample_horizon;
    in >> key >> fit.residual;
    in >> key >> conv;
    in >> key >> n;
    fit.converged = conv != 0;
    fit.terms.resize(n);
    for (auto& term : fit.terms) {
        double ar, ai, gr, gi;
        in >> ar >> ai >> gr >> gi;
        term.alpha = Complex(ar, ai);
        term.gamma = Complex(gr, gi);
    }
    if (!in) throw std::runtime_error("CorrelationFit::load: truncated file");
    return fit;
}

void CorrelationFit::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save(out);
}

CorrelationFit CorrelationFit::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load(in);
}

// ---------------------------------------------------------------------------
// Multi-exponential fitting: matrix pencil seed + Levenberg-Marquardt
// ---------------------------------------------------------------------------

namespace {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Matrix-pencil estimate of k decay rates from uniformly spaced samples.
std::vector<Complex> pencil_rates(const std::vector<Complex>& samples,
                                  double dt, int k, int stride) {
    std::vector<Complex> y;
    for (std::size_t i = 0; i < samples.size(); i += stride)
        y.push_back(samples[i]);
    const int n = static_cast<int>(y.size());
    const int pencil = n / 2;
    if (pencil <= k || n - pencil <= k) return {};

    CMatrix y0(n - pencil, pencil), y1(n - pencil, pencil);
    for (int i = 0; i < n - pencil; ++i)
        for (int j = 0; j < pencil; ++j) {
            y0(i, j) = y[i + j];
            y1(i, j) = y[i + j + 1];
        }

    Eigen::BDCSVD<CMatrix> svd(y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& u = svd.matrixU().leftCols(k);
    const auto& v = svd.matrixV().leftCols(k);
    const auto& s = svd.singularValues().head(k);

    CMatrix a = s.cwiseInverse().asDiagonal() * (u.adjoint() * y1 * v);
    Eigen::ComplexEigenSolver<CMatrix> eig(a);

    const double pencil_dt = dt * stride;
    std::vector<Complex> rates;
    for (int i = 0; i < k; ++i) {
        const Complex z = eig.eigenvalues()(i);
        if (std::abs(z) < 1e-14) continue;
        Complex gamma = std::log(z) / pencil_dt;
        // Decay constraint: reflect spurious growing modes.
        if (gamma.real() > 0.0) gamma = Complex(-gamma.real(), gamma.imag());
        rates.push_back(gamma);
    }
    return rates;
}

// Amplitudes by linear least squares for fixed rates; returns the squared
// 2-norm of the residual.
double solve_amplitudes(const std::vector<Complex>& samples, double dt,
                        const std::vector<Complex>& rates,
                        std::vector<Complex>& alphas) {
    const int n = static_cast<int>(samples.size());
    const int k = static_cast<int>(rates.size());
    CMatrix e(n, k);
    CVector y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = samples[i];
        for (int j = 0; j < k; ++j) e(i, j) = std::exp(rates[j] * (dt * i));
    }
    CVector a = e.colPivHouseholderQr().solve(y);
    alphas.assign(a.data(), a.data() + k);
    return (y - e * a).squaredNorm();
}

double residual_norm2(const std::vector<Complex>& samples, double dt,
                      const std::vector<FitTerm>& terms) {
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Complex model(0.0, 0.0);
        const double t = dt * static_cast<double>(i);
        for (const auto& term : terms) model += term.alpha * std::exp(term.gamma * t);
        sum += std::norm(samples[i] - model);
    }
    return sum;
}

// Full-parameter Levenberg-Marquardt on (Re/Im alpha, Re/Im gamma) with an
// analytic Jacobian. Parameters are packed as 4k reals.
double levenberg_marquardt(const std::vector<Complex>& samples, double dt,
                           std::vector<FitTerm>& terms, int max_iter = 200) {
    const int n = static_cast<int>(samples.size());
    const int k = static_cast<int>(terms.size());
    const int np = 4 * k;

    auto unpack = [&](const RVector& x, std::vector<FitTerm>& out) {
        out.resize(k);
        for (int j = 0; j < k; ++j) {
            out[j].alpha = Complex(x(4 * j), x(4 * j + 1));
            out[j].gamma = Complex(x(4 * j + 2), x(4 * j + 3));
        }
    };
    RVector x(np);
    for (int j = 0; j < k; ++j) {
        x(4 * j) = terms[j].alpha.real();
        x(4 * j + 1) = terms[j].alpha.imag();
        x(4 * j + 2) = terms[j].gamma.real();
        x(4 * j + 3) = terms[j].gamma.imag();
    }

    auto residuals = [&](const RVector& p, RVector& r, RMatrix* jac) {
        std::vector<FitTerm> trial;
        unpack(p, trial);
        r.resize(2 * n);
        if (jac) jac->setZero(2 * n, np);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = dt * i;
            Complex model(0.0, 0.0);
            for (int j = 0; j < k; ++j) {
                const Complex e = std::exp(trial[j].gamma * t);
                model += trial[j].alpha * e;
                if (jac) {
                    const Complex d_ar = -e;
                    const Complex d_ai = Complex(0, -1) * e;
                    const Complex d_gr = -trial[j].alpha * t * e;
                    const Complex d_gi = Complex(0, -1) * trial[j].alpha * t * e;
                    (*jac)(2 * i, 4 * j) = d_ar.real();
                    (*jac)(2 * i + 1, 4 * j) = d_ar.imag();
                    (*jac)(2 * i, 4 * j + 1) = d_ai.real();
                    (*jac)(2 * i + 1, 4 * j + 1) = d_ai.imag();
                    (*jac)(2 * i, 4 * j + 2) = d_gr.real();
                    (*jac)(2 * i + 1, 4 * j + 2) = d_gr.imag();
                    (*jac)(2 * i, 4 * j + 3) = d_gi.real();
                    (*jac)(2 * i + 1, 4 * j + 3) = d_gi.imag();
                }
            }
            const Complex res = samples[i] - model;
            r(2 * i) = res.real();
            r(2 * i + 1) = res.imag();
            sum += std::norm(res);
        }
        return sum;
    };

    RVector r;
    RMatrix jac;
    double cost = residuals(x, r, &jac);
    double lambda = 1e-3;
    for (int iter = 0; iter < max_iter; ++iter) {
        RMatrix jtj = jac.transpose() * jac;
        RVector jtr = jac.transpose() * r;
        RMatrix damped = jtj;
        for (int j = 0; j < np; ++j)
            damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
        RVector step = damped.ldlt().solve(-jtr);
        RVector x_new = x + step;
        RVector r_new;
        const double cost_new = residuals(x_new, r_new, nullptr);
        if (cost_new < cost) {
            const double rel = (cost - cost_new) / std::max(cost, 1e-300);
            x = x_new;
            cost = cost_new;
            lambda = std::max(lambda * 0.3, 1e-12);
            residuals(x, r, &jac);
            if (rel < 1e-14) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    unpack(x, terms);
    return cost;
}

}  // namespace

CorrelationFit fit_sampled(const std::vector<Complex>& samples, double horizon,
                           double tol, int max_terms) {
    if (samples.size() < 8)
        throw std::invalid_argument("fit_sampled: too few samples");
    if (max_terms < 1)
        throw std::invalid_argument("fit_sampled: max_terms must be >= 1");
    const double dt = horizon / static_cast<double>(samples.size() - 1);
    double norm2 = 0.0;
    for (const auto& s : samples) norm2 += std::norm(s);
    if (norm2 == 0.0)
        throw std::invalid_argument("fit_sampled: samples are identically zero");

    CorrelationFit best;
    best.sample_horizon = horizon;
    best.residual = std::numeric_limits<double>::infinity();

    for (int k = 1; k <= max_terms; ++k) {
        // Deterministic multi-start over pencil decimations.
        for (int stride : {5, 3, 8, 1}) {
            auto rates = pencil_rates(samples, dt, k, stride);
            if (rates.empty()) continue;
            std::vector<FitTerm> terms(rates.size());
            std::vector<Complex> alphas;
            solve_amplitudes(samples, dt, rates, alphas);
            for (std::size_t j = 0; j < rates.size(); ++j)
                terms[j] = {alphas[j], rates[j]};

            levenberg_marquardt(samples, dt, terms);

            // Project back onto the decaying-kernel constraint and re-solve
            // the amplitudes linearly.
            bool clamped = false;
            for (auto& term : terms)
                if (term.gamma.real() > 0.0) {
                    term.gamma = Complex(0.0, term.gamma.imag());
                    clamped = true;
                }
            if (clamped) {
                std::vector<Complex> g;
                for (const auto& term : terms) g.push_back(term.gamma);
                solve_amplitudes(samples, dt, g, alphas);
                for (std::size_t j = 0; j < terms.size(); ++j)
                    terms[j].alpha = alphas[j];
            }

            const double res = residual_norm2(samples, dt, terms) / norm2;
            if (res < best.residual) {
                best.terms = terms;
                best.residual = res;
            }
            if (best.residual <= tol) break;
        }
        if (best.residual <= tol) break;
    }

    best.converged = best.residual <= tol;
    return best;
}

CorrelationFit fit_correlation(const BathSpec& spec, double horizon, double tol,
                               int max_terms, const FitOptions& opts) {
    spec.validate();
    if (horizon <= 0.0)
        throw std::invalid_argument("fit_correlation: horizon must be > 0");
    if (tol <= 0.0)
        throw std::invalid_argument("fit_correlation: tol must be > 0");

    const int n = std::max(opts.sample_points, 2000);
    std::vector<Complex> samples(n);
    const double dt = horizon / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i)
        samples[i] = correlation_function(spec, dt * i, opts.quadrature);

    const double c0 = std::abs(samples.front());
    const double ch = std::abs(samples.back());
    if (c0 > 0.0 && ch > tol * c0)
        std::cerr << "fit_correlation: warning: |C(horizon)|/|C(0)| = "
                  << ch / c0 << " has not decayed below tol = " << tol << "\n";

    CorrelationFit fit = fit_sampled(samples, horizon, tol, max_terms);
    if (!fit.converged)
        throw FitNotConverged(
            "fit_correlation: no fit with <= " + std::to_string(max_terms) +
                " terms reached residual " + std::to_string(tol) +
                " (best: " + std::to_string(fit.residual) + ")",
            fit);
    return fit;
}

}  // namespace spinbath::bath
