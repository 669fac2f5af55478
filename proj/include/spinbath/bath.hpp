// bath.hpp — Ohmic spectral density, bath correlation function by adaptive
// quadrature, and its compression into a sum of complex exponentials.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinbath::bath {

using Complex = std::complex<double>;

struct BathSpec {
    double xi = 0.1;       // dimensionless coupling
    double omega_c = 7.5;  // cutoff frequency, units of Omega
    double beta = 10.0;    // inverse temperature, units of 1/Omega

    void validate() const {
        if (xi < 0.0) throw std::invalid_argument("BathSpec: xi must be >= 0");
        if (omega_c <= 0.0) throw std::invalid_argument("BathSpec: omega_c must be > 0");
        if (beta <= 0.0) throw std::invalid_argument("BathSpec: beta must be > 0");
    }
};

// J(omega) = (xi/2) * omega * exp(-omega/omega_c), omega >= 0.
double spectral_density(const BathSpec& spec, double omega);

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double cutoff_factor = 60.0;  // integrate up to cutoff_factor * omega_c
    int resolution = 1;           // panel density multiplier (convergence checks)
    int max_panels = 200000;
};

struct QuadratureError : std::runtime_error {
    double estimated_error;
    QuadratureError(const std::string& msg, double err)
        : std::runtime_error(msg), estimated_error(err) {}
};

// C(t) = integral_0^inf J(w) [cos(wt) coth(beta w / 2) - i sin(wt)] dw.
Complex correlation_function(const BathSpec& spec, double t,
                             const QuadratureOptions& opts = {});

// Same integral for an arbitrary tabulated spectral density J(w).
Complex correlation_function(const std::function<double(double)>& spectral,
                             double beta, double xi_over_beta_limit, double t,
                             double omega_max, const QuadratureOptions& opts = {});

struct FitTerm {
    Complex alpha;  // amplitude
    Complex gamma;  // rate, Re(gamma) <= 0
};

// Multi-exponential kernel representation C(t) ~ sum_k alpha_k exp(gamma_k t).
struct CorrelationFit {
    std::vector<FitTerm> terms;
    // Squared 2-norm of the fit residual on the sample grid, normalized by
    // the squared 2-norm of the samples (invariant under coupling rescaling).
    double residual = 0.0;
    double sample_horizon = 0.0;  // time length over which the fit was validated
    bool converged = false;

    Complex eval(double t) const;
    std::size_t size() const { return terms.size(); }

    // Exact rescaling for a different coupling: C is linear in xi, so only the
    // amplitudes change.
    CorrelationFit scaled_coupling(double factor) const;

    // Stable 64-bit content hash; snapshots refuse to load against a
    // different fingerprint.
    std::uint64_t fingerprint() const;

    void save(std::ostream& out) const;
    static CorrelationFit load(std::istream& in);
    void save_file(const std::string& path) const;
    static CorrelationFit load_file(const std::string& path);
};

struct FitOptions {
    int sample_points = 2000;
    QuadratureOptions quadrature{};
};

struct FitNotConverged : std::runtime_error {
    CorrelationFit best;
    FitNotConverged(const std::string& msg, CorrelationFit attempt)
        : std::runtime_error(msg), best(std::move(attempt)) {}
};

// Minimal-k fit of the sampled correlation function on a uniform grid over
// [0, horizon]: k = 1, 2, ... up to max_terms, accepted when the squared
// 2-norm of the residual is <= tol. Matrix-pencil seed plus
// Levenberg-Marquardt refinement; deterministic. A failed fit returns the
// best attempt with converged = false.
CorrelationFit fit_correlation(const BathSpec& spec, double horizon, double tol,
                               int max_terms, const FitOptions& opts = {});

// Fit against pre-sampled kernel values on a uniform grid (test seam).
CorrelationFit fit_sampled(const std::vector<Complex>& samples, double horizon,
                           double tol, int max_terms);

}  // namespace spinbath::bath
