#include "spinbath/bath.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

using namespace spinbath;
using bath::BathSpec;
using bath::Complex;

namespace {

const BathSpec kReference{0.1, 7.5, 10.0};

// Independent oracle: composite 20-point Gauss-Legendre on a log-dense panel
// grid. Shares no code with the production quadrature.
double gauss20(const std::function<double(double)>& f, double a, double b) {
    static const double nodes[10] = {
        0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
        0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
        0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
        0.9931285991850949};
    static const double weights[10] = {
        0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
        0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
        0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
        0.0176140071391521};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 10; ++i)
        sum += weights[i] * (f(mid - half * nodes[i]) + f(mid + half * nodes[i]));
    return half * sum;
}

double log_dense_quadrature(const std::function<double(double)>& f, double lo,
                            double hi, int panels) {
    double total = 0.0;
    const double ratio = std::pow(hi / lo, 1.0 / panels);
    double a = lo;
    for (int i = 0; i < panels; ++i) {
        const double b = (i + 1 == panels) ? hi : a * ratio;
        total += gauss20(f, a, b);
        a = b;
    }
    return total;
}

Complex correlation_oracle(const BathSpec& spec, double t) {
    auto j = [&](double w) {
        return 0.5 * spec.xi * w * std::exp(-w / spec.omega_c);
    };
    auto real_part = [&](double w) {
        if (spec.beta * w < 1e-8) return spec.xi / spec.beta * std::cos(w * t);
        return j(w) * std::cos(w * t) / std::tanh(0.5 * spec.beta * w);
    };
    auto imag_part = [&](double w) { return -j(w) * std::sin(w * t); };
    const double hi = 80.0 * spec.omega_c;
    const double re = spec.xi / spec.beta * 1e-10 +
                      log_dense_quadrature(real_part, 1e-10, hi, 4000);
    const double im = log_dense_quadrature(imag_part, 1e-10, hi, 4000);
    return Complex(re, im);
}

}  // namespace

TEST_CASE("spectral_density closed form") {
    CHECK(bath::spectral_density(kReference, 0.0) == doctest::Approx(0.0));
    // maximum at omega = omega_c
    const double peak = bath::spectral_density(kReference, kReference.omega_c);
    CHECK(peak == doctest::Approx(0.05 * 7.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(bath::spectral_density(kReference, 7.4) < peak);
    CHECK(bath::spectral_density(kReference, 7.6) < peak);
    CHECK_THROWS_AS(bath::spectral_density(kReference, -1.0), std::invalid_argument);
}

TEST_CASE("integral of J matches the analytic value") {
    // integral_0^inf (xi/2) w exp(-w/wc) dw = (xi/2) wc^2
    auto j = [&](double w) { return bath::spectral_density(kReference, w); };
    const double quad = log_dense_quadrature(j, 1e-10, 100.0 * kReference.omega_c, 2000);
    CHECK(quad == doctest::Approx(0.5 * 0.1 * 7.5 * 7.5).epsilon(1e-10));
}

TEST_CASE("correlation_function basics") {
    const Complex c0 = bath::correlation_function(kReference, 0.0);
    CHECK(std::abs(c0.imag()) < 1e-12);

    for (double t : {0.3, 1.7, 6.2}) {
        const Complex plus = bath::correlation_function(kReference, t);
        const Complex minus = bath::correlation_function(kReference, -t);
        CHECK(std::abs(minus - std::conj(plus)) <= 1e-12 + 1e-10 * std::abs(plus));
    }

    BathSpec decoupled = kReference;
    decoupled.xi = 0.0;
    CHECK(std::abs(bath::correlation_function(decoupled, 2.0)) == 0.0);
}

TEST_CASE("correlation_function agrees with the independent quadrature oracle") {
    // Tolerances are relative to C(0): at larger t the integral is small
    // compared to the oscillatory integrand, which bounds the attainable
    // absolute accuracy.
    const double c0 = std::abs(bath::correlation_function(kReference, 0.0));
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.5}) {
        const Complex expected = correlation_oracle(kReference, t);
        const Complex got = bath::correlation_function(kReference, t);
        CHECK(std::abs(got - expected) <= 1e-8 * c0);
    }
}

TEST_CASE("quadrature is converged: doubling resolution changes little") {
    bath::QuadratureOptions fine;
    fine.resolution = 2;
    const double c0 = std::abs(bath::correlation_function(kReference, 0.0));
    for (double t : {0.0, 0.5, 2.0, 8.0, 20.0}) {
        const Complex base = bath::correlation_function(kReference, t);
        const Complex refined = bath::correlation_function(kReference, t, fine);
        CHECK(std::abs(base - refined) < 1e-8 * c0);
    }
}

TEST_CASE("fit recovers an exact single exponential") {
    const Complex alpha(0.8, -0.3);
    const Complex gamma(-0.7, 2.1);
    const double horizon = 12.0;
    const int n = 600;
    std::vector<Complex> samples(n);
    for (int i = 0; i < n; ++i)
        samples[i] = alpha * std::exp(gamma * (horizon * i / (n - 1.0)));

    const auto fit = bath::fit_sampled(samples, horizon, 1e-12, 4);
    REQUIRE(fit.converged);
    REQUIRE(fit.terms.size() == 1);
    CHECK(fit.residual < 1e-12);
    CHECK(std::abs(fit.terms[0].alpha - alpha) < 1e-8);
    CHECK(std::abs(fit.terms[0].gamma - gamma) < 1e-8);
}

TEST_CASE("fit recovers a synthetic three-term kernel") {
    const std::vector<bath::FitTerm> truth = {
        {{1.2, 0.4}, {-0.3, 1.0}},
        {{-0.5, 0.9}, {-1.1, -2.4}},
        {{0.2, -0.1}, {-2.5, 0.3}},
    };
    const double horizon = 15.0;
    const int n = 900;
    std::vector<Complex> samples(n);
    for (int i = 0; i < n; ++i) {
        const double t = horizon * i / (n - 1.0);
        Complex sum(0, 0);
        for (const auto& term : truth) sum += term.alpha * std::exp(term.gamma * t);
        samples[i] = sum;
    }
    const auto fit = bath::fit_sampled(samples, horizon, 1e-10, 6);
    REQUIRE(fit.converged);
    CHECK(fit.terms.size() <= 3);
    CHECK(fit.residual < 1e-10);
    for (const auto& term : fit.terms) CHECK(term.gamma.real() <= 0.0);
}

TEST_CASE("reference-bath fit: term count, off-grid generalization, decay") {
    const double horizon = 30.0;
    const double tol = 1e-7;
    const auto fit = bath::fit_correlation(kReference, horizon, tol, 6);
    REQUIRE(fit.converged);
    CHECK(fit.terms.size() >= 1);
    CHECK(fit.terms.size() <= 6);
    CHECK(fit.residual <= tol);
    for (const auto& term : fit.terms) CHECK(term.gamma.real() <= 0.0);

    // Off-grid generalization against the production quadrature at fresh
    // sample times.
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(0.0, horizon);
    double off_grid_residual = 0.0, off_grid_norm = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = dist(rng);
        const Complex truth_t = bath::correlation_function(kReference, t);
        off_grid_residual += std::norm(truth_t - fit.eval(t));
        off_grid_norm += std::norm(truth_t);
    }
    CHECK(off_grid_residual <= 10.0 * tol * off_grid_norm);

    // Reconstructed kernel decays with the true kernel at the horizon
    // (tolerance relative to the t = 0 magnitude, like the fit residual).
    const double tail = std::abs(fit.eval(horizon));
    const double truth = std::abs(bath::correlation_function(kReference, horizon));
    const double c0 = std::abs(bath::correlation_function(kReference, 0.0));
    CHECK(std::abs(tail - truth) <= 10.0 * tol * c0);
}

TEST_CASE("fit diagnostics when tolerance is unreachable") {
    // A two-mode kernel cannot be represented by one exponential.
    const double horizon = 10.0;
    const int n = 500;
    std::vector<Complex> samples(n);
    for (int i = 0; i < n; ++i) {
        const double t = horizon * i / (n - 1.0);
        samples[i] = std::exp(Complex(-0.3, 1.0) * t) + std::exp(Complex(-0.3, -3.0) * t);
    }
    const auto attempt = bath::fit_sampled(samples, horizon, 1e-14, 1);
    CHECK(!attempt.converged);
    CHECK(attempt.residual > 1e-14);
    CHECK(attempt.terms.size() == 1);
}

TEST_CASE("scaled_coupling rescales amplitudes exactly") {
    bath::CorrelationFit fit;
    fit.terms = {{{1.0, 2.0}, {-0.5, 1.0}}, {{0.3, -0.2}, {-1.5, -2.0}}};
    fit.residual = 4e-8;
    fit.sample_horizon = 30.0;
    const auto scaled = fit.scaled_coupling(0.01);
    CHECK(std::abs(scaled.eval(1.3) - 0.01 * fit.eval(1.3)) < 1e-15);
    // the normalized residual does not change under rescaling
    CHECK(scaled.residual == doctest::Approx(4e-8));
}

TEST_CASE("fit serialization round trip and fingerprint") {
    bath::CorrelationFit fit;
    fit.terms = {{{0.123456789012345, -2.0}, {-0.5, 1.75}}};
    fit.residual = 1.5e-9;
    fit.sample_horizon = 25.0;
    fit.converged = true;

    std::stringstream buffer;
    fit.save(buffer);
    const auto loaded = bath::CorrelationFit::load(buffer);
    CHECK(loaded.terms.size() == 1);
    CHECK(std::abs(loaded.terms[0].alpha - fit.terms[0].alpha) == 0.0);
    CHECK(std::abs(loaded.terms[0].gamma - fit.terms[0].gamma) == 0.0);
    CHECK(loaded.fingerprint() == fit.fingerprint());

    auto other = fit;
    other.terms[0].alpha += 1e-12;
    CHECK(other.fingerprint() != fit.fingerprint());
}
