#include "spinbath/qubit.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace spinbath;
using ops::Axis;

TEST_CASE("pauli matrices follow the basis convention") {
    // <sigma_z> = +1 on the excited state |1><1|
    CHECK((ops::pauli(Axis::z) * ops::excited_projector()).trace().real() ==
          doctest::Approx(1.0));
    CHECK((ops::pauli(Axis::z) * ops::ground_projector()).trace().real() ==
          doctest::Approx(-1.0));
    CHECK((ops::pauli(Axis::x) * ops::pauli(Axis::x) - ops::identity()).norm() ==
          doctest::Approx(0.0));
    CHECK(std::abs(ops::pauli(Axis::y).trace()) == doctest::Approx(0.0));
    // sigma_plus raises the ground state to the excited state
    CHECK((ops::sigma_plus() * ops::ground_projector() * ops::sigma_minus() -
           ops::excited_projector()).norm() == doctest::Approx(0.0));
}

TEST_CASE("liouville_apply is -i[H, A]") {
    CHECK(ops::liouville_apply(ops::sigma_z(), ops::sigma_z()).norm() ==
          doctest::Approx(0.0));
    // -i[sigma_z, sigma_x] = 2 sigma_y
    CHECK((ops::liouville_apply(ops::sigma_z(), ops::sigma_x()) -
           2.0 * ops::sigma_y()).norm() == doctest::Approx(0.0).epsilon(1e-14));

    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const QubitOp h = testing::random_hermitian(rng);
        const QubitOp a = testing::random_matrix(rng);
        const QubitOp la = ops::liouville_apply(h, a);
        CHECK(std::abs(la.trace()) < 1e-12);  // trace preserving
        if (trial % 4 == 0) {
            const QubitOp herm = testing::random_hermitian(rng);
            const QubitOp lh = ops::liouville_apply(h, herm);
            CHECK((lh - lh.adjoint()).norm() < 1e-12);  // hermiticity preserving
        }
    }
}

TEST_CASE("trace_norm_half closed form and SVD path agree") {
    CHECK(ops::trace_norm_half(QubitOp::Zero()) == doctest::Approx(0.0));
    CHECK(ops::trace_norm_half(ops::excited_projector() - ops::ground_projector()) ==
          doctest::Approx(1.0));

    QubitOp diag = QubitOp::Zero();
    diag(0, 0) = 0.3;
    diag(1, 1) = -0.3;
    CHECK(ops::trace_norm_half(diag) == doctest::Approx(0.3));
    CHECK(std::abs(ops::trace_norm_half(diag) - ops::trace_norm_half_svd(diag)) < 1e-12);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const QubitOp a = testing::random_hermitian_traceless(rng);
        CHECK(std::abs(ops::trace_norm_half(a) - ops::trace_norm_half_svd(a)) < 1e-12);
    }
}

TEST_CASE("trace_norm_half is a metric on density matrices") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const QubitOp a = testing::random_density_matrix(rng);
        const QubitOp b = testing::random_density_matrix(rng);
        const QubitOp c = testing::random_density_matrix(rng);
        const double dab = ops::trace_norm_half(a - b);
        const double dba = ops::trace_norm_half(b - a);
        const double dac = ops::trace_norm_half(a - c);
        const double dcb = ops::trace_norm_half(c - b);
        CHECK(std::abs(dab - dba) < 1e-12);
        CHECK(dab <= dac + dcb + 1e-12);
        CHECK(ops::trace_norm_half(a - a) < 1e-15);
    }
}

TEST_CASE("bloch_vector endpoints") {
    const auto south = ops::bloch_vector(ops::ground_projector());
    CHECK(south[0] == doctest::Approx(0.0));
    CHECK(south[1] == doctest::Approx(0.0));
    CHECK(south[2] == doctest::Approx(-1.0));

    const auto north = ops::bloch_vector(ops::excited_projector());
    CHECK(north[2] == doctest::Approx(1.0));

    const auto mixed = ops::bloch_vector(0.5 * ops::identity());
    CHECK(std::abs(mixed[0]) + std::abs(mixed[1]) + std::abs(mixed[2]) < 1e-15);

    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto v = ops::bloch_vector(testing::random_density_matrix(rng));
        CHECK(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 + 1e-8);
    }
}

TEST_CASE("gibbs_state is the bare-Hamiltonian thermal state") {
    const QubitOp rho = ops::gibbs_state(10.0);
    CHECK(ops::is_density_matrix(rho));
    CHECK((ops::sigma_z() * rho).trace().real() ==
          doctest::Approx(-std::tanh(10.0)).epsilon(1e-12));
}
