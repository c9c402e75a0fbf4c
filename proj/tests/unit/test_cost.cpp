#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "semot/cost.hpp"
#include "semot/jump_scheme.hpp"

using namespace semot;

namespace {

const Point origin = Point::Zero(2);

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix random_spd(std::mt19937& rng, int d, double floor = 0.05) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n(rng);
    return a * a.transpose() + floor * Matrix::Identity(d, d);
}

SpaceTimeScalarField constant_slices(const PeriodicGrid& g, double v) {
    SpaceTimeScalarField f(g);
    for (std::size_t k = 0; k < f.slice_count(); ++k) f.slice(k) = ScalarField(g, v);
    return f;
}

SpaceTimeMatrixField constant_sigma(const PeriodicGrid& g, double v) {
    return SpaceTimeMatrixField(static_cast<std::size_t>(g.nt) + 1, SymMatrixField(g, v));
}

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("trace decomposition") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(2);
    const TraceDecomposition self = trace_decompose(Matrix::Identity(2, 2), ref, 0.0, origin);
    CHECK(self.lambda1 == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(self.sigma1bar);
    CHECK((*self.sigma1bar - Matrix::Identity(2, 2)).norm() < 1e-15);

    const TraceDecomposition d = trace_decompose(diag2(2.0, 0.5), ref, 0.0, origin);
    CHECK(d.lambda1 == doctest::Approx(1.25).epsilon(1e-15));
    REQUIRE(d.sigma1bar);
    CHECK((*d.sigma1bar)(0, 0) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK((*d.sigma1bar)(1, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(std::abs(d.sigma1bar->trace() - 2.0) < 1e-10);

    const TraceDecomposition zero = trace_decompose(Matrix::Zero(2, 2), ref, 0.0, origin);
    CHECK(zero.lambda1 == 0.0);
    CHECK_FALSE(zero.sigma1bar.has_value());

    Matrix bad(2, 2);
    bad << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(trace_decompose(bad, ref, 0.0, origin), std::invalid_argument);
    CHECK_THROWS_AS(trace_decompose(diag2(1.0, -1.0), ref, 0.0, origin), std::invalid_argument);
}

TEST_CASE("ell_tr closed cases") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(2);
    CHECK(std::abs(ell_tr(0.0, origin, Matrix::Identity(2, 2), ref)) < 1e-15);
    CHECK(ell_tr(0.0, origin, Matrix::Zero(2, 2), ref) == 1.0);
    const double expected = static_cast<double>(oracle::ell_tr_diag({2.0L, 0.5L}));
    CHECK(expected == doctest::Approx(0.307859).epsilon(1e-6));
    CHECK(ell_tr(0.0, origin, diag2(2.0, 0.5), ref) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::isinf(ell_tr(0.0, origin, diag2(1.0, 0.0), ref)));
    CHECK(ell_tr_brownian_1d(2.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("ell_tr against the long double oracle on random diagonal inputs") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(3);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng);
        Matrix s = Matrix::Zero(3, 3);
        s.diagonal() << a, b, c;
        const double expected = static_cast<double>(oracle::ell_tr_diag({a, b, c}));
        CHECK(ell_tr(0.0, Point::Zero(3), s, ref) == doctest::Approx(expected).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("ell_tr is nonnegative, vanishes at the reference and is convex") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(2);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CHECK(ell_tr(0.0, origin, Matrix::Identity(2, 2), ref) == doctest::Approx(0.0).scale(1.0));
    for (int k = 0; k < 300; ++k) {
        const Matrix a = random_spd(rng, 2);
        const Matrix b = random_spd(rng, 2);
        const double s = u(rng);
        const double la = ell_tr(0.0, origin, a, ref);
        const double lb = ell_tr(0.0, origin, b, ref);
        CHECK(la >= -1e-14);
        CHECK(ell_tr(0.0, origin, s * a + (1.0 - s) * b, ref) <= s * la + (1.0 - s) * lb + 1e-10);
    }
}

TEST_CASE("ell_rate examples") {
    const Matrix one = Matrix::Identity(1, 1);
    CHECK(ell_rate(1.3, 0.7 * one, 1.3, 0.7 * one) == 0.0);
    const double scheme_i = static_cast<double>(oracle::ell_rate_1d(1.0L, 2.0L, 1.0L, 1.0L));
    CHECK(scheme_i == doctest::Approx(0.153426).epsilon(1e-6));
    CHECK(ell_rate(1.0, 2.0 * one, 1.0, one) == doctest::Approx(scheme_i).epsilon(1e-15));
    const double scheme_ii = static_cast<double>(oracle::ell_rate_1d(2.0L, 1.0L, 1.0L, 1.0L));
    CHECK(scheme_ii == doctest::Approx(0.386294).epsilon(1e-6));
    CHECK(ell_rate(2.0, one, 1.0, one) == doctest::Approx(scheme_ii).epsilon(1e-15));
    CHECK_THROWS(ell_rate(1.0, one, 1.0, Matrix::Zero(1, 1)));
}

TEST_CASE("ell_rate is nonnegative and zero only at equal schemes") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int k = 0; k < 300; ++k) {
        const Matrix s1 = random_spd(rng, 2);
        const Matrix s2 = random_spd(rng, 2);
        const double l1 = u(rng), l2 = u(rng);
        CHECK(ell_rate(l1, s1, l2, s2) > 0.0);
        CHECK(std::abs(ell_rate(l1, s1, l1, s1)) < 1e-12);
    }
}

TEST_CASE("ell_rate on the trace-normalized slice equals ell_tr") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(2);
    std::mt19937 rng(29);
    for (int k = 0; k < 100; ++k) {
        const Matrix sigma1 = random_spd(rng, 2);
        const TraceDecomposition dec = trace_decompose(sigma1, ref, 0.0, origin);
        const double rate = ell_rate(dec.lambda1, *dec.sigma1bar, 1.0, Matrix::Identity(2, 2));
        CHECK(rate == doctest::Approx(ell_tr(0.0, origin, sigma1, ref)).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("ell_rate through schemes") {
    const JumpScheme a = JumpScheme::constant_scheme(10, 2.0, Matrix::Identity(1, 1), SchemeTag::trace_normalized);
    const JumpScheme b = JumpScheme::reference(10, ReferenceModel::brownian_reference(1));
    CHECK(ell_rate(0.3, Point::Zero(1), a, b) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("primal cost") {
    const ReferenceModel ref = ReferenceModel::brownian_reference(1);
    const PeriodicGrid g = make_grid(1, 16, 10, 1.0);
    const SpaceTimeScalarField p = constant_slices(g, 1.0);
    CHECK(primal_cost(constant_sigma(g, 1.0), p, ref) == doctest::Approx(0.0).scale(1.0));
    CHECK(primal_cost(constant_sigma(g, 2.0), p, ref) ==
          doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK(primal_cost(constant_sigma(g, 2.0), p, ref, TimeQuadrature::step) ==
          doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));

    SpaceTimeMatrixField bad = constant_sigma(g, 1.0);
    bad[3].set(2, -1.0);
    CHECK_THROWS(primal_cost(bad, p, ref));
}

TEST_CASE("primal cost trapezoid converges at second order in dt") {
    // Sigma(t) = 1 + t on uniform p: cost = int_0^1 ((1+t) log(1+t) - t) dt.
    const ReferenceModel ref = ReferenceModel::brownian_reference(1);
    const double exact = 2.0 * std::log(2.0) - 0.75 - 0.5;
    auto cost_at = [&](int nt) {
        const PeriodicGrid g = make_grid(1, 8, nt, 1.0);
        SpaceTimeMatrixField s;
        for (int k = 0; k <= nt; ++k) s.emplace_back(g, 1.0 + g.time(k));
        return primal_cost(s, constant_slices(g, 1.0), ref);
    };
    const double e1 = std::abs(cost_at(20) - exact);
    const double e2 = std::abs(cost_at(40) - exact);
    CHECK(e2 < e1);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("dual value") {
    const PeriodicGrid g = make_grid(1, 32, 4, 1.0);
    const Density u = uniform_density(g);
    const Density q = periodized_gaussian(0.4, 0.1, g);
    CHECK(dual_value(constant_slices(g, 0.0), u, ScalarField(g), q) == 0.0);
    CHECK(std::abs(dual_value(constant_slices(g, 2.5), q, ScalarField(g, 2.5), u)) < 1e-14);

    SpaceTimeScalarField phi = constant_slices(g, 0.0);
    for (int i = 0; i < g.nx; ++i) phi.slice(0)[i] = std::sin(2.0 * std::numbers::pi * g.coordinate(i));
    CHECK(std::abs(dual_value(phi, u, ScalarField(g), q)) < 1e-12);
    CHECK_THROWS_AS(dual_value(phi, uniform_density(make_grid(1, 16, 4, 1.0)), ScalarField(g), q),
                    std::invalid_argument);
}

}  // TEST_SUITE
