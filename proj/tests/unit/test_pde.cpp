#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "semot/errors.hpp"
#include "semot/pde.hpp"
#include "semot/periodic_tridiagonal.hpp"

using namespace semot;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

ScalarField cosine_mode(const PeriodicGrid& g, double amplitude, double offset = 0.0) {
    ScalarField f(g);
    for (int i = 0; i < g.nx; ++i) f[i] = offset + amplitude * std::cos(two_pi * g.coordinate(i));
    return f;
}

ScalarField smooth_random(const PeriodicGrid& g, unsigned seed, double amplitude) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::array<double, 8> a{}, b{};
    for (int k = 0; k < 4; ++k) {
        a[k] = n(rng) / (k + 1);
        b[k] = n(rng) / (k + 1);
    }
    ScalarField f(g);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(g.nx));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(g.nx));
        const double x = g.coordinate(i);
        const double y = g.dim == 2 ? g.coordinate(j) : 0.0;
        double v = 0.0;
        for (int k = 0; k < 4; ++k) {
            v += a[k] * std::cos(two_pi * (k + 1) * x + b[k]) + (g.dim == 2 ? b[k] * std::sin(two_pi * (k + 1) * y + a[k]) : 0.0);
        }
        f[idx] = amplitude * v;
    }
    return f;
}

SymMatrixField random_sigma(const PeriodicGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    std::uniform_real_distribution<double> c(-0.5, 0.5);
    SymMatrixField s(g);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (g.dim == 1) {
            s.set(i, u(rng));
        } else {
            const double a = u(rng), b = u(rng);
            s.set(i, a, c(rng) * std::sqrt(a * b), b);
        }
    }
    return s;
}

double oscillation(const ScalarField& f) { return f.max() - f.min(); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("periodic tridiagonal solve matches a dense solve") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {3u, 4u, 17u, 64u}) {
        std::vector<double> lo(n), di(n), up(n), rhs(n), x(n);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = u(rng);
            up[i] = u(rng);
            di[i] = 3.0 + u(rng);
            rhs[i] = u(rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            dense(r, r) += di[i];
            dense(r, static_cast<Eigen::Index>((i + n - 1) % n)) += lo[i];
            dense(r, static_cast<Eigen::Index>((i + 1) % n)) += up[i];
        }
        PeriodicTridiagonalSolver solver(n);
        solver.solve(lo, di, up, rhs, x);
        const Eigen::VectorXd expected =
            dense.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n)));
        for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(expected(static_cast<Eigen::Index>(i))).epsilon(1e-12).scale(1e-12));
    }
    PeriodicTridiagonalSolver small(2);
    std::vector<double> v(2, 1.0), out(2);
    CHECK_THROWS_AS(small.solve(v, v, v, v, out), std::invalid_argument);
}

TEST_CASE("workspace solve inverts apply and the two forms are transposes") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, 12, 4, 0.1);
        LinearSolveWorkspace ws(g);
        const SymMatrixField sigma = random_sigma(g, 11);
        const ScalarField rhs = smooth_random(g, 5, 1.0);
        for (OperatorForm form : {OperatorForm::nondivergence, OperatorForm::divergence}) {
            std::vector<double> x(g.size()), back(g.size());
            ws.solve(sigma, 0.5 * g.dt(), form, rhs.values(), x);
            ws.apply(sigma, 0.5 * g.dt(), form, x, back);
            for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(rhs[i]).epsilon(1e-11).scale(1e-11));
        }
        const ScalarField a = smooth_random(g, 6, 1.0);
        const ScalarField b = smooth_random(g, 7, 1.0);
        std::vector<double> na(g.size()), db(g.size());
        ws.apply(sigma, 0.3, OperatorForm::nondivergence, a.values(), na);
        ws.apply(sigma, 0.3, OperatorForm::divergence, b.values(), db);
        CHECK(dot(b.values(), na) == doctest::Approx(dot(db, a.values())).epsilon(1e-12));
    }
}

TEST_CASE("hjb step keeps constants and returns the identity diffusion") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, 16, 8, 0.1);
        const HjbStepResult r = hjb_backward_step(ScalarField(g, 0.7), g);
        for (std::size_t i = 0; i < r.phi.size(); ++i) {
            CHECK(std::abs(r.phi[i] - 0.7) < 1e-12);
            CHECK(std::abs(r.sigma_star.xx(i) - 1.0) < 1e-12);
            CHECK(std::abs(r.sigma_star.xy(i)) < 1e-12);
            if (dim == 2) CHECK(std::abs(r.sigma_star.yy(i) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("hjb step damps a small cosine by the implicit heat factor") {
    const PeriodicGrid g = make_grid(1, 128, 80, 0.1);
    const double eps = 1e-6;
    const HjbStepResult r = hjb_backward_step(cosine_mode(g, eps), g);
    const double factor = 1.0 / (1.0 + 0.5 * g.dt() * oracle::mode_eigenvalue(1, g.dx()));
    for (int i = 0; i < g.nx; ++i) CHECK(std::abs(r.phi[i] - factor * eps * std::cos(two_pi * g.coordinate(i))) < 10 * eps * eps);
    CHECK(r.residual < 1e-10);
}

TEST_CASE("hjb step does not increase the oscillation") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, dim == 1 ? 64 : 24, 10, 0.1);
        for (unsigned seed = 1; seed <= 6; ++seed) {
            const ScalarField later = smooth_random(g, seed, 0.05);
            const HjbStepResult r = hjb_backward_step(later, g);
            CHECK(oscillation(r.phi) <= oscillation(later) + 1e-12);
            CHECK(r.sigma_star.is_positive_definite());
        }
    }
}

TEST_CASE("hjb sweep") {
    const PeriodicGrid g = make_grid(1, 64, 20, 0.1);
    const BackwardSolution zero = hjb_backward_solve(ScalarField(g), g);
    CHECK(zero.phi.slice_count() == 21u);
    CHECK(zero.sigma_star.size() == 21u);
    for (std::size_t k = 0; k < zero.phi.slice_count(); ++k) {
        CHECK(zero.phi.slice(k).max_abs() == 0.0);
        for (std::size_t i = 0; i < zero.sigma_star[k].size(); ++i) CHECK(zero.sigma_star[k].xx(i) == 1.0);
    }

    const double eps = 1e-6;
    const BackwardSolution small = hjb_backward_solve(cosine_mode(g, eps), g);
    const double factor = 1.0 / (1.0 + 0.5 * g.dt() * oracle::mode_eigenvalue(1, g.dx()));
    const double total = std::pow(factor, g.nt);
    for (int i = 0; i < g.nx; ++i) {
        CHECK(std::abs(small.phi.front()[i] - total * eps * std::cos(two_pi * g.coordinate(i))) < 100 * eps * eps);
    }

    for (unsigned seed = 1; seed <= 4; ++seed) {
        ScalarField phi1 = smooth_random(g, seed, 0.3);
        const BackwardSolution s = hjb_backward_solve(phi1, g);
        for (std::size_t k = 0; k < s.phi.slice_count(); ++k) {
            CHECK(s.phi.slice(k).max() <= phi1.max() + 1e-12);
            CHECK(oscillation(s.phi.slice(k)) <= oscillation(phi1) + 1e-12);
        }
    }
}

TEST_CASE("hjb handles rough terminal data") {
    // Grid-scale alternation with large amplitude makes exp(-q/2) huge at the
    // start of Newton; the step must still converge.
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, 32, 10, 0.1);
        ScalarField phi1(g);
        for (std::size_t i = 0; i < phi1.size(); ++i) phi1[i] = (i % 2 == 0 ? 1.0 : -1.0) * 0.05;
        const BackwardSolution s = hjb_backward_solve(phi1, g);
        CHECK(s.phi.front().all_finite());
        for (const SymMatrixField& sig : s.sigma_star) CHECK(sig.is_positive_definite());
    }
}

TEST_CASE("hjb non-convergence names the time index") {
    const PeriodicGrid g = make_grid(1, 32, 5, 0.1);
    HjbSolver solver(g, NewtonOptions{1e-10, 1});
    try {
        solver.solve(smooth_random(g, 3, 1.0));
        FAIL("expected a SolverError");
    } catch (const SolverError& e) {
        CHECK(e.time_index() == 4);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("fp step fixed point and Fourier factor") {
    const PeriodicGrid g = make_grid(1, 64, 10, 0.1);
    LinearSolveWorkspace ws(g);
    const SymMatrixField unit(g, 1.0);
    const ScalarField flat(g, 1.0);
    const ScalarField same = fp_forward_step(flat, unit, g, ws);
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(std::abs(same[i] - 1.0) < 1e-14);

    const double eps = 0.1;
    const ScalarField next = fp_forward_step(cosine_mode(g, eps, 1.0), unit, g, ws);
    const double factor = 1.0 / (1.0 + 0.5 * g.dt() * oracle::mode_eigenvalue(1, g.dx()));
    for (int i = 0; i < g.nx; ++i) CHECK(next[i] == doctest::Approx(1.0 + factor * eps * std::cos(two_pi * g.coordinate(i))).epsilon(1e-13));
}

TEST_CASE("fp steps conserve mass for random positive diffusion") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, dim == 1 ? 128 : 32, 10, 0.1);
        LinearSolveWorkspace ws(g);
        ScalarField p = dim == 1 ? ScalarField(periodized_gaussian(0.4, 0.07, g))
                                 : ScalarField(rotated_gaussian_2d({0.5, 0.4}, {0.08, 0.12}, 0.3, g));
        for (unsigned k = 0; k < 10; ++k) {
            p = fp_forward_step(p, random_sigma(g, 100 + k), g, ws);
            CHECK(std::abs(p.mass() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("fp sweep under the identity diffusion matches the spectral heat solution") {
    const PeriodicGrid g = make_grid(1, 64, 50, 2.0);
    const Density mu0 = periodized_gaussian(0.3, 0.05, g);
    const SpaceTimeMatrixField sigma(static_cast<std::size_t>(g.nt) + 1, SymMatrixField(g, 1.0));
    const SpaceTimeScalarField p = fp_forward_solve(mu0, sigma, g);
    const std::vector<double> initial(mu0.field().values().begin(), mu0.field().values().end());
    const std::vector<double> expected = oracle::implicit_heat_by_dft(initial, g.dt(), g.nt);
    for (int i = 0; i < g.nx; ++i) CHECK(p.back()[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-11));

    const ScalarField flat(g, 1.0);
    double prev = INFINITY;
    for (std::size_t k = 0; k < p.slice_count(); ++k) {
        const double d = l1_distance(p.slice(k), flat);
        CHECK(d <= prev + 1e-15);
        prev = d;
        CHECK(std::abs(p.slice(k).mass() - 1.0) < 1e-10);
    }
    CHECK(prev < 1e-6);

    const SpaceTimeScalarField u = fp_forward_solve(uniform_density(g), sigma, g);
    for (std::size_t k = 0; k < u.slice_count(); ++k) CHECK(u.slice(k).max_abs() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("implicit steps stay bounded for huge dt / dx^2") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, 32, 1, 1.0);  // dt / dx^2 = 1024
        const SpaceTimeMatrixField sigma(2, SymMatrixField(g, 1.0));
        ScalarField spike(g);
        spike[3] = 1.0 / g.cell_volume();
        const SpaceTimeScalarField p = fp_forward_solve(spike, sigma, g);
        CHECK(p.back().max() <= spike.max());
        CHECK(p.back().min() >= 0.0);
        const BackwardSolution b = hjb_backward_solve(smooth_random(g, 8, 0.2), g);
        CHECK(b.phi.front().all_finite());
        CHECK(b.phi.front().max_abs() <= 0.2 * 8);
    }
}

TEST_CASE("linearized backward and forward sweeps pair exactly") {
    for (int dim : {1, 2}) {
        const PeriodicGrid g = make_grid(dim, dim == 1 ? 48 : 16, 12, 0.1);
        SpaceTimeMatrixField sigma;
        for (int k = 0; k <= g.nt; ++k) sigma.push_back(random_sigma(g, 200 + static_cast<unsigned>(k)));
        const ScalarField mu0 = dim == 1 ? ScalarField(periodized_gaussian(0.5, 0.1, g))
                                         : ScalarField(rotated_gaussian_2d({0.5, 0.5}, {0.1, 0.15}, 0.2, g));
        const SpaceTimeScalarField p = fp_forward_solve(mu0, sigma, g);

        LinearSolveWorkspace ws(g);
        std::vector<ScalarField> u(static_cast<std::size_t>(g.nt) + 1);
        u.back() = smooth_random(g, 9, 1.0);
        for (int k = g.nt - 1; k >= 0; --k) {
            u[static_cast<std::size_t>(k)] = ScalarField(g);
            ws.solve(sigma[static_cast<std::size_t>(k)], 0.5 * g.dt(), OperatorForm::nondivergence,
                     u[static_cast<std::size_t>(k) + 1].values(), u[static_cast<std::size_t>(k)].values());
        }
        const double first = dot(u[0].values(), p.slice(0).values());
        for (std::size_t k = 1; k < u.size(); ++k) {
            CHECK(dot(u[k].values(), p.slice(k).values()) == doctest::Approx(first).epsilon(1e-11));
        }
    }
}

TEST_CASE("the 2D stencil is not positivity preserving") {
    const PeriodicGrid g = make_grid(2, 16, 1, 1e-3);
    LinearSolveWorkspace ws(g);
    SymMatrixField rough(g);
    for (std::size_t i = 0; i < rough.size(); ++i) rough.set(i, 1.0, 0.95, 1.0);
    ScalarField spike(g);
    spike[g.index(8, 8)] = 1.0 / g.cell_volume();
    const ScalarField next = fp_forward_step(spike, rough, g, ws);
    CHECK(next.min() < 0.0);
    CHECK(std::abs(next.mass() - 1.0) < 1e-10);
}

TEST_CASE("the later-slice coupling is available") {
    const PeriodicGrid g = make_grid(1, 32, 4, 0.1);
    SpaceTimeMatrixField sigma;
    for (int k = 0; k <= g.nt; ++k) sigma.push_back(SymMatrixField(g, 1.0 + k));
    const Density mu0 = periodized_gaussian(0.5, 0.1, g);
    const SpaceTimeScalarField a = fp_forward_solve(mu0, sigma, g, SigmaCoupling::adjoint);
    const SpaceTimeScalarField b = fp_forward_solve(mu0, sigma, g, SigmaCoupling::later_slice);
    LinearSolveWorkspace ws(g);
    const ScalarField manual = fp_forward_step(mu0, sigma[1], g, ws);
    for (int i = 0; i < g.nx; ++i) CHECK(b.slice(1)[i] == manual[i]);
    CHECK(l1_distance(a.back(), b.back()) > 0.0);
}

}  // TEST_SUITE
