#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "semot/poisson.hpp"

using namespace semot;

namespace {

const Matrix one = Matrix::Identity(1, 1);
const Point origin = Point::Zero(1);

JumpScheme brownian(int n) { return JumpScheme::reference(n, ReferenceModel::brownian_reference(1)); }

JumpScheme sinusoidal(int n) {
    const CovarianceField sigma1 = [](double, const Point& x) {
        return Matrix::Constant(1, 1, 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x(0)));
    };
    return JumpScheme::trace_normalized(n, sigma1, ReferenceModel::brownian_reference(1), 1.5);
}

CovarianceField sinusoidal_sigma() {
    return [](double, const Point& x) {
        return Matrix::Constant(1, 1, 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x(0)));
    };
}

MonteCarloOptions mc(std::size_t paths, std::uint64_t seed) {
    MonteCarloOptions o;
    o.n_paths = paths;
    o.seed = seed;
    return o;
}

bool within(double value, double expected, double se, double k = 3.0) { return std::abs(value - expected) <= k * se; }

}  // namespace

TEST_SUITE("poisson") {

TEST_CASE("jump counts of a unit-rate scheme") {
    const JumpScheme s = JumpScheme::constant_scheme(100, 1.0, one, SchemeTag::unit_intensity);
    std::vector<double> counts, terminal;
    bool ordered = true;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        RandomStream rng(5, i);
        const JumpPath p = simulate_jump_path(s, origin, rng);
        counts.push_back(static_cast<double>(p.jump_count()));
        terminal.push_back(p.terminal()(0));
        for (std::size_t k = 1; k < p.times.size(); ++k) ordered = ordered && p.times[k] > p.times[k - 1];
        if (!p.times.empty()) ordered = ordered && p.times.front() > 0.0 && p.times.back() <= 1.0;
    }
    CHECK(ordered);
    const Estimate k = summarize(counts);
    CHECK(std::abs(k.mean - 100.0) <= 3.0 * 10.0 / 100.0);

    std::vector<double> squares;
    for (double x : terminal) squares.push_back(x * x);
    const Estimate var = summarize(squares);
    CHECK(within(var.mean, 1.0, var.standard_error));
}

TEST_CASE("thinning at lambda = lambda_max reproduces the homogeneous paths") {
    JumpScheme homogeneous = JumpScheme::constant_scheme(40, 2.0, one, SchemeTag::unit_intensity);
    JumpScheme thinned = homogeneous;
    thinned.constant = false;
    thinned.lambda = [](double, const Point&) { return 2.0; };
    thinned.lambda_max = 2.0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        RandomStream a(9, i), b(9, i);
        CHECK(simulate_jump_path(homogeneous, origin, a) == simulate_jump_path(thinned, origin, b));
    }
}

TEST_CASE("an intensity above the certified bound aborts") {
    JumpScheme s = JumpScheme::constant_scheme(10, 1.0, one, SchemeTag::unit_intensity);
    s.constant = false;
    s.lambda = [](double, const Point&) { return 3.0; };
    s.lambda_max = 2.0;
    RandomStream rng(1, 0);
    CHECK_THROWS_AS(simulate_jump_path(s, origin, rng), std::runtime_error);
}

TEST_CASE("paths are reproducible per (seed, index)") {
    const JumpScheme s = sinusoidal(25);
    RandomStream a(77, 12), b(77, 12), c(77, 13);
    const JumpPath pa = simulate_jump_path(s, origin, a);
    CHECK(pa == simulate_jump_path(s, origin, b));
    CHECK_FALSE(pa == simulate_jump_path(s, origin, c));
}

TEST_CASE("path integral examples") {
    const int n = 20;
    const JumpScheme s1 = JumpScheme::constant_scheme(n, 1.0, 2.0 * one, SchemeTag::unit_intensity);
    const JumpScheme s2 = JumpScheme::constant_scheme(n, 1.0, one, SchemeTag::unit_intensity);
    const JumpScheme s3 = JumpScheme::constant_scheme(n, 2.0, one, SchemeTag::trace_normalized);
    const JumpScheme wavy = sinusoidal(n);
    for (std::uint64_t i = 0; i < 20; ++i) {
        RandomStream rng(3, i);
        const JumpPath p = simulate_jump_path(wavy, origin, rng);
        CHECK(path_integral_ell(p, wavy, wavy) == 0.0);
        CHECK(path_integral_ell(p, s1, s2) == doctest::Approx(0.153426).epsilon(1e-6));
        CHECK(path_integral_ell(p, s3, brownian(n)) == doctest::Approx(0.386294).epsilon(1e-6));
    }
}

TEST_CASE("path integral with time-dependent coefficients uses quadrature") {
    JumpScheme s = JumpScheme::constant_scheme(10, 1.0, one, SchemeTag::trace_normalized);
    s.constant = false;
    s.time_dependent = true;
    s.lambda = [](double t, const Point&) { return 1.0 + t; };
    s.lambda_max = 2.0;
    // int_0^1 (1+t) log(1+t) - t dt
    const double expected = 2.0 * std::log(2.0) - 1.25;
    for (std::uint64_t i = 0; i < 5; ++i) {
        RandomStream rng(4, i);
        const JumpPath p = simulate_jump_path(s, origin, rng);
        CHECK(std::abs(path_integral_ell(p, s, brownian(10)) - expected) < 1e-9);
    }
}

TEST_CASE("girsanov log-likelihood") {
    const int n = 5;
    const JumpScheme s1 = JumpScheme::constant_scheme(n, 2.0, 0.5 * one, SchemeTag::trace_normalized);
    const JumpScheme s2 = brownian(n);
    JumpPath empty;
    empty.x0 = origin;
    CHECK(girsanov_loglik(empty, s1, s2) == doctest::Approx(-5.0).epsilon(1e-15));
    for (std::uint64_t i = 0; i < 20; ++i) {
        RandomStream rng(6, i);
        const JumpPath p = simulate_jump_path(s1, origin, rng);
        CHECK(girsanov_loglik(p, s1, s1) == 0.0);
    }

    JumpPath one_jump;
    one_jump.x0 = origin;
    one_jump.times = {0.5};
    one_jump.marks = {0.3};
    // log 2 + log N(0.3; 0, 0.1) - log N(0.3; 0, 0.2) - 5
    const double expected = std::log(2.0) + 0.5 * std::log(2.0) - 0.09 / 0.2 + 0.09 / 0.4 - 5.0;
    CHECK(girsanov_loglik(one_jump, s1, s2) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("estimators on constant schemes") {
    const int n = 10;
    const JumpScheme s1 = JumpScheme::constant_scheme(n, 1.0, 2.0 * one, SchemeTag::unit_intensity);
    const JumpScheme s2 = JumpScheme::constant_scheme(n, 1.0, one, SchemeTag::unit_intensity);
    const Estimate same = entropy_estimate(s1, s1, origin, mc(1000, 1));
    CHECK(same.mean == 0.0);
    CHECK(same.standard_error == 0.0);
    const Estimate exact = entropy_estimate(s1, s2, origin, mc(1000, 1));
    CHECK(exact.mean == doctest::Approx(0.5 * (1.0 - std::log(2.0))).epsilon(1e-14));
    CHECK(exact.standard_error == 0.0);
    CHECK(exact.n_paths == 1000u);

    const Estimate g = girsanov_entropy_estimate(s1, s2, origin, mc(10000, 2));
    CHECK(within(g.mean, exact.mean, g.standard_error));

    const JumpScheme s3 = JumpScheme::constant_scheme(n, 2.0, one, SchemeTag::trace_normalized);
    const Estimate ii = entropy_estimate(s3, brownian(n), origin, mc(1000, 3));
    CHECK(ii.mean == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK(ii.mean > exact.mean);
    const Estimate gii = girsanov_entropy_estimate(s3, brownian(n), origin, mc(10000, 4));
    CHECK(within(gii.mean, ii.mean, gii.standard_error));
}

TEST_CASE("estimators agree on a state-dependent scheme") {
    const JumpScheme s1 = sinusoidal(25);
    const JumpScheme s2 = brownian(25);
    const Estimate ell = entropy_estimate(s1, s2, origin, mc(4000, 8));
    const Estimate gir = girsanov_entropy_estimate(s1, s2, origin, mc(4000, 9));
    CHECK(ell.standard_error > 0.0);
    CHECK(within(ell.mean, gir.mean, std::hypot(ell.standard_error, gir.standard_error)));
}

TEST_CASE("likelihood ratios integrate to one") {
    const JumpScheme s1 = JumpScheme::constant_scheme(5, 1.5, 0.8 * one, SchemeTag::trace_normalized);
    const Estimate e = likelihood_normalization(s1, brownian(5), origin, mc(100000, 10));
    CHECK(within(e.mean, 1.0, e.standard_error));
}

TEST_CASE("Euler oracle") {
    const CovarianceField constant = [](double, const Point&) { return Matrix::Constant(1, 1, 2.0); };
    const JumpScheme s1 = JumpScheme::constant_scheme(1, 2.0, one, SchemeTag::trace_normalized);
    const PathFunctional rate = [&](double t, const Point& x) { return ell_rate(t, x, s1, brownian(1)); };
    const Estimate c = euler_diffusion_expectation(constant, origin, 100, rate, mc(200, 1));
    CHECK(c.mean == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK(c.standard_error == 0.0);
    const Estimate z = euler_diffusion_expectation(constant, origin, 100, [](double, const Point&) { return 0.0; },
                                                   mc(200, 1));
    CHECK(z.mean == 0.0);
    CHECK_THROWS(euler_diffusion_expectation(constant, origin, 10, rate, mc(10, 1)));

    const JumpScheme wavy = sinusoidal(1);
    const PathFunctional wavy_rate = [&](double t, const Point& x) { return ell_rate(t, x, wavy, brownian(1)); };
    const Estimate coarse = euler_diffusion_expectation(sinusoidal_sigma(), origin, 500, wavy_rate, mc(4000, 11));
    const Estimate fine = euler_diffusion_expectation(sinusoidal_sigma(), origin, 1000, wavy_rate, mc(4000, 12));
    CHECK(within(coarse.mean, fine.mean, std::hypot(coarse.standard_error, fine.standard_error)));
}

TEST_CASE("terminal moments") {
    const MomentReport m25 =
        moment_checks(JumpScheme::constant_scheme(25, 1.0, one, SchemeTag::unit_intensity), mc(100000, 21));
    CHECK(m25.expected_excess_kurtosis(0) == doctest::Approx(0.12).epsilon(1e-14));
    CHECK(within(m25.excess_kurtosis(0), 0.12, m25.excess_kurtosis_stderr(0)));
    CHECK(within(m25.covariance(0, 0), 1.0, m25.covariance_stderr(0, 0)));
    CHECK(within(m25.mean(0), 0.0, m25.mean_stderr(0)));
    CHECK(m25.mean_jumps == doctest::Approx(25.0).epsilon(0.01));

    const MomentReport m400 =
        moment_checks(JumpScheme::constant_scheme(400, 1.0, one, SchemeTag::unit_intensity), mc(100000, 22));
    CHECK(m400.expected_excess_kurtosis(0) == doctest::Approx(0.0075).epsilon(1e-14));
    CHECK(within(m400.excess_kurtosis(0), 0.0075, m400.excess_kurtosis_stderr(0)));
    CHECK(m400.excess_kurtosis(0) < m25.excess_kurtosis(0));
    CHECK(within(m400.covariance(0, 0), 1.0, m400.covariance_stderr(0, 0)));

    Matrix sigma_bar(2, 2);
    sigma_bar << 1.0, 0.3, 0.3, 0.5;
    const MomentReport m2 =
        moment_checks(JumpScheme::constant_scheme(50, 2.0, sigma_bar, SchemeTag::unit_intensity), mc(20000, 23));
    CHECK((m2.expected_covariance - 2.0 * sigma_bar).norm() < 1e-14);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(within(m2.covariance(a, b), 2.0 * sigma_bar(a, b), m2.covariance_stderr(a, b)));

    CHECK_THROWS(moment_checks(sinusoidal(10), mc(10, 1)));
}

TEST_CASE("Brownian counting construction") {
    RandomStream rng(31, 0);
    const CountingRecord r = brownian_counting(100, 2.0, rng);
    CHECK(r.n == 100);
    CHECK(r.arrival_times.back() <= 2.0);
    CHECK(r.interarrivals.size() > 100u);
    double sum = 0.0;
    bool consistent = true;
    for (std::size_t k = 0; k < r.interarrivals.size(); ++k) {
        sum += r.interarrivals[k];
        consistent = consistent && r.interarrivals[k] > 0.0 && r.arrival_times[k] == sum;
    }
    CHECK(consistent);
    CHECK(r.scaled_count(0.0) == 0.0);
    const std::vector<double> path = r.scaled_path({0.0, 0.5, 1.0, 1.5});
    for (std::size_t k = 1; k < path.size(); ++k) CHECK(path[k] >= path[k - 1]);
    CHECK(r.scaled_count(1.0) == path[2]);

    const CountingStatistics s = counting_statistics(100, 100000, 10000, 41, 1);
    CHECK(std::abs(s.interarrival_mean - 0.01) <= 3.0 * 0.01 / std::sqrt(100000.0));
    CHECK(within(s.interarrival_variance, 1e-4, s.interarrival_variance_stderr));
    CHECK(within(s.terminal_mean, 1.0, s.terminal_mean_stderr));
    CHECK(within(s.terminal_variance, 0.01, s.terminal_variance_stderr));
}

TEST_CASE("Monte Carlo results do not depend on the thread count") {
    const JumpScheme s1 = sinusoidal(10);
    MonteCarloOptions one_thread = mc(300, 5);
    one_thread.threads = 1;
    MonteCarloOptions three = one_thread;
    three.threads = 3;
    const Estimate a = entropy_estimate(s1, brownian(10), origin, one_thread);
    const Estimate b = entropy_estimate(s1, brownian(10), origin, three);
    CHECK(a.mean == b.mean);
    CHECK(a.standard_error == b.standard_error);
    const std::vector<double> v = parallel_evaluate(10, 4, [](std::size_t i) { return static_cast<double>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<double>(i * i));
    CHECK(counting_statistics(10, 1000, 100, 3, 1).terminal_mean == counting_statistics(10, 1000, 100, 3, 2).terminal_mean);
}

TEST_CASE("summaries and report records") {
    const Estimate e = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == 2.5);
    CHECK(e.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
    CHECK(e.n_paths == 4u);

    CHECK(make_record("x", 1, {1.3, 0.1, 10}, 1.0, 7).z_score() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(make_record("x", 1, {1.0, 0.0, 10}, 1.0, 7).z_score() == 0.0);

    std::ostringstream out;
    write_report_record(out, make_record("ell_path_integral", 25, {0.5, 0.25, 100}, 0.5, 11));
    CHECK(out.str() ==
          "estimator=ell_path_integral n=25 n_paths=100 mean=0.5 stderr=0.25 reference_value=0.5 z_score=0 seed=11\n");
}

}  // TEST_SUITE
