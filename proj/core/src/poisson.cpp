#include "semot/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semot/cost.hpp"
#include "semot/field_io.hpp"

namespace semot {

namespace {

constexpr double kIntervalTolerance = 1e-10;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t begin = count * w / threads;
        const std::size_t end = count * (w + 1) / threads;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Integral of f over [a, b]; exact when f does not depend on time.
template <class F>
double interval_integral(F&& f, double a, double b, bool time_dependent) {
    if (b <= a) return 0.0;
    if (!time_dependent) return (b - a) * f(a);
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, kIntervalTolerance);
}

// -1/2 z^T a^{-1} z - 1/2 log det a, the a-dependent part of a centered Gaussian log-density.
double gaussian_log_kernel(const Matrix& a, const Point& z) {
    if (a.rows() == 1) {
        if (!(a(0, 0) > 0.0)) throw std::domain_error("girsanov_loglik: singular mark covariance");
        return -0.5 * z(0) * z(0) / a(0, 0) - 0.5 * std::log(a(0, 0));
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw std::domain_error("girsanov_loglik: singular mark covariance");
    const Point w = llt.matrixL().solve(z);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
    return -0.5 * w.squaredNorm() - logdet;
}

Matrix mark_root(const Matrix& sigma_bar, int n) {
    const Matrix scaled = sigma_bar / static_cast<double>(n);
    if (scaled.rows() == 1) {
        if (!(scaled(0, 0) > 0.0)) throw std::domain_error("simulate_jump_path: mark covariance is not positive");
        return Matrix::Constant(1, 1, std::sqrt(scaled(0, 0)));
    }
    require_symmetric_psd(scaled, "simulate_jump_path");
    return symmetric_sqrt(scaled);
}

void check_same_n(const JumpScheme& s1, const JumpScheme& s2) {
    if (s1.n != s2.n) throw std::invalid_argument("schemes must share the scaling integer n");
    if (s1.dim != s2.dim) throw std::invalid_argument("schemes must share the dimension");
}

double sample_variance(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return v.size() > 1 ? s / static_cast<double>(v.size() - 1) : 0.0;
}

// Standard error of the sample variance from its influence function (x - m)^2 - v.
double variance_stderr(const std::vector<double>& v, double mean, double var) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) {
        const double f = (x - mean) * (x - mean) - var;
        s += f * f;
    }
    return std::sqrt(s / static_cast<double>(v.size())) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

Point JumpPath::mark(std::size_t k) const {
    const int d = dim();
    Point z(d);
    for (int a = 0; a < d; ++a) z(a) = marks[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
    return z;
}

Point JumpPath::state_after(std::size_t k) const {
    const int d = dim();
    Point x = x0;
    for (std::size_t j = 0; j < k; ++j) {
        for (int a = 0; a < d; ++a) x(a) += marks[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
    }
    return x;
}

JumpPath simulate_jump_path(const JumpScheme& scheme, const Point& x0, RandomStream& rng) {
    if (x0.size() != scheme.dim) throw std::invalid_argument("simulate_jump_path: x0 has the wrong dimension");
    if (!(scheme.lambda_max > 0.0)) throw std::invalid_argument("simulate_jump_path: lambda_max must be positive");
    const double clock_rate = scheme.n * scheme.lambda_max;
    const int d = scheme.dim;

    Matrix fixed_root;
    if (scheme.constant) fixed_root = mark_root(scheme.sigma_bar(0.0, x0), scheme.n);

    JumpPath path;
    path.x0 = x0;
    Point x = x0;
    Point xi(d);
    double t = 0.0;
    for (;;) {
        t += rng.exponential(clock_rate);
        if (t > 1.0) break;
        const double lam = scheme.lambda(t, x);
        if (!(lam >= 0.0) || lam > scheme.lambda_max * (1.0 + 1e-12)) {
            throw std::runtime_error("simulate_jump_path: intensity " + format_double(lam) +
                                     " exceeds the certified bound " + format_double(scheme.lambda_max));
        }
        if (rng.uniform() * scheme.lambda_max > lam) continue;
        const Matrix root = scheme.constant ? fixed_root : mark_root(scheme.sigma_bar(t, x), scheme.n);
        for (int a = 0; a < d; ++a) xi(a) = rng.normal();
        const Point z = root * xi;
        x += z;
        path.times.push_back(t);
        for (int a = 0; a < d; ++a) path.marks.push_back(z(a));
    }
    return path;
}

double path_integral_ell(const JumpPath& path, const JumpScheme& s1, const JumpScheme& s2) {
    check_same_n(s1, s2);
    if (s1.constant && s2.constant) return ell_rate(0.0, path.x0, s1, s2);
    const bool time_dependent = s1.time_dependent || s2.time_dependent;
    double total = 0.0;
    Point x = path.x0;
    double start = 0.0;
    const std::size_t k_max = path.jump_count();
    for (std::size_t k = 0; k <= k_max; ++k) {
        const double end = k < k_max ? path.times[k] : 1.0;
        total += interval_integral([&](double t) { return ell_rate(t, x, s1, s2); }, start, end, time_dependent);
        if (k < k_max) {
            for (int a = 0; a < path.dim(); ++a) x(a) += path.marks[k * static_cast<std::size_t>(path.dim()) + a];
            start = end;
        }
    }
    return total;
}

double girsanov_loglik(const JumpPath& path, const JumpScheme& s1, const JumpScheme& s2) {
    check_same_n(s1, s2);
    const double n = s1.n;
    const bool time_dependent = s1.time_dependent || s2.time_dependent;
    const auto rate_gap = [&](double t, const Point& x) { return s1.lambda(t, x) - s2.lambda(t, x); };

    double jump_sum = 0.0;
    double compensator = 0.0;
    Point x = path.x0;
    double start = 0.0;
    const std::size_t k_max = path.jump_count();
    for (std::size_t k = 0; k <= k_max; ++k) {
        const double end = k < k_max ? path.times[k] : 1.0;
        compensator += interval_integral([&](double t) { return rate_gap(t, x); }, start, end, time_dependent);
        if (k == k_max) break;
        const double t = path.times[k];
        const Point z = path.mark(k);
        const double l1 = s1.lambda(t, x);
        const double l2 = s2.lambda(t, x);
        if (!(l1 > 0.0) || !(l2 > 0.0)) throw std::domain_error("girsanov_loglik: non-positive intensity at a jump");
        // The n-scaling of both mark covariances cancels in the log-determinants.
        const Point zs = z * std::sqrt(n);
        jump_sum += std::log(l1 / l2) + gaussian_log_kernel(s1.sigma_bar(t, x), zs) -
                    gaussian_log_kernel(s2.sigma_bar(t, x), zs);
        x += z;
        start = end;
    }
    return jump_sum - n * compensator;
}

Estimate summarize(const std::vector<double>& values) {
    Estimate e;
    e.n_paths = values.size();
    if (values.empty()) return e;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double v : values) {
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    e.mean = mean;
    if (k > 1) e.standard_error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
    return e;
}

std::vector<double> parallel_evaluate(std::size_t count, unsigned threads,
                                      const std::function<double(std::size_t)>& f) {
    std::vector<double> out(count);
    parallel_for(count, threads, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

Estimate entropy_estimate(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                          const MonteCarloOptions& options) {
    check_same_n(s1, s2);
    if (s1.constant && s2.constant) {
        // The path functional does not depend on the path.
        const double v = path_integral_ell(JumpPath{x0, {}, {}}, s1, s2);
        return summarize(std::vector<double>(options.n_paths, v));
    }
    return summarize(parallel_evaluate(options.n_paths, options.threads, [&](std::size_t i) {
        RandomStream rng(options.seed, i);
        return path_integral_ell(simulate_jump_path(s1, x0, rng), s1, s2);
    }));
}

Estimate girsanov_entropy_estimate(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                                   const MonteCarloOptions& options) {
    check_same_n(s1, s2);
    return summarize(parallel_evaluate(options.n_paths, options.threads, [&](std::size_t i) {
        RandomStream rng(options.seed, i);
        return girsanov_loglik(simulate_jump_path(s1, x0, rng), s1, s2) / s1.n;
    }));
}

Estimate likelihood_normalization(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                                  const MonteCarloOptions& options) {
    check_same_n(s1, s2);
    return summarize(parallel_evaluate(options.n_paths, options.threads, [&](std::size_t i) {
        RandomStream rng(options.seed, i);
        return std::exp(girsanov_loglik(simulate_jump_path(s2, x0, rng), s1, s2));
    }));
}

Estimate euler_diffusion_expectation(const CovarianceField& sigma1, const Point& x0, int steps,
                                     const PathFunctional& f, const MonteCarloOptions& options) {
    if (steps < 100) throw std::invalid_argument("euler_diffusion_expectation: steps must be >= 100");
    const double h = 1.0 / steps;
    const double sqrt_h = std::sqrt(h);
    const auto d = x0.size();
    return summarize(parallel_evaluate(options.n_paths, options.threads, [&](std::size_t i) {
        RandomStream rng(options.seed, i);
        Point x = x0;
        Point xi(d);
        double acc = 0.0;
        for (int s = 0; s < steps; ++s) {
            const Matrix sigma = sigma1(s * h, x);
            if (d == 1) {
                if (!(sigma(0, 0) > 0.0)) throw std::domain_error("euler_diffusion_expectation: Sigma1 is not positive");
                x(0) += std::sqrt(sigma(0, 0)) * sqrt_h * rng.normal();
            } else {
                require_symmetric_psd(sigma, "euler_diffusion_expectation");
                if (!(symmetric_eigenvalues(sigma).minCoeff() > 0.0)) {
                    throw std::domain_error("euler_diffusion_expectation: Sigma1 is not positive definite");
                }
                for (Eigen::Index a = 0; a < d; ++a) xi(a) = rng.normal();
                x += symmetric_sqrt(sigma) * xi * sqrt_h;
            }
            acc += h * f((s + 1) * h, x);
        }
        return acc;
    }));
}

MomentReport moment_checks(const JumpScheme& scheme, const MonteCarloOptions& options) {
    if (!scheme.constant) throw std::invalid_argument("moment_checks: scheme must have constant coefficients");
    const std::size_t count = options.n_paths;
    if (count < 2) throw std::invalid_argument("moment_checks: need at least two paths");
    const int d = scheme.dim;
    const Point x0 = Point::Zero(d);
    const auto dd = static_cast<std::size_t>(d);

    std::vector<double> increments(count * dd);
    std::vector<double> jumps(count);
    parallel_for(count, options.threads, [&](std::size_t i) {
        RandomStream rng(options.seed, i);
        const JumpPath path = simulate_jump_path(scheme, x0, rng);
        const Point y = path.terminal();
        for (std::size_t a = 0; a < dd; ++a) increments[i * dd + a] = y(static_cast<Eigen::Index>(a));
        jumps[i] = static_cast<double>(path.jump_count());
    });

    const double nn = static_cast<double>(count);
    MomentReport r;
    r.n = scheme.n;
    r.n_paths = count;
    r.mean_jumps = summarize(jumps).mean;
    r.mean = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t a = 0; a < dd; ++a) r.mean(static_cast<Eigen::Index>(a)) += increments[i * dd + a];
    }
    r.mean /= nn;

    const auto centered = [&](std::size_t i, int a) {
        return increments[i * dd + static_cast<std::size_t>(a)] - r.mean(a);
    };
    r.covariance = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < count; ++i) {
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) r.covariance(a, b) += centered(i, a) * centered(i, b);
        }
    }
    r.covariance /= nn - 1.0;

    r.covariance_stderr = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double f = centered(i, a) * centered(i, b) - r.covariance(a, b);
                s += f * f;
            }
            r.covariance_stderr(a, b) = std::sqrt(s / nn / nn);
        }
    }
    r.mean_stderr = (r.covariance.diagonal() / nn).cwiseSqrt();

    r.excess_kurtosis = Eigen::VectorXd::Zero(d);
    r.excess_kurtosis_stderr = Eigen::VectorXd::Zero(d);
    for (int a = 0; a < d; ++a) {
        double m2 = 0.0;
        double m3 = 0.0;
        double m4 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double y = centered(i, a);
            const double y2 = y * y;
            m2 += y2;
            m3 += y2 * y;
            m4 += y2 * y2;
        }
        m2 /= nn;
        m3 /= nn;
        m4 /= nn;
        r.excess_kurtosis(a) = m4 / (m2 * m2) - 3.0;
        // Delta method on m4 / m2^2, including the effect of estimating the mean.
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double y = centered(i, a);
            const double y2 = y * y;
            const double f = (y2 * y2 - m4 - 4.0 * m3 * y) / (m2 * m2) - 2.0 * m4 * (y2 - m2) / (m2 * m2 * m2);
            s += f * f;
        }
        r.excess_kurtosis_stderr(a) = std::sqrt(s / nn / nn);
    }

    const double lambda = scheme.lambda(0.0, x0);
    r.expected_covariance = lambda * scheme.sigma_bar(0.0, x0);
    r.expected_excess_kurtosis = Eigen::VectorXd::Constant(d, 3.0 / (scheme.n * lambda));
    return r;
}

double CountingRecord::scaled_count(double t) const {
    const auto it = std::upper_bound(arrival_times.begin(), arrival_times.end(), t);
    return static_cast<double>(it - arrival_times.begin()) / n;
}

std::vector<double> CountingRecord::scaled_path(const std::vector<double>& grid) const {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) out.push_back(scaled_count(t));
    return out;
}

CountingRecord brownian_counting(int n, double horizon, RandomStream& rng, std::size_t max_arrivals) {
    if (n < 1) throw std::invalid_argument("brownian_counting: n must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("brownian_counting: horizon must be positive");
    const double half_sd = std::sqrt(1.0 / (2.0 * n));
    CountingRecord rec;
    rec.n = n;
    double s = 0.0;
    for (;;) {
        if (max_arrivals > 0 && rec.interarrivals.size() >= max_arrivals) break;
        const double a = half_sd * rng.normal();
        const double b = half_sd * rng.normal();
        const double gap = a * a + b * b;
        if (s + gap > horizon) break;
        s += gap;
        rec.interarrivals.push_back(gap);
        rec.arrival_times.push_back(s);
    }
    return rec;
}

CountingStatistics counting_statistics(int n, std::size_t interarrivals, std::size_t replicates,
                                       std::uint64_t seed, unsigned threads) {
    if (interarrivals < 2) throw std::invalid_argument("counting_statistics: need at least two interarrivals");
    CountingStatistics st;
    st.n = n;

    RandomStream rng(seed, 0);
    const CountingRecord rec =
        brownian_counting(n, std::numeric_limits<double>::infinity(), rng, interarrivals);
    const Estimate gaps = summarize(rec.interarrivals);
    st.interarrival_count = rec.interarrivals.size();
    st.interarrival_mean = gaps.mean;
    st.interarrival_mean_stderr = gaps.standard_error;
    st.interarrival_variance = sample_variance(rec.interarrivals, gaps.mean);
    st.interarrival_variance_stderr = variance_stderr(rec.interarrivals, gaps.mean, st.interarrival_variance);

    st.replicates = replicates;
    if (replicates >= 2) {
        const std::vector<double> terminal = parallel_evaluate(replicates, threads, [&](std::size_t i) {
            RandomStream r(seed, i + 1);
            return brownian_counting(n, 1.0, r).scaled_count(1.0);
        });
        const Estimate e = summarize(terminal);
        st.terminal_mean = e.mean;
        st.terminal_mean_stderr = e.standard_error;
        st.terminal_variance = sample_variance(terminal, e.mean);
        st.terminal_variance_stderr = variance_stderr(terminal, e.mean, st.terminal_variance);
    }
    return st;
}

double ReportRecord::z_score() const {
    const double gap = mean - reference_value;
    if (standard_error > 0.0) return gap / standard_error;
    if (std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(reference_value))) return 0.0;
    return gap > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

ReportRecord make_record(std::string estimator, int n, const Estimate& e, double reference, std::uint64_t seed) {
    ReportRecord r;
    r.estimator = std::move(estimator);
    r.n = n;
    r.n_paths = e.n_paths;
    r.mean = e.mean;
    r.standard_error = e.standard_error;
    r.reference_value = reference;
    r.seed = seed;
    return r;
}

void write_report_record(std::ostream& out, const ReportRecord& r) {
    out << "estimator=" << r.estimator << " n=" << r.n << " n_paths=" << r.n_paths
        << " mean=" << format_double(r.mean) << " stderr=" << format_double(r.standard_error)
        << " reference_value=" << format_double(r.reference_value) << " z_score=" << format_double(r.z_score())
        << " seed=" << r.seed << '\n';
}

}  // namespace semot
