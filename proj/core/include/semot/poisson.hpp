#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "semot/jump_scheme.hpp"
#include "semot/linalg.hpp"
#include "semot/random.hpp"

namespace semot {

/// Piecewise-constant path on [0, 1]: X_t = x0 + sum_{t_k <= t} z_k.
struct JumpPath {
    Point x0;
    std::vector<double> times;
    /// Marks stored back to back, dim entries per jump.
    std::vector<double> marks;

    int dim() const { return static_cast<int>(x0.size()); }
    std::size_t jump_count() const { return times.size(); }
    Point mark(std::size_t k) const;
    /// State after the first k jumps (k = 0 gives x0).
    Point state_after(std::size_t k) const;
    Point terminal() const { return state_after(times.size()); }

    bool operator==(const JumpPath&) const = default;
};

/// Ogata thinning against a dominating clock of rate n * lambda_max. Throws
/// std::runtime_error if lambda exceeds lambda_max at an evaluated point.
JumpPath simulate_jump_path(const JumpScheme& scheme, const Point& x0, RandomStream& rng);

/// int_0^1 ell(t, X_t) dt between two schemes along the path.
double path_integral_ell(const JumpPath& path, const JumpScheme& s1, const JumpScheme& s2);

/// log dP1/dP2 on [0, 1] for two Gaussian-mark schemes with the same n.
double girsanov_loglik(const JumpPath& path, const JumpScheme& s1, const JumpScheme& s2);

struct Estimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
};

/// Sample mean and standard error, accumulated in index order.
Estimate summarize(const std::vector<double>& values);

struct MonteCarloOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

/// Evaluates f(i) for i in [0, count) on worker threads; results are stored by
/// index so any reduction over them is independent of scheduling.
std::vector<double> parallel_evaluate(std::size_t count, unsigned threads,
                                      const std::function<double(std::size_t)>& f);

/// (1/n) H(P1^n | P2^n) through the path integral of ell under P1^n.
Estimate entropy_estimate(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                          const MonteCarloOptions& options);

/// (1/n) H(P1^n | P2^n) as the P1^n-average of girsanov_loglik / n.
Estimate girsanov_entropy_estimate(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                                   const MonteCarloOptions& options);

/// E_{P2^n}[exp(girsanov_loglik)], which should equal 1.
Estimate likelihood_normalization(const JumpScheme& s1, const JumpScheme& s2, const Point& x0,
                                  const MonteCarloOptions& options);

using CovarianceField = std::function<Matrix(double, const Point&)>;
using PathFunctional = std::function<double(double, const Point&)>;

/// Euler-Maruyama for dX = Sigma1^{1/2}(t, X) dW with step 1/steps (steps >= 100), returning
/// the estimate of E int_0^1 f(t, X_t) dt (right-endpoint rule per step).
Estimate euler_diffusion_expectation(const CovarianceField& sigma1, const Point& x0, int steps,
                                     const PathFunctional& f, const MonteCarloOptions& options);

/// Terminal-moment comparison of X_1 - x0 against the compound-Poisson values.
struct MomentReport {
    int n = 0;
    std::size_t n_paths = 0;
    Eigen::VectorXd mean;
    Eigen::VectorXd mean_stderr;
    Matrix covariance;
    Matrix covariance_stderr;
    Matrix expected_covariance;
    Eigen::VectorXd excess_kurtosis;
    Eigen::VectorXd excess_kurtosis_stderr;
    Eigen::VectorXd expected_excess_kurtosis;
    double mean_jumps = 0.0;
};

/// Requires a scheme with constant coefficients.
MomentReport moment_checks(const JumpScheme& scheme, const MonteCarloOptions& options);

/// Poisson clock of rate n built from Brownian half-increments: each
/// interarrival is the sum of two squared N(0, 1/(2n)) draws.
struct CountingRecord {
    int n = 0;
    std::vector<double> interarrivals;
    /// S_k, the partial sums of the interarrivals.
    std::vector<double> arrival_times;

    /// N^n(t) = #{k : S_k <= t} / n.
    double scaled_count(double t) const;
    std::vector<double> scaled_path(const std::vector<double>& grid) const;
};

/// Simulates the arrivals in [0, horizon], stopping early after
/// `max_arrivals` when that is positive.
CountingRecord brownian_counting(int n, double horizon, RandomStream& rng, std::size_t max_arrivals = 0);

struct CountingStatistics {
    int n = 0;
    std::size_t interarrival_count = 0;
    double interarrival_mean = 0.0;
    double interarrival_mean_stderr = 0.0;
    double interarrival_variance = 0.0;
    double interarrival_variance_stderr = 0.0;
    std::size_t replicates = 0;
    double terminal_mean = 0.0;
    double terminal_mean_stderr = 0.0;
    double terminal_variance = 0.0;
    double terminal_variance_stderr = 0.0;
};

/// K interarrivals from one stream, plus N^n(1) over `replicates` independent paths.
CountingStatistics counting_statistics(int n, std::size_t interarrivals, std::size_t replicates,
                                       std::uint64_t seed, unsigned threads = 0);

/// One line of a Monte Carlo report.
struct ReportRecord {
    std::string estimator;
    int n = 0;
    std::size_t n_paths = 0;
    double mean = 0.0;
    double standard_error = 0.0;
    double reference_value = 0.0;
    std::uint64_t seed = 0;

    /// (mean - reference) / standard_error; 0 when both the gap and the error vanish.
    double z_score() const;
};

ReportRecord make_record(std::string estimator, int n, const Estimate& e, double reference, std::uint64_t seed);

/// "estimator=... n=... n_paths=... mean=... stderr=... reference_value=... z_score=... seed=...".
void write_report_record(std::ostream& out, const ReportRecord& r);

}  // namespace semot
