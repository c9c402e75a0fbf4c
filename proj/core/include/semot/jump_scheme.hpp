#pragma once

#include <functional>
#include <string>

#include "semot/cost.hpp"
#include "semot/linalg.hpp"

namespace semot {

enum class SchemeTag { unit_intensity, trace_normalized };

std::string to_string(SchemeTag tag);

/// Gaussian-mark Poissonization: jumps at rate n*lambda(t, X_{t-}), marks
/// N(0, sigma_bar(t, X_{t-}) / n).
struct JumpScheme {
    int n = 1;
    int dim = 1;
    std::function<double(double, const Point&)> lambda;
    std::function<Matrix(double, const Point&)> sigma_bar;
    /// Certified upper bound of lambda; the simulator aborts if it is exceeded.
    double lambda_max = 1.0;
    SchemeTag tag = SchemeTag::unit_intensity;
    /// lambda and sigma_bar depend on t.
    bool time_dependent = false;
    /// lambda and sigma_bar do not depend on (t, x) at all.
    bool constant = false;

    /// Constant coefficients.
    static JumpScheme constant_scheme(int n, double lambda, const Matrix& sigma_bar, SchemeTag tag);

    /// Scheme (i): intensity n, marks N(0, sigma_bar/n).
    static JumpScheme unit_intensity(int n, int dim, std::function<Matrix(double, const Point&)> sigma_bar,
                                     bool time_dependent = false);

    /// Scheme (ii) for a target covariance Sigma_1 relative to `ref`:
    /// lambda = tr(sigma2bar^{-1} Sigma_1)/d, sigma_bar = Sigma_1/lambda.
    static JumpScheme trace_normalized(int n, std::function<Matrix(double, const Point&)> sigma1,
                                       const ReferenceModel& ref, double lambda_max,
                                       bool time_dependent = false);

    /// The reference model itself as a scheme (lambda2, sigma2bar).
    static JumpScheme reference(int n, const ReferenceModel& ref, bool time_dependent = false);

    /// Same scheme with a different scaling integer.
    JumpScheme with_n(int new_n) const;
};

}  // namespace semot
