#include "semot/jump_scheme.hpp"

#include <stdexcept>

namespace semot {

std::string to_string(SchemeTag tag) {
    return tag == SchemeTag::unit_intensity ? "unit-intensity" : "trace-normalized";
}

JumpScheme JumpScheme::constant_scheme(int n, double lambda, const Matrix& sigma_bar, SchemeTag tag) {
    if (n < 1) throw std::invalid_argument("JumpScheme: n must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("JumpScheme: lambda must be positive");
    require_symmetric_psd(sigma_bar, "JumpScheme");
    if (!(symmetric_eigenvalues(sigma_bar).minCoeff() > 0.0)) {
        throw std::invalid_argument("JumpScheme: sigma_bar must be positive definite");
    }
    JumpScheme s;
    s.n = n;
    s.dim = static_cast<int>(sigma_bar.rows());
    s.lambda = [lambda](double, const Point&) { return lambda; };
    s.sigma_bar = [sigma_bar](double, const Point&) { return sigma_bar; };
    s.lambda_max = lambda;
    s.tag = tag;
    s.constant = true;
    return s;
}

JumpScheme JumpScheme::unit_intensity(int n, int dim, std::function<Matrix(double, const Point&)> sigma_bar,
                                      bool time_dependent) {
    if (n < 1) throw std::invalid_argument("JumpScheme: n must be >= 1");
    JumpScheme s;
    s.n = n;
    s.dim = dim;
    s.lambda = [](double, const Point&) { return 1.0; };
    s.sigma_bar = std::move(sigma_bar);
    s.lambda_max = 1.0;
    s.tag = SchemeTag::unit_intensity;
    s.time_dependent = time_dependent;
    return s;
}

JumpScheme JumpScheme::trace_normalized(int n, std::function<Matrix(double, const Point&)> sigma1,
                                        const ReferenceModel& ref, double lambda_max, bool time_dependent) {
    if (n < 1) throw std::invalid_argument("JumpScheme: n must be >= 1");
    if (!(lambda_max > 0.0)) throw std::invalid_argument("JumpScheme: lambda_max must be positive");
    JumpScheme s;
    s.n = n;
    s.dim = ref.dim;
    s.lambda = [sigma1, ref](double t, const Point& x) {
        return trace_decompose(sigma1(t, x), ref, t, x).lambda1;
    };
    s.sigma_bar = [sigma1, ref](double t, const Point& x) {
        const TraceDecomposition dec = trace_decompose(sigma1(t, x), ref, t, x);
        if (!dec.sigma1bar) throw std::domain_error("JumpScheme: zero covariance has no normalized mark law");
        return *dec.sigma1bar;
    };
    s.lambda_max = lambda_max;
    s.tag = SchemeTag::trace_normalized;
    s.time_dependent = time_dependent;
    return s;
}

JumpScheme JumpScheme::reference(int n, const ReferenceModel& ref, bool time_dependent) {
    if (n < 1) throw std::invalid_argument("JumpScheme: n must be >= 1");
    if (ref.brownian) {
        return constant_scheme(n, 1.0, Matrix::Identity(ref.dim, ref.dim), SchemeTag::trace_normalized);
    }
    JumpScheme s;
    s.n = n;
    s.dim = ref.dim;
    s.lambda = ref.lambda2;
    s.sigma_bar = ref.sigma2bar;
    s.lambda_max = ref.b_hi;
    s.tag = SchemeTag::trace_normalized;
    s.time_dependent = time_dependent;
    return s;
}

JumpScheme JumpScheme::with_n(int new_n) const {
    if (new_n < 1) throw std::invalid_argument("JumpScheme: n must be >= 1");
    JumpScheme s = *this;
    s.n = new_n;
    return s;
}

}  // namespace semot
