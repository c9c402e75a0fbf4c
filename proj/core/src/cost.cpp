#include "semot/cost.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "semot/jump_scheme.hpp"

namespace semot {

namespace {

// log det of an SPD matrix via Cholesky; throws if not positive definite.
double logdet_spd(const Matrix& a, const char* what) {
    if (a.rows() == 1) {
        if (!(a(0, 0) > 0.0)) throw std::domain_error(std::string(what) + ": matrix is singular");
        return std::log(a(0, 0));
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw std::domain_error(std::string(what) + ": matrix is singular");
    const auto& l = llt.matrixL();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

// tr(a^{-1} b) for SPD a.
double trace_inv_product(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() == 1) {
        if (!(a(0, 0) > 0.0)) throw std::domain_error(std::string(what) + ": matrix is singular");
        return b(0, 0) / a(0, 0);
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw std::domain_error(std::string(what) + ": matrix is singular");
    return llt.solve(b).trace();
}

Point node_point(const PeriodicGrid& g, std::size_t idx) {
    Point x(g.dim);
    x(0) = g.coordinate(static_cast<int>(idx % g.nx));
    if (g.dim == 2) x(1) = g.coordinate(static_cast<int>(idx / g.nx));
    return x;
}

}  // namespace

ReferenceModel ReferenceModel::brownian_reference(int dim) {
    if (dim < 1) throw std::invalid_argument("brownian_reference: dim must be positive");
    ReferenceModel ref;
    ref.dim = dim;
    ref.lambda2 = [](double, const Point&) { return 1.0; };
    ref.sigma2bar = [dim](double, const Point&) { return Matrix::Identity(dim, dim); };
    ref.b_lo = 1.0;
    ref.b_hi = 1.0;
    ref.M = 1.0;
    ref.brownian = true;
    return ref;
}

void ReferenceModel::validate_at(double t, const Point& x) const {
    const double l2 = lambda2(t, x);
    if (!(b_lo > 0.0) || !(l2 >= b_lo) || !(l2 <= b_hi)) {
        throw std::invalid_argument("ReferenceModel: lambda2 outside [b_lo, b_hi]");
    }
    const Matrix s = sigma2bar(t, x);
    if (s.rows() != dim || !is_symmetric(s)) {
        throw std::invalid_argument("ReferenceModel: sigma2bar must be a symmetric d x d matrix");
    }
    const Eigen::VectorXd ev = symmetric_eigenvalues(s);
    if (!(ev.minCoeff() > 0.0)) throw std::invalid_argument("ReferenceModel: sigma2bar is not positive definite");
    if (ev.maxCoeff() > M) throw std::invalid_argument("ReferenceModel: sigma2bar exceeds M in operator norm");
}

TraceDecomposition trace_decompose(const Matrix& sigma1, const ReferenceModel& ref, double t,
                                   const Point& x) {
    require_symmetric_psd(sigma1, "trace_decompose");
    const auto d = static_cast<double>(sigma1.rows());
    const double lambda1 = ref.brownian ? sigma1.trace() / d
                                        : trace_inv_product(ref.sigma2bar(t, x), sigma1, "trace_decompose") / d;
    TraceDecomposition out;
    out.lambda1 = lambda1;
    if (lambda1 >= kZeroIntensityThreshold) out.sigma1bar = sigma1 / lambda1;
    return out;
}

double ell_tr_brownian_1d(double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("ell_tr: negative variance");
    if (sigma < kZeroIntensityThreshold) return 1.0;
    return sigma * std::log(sigma) - sigma + 1.0;
}

double ell_tr(double t, const Point& x, const Matrix& sigma1, const ReferenceModel& ref) {
    const TraceDecomposition dec = trace_decompose(sigma1, ref, t, x);
    const double lambda2 = ref.lambda2(t, x);
    if (!dec.sigma1bar) return lambda2;
    const double lambda1 = dec.lambda1;

    const Eigen::VectorXd ev = symmetric_eigenvalues(sigma1);
    if (ev.minCoeff() < kSingularRatio * ev.maxCoeff()) return std::numeric_limits<double>::infinity();

    const auto d = static_cast<double>(sigma1.rows());
    // log det(sigma1bar) = sum log(ev) - d log(lambda1)
    double logdet_bar1 = -d * std::log(lambda1);
    for (Eigen::Index i = 0; i < ev.size(); ++i) logdet_bar1 += std::log(ev(i));
    const double logdet_bar2 = ref.brownian ? 0.0 : logdet_spd(ref.sigma2bar(t, x), "ell_tr");
    return lambda1 * std::log(lambda1 / lambda2) - lambda1 + lambda2 -
           0.5 * lambda1 * (logdet_bar1 - logdet_bar2);
}

double ell_rate(double lambda1, const Matrix& sigma1bar, double lambda2, const Matrix& sigma2bar) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw std::invalid_argument("ell_rate: intensities must be positive");
    if (sigma1bar.rows() != sigma2bar.rows()) throw std::invalid_argument("ell_rate: dimension mismatch");
    const auto d = static_cast<double>(sigma1bar.rows());
    double tr;
    double logdet;
    if (sigma1bar.rows() == 1) {
        const double s1 = sigma1bar(0, 0);
        const double s2 = sigma2bar(0, 0);
        if (!(s2 > 0.0)) throw std::domain_error("ell_rate: singular sigma2bar");
        if (!(s1 > 0.0)) throw std::domain_error("ell_rate: singular sigma1bar");
        tr = s1 / s2;
        logdet = std::log(tr);
    } else {
        tr = trace_inv_product(sigma2bar, sigma1bar, "ell_rate");
        logdet = logdet_spd(sigma1bar, "ell_rate") - logdet_spd(sigma2bar, "ell_rate");
    }
    return lambda1 * std::log(lambda1 / lambda2) - lambda1 + lambda2 + 0.5 * lambda1 * (tr - d - logdet);
}

double ell_rate(double t, const Point& x, const JumpScheme& scheme1, const JumpScheme& scheme2) {
    return ell_rate(scheme1.lambda(t, x), scheme1.sigma_bar(t, x), scheme2.lambda(t, x),
                    scheme2.sigma_bar(t, x));
}

double primal_cost(const SpaceTimeMatrixField& sigma_star, const SpaceTimeScalarField& p,
                   const ReferenceModel& ref, TimeQuadrature quadrature) {
    const PeriodicGrid& g = p.grid();
    if (sigma_star.size() != p.slice_count()) throw std::invalid_argument("primal_cost: slice count mismatch");
    const std::size_t nt = p.slice_count() - 1;
    const bool fast_1d = ref.brownian && g.dim == 1;
    const auto slice_cost = [&](std::size_t ks, std::size_t kp) {
        if (!(sigma_star[ks].grid() == g)) throw std::invalid_argument("primal_cost: grid mismatch");
        const double t = g.time(static_cast<int>(ks));
        double sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double cost;
            if (fast_1d) {
                const double s = sigma_star[ks].xx(i);
                if (!(s > 0.0)) throw std::domain_error("primal_cost: diffusion field is not positive definite");
                cost = ell_tr_brownian_1d(s);
            } else {
                cost = ell_tr(t, node_point(g, i), sigma_star[ks].matrix(i), ref);
            }
            if (!std::isfinite(cost)) {
                throw std::domain_error("primal_cost: infinite running cost at slice " + std::to_string(ks));
            }
            sum += cost * p.slice(kp)[i];
        }
        return sum;
    };
    double total = 0.0;
    if (quadrature == TimeQuadrature::step) {
        for (std::size_t k = 0; k < nt; ++k) total += slice_cost(k, k + 1);
    } else {
        for (std::size_t k = 0; k <= nt; ++k) total += ((k == 0 || k == nt) ? 0.5 : 1.0) * slice_cost(k, k);
    }
    return total * g.dt() * g.cell_volume();
}

double dual_value(const SpaceTimeScalarField& phi, const ScalarField& mu0, const ScalarField& phi1,
                  const ScalarField& mu1) {
    const ScalarField& phi0 = phi.front();
    if (!(phi0.grid() == mu0.grid()) || !(phi1.grid() == mu1.grid()) || !(phi0.grid() == phi1.grid())) {
        throw std::invalid_argument("dual_value: grid mismatch");
    }
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < mu0.size(); ++i) {
        a += phi0[i] * mu0[i];
        b += phi1[i] * mu1[i];
    }
    return (a - b) * mu0.grid().cell_volume();
}

}  // namespace semot
