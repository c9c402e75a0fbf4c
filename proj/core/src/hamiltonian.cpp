#include "semot/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semot {

namespace detail {

double solve_shifted_multiplier(const Eigen::VectorXd& gaps) {
    const auto d = static_cast<double>(gaps.size());
    const double max_gap = gaps.maxCoeff();
    // g(s) = sum 1/(gap + s) - d is convex and decreasing on s > 0; g(hi) <= 0 <= g(lo).
    double lo = std::max(0.0, 1.0 - max_gap);
    double hi = 1.0;
    auto eval = [&](double s, double& g, double& dg) {
        g = -d;
        dg = 0.0;
        for (Eigen::Index i = 0; i < gaps.size(); ++i) {
            const double inv = 1.0 / (gaps(i) + s);
            g += inv;
            dg -= inv * inv;
        }
    };
    double s = hi;
    double best_s = s;
    double best_g = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        double g;
        double dg;
        eval(s, g, dg);
        if (std::abs(g) < best_g) {
            best_g = std::abs(g);
            best_s = s;
        }
        if (g == 0.0) return s;
        if (g > 0.0) {
            lo = std::max(lo, s);
        } else {
            hi = std::min(hi, s);
        }
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) break;
        double next = s - g / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == s) break;
        s = next;
    }
    return best_s;
}

HamiltonianResult hamiltonian_general(const Matrix& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() == 0) {
        throw std::invalid_argument("hamiltonian: Gamma must be square and non-empty");
    }
    if (!gamma.allFinite()) throw std::invalid_argument("hamiltonian: non-finite Gamma");
    const SymmetricEigen es = symmetric_eigen(gamma);
    const auto d = static_cast<double>(gamma.rows());
    const double lambda_min = es.values(0);
    const Eigen::VectorXd gaps = (es.values.array() - lambda_min).max(0.0).matrix();
    const double s = solve_shifted_multiplier(gaps);

    HamiltonianResult out;
    out.mu = s - lambda_min;
    const Eigen::VectorXd shifted = gaps.array() + s;  // eigenvalues of Gamma + mu I
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < shifted.size(); ++i) logdet += std::log(shifted(i));
    const double exponent = -0.5 * (d * (1.0 - s + lambda_min) + logdet);
    out.h_value = -std::expm1(exponent);
    const double scale = std::exp(exponent);
    const Eigen::VectorXd inv = shifted.cwiseInverse();
    out.sigma_star = scale * (es.vectors * inv.asDiagonal() * es.vectors.transpose());
    out.sigma_star = 0.5 * (out.sigma_star + out.sigma_star.transpose());
    out.lambda1_star = out.sigma_star.trace() / d;
    return out;
}

}  // namespace detail

ScalarHamiltonian hamiltonian_1d(double gamma) {
    return {-std::expm1(-0.5 * gamma), std::exp(-0.5 * gamma)};
}

Hamiltonian2x2 hamiltonian_2x2(double gxx, double gxy, double gyy) {
    const double m = 0.5 * (gxx + gyy);
    const double h = 0.5 * (gxx - gyy);
    const double r = std::hypot(h, gxy);
    const double lambda_min = m - r;
    const double gap = 2.0 * r;
    // Positive root of 1/s + 1/(s + gap) = 2, written without cancellation.
    const double s1 = 0.5 * (1.0 + 1.0 / (std::sqrt(1.0 + gap * gap) + gap));
    const double s2 = s1 + gap;
    const double mu = s1 - lambda_min;

    const double exponent = -(1.0 - mu) - 0.5 * (std::log(s1) + std::log(s2));
    const double scale = std::exp(exponent);

    // Diagonal of Gamma + mu I: gxx + mu = h + r + s1, gyy + mu = r - h + s1.
    double axx;
    double ayy;
    if (h >= 0.0) {
        axx = (h + r) + s1;
        ayy = (h + r > 0.0 ? gxy * gxy / (h + r) : 0.0) + s1;
    } else {
        ayy = (r - h) + s1;
        axx = gxy * gxy / (r - h) + s1;
    }
    const double inv_det = 1.0 / (s1 * s2);
    const double factor = scale * inv_det;
    return {-std::expm1(exponent), mu,           factor * ayy,         -factor * gxy,        factor * axx,
            -2.0 * exponent,       inv_det * ayy, -inv_det * gxy, inv_det * axx};
}

namespace {

/// Newton steps on tr((Gamma + mu I)^{-1}) = d in extended precision, directly on
/// the matrix, so the result does not inherit the eigenvalue rounding.
double polish_mu(const Matrix& gamma, double mu) {
    using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index d = gamma.rows();
    const MatrixL g = (0.5 * (gamma + gamma.transpose())).cast<long double>();
    long double m = mu;
    for (int iter = 0; iter < 3; ++iter) {
        const MatrixL inv = (g + m * MatrixL::Identity(d, d)).inverse();
        const long double f = inv.trace() - static_cast<long double>(d);
        const long double df = -(inv * inv).trace();
        if (!(df < 0.0L)) break;
        const long double next = m - f / df;
        if (!std::isfinite(static_cast<double>(next))) break;
        m = next;
    }
    return static_cast<double>(m);
}

}  // namespace

double solve_mu(const Matrix& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() == 0) {
        throw std::invalid_argument("solve_mu: Gamma must be square and non-empty");
    }
    if (gamma.rows() == 1) return 1.0 - gamma(0, 0);
    if (gamma.rows() == 2) {
        const double mu = hamiltonian_2x2(gamma(0, 0), 0.5 * (gamma(0, 1) + gamma(1, 0)), gamma(1, 1)).mu;
        return polish_mu(gamma, mu);
    }
    const Eigen::VectorXd ev = symmetric_eigenvalues(gamma);
    const Eigen::VectorXd gaps = (ev.array() - ev(0)).max(0.0).matrix();
    return polish_mu(gamma, detail::solve_shifted_multiplier(gaps) - ev(0));
}

HamiltonianResult hamiltonian(const Matrix& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() == 0) {
        throw std::invalid_argument("hamiltonian: Gamma must be square and non-empty");
    }
    if (gamma.rows() == 1) {
        const ScalarHamiltonian s = hamiltonian_1d(gamma(0, 0));
        HamiltonianResult out;
        out.h_value = s.h_value;
        out.mu = 1.0 - gamma(0, 0);
        out.sigma_star = Matrix::Constant(1, 1, s.sigma_star);
        out.lambda1_star = s.sigma_star;
        return out;
    }
    if (gamma.rows() == 2) {
        const Hamiltonian2x2 r = hamiltonian_2x2(gamma(0, 0), 0.5 * (gamma(0, 1) + gamma(1, 0)), gamma(1, 1));
        HamiltonianResult out;
        out.h_value = r.h_value;
        out.mu = r.mu;
        out.sigma_star.resize(2, 2);
        out.sigma_star << r.sxx, r.sxy, r.sxy, r.syy;
        out.lambda1_star = 0.5 * (r.sxx + r.syy);
        return out;
    }
    return detail::hamiltonian_general(gamma);
}

}  // namespace semot
