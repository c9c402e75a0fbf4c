#include "semot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace semot {

SymmetricEigen symmetric_eigen(const Matrix& a) {
    const auto d = a.rows();
    if (d != a.cols()) throw std::invalid_argument("symmetric_eigen: matrix must be square");
    SymmetricEigen out;
    if (d == 1) {
        out.values = Eigen::VectorXd::Constant(1, a(0, 0));
        out.vectors = Matrix::Identity(1, 1);
        return out;
    }
    if (d == 2) {
        const double p = a(0, 0);
        const double b = 0.5 * (a(0, 1) + a(1, 0));
        const double q = a(1, 1);
        const double m = 0.5 * (p + q);
        const double h = 0.5 * (p - q);
        const double r = std::hypot(h, b);
        out.values.resize(2);
        out.values << m - r, m + r;
        out.vectors.resize(2, 2);
        if (r == 0.0) {
            out.vectors.setIdentity();
            return out;
        }
        // Eigenvector of the larger eigenvalue, built from the better-conditioned formula.
        double vx;
        double vy;
        if (h >= 0.0) {
            vx = h + r;
            vy = b;
        } else {
            vx = b;
            vy = r - h;
        }
        const double nrm = std::hypot(vx, vy);
        vx /= nrm;
        vy /= nrm;
        out.vectors << -vy, vx, vx, vy;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eigen: decomposition failed");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Matrix& a) { return symmetric_eigen(a).values; }

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

void require_symmetric_psd(const Matrix& a, const char* what, double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
    }
    if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
    if (!is_symmetric(a, tol)) throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
    const Eigen::VectorXd ev = symmetric_eigenvalues(a);
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -tol * scale) {
        throw std::invalid_argument(std::string(what) + ": matrix is indefinite");
    }
}

Matrix symmetric_sqrt(const Matrix& a) {
    if (a.rows() == 1) return Matrix::Constant(1, 1, std::sqrt(std::max(0.0, a(0, 0))));
    const SymmetricEigen es = symmetric_eigen(a);
    const Eigen::VectorXd root = es.values.cwiseMax(0.0).cwiseSqrt();
    return es.vectors * root.asDiagonal() * es.vectors.transpose();
}

}  // namespace semot
