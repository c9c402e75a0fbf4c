#pragma once

#include <Eigen/Dense>

namespace semot {

using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

/// Eigen-decomposition of a symmetric matrix: eigenvalues ascending, columns
/// of `vectors` the matching orthonormal eigenvectors.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Matrix vectors;
};

/// Closed form for 1x1 and 2x2, Eigen's self-adjoint solver above that.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Ascending eigenvalues only.
Eigen::VectorXd symmetric_eigenvalues(const Matrix& a);

/// Max |a_ij - a_ji| <= tol * max(1, max|a_ij|).
bool is_symmetric(const Matrix& a, double tol = 1e-12);

/// Throws std::invalid_argument unless `a` is square, symmetric and has no
/// eigenvalue below -tol * max(1, largest |eigenvalue|). `what` prefixes the message.
void require_symmetric_psd(const Matrix& a, const char* what, double tol = 1e-12);

/// Symmetric (eigen) square root of a PSD matrix.
Matrix symmetric_sqrt(const Matrix& a);

}  // namespace semot
