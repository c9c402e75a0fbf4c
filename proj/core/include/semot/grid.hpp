#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace semot {

/// Uniform periodic discretization of [0,T] x T^d with d in {1,2}.
///
/// Spatial nodes sit at x_i = i/nx, i = 0..nx-1 on every axis; time levels at
/// t_k = k*T/nt, k = 0..nt. In 2D the flat node index is i + nx*j with i the
/// x index (fastest) and j the y index.
struct PeriodicGrid {
    int dim = 1;
    int nx = 4;
    int nt = 1;
    double horizon = 1.0;

    double dx() const { return 1.0 / nx; }
    double dt() const { return horizon / nt; }
    /// dx^dim, the weight of one node in spatial quadrature.
    double cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }
    std::size_t size() const {
        return dim == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * nx;
    }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(wrap(i)) + static_cast<std::size_t>(nx) * wrap(j);
    }
    int wrap(int i) const {
        const int r = i % nx;
        return r < 0 ? r + nx : r;
    }
    double coordinate(int i) const { return i * dx(); }
    double time(int k) const { return k * dt(); }

    bool operator==(const PeriodicGrid&) const = default;
};

/// Validated constructor. Throws std::invalid_argument on dim outside {1,2},
/// nx < 4, nt < 1 or a non-positive horizon.
PeriodicGrid make_grid(int dim, int nx, int nt, double horizon);

/// One real value per spatial node of a grid.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& grid, double fill = 0.0);
    ScalarField(const PeriodicGrid& grid, std::vector<double> values);

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    /// Value at periodic 2D index (i, j); j is ignored in 1D.
    double at(int i, int j = 0) const {
        return values_[grid_.dim == 1 ? grid_.wrap(i) : grid_.index(i, j)];
    }

    /// sum(values) * dx^dim
    double mass() const;
    double max_abs() const;
    double min() const;
    double max() const;
    bool all_finite() const;

    bool operator==(const ScalarField&) const = default;

private:
    PeriodicGrid grid_{};
    std::vector<double> values_;
};

/// A ScalarField constrained to be a probability density: nonnegative with unit mass.
class Density {
public:
    /// Checks nonnegativity and |mass - 1| <= 1e-12; throws std::invalid_argument otherwise.
    static Density from_field(ScalarField field);
    /// Scales a nonnegative field with positive mass to unit mass.
    static Density normalized(ScalarField field);

    const ScalarField& field() const { return field_; }
    const PeriodicGrid& grid() const { return field_.grid(); }
    std::size_t size() const { return field_.size(); }
    double operator[](std::size_t i) const { return field_[i]; }
    operator const ScalarField&() const { return field_; }  // NOLINT(google-explicit-constructor)

private:
    explicit Density(ScalarField field) : field_(std::move(field)) {}
    ScalarField field_;
};

/// nt+1 time slices on one grid; slice k holds the value at t_k.
class SpaceTimeScalarField {
public:
    SpaceTimeScalarField() = default;
    explicit SpaceTimeScalarField(const PeriodicGrid& grid);

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t slice_count() const { return slices_.size(); }
    const ScalarField& slice(std::size_t k) const { return slices_.at(k); }
    ScalarField& slice(std::size_t k) { return slices_.at(k); }
    const ScalarField& front() const { return slices_.front(); }
    const ScalarField& back() const { return slices_.back(); }

private:
    PeriodicGrid grid_{};
    std::vector<ScalarField> slices_;
};

/// Per-node symmetric d x d matrix, d in {1,2}. Stored as (xx) in 1D and
/// (xx, xy, yy) in 2D.
class SymMatrixField {
public:
    SymMatrixField() = default;
    explicit SymMatrixField(const PeriodicGrid& grid, double diagonal_fill = 0.0);

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.size(); }
    int components() const { return grid_.dim == 1 ? 1 : 3; }

    double xx(std::size_t i) const { return data_[i * components()]; }
    double xy(std::size_t i) const { return grid_.dim == 1 ? 0.0 : data_[i * 3 + 1]; }
    double yy(std::size_t i) const { return grid_.dim == 1 ? 0.0 : data_[i * 3 + 2]; }
    void set(std::size_t i, double xx);
    void set(std::size_t i, double xx, double xy, double yy);

    Eigen::MatrixXd matrix(std::size_t i) const;
    /// Smallest eigenvalue over all nodes.
    double min_eigenvalue() const;
    bool is_positive_definite() const { return min_eigenvalue() > 0.0; }

private:
    PeriodicGrid grid_{};
    std::vector<double> data_;
};

/// Matrix field whose nodes are expected to be positive definite.
using SpdMatrixField = SymMatrixField;
using SpaceTimeMatrixField = std::vector<SpdMatrixField>;

/// Periodic 3-point Laplacian, summed over axes.
ScalarField laplacian_periodic(const ScalarField& f);

/// Periodic discrete Hessian: 3-point second differences on the diagonal and
/// the centered 4-point stencil for the 2D cross term.
SymMatrixField hessian_periodic(const ScalarField& f);

/// sum |a - b| dx^dim. Throws std::invalid_argument on grid mismatch.
double l1_distance(const ScalarField& a, const ScalarField& b);

/// Wrapped Gaussian N_T(center, sd) on the 1D torus, normalized on the grid.
Density periodized_gaussian(double center, double sd, const PeriodicGrid& grid);

/// q N_T(0.5, s0) + (1-q)/2 [N_T(0.5-d1, s1) + N_T(0.5+d1, s1)].
Density gaussian_mixture_1d(double q, double d1, double s0, double s1, const PeriodicGrid& grid);

/// Periodized anisotropic Gaussian on T^2 with covariance R(theta) diag(sds^2) R(theta)^T.
Density rotated_gaussian_2d(const std::array<double, 2>& center, const std::array<double, 2>& sds,
                            double theta, const PeriodicGrid& grid);

/// Uniform density (== 1) on the grid.
Density uniform_density(const PeriodicGrid& grid);

}  // namespace semot
