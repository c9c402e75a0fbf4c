#include "semot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace semot {

namespace {

constexpr double kImageTailMass = 1e-14;

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
}

}  // namespace

PeriodicGrid make_grid(int dim, int nx, int nt, double horizon) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("make_grid: dim must be 1 or 2, got " + std::to_string(dim));
    }
    if (nx < 4) {
        throw std::invalid_argument("make_grid: nx must be >= 4, got " + std::to_string(nx));
    }
    if (nt < 1) {
        throw std::invalid_argument("make_grid: nt must be >= 1, got " + std::to_string(nt));
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("make_grid: horizon must be positive and finite");
    }
    return PeriodicGrid{dim, nx, nt, horizon};
}

ScalarField::ScalarField(const PeriodicGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("ScalarField: value count does not match nx^dim");
    }
}

double ScalarField::mass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell_volume();
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Density Density::from_field(ScalarField field) {
    for (double v : field.values()) {
        if (!(v >= 0.0)) throw std::invalid_argument("Density: negative or NaN value");
    }
    if (std::abs(field.mass() - 1.0) > 1e-12) {
        throw std::invalid_argument("Density: mass differs from 1 by more than 1e-12");
    }
    return Density(std::move(field));
}

Density Density::normalized(ScalarField field) {
    for (double v : field.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("Density: negative or non-finite value");
        }
    }
    const double m = field.mass();
    if (!(m > 0.0)) throw std::invalid_argument("Density: zero mass");
    for (double& v : field.values()) v /= m;
    return Density(std::move(field));
}

SpaceTimeScalarField::SpaceTimeScalarField(const PeriodicGrid& grid)
    : grid_(grid), slices_(static_cast<std::size_t>(grid.nt) + 1, ScalarField(grid)) {}

SymMatrixField::SymMatrixField(const PeriodicGrid& grid, double diagonal_fill)
    : grid_(grid), data_(grid.size() * (grid.dim == 1 ? 1 : 3), 0.0) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.dim == 1) {
            data_[i] = diagonal_fill;
        } else {
            data_[3 * i] = diagonal_fill;
            data_[3 * i + 2] = diagonal_fill;
        }
    }
}

void SymMatrixField::set(std::size_t i, double xx) {
    if (grid_.dim != 1) throw std::logic_error("SymMatrixField::set: 1D setter on 2D field");
    data_[i] = xx;
}

void SymMatrixField::set(std::size_t i, double xx, double xy, double yy) {
    if (grid_.dim != 2) throw std::logic_error("SymMatrixField::set: 2D setter on 1D field");
    data_[3 * i] = xx;
    data_[3 * i + 1] = xy;
    data_[3 * i + 2] = yy;
}

Eigen::MatrixXd SymMatrixField::matrix(std::size_t i) const {
    if (grid_.dim == 1) return Eigen::MatrixXd::Constant(1, 1, xx(i));
    Eigen::MatrixXd m(2, 2);
    m << xx(i), xy(i), xy(i), yy(i);
    return m;
}

double SymMatrixField::min_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        if (grid_.dim == 1) {
            lo = std::min(lo, xx(i));
        } else {
            const double m = 0.5 * (xx(i) + yy(i));
            const double r = std::hypot(0.5 * (xx(i) - yy(i)), xy(i));
            lo = std::min(lo, m - r);
        }
    }
    return lo;
}

ScalarField laplacian_periodic(const ScalarField& f) {
    const PeriodicGrid& g = f.grid();
    const double inv_h2 = 1.0 / (g.dx() * g.dx());
    ScalarField out(g);
    const int n = g.nx;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            out[i] = ((f.at(i + 1) + f.at(i - 1)) - 2.0 * f.at(i)) * inv_h2;
        }
        return out;
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double c = f.at(i, j);
            const double dxx = (f.at(i + 1, j) + f.at(i - 1, j)) - 2.0 * c;
            const double dyy = (f.at(i, j + 1) + f.at(i, j - 1)) - 2.0 * c;
            out[g.index(i, j)] = (dxx + dyy) * inv_h2;
        }
    }
    return out;
}

SymMatrixField hessian_periodic(const ScalarField& f) {
    const PeriodicGrid& g = f.grid();
    const double inv_h2 = 1.0 / (g.dx() * g.dx());
    SymMatrixField out(g);
    const int n = g.nx;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            out.set(i, ((f.at(i + 1) + f.at(i - 1)) - 2.0 * f.at(i)) * inv_h2);
        }
        return out;
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double c = f.at(i, j);
            const double dxx = ((f.at(i + 1, j) + f.at(i - 1, j)) - 2.0 * c) * inv_h2;
            const double dyy = ((f.at(i, j + 1) + f.at(i, j - 1)) - 2.0 * c) * inv_h2;
            const double dxy = ((f.at(i + 1, j + 1) - f.at(i + 1, j - 1)) -
                                (f.at(i - 1, j + 1) - f.at(i - 1, j - 1))) *
                               (0.25 * inv_h2);
            out.set(g.index(i, j), dxx, dxy, dyy);
        }
    }
    return out;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s * a.grid().cell_volume();
}

namespace {

// Unnormalized wrapped Gaussian exp(-(x-c+k)^2 / (2 sd^2)) / (sqrt(2 pi) sd),
// adding images k = 0, +-1, +-2, ... until one shell contributes less than the
// tail threshold in mass.
std::vector<double> wrapped_gaussian_values(double center, double sd, const PeriodicGrid& grid) {
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw std::invalid_argument("periodized_gaussian: sd must be positive");
    }
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sd);
    const int n = grid.nx;
    std::vector<double> v(n, 0.0);
    auto add_image = [&](int k) {
        double shell_mass = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = grid.coordinate(i) - center + k;
            const double w = norm * std::exp(-u * u / (2.0 * sd * sd));
            v[i] += w;
            shell_mass += w;
        }
        return shell_mass * grid.dx();
    };
    add_image(0);
    for (int k = 1;; ++k) {
        const double added = add_image(k) + add_image(-k);
        // Shells only start shrinking once |k| exceeds the offset of the center.
        if (added < kImageTailMass && k > std::abs(center) + 1.0) break;
        if (k > 1000000) throw std::runtime_error("periodized_gaussian: image sum did not converge");
    }
    return v;
}

}  // namespace

Density periodized_gaussian(double center, double sd, const PeriodicGrid& grid) {
    if (grid.dim != 1) throw std::invalid_argument("periodized_gaussian: 1D grid required");
    return Density::normalized(ScalarField(grid, wrapped_gaussian_values(center, sd, grid)));
}

Density gaussian_mixture_1d(double q, double d1, double s0, double s1, const PeriodicGrid& grid) {
    if (grid.dim != 1) throw std::invalid_argument("gaussian_mixture_1d: 1D grid required");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("gaussian_mixture_1d: q must lie in [0,1]");
    if (!(s0 > 0.0) || !(s1 > 0.0)) {
        throw std::invalid_argument("gaussian_mixture_1d: s0 and s1 must be positive");
    }
    if (!std::isfinite(d1)) throw std::invalid_argument("gaussian_mixture_1d: d1 must be finite");
    const Density centre = periodized_gaussian(0.5, s0, grid);
    const Density left = periodized_gaussian(0.5 - d1, s1, grid);
    const Density right = periodized_gaussian(0.5 + d1, s1, grid);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = q * centre[i] + 0.5 * (1.0 - q) * (left[i] + right[i]);
    }
    return Density::normalized(ScalarField(grid, std::move(v)));
}

Density rotated_gaussian_2d(const std::array<double, 2>& center, const std::array<double, 2>& sds,
                            double theta, const PeriodicGrid& grid) {
    if (grid.dim != 2) throw std::invalid_argument("rotated_gaussian_2d: 2D grid required");
    if (!(sds[0] > 0.0) || !(sds[1] > 0.0) || !std::isfinite(sds[0]) || !std::isfinite(sds[1])) {
        throw std::invalid_argument("rotated_gaussian_2d: degenerate covariance (sds must be positive)");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // C^{-1} = R diag(1/sd^2) R^T
    const double i0 = 1.0 / (sds[0] * sds[0]);
    const double i1 = 1.0 / (sds[1] * sds[1]);
    const double pxx = c * c * i0 + s * s * i1;
    const double pxy = c * s * (i0 - i1);
    const double pyy = s * s * i0 + c * c * i1;
    const double norm = 1.0 / (2.0 * std::numbers::pi * sds[0] * sds[1]);

    const int n = grid.nx;
    std::vector<double> v(grid.size(), 0.0);
    auto add_image = [&](int kx, int ky) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            const double uy = grid.coordinate(j) - center[1] + ky;
            for (int i = 0; i < n; ++i) {
                const double ux = grid.coordinate(i) - center[0] + kx;
                const double q = pxx * ux * ux + 2.0 * pxy * ux * uy + pyy * uy * uy;
                const double w = norm * std::exp(-0.5 * q);
                v[grid.index(i, j)] += w;
                m += w;
            }
        }
        return m * grid.cell_volume();
    };
    add_image(0, 0);
    const double offset = std::max(std::abs(center[0]), std::abs(center[1]));
    for (int r = 1;; ++r) {
        double shell = 0.0;
        for (int kx = -r; kx <= r; ++kx) {
            shell += add_image(kx, -r) + add_image(kx, r);
        }
        for (int ky = -r + 1; ky <= r - 1; ++ky) {
            shell += add_image(-r, ky) + add_image(r, ky);
        }
        if (shell < kImageTailMass && r > offset + 1.0) break;
        if (r > 10000) throw std::runtime_error("rotated_gaussian_2d: image sum did not converge");
    }
    return Density::normalized(ScalarField(grid, std::move(v)));
}

Density uniform_density(const PeriodicGrid& grid) {
    return Density::normalized(ScalarField(grid, 1.0));
}

}  // namespace semot
