#include "semot/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "semot/errors.hpp"
#include "semot/hamiltonian.hpp"

namespace semot {

namespace {

constexpr double kLinearResidualTol = 1e-12;

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double two_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

struct LinearSolveWorkspace::Sparse2d {
    using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    std::vector<Eigen::Triplet<double>> triplets;
    SpMat matrix;
    Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> krylov;
    Eigen::VectorXd b;
    Eigen::VectorXd x;

    void assemble(const PeriodicGrid& g, const SymMatrixField& sigma, double coeff, OperatorForm form) {
        const int n = g.nx;
        const double inv_h2 = 1.0 / (g.dx() * g.dx());
        triplets.clear();
        triplets.reserve(g.size() * 9);
        auto add = [&](std::size_t node, std::size_t neighbour, double l_entry) {
            const double v = -coeff * l_entry;
            if (form == OperatorForm::nondivergence) {
                triplets.emplace_back(static_cast<int>(node), static_cast<int>(neighbour), v);
            } else {
                triplets.emplace_back(static_cast<int>(neighbour), static_cast<int>(node), v);
            }
        };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t c = g.index(i, j);
                const double sxx = sigma.xx(c) * inv_h2;
                const double syy = sigma.yy(c) * inv_h2;
                const double sxy = 0.5 * sigma.xy(c) * inv_h2;
                triplets.emplace_back(static_cast<int>(c), static_cast<int>(c), 1.0);
                add(c, c, -2.0 * (sxx + syy));
                add(c, g.index(i + 1, j), sxx);
                add(c, g.index(i - 1, j), sxx);
                add(c, g.index(i, j + 1), syy);
                add(c, g.index(i, j - 1), syy);
                if (sxy != 0.0) {
                    add(c, g.index(i + 1, j + 1), sxy);
                    add(c, g.index(i + 1, j - 1), -sxy);
                    add(c, g.index(i - 1, j + 1), -sxy);
                    add(c, g.index(i - 1, j - 1), sxy);
                }
            }
        }
        const auto size = static_cast<Eigen::Index>(g.size());
        matrix.resize(size, size);
        matrix.setFromTriplets(triplets.begin(), triplets.end());
    }
};

LinearSolveWorkspace::LinearSolveWorkspace(const PeriodicGrid& grid)
    : grid_(grid),
      tridiagonal_(grid.dim == 1 ? grid.size() : 0),
      lower_(grid.dim == 1 ? grid.size() : 0),
      diag_(grid.dim == 1 ? grid.size() : 0),
      upper_(grid.dim == 1 ? grid.size() : 0) {
    if (grid.dim == 2) {
        sparse_ = std::make_unique<Sparse2d>();
        sparse_->b.resize(static_cast<Eigen::Index>(grid.size()));
        sparse_->x.resize(static_cast<Eigen::Index>(grid.size()));
        sparse_->krylov.setTolerance(1e-14);
        sparse_->krylov.setMaxIterations(2000);
    }
}

LinearSolveWorkspace::~LinearSolveWorkspace() = default;
LinearSolveWorkspace::LinearSolveWorkspace(LinearSolveWorkspace&&) noexcept = default;
LinearSolveWorkspace& LinearSolveWorkspace::operator=(LinearSolveWorkspace&&) noexcept = default;

void LinearSolveWorkspace::apply(const SymMatrixField& sigma, double coeff, OperatorForm form,
                                 std::span<const double> x, std::span<double> y) const {
    const PeriodicGrid& g = grid_;
    const double inv_h2 = 1.0 / (g.dx() * g.dx());
    const int n = g.nx;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const auto im = static_cast<std::size_t>(g.wrap(i - 1));
            const auto ip = static_cast<std::size_t>(g.wrap(i + 1));
            const auto ic = static_cast<std::size_t>(i);
            double l;
            if (form == OperatorForm::nondivergence) {
                l = sigma.xx(ic) * ((x[ip] + x[im]) - 2.0 * x[ic]) * inv_h2;
            } else {
                l = (sigma.xx(ip) * x[ip] + sigma.xx(im) * x[im] - 2.0 * sigma.xx(ic) * x[ic]) * inv_h2;
            }
            y[ic] = x[ic] - coeff * l;
        }
        return;
    }
    // Generic 2D stencil application; q(k) is the quantity differenced at node k.
    auto q = [&](std::size_t k, int comp) {
        if (form == OperatorForm::nondivergence) return x[k];
        const double s = comp == 0 ? sigma.xx(k) : (comp == 1 ? sigma.xy(k) : sigma.yy(k));
        return s * x[k];
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t c = g.index(i, j);
            const double dxx = (q(g.index(i + 1, j), 0) + q(g.index(i - 1, j), 0)) - 2.0 * q(c, 0);
            const double dyy = (q(g.index(i, j + 1), 2) + q(g.index(i, j - 1), 2)) - 2.0 * q(c, 2);
            const double dxy = 0.25 * ((q(g.index(i + 1, j + 1), 1) - q(g.index(i + 1, j - 1), 1)) -
                                       (q(g.index(i - 1, j + 1), 1) - q(g.index(i - 1, j - 1), 1)));
            double l;
            if (form == OperatorForm::nondivergence) {
                l = (sigma.xx(c) * dxx + 2.0 * sigma.xy(c) * dxy + sigma.yy(c) * dyy) * inv_h2;
            } else {
                l = (dxx + 2.0 * dxy + dyy) * inv_h2;
            }
            y[c] = x[c] - coeff * l;
        }
    }
}

void LinearSolveWorkspace::solve(const SymMatrixField& sigma, double coeff, OperatorForm form,
                                 std::span<const double> rhs, std::span<double> x) {
    const PeriodicGrid& g = grid_;
    if (!(sigma.grid() == g) || rhs.size() != g.size() || x.size() != g.size()) {
        throw std::invalid_argument("LinearSolveWorkspace::solve: size or grid mismatch");
    }
    const double inv_h2 = 1.0 / (g.dx() * g.dx());
    if (g.dim == 1) {
        const std::size_t n = g.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n;
            const std::size_t ip = (i + 1) % n;
            diag_[i] = 1.0 + 2.0 * coeff * sigma.xx(i) * inv_h2;
            if (form == OperatorForm::nondivergence) {
                lower_[i] = -coeff * sigma.xx(i) * inv_h2;
                upper_[i] = lower_[i];
            } else {
                lower_[i] = -coeff * sigma.xx(im) * inv_h2;
                upper_[i] = -coeff * sigma.xx(ip) * inv_h2;
            }
        }
        try {
            tridiagonal_.solve(lower_, diag_, upper_, rhs, x);
        } catch (const std::runtime_error& e) {
            throw SolverError(std::string("periodic tridiagonal solve failed: ") + e.what());
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw SolverError("periodic tridiagonal solve produced non-finite values");
        }
        return;
    }

    Sparse2d& sp = *sparse_;
    sp.assemble(g, sigma, coeff, form);
    for (std::size_t i = 0; i < rhs.size(); ++i) sp.b(static_cast<Eigen::Index>(i)) = rhs[i];
    const double scale = std::max(1.0, sp.b.cwiseAbs().maxCoeff());

    auto residual_ok = [&](const Eigen::VectorXd& sol) {
        if (!sol.allFinite()) return false;
        const Eigen::VectorXd r = sp.matrix * sol - sp.b;
        return r.cwiseAbs().maxCoeff() <= kLinearResidualTol * scale;
    };

    sp.krylov.compute(sp.matrix);
    sp.x = sp.krylov.solve(sp.b);
    if (!residual_ok(sp.x)) {
        // Direct fallback.
        Eigen::SparseMatrix<double> col_major = sp.matrix;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(col_major);
        if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed (singular system)");
        sp.x = lu.solve(sp.b);
        if (!residual_ok(sp.x)) throw SolverError("sparse solve residual above tolerance");
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = sp.x(static_cast<Eigen::Index>(i));
}

HjbSolver::HjbSolver(const PeriodicGrid& grid, NewtonOptions options)
    : grid_(grid), options_(options), workspace_(grid) {}

void HjbSolver::residual(const ScalarField& phi, const ScalarField& phi_later, ScalarField& f,
                         SymMatrixField& sigma) const {
    const SymMatrixField hess = hessian_periodic(phi);
    const double dt = grid_.dt();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double h;
        if (grid_.dim == 1) {
            const ScalarHamiltonian r = hamiltonian_1d(hess.xx(i));
            h = r.h_value;
            sigma.set(i, r.sigma_star);
        } else {
            const Hamiltonian2x2 r = hamiltonian_2x2(hess.xx(i), hess.xy(i), hess.yy(i));
            h = r.h_value;
            sigma.set(i, r.sxx, r.sxy, r.syy);
        }
        f[i] = phi[i] - phi_later[i] - dt * h;
    }
}

void HjbSolver::newton_system(const ScalarField& phi, const ScalarField& phi_later, ScalarField& m,
                              std::span<double> rhs, SymMatrixField& weights) const {
    const SymMatrixField hess = hessian_periodic(phi);
    const double dt = grid_.dt();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double slack = 1.0 - (phi[i] - phi_later[i]) / dt;
        double q = hess.xx(i), bxx = 1.0, bxy = 0.0, byy = 0.0;
        if (grid_.dim == 2) {
            const Hamiltonian2x2 r = hamiltonian_2x2(hess.xx(i), hess.xy(i), hess.yy(i));
            q = r.q;
            bxx = r.bxx;
            bxy = r.bxy;
            byy = r.byy;
        }
        double w;
        if (slack >= 1.0 || (slack > 0.0 && q < 0.0)) {
            m[i] = q + 2.0 * std::log(slack);
            w = slack;
            rhs[i] = 0.5 * dt * slack * m[i];
        } else {
            w = std::exp(std::min(-0.5 * q, 700.0));
            m[i] = 2.0 * (slack - w);
            rhs[i] = 0.5 * dt * m[i];
        }
        if (grid_.dim == 1) {
            weights.set(i, w);
        } else {
            weights.set(i, w * bxx, w * bxy, w * byy);
        }
    }
}

HjbStepResult HjbSolver::step(const ScalarField& phi_later, int time_index) {
    if (!(phi_later.grid() == grid_)) throw std::invalid_argument("HjbSolver::step: grid mismatch");
    if (!phi_later.all_finite()) throw std::invalid_argument("HjbSolver::step: non-finite terminal data");
    const double dt = grid_.dt();
    ScalarField phi = phi_later;
    ScalarField f(grid_);
    SymMatrixField sigma(grid_);
    residual(phi, phi_later, f, sigma);
    double res = inf_norm(f.values());

    // Each node's equation is used in whichever equivalent form is closer to linear there:
    // log form m = q(Hess phi) + 2 log s where phi fell or the node is concave, and
    // m = 2 (s - exp(-q/2)) where phi rose, with slack s = 1 - (phi - phi_later)/dt.
    // Both rows scale to the Jacobian I - (dt/2) W:D^2 with W = s (Gamma + mu I)^{-1}
    // or exp(-q/2) (Gamma + mu I)^{-1}, and W equals Sigma* at the solution.
    ScalarField m(grid_);
    ScalarField m_trial(grid_);
    ScalarField trial(grid_);
    SymMatrixField weights(grid_);
    SymMatrixField weights_trial(grid_);
    std::vector<double> rhs(grid_.size());
    std::vector<double> rhs_trial(grid_.size());
    std::vector<double> delta(grid_.size());
    newton_system(phi, phi_later, m, rhs, weights);

    int iter = 0;
    while (!(res < options_.tol)) {
        if (iter >= options_.max_newton || !std::isfinite(res)) {
            throw SolverError("HJB Newton did not converge at time index " + std::to_string(time_index) +
                                  " (residual " + std::to_string(res) + ")",
                              time_index, res);
        }
        try {
            workspace_.solve(weights, 0.5 * dt, OperatorForm::nondivergence, rhs, delta);
        } catch (SolverError& e) {
            throw SolverError(std::string("HJB Newton linear solve failed: ") + e.what(), time_index, res);
        }
        ++iter;

        const double merit = two_norm(m.values());
        double alpha = 1.0;
        for (;;) {
            for (std::size_t i = 0; i < phi.size(); ++i) trial[i] = phi[i] + alpha * delta[i];
            newton_system(trial, phi_later, m_trial, rhs_trial, weights_trial);
            const double trial_merit = two_norm(m_trial.values());
            if (std::isfinite(trial_merit) && (trial_merit < merit || alpha < 1.0 / 1024.0)) break;
            alpha *= 0.5;
            if (alpha < 1e-12) {
                throw SolverError("HJB Newton line search failed at time index " + std::to_string(time_index),
                                  time_index, res);
            }
        }
        std::swap(phi, trial);
        std::swap(m, m_trial);
        std::swap(rhs, rhs_trial);
        std::swap(weights, weights_trial);
        residual(phi, phi_later, f, sigma);
        res = inf_norm(f.values());
    }
    return HjbStepResult{std::move(phi), std::move(sigma), iter, res};
}

BackwardSolution HjbSolver::solve(const ScalarField& phi1) {
    if (!(phi1.grid() == grid_)) throw std::invalid_argument("HjbSolver::solve: grid mismatch");
    if (!phi1.all_finite()) throw std::invalid_argument("HjbSolver::solve: non-finite terminal data");
    const auto nt = static_cast<std::size_t>(grid_.nt);
    BackwardSolution out;
    out.phi = SpaceTimeScalarField(grid_);
    out.sigma_star.assign(nt + 1, SymMatrixField(grid_));
    out.phi.slice(nt) = phi1;
    {
        ScalarField f(grid_);
        residual(phi1, phi1, f, out.sigma_star[nt]);
    }
    for (std::size_t k = nt; k-- > 0;) {
        HjbStepResult r = step(out.phi.slice(k + 1), static_cast<int>(k));
        out.newton_iterations += r.newton_iterations;
        out.phi.slice(k) = std::move(r.phi);
        out.sigma_star[k] = std::move(r.sigma_star);
    }
    return out;
}

FokkerPlanckSolver::FokkerPlanckSolver(const PeriodicGrid& grid) : grid_(grid), workspace_(grid) {}

ScalarField FokkerPlanckSolver::step(const ScalarField& p_prev, const SpdMatrixField& sigma, int time_index) {
    if (!(p_prev.grid() == grid_) || !(sigma.grid() == grid_)) {
        throw std::invalid_argument("FokkerPlanckSolver::step: grid mismatch");
    }
    ScalarField next(grid_);
    try {
        workspace_.solve(sigma, 0.5 * grid_.dt(), OperatorForm::divergence, p_prev.values(), next.values());
    } catch (SolverError& e) {
        throw SolverError(std::string("Fokker-Planck step failed: ") + e.what(), time_index);
    }
    return next;
}

SpaceTimeScalarField FokkerPlanckSolver::solve(const ScalarField& mu0, const SpaceTimeMatrixField& sigma_star,
                                               SigmaCoupling coupling) {
    const auto nt = static_cast<std::size_t>(grid_.nt);
    if (sigma_star.size() != nt + 1) throw std::invalid_argument("FokkerPlanckSolver::solve: need nt+1 slices");
    SpaceTimeScalarField p(grid_);
    p.slice(0) = mu0;
    for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t s = coupling == SigmaCoupling::adjoint ? k : k + 1;
        p.slice(k + 1) = step(p.slice(k), sigma_star[s], static_cast<int>(k + 1));
    }
    return p;
}

HjbStepResult hjb_backward_step(const ScalarField& phi_later, const PeriodicGrid& grid, double tol,
                                int max_newton) {
    HjbSolver solver(grid, NewtonOptions{tol, max_newton});
    return solver.step(phi_later);
}

BackwardSolution hjb_backward_solve(const ScalarField& phi1, const PeriodicGrid& grid) {
    HjbSolver solver(grid);
    return solver.solve(phi1);
}

ScalarField fp_forward_step(const ScalarField& p_prev, const SpdMatrixField& sigma_slice, const PeriodicGrid& grid,
                            LinearSolveWorkspace& workspace) {
    if (!(workspace.grid() == grid)) throw std::invalid_argument("fp_forward_step: workspace grid mismatch");
    ScalarField next(grid);
    workspace.solve(sigma_slice, 0.5 * grid.dt(), OperatorForm::divergence, p_prev.values(), next.values());
    return next;
}

SpaceTimeScalarField fp_forward_solve(const ScalarField& mu0, const SpaceTimeMatrixField& sigma_star,
                                      const PeriodicGrid& grid, SigmaCoupling coupling) {
    FokkerPlanckSolver solver(grid);
    return solver.solve(mu0, sigma_star, coupling);
}

}  // namespace semot
