#pragma once

#include <memory>

#include "semot/grid.hpp"
#include "semot/periodic_tridiagonal.hpp"

namespace semot {

/// Which way the diffusion coefficient enters the operator.
///   nondivergence: (L v)_i = sum_ab S_ab(i) (D_ab v)_i          (HJB linearization)
///   divergence:    (L q)   = sum_ab D_ab (S_ab q)                (Fokker-Planck)
/// The two matrices are transposes of each other.
enum class OperatorForm { nondivergence, divergence };

/// Preallocated storage for the implicit systems (I - c L) x = b on one grid:
/// cyclic Thomas in 1D, sparse Krylov solve with a direct fallback in 2D.
/// Reusable across time steps; one instance per thread.
class LinearSolveWorkspace {
public:
    explicit LinearSolveWorkspace(const PeriodicGrid& grid);
    ~LinearSolveWorkspace();
    LinearSolveWorkspace(LinearSolveWorkspace&&) noexcept;
    LinearSolveWorkspace& operator=(LinearSolveWorkspace&&) noexcept;

    const PeriodicGrid& grid() const { return grid_; }

    /// Solves (I - coeff * L(sigma, form)) x = rhs. Throws SolverError if the
    /// system is singular or the residual exceeds 1e-12 relative to rhs.
    void solve(const SymMatrixField& sigma, double coeff, OperatorForm form, std::span<const double> rhs,
               std::span<double> x);

    /// y = (I - coeff * L(sigma, form)) x, for residual checks and tests.
    void apply(const SymMatrixField& sigma, double coeff, OperatorForm form, std::span<const double> x,
               std::span<double> y) const;

private:
    struct Sparse2d;
    PeriodicGrid grid_;
    PeriodicTridiagonalSolver tridiagonal_;
    std::vector<double> lower_;
    std::vector<double> diag_;
    std::vector<double> upper_;
    std::unique_ptr<Sparse2d> sparse_;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_newton = 50;
};

struct HjbStepResult {
    ScalarField phi;
    SpdMatrixField sigma_star;
    int newton_iterations = 0;
    double residual = 0.0;
};

struct BackwardSolution {
    SpaceTimeScalarField phi;
    SpaceTimeMatrixField sigma_star;
    int newton_iterations = 0;
};

/// Fully implicit backward Euler for d_t phi + H(D^2 phi) = 0:
///   phi_earlier - phi_later - dt H(Hess_h phi_earlier) = 0,
/// solved by Newton with a backtracking line search. At the solution the
/// Jacobian is I - (dt/2) Sigma*:D^2 (exact by the envelope theorem).
class HjbSolver {
public:
    explicit HjbSolver(const PeriodicGrid& grid, NewtonOptions options = {});

    HjbStepResult step(const ScalarField& phi_later, int time_index = -1);
    BackwardSolution solve(const ScalarField& phi1);

    const NewtonOptions& options() const { return options_; }

private:
    /// F = phi - phi_later - dt H(Hess phi); fills sigma with the minimizer.
    void residual(const ScalarField& phi, const ScalarField& phi_later, ScalarField& f,
                  SymMatrixField& sigma) const;
    /// Per-node Newton residual m, scaled right-hand side and Jacobian weights
    /// (see step()). Every row scales to I - (dt/2) W:D^2.
    void newton_system(const ScalarField& phi, const ScalarField& phi_later, ScalarField& m,
                       std::span<double> rhs, SymMatrixField& weights) const;

    PeriodicGrid grid_;
    NewtonOptions options_;
    LinearSolveWorkspace workspace_;
};

/// Which Sigma* slice drives the forward step from slice k to k+1.
///   adjoint:     Sigma*[k], the minimizer produced by the implicit HJB step
///                joining k and k+1; the forward sweep is then the exact
///                transpose of the linearized backward sweep.
///   later_slice: Sigma*[k+1].
enum class SigmaCoupling { adjoint, later_slice };

/// Implicit Fokker-Planck step (I - dt/2 K) p_next = p_prev with
/// K q = sum_ab D_ab (Sigma_ab q); conserves mass through zero column sums.
class FokkerPlanckSolver {
public:
    explicit FokkerPlanckSolver(const PeriodicGrid& grid);

    ScalarField step(const ScalarField& p_prev, const SpdMatrixField& sigma, int time_index = -1);
    /// slice 0 = mu0; slice k+1 from slice k with the Sigma* slice chosen by `coupling`.
    SpaceTimeScalarField solve(const ScalarField& mu0, const SpaceTimeMatrixField& sigma_star,
                               SigmaCoupling coupling = SigmaCoupling::adjoint);

private:
    PeriodicGrid grid_;
    LinearSolveWorkspace workspace_;
};

HjbStepResult hjb_backward_step(const ScalarField& phi_later, const PeriodicGrid& grid, double tol = 1e-10,
                                int max_newton = 50);
BackwardSolution hjb_backward_solve(const ScalarField& phi1, const PeriodicGrid& grid);
ScalarField fp_forward_step(const ScalarField& p_prev, const SpdMatrixField& sigma_slice, const PeriodicGrid& grid,
                            LinearSolveWorkspace& workspace);
SpaceTimeScalarField fp_forward_solve(const ScalarField& mu0, const SpaceTimeMatrixField& sigma_star,
                                      const PeriodicGrid& grid, SigmaCoupling coupling = SigmaCoupling::adjoint);

}  // namespace semot
