#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <vector>

#include "semot/cost.hpp"
#include "semot/grid.hpp"
#include "semot/pde.hpp"

namespace semot {

/// Outer-loop parameters of the terminal-potential fixed point.
struct SinkhornConfig {
    double eta0 = 1e-3;
    int smoothing_passes = 2;
    double density_floor = 0.1;
    double l1_tolerance = 1e-3;
    int max_outer = 500;
    bool adaptive = false;
    double eta_down = 0.5;
    double eta_up = 1.05;
    double eta_min = 1e-5;
    double eta_max = 0.05;
    int anderson_memory = 0;
    double anderson_regularization = 1e-10;
    NewtonOptions newton{};

    /// Throws std::invalid_argument listing the first violated invariant.
    void validate() const;

    /// Paper-default 1D setup: eta = dt, no adaptation, no acceleration.
    static SinkhornConfig defaults_1d(const PeriodicGrid& grid);
    /// 2D setup: eta0 = 0.005, eight smoothing passes, adaptive learning rate, Anderson memory 5.
    static SinkhornConfig defaults_2d();
};

struct IterationDiagnostics {
    int iteration = 0;
    double l1_error = 0.0;
    double dual_value = 0.0;
    double eta = 0.0;
    int newton_iterations = 0;
    /// False when the adaptive safeguard rejected this trial and stepped back.
    bool accepted = true;
    double seconds = 0.0;
};

/// One line "iter=... l1_error=... dual_value=... eta=... newton_iters=... seconds=...",
/// floats at 17 significant digits.
void write_diagnostics_record(std::ostream& out, const IterationDiagnostics& d);

struct Solution {
    SpaceTimeScalarField phi;
    SpaceTimeScalarField p;
    SpaceTimeMatrixField sigma_star;
    ScalarField phi1_final;
    std::vector<IterationDiagnostics> diagnostics;
    bool converged = false;
    /// Index into diagnostics of the returned iterate.
    int best_iteration = 0;
};

/// (1/4, 1/2, 1/4) periodic averaging, `passes` times, separably per axis in 2D.
ScalarField smooth_log_ratio(const ScalarField& r, int passes);

/// r = smooth(log(max(p1, floor) / max(mu1, floor))) scaled by eta.
ScalarField sinkhorn_correction(const ScalarField& p1, const ScalarField& mu1, double eta,
                                const SinkhornConfig& config);

/// phi1 + eta * smooth(log(max(p1, floor) / max(mu1, floor))).
ScalarField sinkhorn_update(const ScalarField& phi1, const ScalarField& p1, const ScalarField& mu1, double eta,
                            const SinkhornConfig& config);

/// eta * eta_down if the error grew, eta * eta_up otherwise, clamped to [eta_min, eta_max].
double adapt_eta(double eta, double error_now, double error_prev, const SinkhornConfig& config);

/// One stored Anderson pair: a candidate iterate g_j and its residual f_j.
struct AndersonEntry {
    ScalarField candidate;
    ScalarField residual;
};

/// Combines the stored candidates with weights minimizing
/// |sum w_j f_j|^2 + reg |w|^2 subject to sum w_j = 1, over the last m entries.
/// Falls back to the newest candidate when the normal equations are degenerate.
ScalarField anderson_step(const std::deque<AndersonEntry>& history, int m, double regularization);

/// The weights used by anderson_step (empty on fallback).
std::vector<double> anderson_weights(const std::deque<AndersonEntry>& history, int m, double regularization);

using IterationObserver = std::function<void(const IterationDiagnostics&)>;

/// The fixed point phi1 -> phi -> Sigma* -> p -> p1 -> phi1_new, started from phi1 = 0.
/// With `adaptive` set, eta follows adapt_eta against the last accepted error and a
/// trial that raises the error is discarded in favour of a shorter plain step.
class SinkhornSolver {
public:
    SinkhornSolver(const PeriodicGrid& grid, SinkhornConfig config);

    /// Throws SolverError (with the outer iteration set) if an inner solve fails.
    Solution run(const Density& mu0, const Density& mu1, const IterationObserver& observer = {});

    /// One backward + forward pass from a terminal potential.
    struct Pass {
        BackwardSolution backward;
        SpaceTimeScalarField p;
    };
    Pass evaluate(const ScalarField& phi1, const ScalarField& mu0);

private:
    PeriodicGrid grid_;
    SinkhornConfig config_;
    HjbSolver hjb_;
    FokkerPlanckSolver fp_;
};

Solution run(const Density& mu0, const Density& mu1, const PeriodicGrid& grid, const SinkhornConfig& config);

}  // namespace semot
