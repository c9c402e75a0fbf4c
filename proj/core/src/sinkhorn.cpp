#include "semot/sinkhorn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "semot/errors.hpp"
#include "semot/field_io.hpp"

namespace semot {

void SinkhornConfig::validate() const {
    if (!(eta0 > 0.0)) throw std::invalid_argument("SinkhornConfig: eta0 must be positive");
    if (smoothing_passes < 0) throw std::invalid_argument("SinkhornConfig: smoothing_passes must be >= 0");
    if (!(density_floor > 0.0)) throw std::invalid_argument("SinkhornConfig: density_floor must be positive");
    if (!(l1_tolerance >= 0.0)) throw std::invalid_argument("SinkhornConfig: l1_tolerance must be >= 0");
    if (max_outer < 1) throw std::invalid_argument("SinkhornConfig: max_outer must be >= 1");
    if (!(eta_down > 0.0 && eta_down < 1.0)) throw std::invalid_argument("SinkhornConfig: eta_down must lie in (0,1)");
    if (!(eta_up > 1.0)) throw std::invalid_argument("SinkhornConfig: eta_up must exceed 1");
    if (!(eta_min > 0.0) || !(eta_max >= eta_min)) {
        throw std::invalid_argument("SinkhornConfig: need 0 < eta_min <= eta_max");
    }
    if (anderson_memory < 0) throw std::invalid_argument("SinkhornConfig: anderson_memory must be >= 0");
    if (!(anderson_regularization >= 0.0)) {
        throw std::invalid_argument("SinkhornConfig: anderson_regularization must be >= 0");
    }
    if (!(newton.tol > 0.0) || newton.max_newton < 1) throw std::invalid_argument("SinkhornConfig: bad Newton options");
}

SinkhornConfig SinkhornConfig::defaults_1d(const PeriodicGrid& grid) {
    SinkhornConfig c;
    c.eta0 = grid.dt();
    return c;
}

SinkhornConfig SinkhornConfig::defaults_2d() {
    SinkhornConfig c;
    c.eta0 = 0.005;
    c.smoothing_passes = 8;
    c.adaptive = true;
    c.anderson_memory = 5;
    return c;
}

void write_diagnostics_record(std::ostream& out, const IterationDiagnostics& d) {
    out << "iter=" << d.iteration << " l1_error=" << format_double(d.l1_error)
        << " dual_value=" << format_double(d.dual_value) << " eta=" << format_double(d.eta)
        << " newton_iters=" << d.newton_iterations << " seconds=" << format_double(d.seconds) << '\n';
}

ScalarField smooth_log_ratio(const ScalarField& r, int passes) {
    if (passes < 0) throw std::invalid_argument("smooth_log_ratio: passes must be >= 0");
    const PeriodicGrid& g = r.grid();
    ScalarField cur = r;
    ScalarField tmp(g);
    for (int p = 0; p < passes; ++p) {
        if (g.dim == 1) {
            for (int i = 0; i < g.nx; ++i) {
                tmp[i] = 0.25 * cur.at(i - 1) + 0.5 * cur.at(i) + 0.25 * cur.at(i + 1);
            }
            std::swap(cur, tmp);
            continue;
        }
        for (int j = 0; j < g.nx; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                tmp[g.index(i, j)] = 0.25 * cur.at(i - 1, j) + 0.5 * cur.at(i, j) + 0.25 * cur.at(i + 1, j);
            }
        }
        for (int j = 0; j < g.nx; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                cur[g.index(i, j)] = 0.25 * tmp.at(i, j - 1) + 0.5 * tmp.at(i, j) + 0.25 * tmp.at(i, j + 1);
            }
        }
    }
    return cur;
}

ScalarField sinkhorn_correction(const ScalarField& p1, const ScalarField& mu1, double eta,
                                const SinkhornConfig& config) {
    if (!(p1.grid() == mu1.grid())) throw std::invalid_argument("sinkhorn_correction: grid mismatch");
    ScalarField r(p1.grid());
    const double floor = config.density_floor;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = std::log(std::max(p1[i], floor) / std::max(mu1[i], floor));
    }
    ScalarField s = smooth_log_ratio(r, config.smoothing_passes);
    for (double& v : s.values()) v *= eta;
    return s;
}

ScalarField sinkhorn_update(const ScalarField& phi1, const ScalarField& p1, const ScalarField& mu1, double eta,
                            const SinkhornConfig& config) {
    if (!(phi1.grid() == p1.grid())) throw std::invalid_argument("sinkhorn_update: grid mismatch");
    const ScalarField corr = sinkhorn_correction(p1, mu1, eta, config);
    ScalarField out = phi1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += corr[i];
    return out;
}

double adapt_eta(double eta, double error_now, double error_prev, const SinkhornConfig& config) {
    const double next = error_now > error_prev ? eta * config.eta_down : eta * config.eta_up;
    return std::clamp(next, config.eta_min, config.eta_max);
}

std::vector<double> anderson_weights(const std::deque<AndersonEntry>& history, int m, double regularization) {
    if (history.empty()) throw std::invalid_argument("anderson_step: empty history");
    const std::size_t count = std::min<std::size_t>(history.size(), static_cast<std::size_t>(std::max(m, 1)));
    if (count == 1) return {1.0};
    const std::size_t first = history.size() - count;
    const auto k = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd gram(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const ScalarField& fa = history[first + static_cast<std::size_t>(a)].residual;
        for (Eigen::Index b = a; b < k; ++b) {
            const ScalarField& fb = history[first + static_cast<std::size_t>(b)].residual;
            double s = 0.0;
            for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * fb[i];
            gram(a, b) = s;
            gram(b, a) = s;
        }
    }
    gram.diagonal().array() += regularization;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return {};
    const Eigen::VectorXd y = ldlt.solve(Eigen::VectorXd::Ones(k));
    const double total = y.sum();
    if (!y.allFinite() || !std::isfinite(total) || std::abs(total) < 1e-300) return {};
    const Eigen::VectorXd w = y / total;
    if (!w.allFinite()) return {};
    return {w.data(), w.data() + w.size()};
}

ScalarField anderson_step(const std::deque<AndersonEntry>& history, int m, double regularization) {
    const std::vector<double> w = anderson_weights(history, m, regularization);
    if (w.size() <= 1) return history.back().candidate;
    const std::size_t first = history.size() - w.size();
    ScalarField out(history.back().candidate.grid());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const ScalarField& g = history[first + j].candidate;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[j] * g[i];
    }
    return out;
}

SinkhornSolver::SinkhornSolver(const PeriodicGrid& grid, SinkhornConfig config)
    : grid_(grid), config_(config), hjb_(grid, config.newton), fp_(grid) {
    config_.validate();
}

SinkhornSolver::Pass SinkhornSolver::evaluate(const ScalarField& phi1, const ScalarField& mu0) {
    Pass pass;
    pass.backward = hjb_.solve(phi1);
    pass.p = fp_.solve(mu0, pass.backward.sigma_star);
    return pass;
}

Solution SinkhornSolver::run(const Density& mu0, const Density& mu1, const IterationObserver& observer) {
    if (!(mu0.grid() == grid_) || !(mu1.grid() == grid_)) throw std::invalid_argument("Sinkhorn: grid mismatch");

    Solution best;
    double best_error = std::numeric_limits<double>::infinity();
    ScalarField phi1(grid_);
    double eta = config_.eta0;
    std::deque<AndersonEntry> history;
    std::vector<IterationDiagnostics> diagnostics;

    // Last accepted iterate and its unscaled smoothed log-ratio. With adaptation on, a
    // trial whose error exceeds the accepted one is rejected: eta shrinks, the Anderson
    // history is dropped and the next trial is a plain step from the accepted point.
    ScalarField accepted_phi1(grid_);
    ScalarField accepted_direction(grid_);
    double accepted_error = std::numeric_limits<double>::infinity();
    bool extrapolated = false;

    for (int k = 0; k < config_.max_outer; ++k) {
        const auto start = std::chrono::steady_clock::now();
        Pass pass;
        try {
            pass = evaluate(phi1, mu0);
        } catch (SolverError& e) {
            e.set_outer_iteration(k);
            throw;
        }
        const ScalarField& p1 = pass.p.back();
        const double error = l1_distance(p1, mu1);
        const double dual = dual_value(pass.backward.phi, mu0, phi1, mu1);

        bool accept = true;
        if (config_.adaptive && k > 0) {
            accept = error <= accepted_error || eta <= config_.eta_min;
            // A failed extrapolation says nothing about eta; the plain retry decides.
            if (accept || !extrapolated) eta = adapt_eta(eta, error, accepted_error, config_);
        }

        IterationDiagnostics d;
        d.iteration = k;
        d.l1_error = error;
        d.dual_value = dual;
        d.eta = eta;
        d.newton_iterations = pass.backward.newton_iterations;
        d.accepted = accept;
        d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        diagnostics.push_back(d);
        if (observer) observer(d);

        const bool done = error <= config_.l1_tolerance;
        if (error < best_error || done) {
            best_error = error;
            best.phi = std::move(pass.backward.phi);
            best.sigma_star = std::move(pass.backward.sigma_star);
            best.p = std::move(pass.p);
            best.phi1_final = phi1;
            best.best_iteration = k;
        }
        if (done) {
            best.converged = true;
            break;
        }

        if (!accept) {
            history.clear();
            phi1 = accepted_phi1;
            for (std::size_t i = 0; i < phi1.size(); ++i) phi1[i] += eta * accepted_direction[i];
            extrapolated = false;
            continue;
        }

        const ScalarField& p1_ref = best.best_iteration == k ? best.p.back() : p1;
        ScalarField correction = sinkhorn_correction(p1_ref, mu1, 1.0, config_);
        accepted_phi1 = phi1;
        accepted_direction = correction;
        accepted_error = error;
        for (double& v : correction.values()) v *= eta;
        ScalarField candidate = phi1;
        for (std::size_t i = 0; i < candidate.size(); ++i) candidate[i] += correction[i];

        if (config_.anderson_memory > 0) {
            history.push_back({std::move(candidate), std::move(correction)});
            while (static_cast<int>(history.size()) > config_.anderson_memory) history.pop_front();
            phi1 = anderson_step(history, config_.anderson_memory, config_.anderson_regularization);
            extrapolated = history.size() > 1;
        } else {
            phi1 = std::move(candidate);
        }
    }
    best.diagnostics = std::move(diagnostics);
    return best;
}

Solution run(const Density& mu0, const Density& mu1, const PeriodicGrid& grid, const SinkhornConfig& config) {
    SinkhornSolver solver(grid, config);
    return solver.run(mu0, mu1);
}

}  // namespace semot
