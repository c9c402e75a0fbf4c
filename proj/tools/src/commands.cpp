#include "semot_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "semot/cost.hpp"
#include "semot/errors.hpp"
#include "semot/field_io.hpp"
#include "semot/sinkhorn.hpp"

#ifndef SEMOT_VERSION
#define SEMOT_VERSION "unknown"
#endif

namespace semot::cli {

namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string status;
    std::string message;
    int outer_iteration = -1;
    int time_index = -1;
    double residual = 0.0;
};

class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    /// Opens `name` inside the directory and records it for the manifest.
    std::ofstream open(const std::string& name) {
        std::ofstream out(root_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (root_ / name).string());
        files_.push_back(name);
        return out;
    }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        std::ofstream out = open(name);
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + (root_ / name).string());
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

void write_failure(std::ostream& out, int code, const Failure& f) {
    out << "status=" << f.status << " exit_code=" << code << " outer_iteration=" << f.outer_iteration
        << " time_index=" << f.time_index << " residual=" << format_double(f.residual)
        << " message=" << quoted(f.message) << '\n';
}

int run_solve(const ExperimentConfig& c, OutputDir& dir, std::ostream& log, Failure& failure) {
    const PeriodicGrid grid = make_grid(c.grid.dim, c.grid.nx, c.grid.nt, c.grid.horizon);
    const Density mu0 = build_marginal(*c.mu0, grid);
    const Density mu1 = build_marginal(*c.mu1, grid);
    const SinkhornConfig config = c.sinkhorn.resolve(grid);

    std::ofstream diagnostics = dir.open("diagnostics.txt");
    SinkhornSolver solver(grid, config);
    Solution sol;
    try {
        sol = solver.run(mu0, mu1, [&](const IterationDiagnostics& d) {
            write_diagnostics_record(diagnostics, d);
            diagnostics.flush();
        });
    } catch (const SolverError& e) {
        failure = {"solver_failure", e.what(), e.outer_iteration(), e.time_index(), e.residual()};
        log << "solver failure at outer iteration " << e.outer_iteration() << ": " << e.what() << '\n';
        return exit_solver_failure;
    }

    dir.write("p_final.csv", [&](std::ostream& o) { write_csv(o, sol.p.back()); });
    dir.write("sigma_surface.csv", [&](std::ostream& o) { write_matrix_surface_csv(o, sol.sigma_star); });
    dir.write("phi1_final.csv", [&](std::ostream& o) { write_csv(o, sol.phi1_final); });

    const IterationDiagnostics& best = sol.diagnostics[static_cast<std::size_t>(sol.best_iteration)];
    const double primal = primal_cost(sol.sigma_star, sol.p, ReferenceModel::brownian_reference(grid.dim),
                                      TimeQuadrature::step);
    dir.write("summary.txt", [&](std::ostream& o) {
        o << "converged=" << (sol.converged ? "true" : "false") << " iterations=" << sol.diagnostics.size()
          << " best_iteration=" << sol.best_iteration << " l1_error=" << format_double(best.l1_error)
          << " dual_value=" << format_double(best.dual_value) << " primal_cost=" << format_double(primal)
          << " duality_gap=" << format_double(primal - best.dual_value) << '\n';
    });
    log << to_string(c.grid.dim == 1 ? Command::solve1d : Command::solve2d) << ": " << sol.diagnostics.size()
        << " iterations, best L1 error " << format_double(best.l1_error) << " at iteration " << sol.best_iteration
        << '\n';
    if (!sol.converged) {
        failure = {"not_converged",
                   "L1 error " + format_double(best.l1_error) + " above tolerance " +
                       format_double(config.l1_tolerance) + " after " + std::to_string(config.max_outer) +
                       " iterations",
                   static_cast<int>(sol.diagnostics.size()) - 1};
        return exit_not_converged;
    }
    return exit_ok;
}

MonteCarloOptions mc_options(const PoissonBlock& p) {
    MonteCarloOptions o;
    o.n_paths = p.n_paths;
    o.seed = p.seed;
    o.threads = static_cast<unsigned>(p.threads);
    return o;
}

void run_entropy(const ExperimentConfig& c, OutputDir& dir, std::ostream& log) {
    const PoissonBlock& p = c.poisson;
    const MonteCarloOptions options = mc_options(p);
    const Point x0 = Point::Constant(1, p.x0);

    std::vector<ReportRecord> records;
    double reference = 0.0;
    if (p.modulation == 0.0) {
        const EntropyPair pair = entropy_schemes(p, 1);
        reference = ell_rate(0.0, x0, pair.s1, pair.s2);
    } else {
        const EntropyPair pair = entropy_schemes(p, 1);
        const auto rate = [&pair](double t, const Point& x) { return ell_rate(t, x, pair.s1, pair.s2); };
        const Estimate oracle = euler_diffusion_expectation(pair.sigma1, x0, p.euler_steps, rate, options);
        reference = oracle.mean;
        records.push_back(make_record("euler_oracle", 0, oracle, oracle.mean, p.seed));
    }
    for (int n : p.n_list) {
        const EntropyPair pair = entropy_schemes(p, n);
        records.push_back(make_record("ell_path_integral", n, entropy_estimate(pair.s1, pair.s2, x0, options),
                                      reference, p.seed));
        records.push_back(make_record("girsanov", n, girsanov_entropy_estimate(pair.s1, pair.s2, x0, options),
                                      reference, p.seed));
        log << "entropy-limit: n=" << n << " done\n";
    }
    dir.write("entropy_report.txt", [&](std::ostream& o) {
        for (const ReportRecord& r : records) write_report_record(o, r);
    });
}

void run_moments(const ExperimentConfig& c, OutputDir& dir, std::ostream& log) {
    const PoissonBlock& p = c.poisson;
    const auto d = static_cast<Eigen::Index>(p.sigma_bar.size());
    Matrix sigma_bar = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) sigma_bar(i, i) = p.sigma_bar[static_cast<std::size_t>(i)];
    const SchemeTag tag = p.scheme == "unit-intensity" ? SchemeTag::unit_intensity : SchemeTag::trace_normalized;

    std::vector<ReportRecord> records;
    for (int n : p.n_list) {
        const MomentReport m = moment_checks(JumpScheme::constant_scheme(n, p.lambda, sigma_bar, tag), mc_options(p));
        for (Eigen::Index i = 0; i < d; ++i) {
            const std::string axis = std::to_string(i);
            records.push_back(make_record("mean_" + axis, n, {m.mean(i), m.mean_stderr(i), m.n_paths}, 0.0, p.seed));
            records.push_back(make_record("variance_" + axis, n,
                                          {m.covariance(i, i), m.covariance_stderr(i, i), m.n_paths},
                                          m.expected_covariance(i, i), p.seed));
            records.push_back(make_record("excess_kurtosis_" + axis, n,
                                          {m.excess_kurtosis(i), m.excess_kurtosis_stderr(i), m.n_paths},
                                          m.expected_excess_kurtosis(i), p.seed));
        }
        log << "poisson-moments: n=" << n << " done\n";
    }
    dir.write("moments_report.txt", [&](std::ostream& o) {
        for (const ReportRecord& r : records) write_report_record(o, r);
    });
}

void run_counting(const ExperimentConfig& c, OutputDir& dir, std::ostream& log) {
    const PoissonBlock& p = c.poisson;
    std::vector<ReportRecord> records;
    for (int n : p.n_list) {
        const CountingStatistics s =
            counting_statistics(n, p.interarrivals, p.replicates, p.seed, static_cast<unsigned>(p.threads));
        const double inv = 1.0 / n;
        records.push_back(make_record("interarrival_mean", n,
                                      {s.interarrival_mean, s.interarrival_mean_stderr, s.interarrival_count}, inv,
                                      p.seed));
        records.push_back(make_record("interarrival_variance", n,
                                      {s.interarrival_variance, s.interarrival_variance_stderr, s.interarrival_count},
                                      inv * inv, p.seed));
        records.push_back(make_record("scaled_count_mean", n,
                                      {s.terminal_mean, s.terminal_mean_stderr, s.replicates}, 1.0, p.seed));
        records.push_back(make_record("scaled_count_variance", n,
                                      {s.terminal_variance, s.terminal_variance_stderr, s.replicates}, inv, p.seed));
        log << "ldp-check: n=" << n << " done\n";
    }
    dir.write("counting_report.txt", [&](std::ostream& o) {
        for (const ReportRecord& r : records) write_report_record(o, r);
    });
}

}  // namespace

EntropyPair entropy_schemes(const PoissonBlock& p, int n) {
    const double s = p.sigma1;
    const double a = p.modulation;
    const CovarianceField sigma1 = [s, a](double, const Point& x) {
        return Matrix::Constant(1, 1, s * (1.0 + a * std::sin(2.0 * std::numbers::pi * x(0))));
    };
    const Matrix one = Matrix::Identity(1, 1);
    const ReferenceModel ref = ReferenceModel::brownian_reference(1);
    if (p.scheme == "unit-intensity") {
        JumpScheme s1 = a == 0.0 ? JumpScheme::constant_scheme(n, 1.0, s * one, SchemeTag::unit_intensity)
                                 : JumpScheme::unit_intensity(n, 1, sigma1);
        return {std::move(s1), JumpScheme::constant_scheme(n, 1.0, one, SchemeTag::unit_intensity), sigma1};
    }
    JumpScheme s1 = a == 0.0 ? JumpScheme::constant_scheme(n, s, one, SchemeTag::trace_normalized)
                             : JumpScheme::trace_normalized(n, sigma1, ref, p.lambda_max.value_or(s * (1.0 + a)));
    return {std::move(s1), JumpScheme::reference(n, ref), sigma1};
}

int run_command(Command command, const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig resolved = config;
    resolved.command = command;

    if (const auto errors = validate_for_command(config, command); !errors.empty()) {
        log << ConfigError(errors).what() << '\n';
        return exit_invalid_config;
    }

    std::optional<OutputDir> dir;
    try {
        dir.emplace(resolved.output_dir);
    } catch (const std::exception& e) {
        log << "cannot create output directory " << resolved.output_dir << ": " << e.what() << '\n';
        return exit_runtime_failure;
    }

    int code = exit_ok;
    Failure failure;
    try {
        switch (command) {
        case Command::solve1d:
        case Command::solve2d:
            code = run_solve(resolved, *dir, log, failure);
            break;
        case Command::entropy_limit:
            run_entropy(resolved, *dir, log);
            break;
        case Command::poisson_moments:
            run_moments(resolved, *dir, log);
            break;
        case Command::ldp_check:
            run_counting(resolved, *dir, log);
            break;
        }
    } catch (const std::exception& e) {
        code = exit_runtime_failure;
        failure = {"runtime_failure", e.what()};
        log << "error: " << e.what() << '\n';
    }

    try {
        if (code != exit_ok) {
            dir->write("failure.txt", [&](std::ostream& o) { write_failure(o, code, failure); });
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::vector<std::string> files = dir->files();
        files.push_back("manifest.txt");
        dir->write("manifest.txt", [&](std::ostream& o) {
            o << "semot_version=" << SEMOT_VERSION << '\n';
            o << "command=" << to_string(command) << '\n';
            o << "status=" << (code == exit_ok ? "ok" : failure.status) << '\n';
            o << "exit_code=" << code << '\n';
            o << "seed=" << resolved.poisson.seed << '\n';
            o << "wall_seconds=" << format_double(seconds) << '\n';
            for (const std::string& f : files) o << "file=" << f << '\n';
            o << "--- config\n" << write_config(resolved);
        });
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_runtime_failure;
    }
    return code;
}

}  // namespace semot::cli
