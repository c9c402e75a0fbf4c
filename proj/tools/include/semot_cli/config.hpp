#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semot/grid.hpp"
#include "semot/sinkhorn.hpp"

namespace semot::cli {

enum class Command { solve1d, solve2d, entropy_limit, poisson_moments, ldp_check };

std::optional<Command> parse_command(std::string_view name);
std::string to_string(Command command);

struct GridBlock {
    int dim = 1;
    int nx = 128;
    int nt = 80;
    double horizon = 0.1;

    bool operator==(const GridBlock&) const = default;
};

/// A named density constructor. Only the parameters of `type` are read or written:
/// gaussian (center, sd, angle in 2D), mixture (q, d1, s0, s1), uniform.
struct MarginalSpec {
    std::string type = "uniform";
    std::vector<double> center;
    std::vector<double> sd;
    double angle = 0.0;
    double q = 0.0;
    double d1 = 0.0;
    double s0 = 0.0;
    double s1 = 0.0;

    bool operator==(const MarginalSpec&) const = default;
};

struct SinkhornBlock {
    /// Empty means eta0 = dt of the grid.
    std::optional<double> eta0;
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
    double newton_tol = 1e-10;
    int newton_max_iter = 50;

    bool operator==(const SinkhornBlock&) const = default;

    SinkhornConfig resolve(const PeriodicGrid& grid) const;
};

struct PoissonBlock {
    std::string scheme = "trace-normalized";
    /// Target covariance Sigma_1(x) = sigma1 * (1 + modulation * sin(2 pi x)) in 1D,
    /// against a Brownian reference.
    double sigma1 = 2.0;
    double modulation = 0.0;
    double x0 = 0.0;
    /// Constant scheme for poisson-moments: intensity factor and diagonal mark covariance.
    double lambda = 1.0;
    std::vector<double> sigma_bar{1.0};
    std::vector<int> n_list{25, 100, 400};
    std::uint64_t n_paths = 10000;
    std::uint64_t seed = 1;
    /// Empty means sigma1 * (1 + modulation).
    std::optional<double> lambda_max;
    int threads = 0;
    int euler_steps = 1000;
    std::uint64_t interarrivals = 100000;
    std::uint64_t replicates = 10000;

    bool operator==(const PoissonBlock&) const = default;
};

struct ExperimentConfig {
    std::optional<Command> command;
    GridBlock grid;
    std::optional<MarginalSpec> mu0;
    std::optional<MarginalSpec> mu1;
    SinkhornBlock sinkhorn;
    PoissonBlock poisson;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Carries every problem found, one message per entry, each prefixed by its key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_string(const std::string& text);

/// Canonical YAML form; parse_config_string(write_config(c)) == c.
std::string write_config(const ExperimentConfig& config);

/// Range checks that need the command (grid dimension, required marginals).
std::vector<std::string> validate_for_command(const ExperimentConfig& config, Command command);

Density build_marginal(const MarginalSpec& spec, const PeriodicGrid& grid);

}  // namespace semot::cli
