#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "semot/jump_scheme.hpp"
#include "semot/poisson.hpp"
#include "semot_cli/config.hpp"

namespace semot::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_invalid_config = 2,
    exit_not_converged = 3,
    exit_solver_failure = 4,
    exit_runtime_failure = 5,
};

/// The scheme pair of the entropy experiments: Sigma_1(x) = sigma1 (1 + modulation sin 2 pi x)
/// Poissonized per `poisson.scheme`, against the matching Brownian reference scheme.
struct EntropyPair {
    JumpScheme s1;
    JumpScheme s2;
    CovarianceField sigma1;
};

EntropyPair entropy_schemes(const PoissonBlock& poisson, int n);

/// Validates `config` for `command`, runs it and writes every output under
/// config.output_dir. Progress and errors go to `log`.
int run_command(Command command, const ExperimentConfig& config, std::ostream& log);

}  // namespace semot::cli
