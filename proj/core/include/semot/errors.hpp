#pragma once

#include <stdexcept>
#include <string>

namespace semot {

/// Failure of an inner numerical solver (Newton, linear solve). Carries the
/// time slice and outer iteration where it happened when known (-1 otherwise).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int time_index = -1, double residual = 0.0)
        : std::runtime_error(what), time_index_(time_index), residual_(residual) {}

    int time_index() const { return time_index_; }
    double residual() const { return residual_; }
    int outer_iteration() const { return outer_iteration_; }
    void set_outer_iteration(int k) { outer_iteration_ = k; }

private:
    int time_index_;
    double residual_;
    int outer_iteration_ = -1;
};

}  // namespace semot
