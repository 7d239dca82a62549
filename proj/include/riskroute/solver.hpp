#ifndef RISKROUTE_SOLVER_HPP
#define RISKROUTE_SOLVER_HPP

#include <cstddef>
#include <functional>

#include "riskroute/network.hpp"

namespace riskroute {

enum class StepRule {
    // Pairwise conditional gradient: shift flow from the costliest used path
    // to the all-or-nothing best response, step chosen by exact line search.
    ExactLineSearch,
    // Classic Frank-Wolfe / method of successive averages, step 1/(k+1).
    SuccessiveAverages,
};

struct SolverConfig {
    // Relative VI residual at which iteration stops.
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    // Only used by the path-based (mean-stdev) solver and the brute-force oracle.
    std::size_t path_cap = 4096;
    StepRule step_rule = StepRule::ExactLineSearch;
    // Called with (iteration, flow) after every step; for tests and tracing.
    std::function<void(std::size_t, const EdgeFlow&)> observer;

    void validate() const;
};

struct EquilibriumResult {
    EdgeFlow flow;
    PathFlow path_flow;
    // Cheapest path cost at `flow` (Q^gamma for risk-averse solves, the mean
    // latency for risk-neutral ones).
    double common_cost = 0.0;
    // Relative gap (sum_p h_p Q_p - d min_q Q_q) / sum_p h_p Q_p.
    double vi_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Risk-neutral equilibrium (gamma = 0) by conditional gradient on the
// Beckmann potential.  Non-convergence is reported, not thrown.
EquilibriumResult solve_rnwe(const NetworkInstance& inst, const SolverConfig& cfg = {});

// Risk-averse equilibrium for additive costs l_e + gamma sigma_e^2.
EquilibriumResult solve_rawe_meanvar(const NetworkInstance& inst, const SolverConfig& cfg = {});

// Risk-averse equilibrium for the non-additive mean + gamma * stdev path cost,
// over the explicitly enumerated path set.
EquilibriumResult solve_rawe_meanstdev(const NetworkInstance& inst, const SolverConfig& cfg = {});

// Dispatches on the instance's risk model.
EquilibriumResult solve_rawe(const NetworkInstance& inst, const SolverConfig& cfg = {});

// sum_e f_e c_e(f_e) - d * (shortest path under c(f)), c_e = l_e + gamma_effective * sigma_e^2.
// Absolute, nonnegative up to rounding; only meaningful for additive costs.
double vi_residual(const NetworkInstance& inst, const EdgeFlow& flow, double gamma_effective);

// Same gap divided by sum_e f_e c_e(f_e) (0 when that sum is 0).
double relative_vi_residual(const NetworkInstance& inst, const EdgeFlow& flow,
                            double gamma_effective);

// sum_e int_0^{f_e} (l_e + gamma sigma_e^2)(u) du
double beckmann_potential(const NetworkInstance& inst, const EdgeFlow& flow, double gamma);

// max over paths carrying more than `used_threshold` of Q_p(flow), minus the
// minimum of Q_q(flow) over every s-t path.  Works for either risk model.
double path_cost_gap(const NetworkInstance& inst, const PathFlow& pf,
                     double used_threshold = 0.0, std::size_t path_cap = 4096);

// Independent oracle for instances with at most four s-t paths: grid search
// over the path-flow simplex followed by compass-search refinement of the
// projection residual |h - P(h - Q(h))|.
EquilibriumResult brute_force_equilibrium(const NetworkInstance& inst, std::size_t grid);

}  // namespace riskroute

#endif
