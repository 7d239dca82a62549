#include "riskroute/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "riskroute/errors.hpp"
#include "riskroute/shortest_path.hpp"

namespace riskroute {

void SolverConfig::validate() const
{
    if (!(tolerance > 0.0)) {
        throw ParameterError("solver tolerance must be positive");
    }
    if (max_iterations < 1) {
        throw ParameterError("solver needs at least one iteration");
    }
    if (path_cap < 1) {
        throw ParameterError("path cap must be at least 1");
    }
}

namespace {

// Paths that have carried flow at some point, with their current weights.
struct ActiveSet {
    std::vector<Path> paths;
    std::vector<double> weights;
    std::map<Path, std::size_t> index;

    std::size_t add(const Path& p)
    {
        const auto [it, inserted] = index.emplace(p, paths.size());
        if (inserted) {
            paths.push_back(p);
            weights.push_back(0.0);
        }
        return it->second;
    }

    EdgeFlow flow(const NetworkInstance& inst) const
    {
        EdgeFlow f = inst.zero_flow();
        for (std::size_t j = 0; j < paths.size(); ++j) {
            if (weights[j] > 0.0) {
                for (EdgeId e : paths[j]) {
                    f[e] += weights[j];
                }
            }
        }
        return f;
    }

    PathFlow used() const
    {
        PathFlow pf;
        std::vector<double> amounts;
        for (std::size_t j = 0; j < paths.size(); ++j) {
            if (weights[j] > 0.0) {
                pf.paths.push_back(paths[j]);
                amounts.push_back(weights[j]);
            }
        }
        pf.amounts = Eigen::Map<const Eigen::VectorXd>(amounts.data(),
                                                       static_cast<Eigen::Index>(amounts.size()));
        return pf;
    }
};

// How path costs and best responses are evaluated for one equilibrium notion.
struct CostModel {
    std::function<double(const Path&, const EdgeFlow&)> path_cost;
    std::function<ShortestPath(const EdgeFlow&)> best_response;
};

EdgeFlow incidence_difference(const NetworkInstance& inst, const Path& plus, const Path& minus)
{
    EdgeFlow diff = inst.zero_flow();
    for (EdgeId e : plus) {
        diff[e] += 1.0;
    }
    for (EdgeId e : minus) {
        diff[e] -= 1.0;
    }
    return diff;
}

// Largest shift in [0, cap] that does not overshoot the point where the
// donor path stops being costlier than the receiver.  `excess(delta)` is
// non-increasing because the donor's edges only lose flow.
template <class Excess>
double equalizing_shift(Excess excess, double cap)
{
    if (excess(cap) >= 0.0) {
        return cap;
    }
    double lo = 0.0;
    double hi = cap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (excess(mid) >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

EquilibriumResult run_conditional_gradient(const NetworkInstance& inst, const SolverConfig& cfg,
                                           const CostModel& model)
{
    cfg.validate();
    const double demand = inst.demand();
    EquilibriumResult res;
    ActiveSet set;
    EdgeFlow flow = inst.zero_flow();

    if (demand == 0.0) {
        res.flow = flow;
        res.path_flow.amounts = Eigen::VectorXd(0);
        res.common_cost = model.best_response(flow).cost;
        res.converged = true;
        return res;
    }

    const ShortestPath start = model.best_response(flow);
    const std::size_t first = set.add(start.path);
    set.weights[first] = demand;
    flow = set.flow(inst);

    for (std::size_t iter = 0;; ++iter) {
        const ShortestPath best = model.best_response(flow);
        double total = 0.0;
        double worst_cost = -std::numeric_limits<double>::infinity();
        std::size_t worst = 0;
        for (std::size_t j = 0; j < set.paths.size(); ++j) {
            if (set.weights[j] <= 0.0) {
                continue;
            }
            const double q = model.path_cost(set.paths[j], flow);
            total += set.weights[j] * q;
            if (q > worst_cost) {
                worst_cost = q;
                worst = j;
            }
        }
        const double gap = std::max(0.0, total - demand * best.cost);
        const double rel = total > 0.0 ? gap / total : gap;
        const double excess = worst_cost - best.cost;
        const double scale = best.cost > 0.0 ? best.cost : 1.0;

        res.iterations = iter;
        res.vi_residual = rel;
        res.common_cost = best.cost;
        res.converged = rel <= cfg.tolerance
                        && (cfg.step_rule == StepRule::SuccessiveAverages
                            || excess <= cfg.tolerance * scale);
        if (res.converged || iter >= cfg.max_iterations) {
            break;
        }

        const std::size_t target = set.add(best.path);
        if (cfg.step_rule == StepRule::ExactLineSearch) {
            if (target == worst) {
                // Every used path already costs the minimum; only rounding
                // keeps the relative gap above tolerance.
                res.converged = rel <= cfg.tolerance;
                break;
            }
            const Path& donor = set.paths[worst];
            const Path& receiver = set.paths[target];
            const EdgeFlow diff = incidence_difference(inst, receiver, donor);
            const double shift = equalizing_shift(
                [&](double delta) {
                    const EdgeFlow moved = flow + delta * diff;
                    return model.path_cost(donor, moved) - model.path_cost(receiver, moved);
                },
                set.weights[worst]);
            if (shift >= set.weights[worst]) {
                set.weights[target] += set.weights[worst];
                set.weights[worst] = 0.0;
            } else {
                set.weights[worst] -= shift;
                set.weights[target] += shift;
            }
        } else {
            const double step = 1.0 / static_cast<double>(iter + 2);
            for (double& w : set.weights) {
                w *= 1.0 - step;
            }
            set.weights[target] += step * demand;
        }
        flow = set.flow(inst);
        if (cfg.observer) {
            cfg.observer(iter + 1, flow);
        }
    }

    res.flow = flow;
    res.path_flow = set.used();
    return res;
}

CostModel additive_model(const NetworkInstance& inst, double gamma)
{
    CostModel m;
    m.path_cost = [&inst, gamma](const Path& p, const EdgeFlow& f) {
        double acc = 0.0;
        for (EdgeId e : p) {
            const Edge& edge = inst.edge(e);
            acc += edge.latency(f[e]);
            if (gamma != 0.0) {
                acc += gamma * edge.variability(f[e]);
            }
        }
        return acc;
    };
    m.best_response = [&inst, gamma](const EdgeFlow& f) {
        return shortest_path(inst, meanvar_edge_costs(inst, f, gamma));
    };
    return m;
}

ShortestPath cheapest_listed_path(const NetworkInstance& inst, const std::vector<Path>& paths,
                                  const EdgeFlow& flow, double gamma)
{
    ShortestPath best;
    best.cost = std::numeric_limits<double>::infinity();
    for (const Path& p : paths) {
        const double q = path_cost(inst, p, flow, gamma);
        if (q < best.cost) {
            best.cost = q;
            best.path = p;
        }
    }
    return best;
}

// Euclidean projection onto {h >= 0, sum h = total}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double total)
{
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double candidate = (cumulative - total) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) {
            shift = candidate;
        }
    }
    return (v.array() - shift).max(0.0).matrix();
}

}  // namespace

EquilibriumResult solve_rnwe(const NetworkInstance& inst, const SolverConfig& cfg)
{
    return run_conditional_gradient(inst, cfg, additive_model(inst, 0.0));
}

EquilibriumResult solve_rawe_meanvar(const NetworkInstance& inst, const SolverConfig& cfg)
{
    if (inst.risk_model() != RiskModel::MeanVar) {
        throw ParameterError("solve_rawe_meanvar needs a mean-var instance");
    }
    return run_conditional_gradient(inst, cfg, additive_model(inst, inst.gamma()));
}

EquilibriumResult solve_rawe_meanstdev(const NetworkInstance& inst, const SolverConfig& cfg)
{
    if (inst.risk_model() != RiskModel::MeanStdev) {
        throw ParameterError("solve_rawe_meanstdev needs a mean-stdev instance");
    }
    cfg.validate();
    const std::vector<Path> paths = enumerate_paths(inst, cfg.path_cap);
    const double gamma = inst.gamma();
    CostModel m;
    m.path_cost = [&inst, gamma](const Path& p, const EdgeFlow& f) {
        return path_cost(inst, p, f, gamma);
    };
    m.best_response = [&inst, &paths, gamma](const EdgeFlow& f) {
        return cheapest_listed_path(inst, paths, f, gamma);
    };
    return run_conditional_gradient(inst, cfg, m);
}

EquilibriumResult solve_rawe(const NetworkInstance& inst, const SolverConfig& cfg)
{
    return inst.risk_model() == RiskModel::MeanVar ? solve_rawe_meanvar(inst, cfg)
                                                   : solve_rawe_meanstdev(inst, cfg);
}

double vi_residual(const NetworkInstance& inst, const EdgeFlow& flow, double gamma_effective)
{
    const Eigen::VectorXd costs = meanvar_edge_costs(inst, flow, gamma_effective);
    const double total = flow.dot(costs);
    const double best = shortest_path(inst, costs).cost;
    return std::max(0.0, total - inst.demand() * best);
}

double relative_vi_residual(const NetworkInstance& inst, const EdgeFlow& flow,
                            double gamma_effective)
{
    const Eigen::VectorXd costs = meanvar_edge_costs(inst, flow, gamma_effective);
    const double total = flow.dot(costs);
    if (total <= 0.0) {
        return 0.0;
    }
    return vi_residual(inst, flow, gamma_effective) / total;
}

double beckmann_potential(const NetworkInstance& inst, const EdgeFlow& flow, double gamma)
{
    double acc = 0.0;
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
        const Edge& edge = inst.edge(e);
        acc += edge.latency.integral(flow[e]);
        if (gamma != 0.0) {
            acc += gamma * edge.variability.integral(flow[e]);
        }
    }
    return acc;
}

double path_cost_gap(const NetworkInstance& inst, const PathFlow& pf, double used_threshold,
                     std::size_t path_cap)
{
    const EdgeFlow flow = induced_edge_flow(inst, pf);
    const std::vector<Path> all = enumerate_paths(inst, path_cap);
    const double best = cheapest_listed_path(inst, all, flow, inst.gamma()).cost;
    double worst = best;
    for (std::size_t j = 0; j < pf.paths.size(); ++j) {
        if (pf.amounts[static_cast<Eigen::Index>(j)] > used_threshold) {
            worst = std::max(worst, path_cost(inst, pf.paths[j], flow));
        }
    }
    return worst - best;
}

EquilibriumResult brute_force_equilibrium(const NetworkInstance& inst, std::size_t grid)
{
    if (grid < 1) {
        throw ParameterError("grid resolution must be at least 1");
    }
    const std::vector<Path> paths = enumerate_paths(inst, 4);
    const auto k = static_cast<Eigen::Index>(paths.size());
    const Eigen::MatrixXd incidence = path_incidence(inst, paths);
    const double demand = inst.demand();
    std::size_t evaluations = 0;

    auto costs_at = [&](const Eigen::VectorXd& h) {
        const EdgeFlow flow = incidence * h;
        Eigen::VectorXd q(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            q[j] = path_cost(inst, paths[static_cast<std::size_t>(j)], flow);
        }
        return q;
    };
    auto merit = [&](const Eigen::VectorXd& h) {
        ++evaluations;
        return (h - project_to_simplex(h - costs_at(h), demand)).squaredNorm();
    };

    // Grid pass: every composition of `grid` into k nonnegative parts.
    struct Candidate {
        double value;
        Eigen::VectorXd h;
    };
    std::vector<Candidate> best;
    const std::size_t keep = 4;
    std::vector<std::size_t> parts(static_cast<std::size_t>(k), 0);
    auto consider = [&](const Eigen::VectorXd& h) {
        const double v = merit(h);
        if (best.size() < keep || v < best.back().value) {
            best.push_back({v, h});
            std::sort(best.begin(), best.end(),
                      [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
            if (best.size() > keep) {
                best.pop_back();
            }
        }
    };
    auto compose = [&](auto&& self, std::size_t slot, std::size_t remaining) -> void {
        if (slot + 1 == parts.size()) {
            parts[slot] = remaining;
            Eigen::VectorXd h(k);
            for (Eigen::Index j = 0; j < k; ++j) {
                h[j] = demand * static_cast<double>(parts[static_cast<std::size_t>(j)])
                       / static_cast<double>(grid);
            }
            consider(h);
            return;
        }
        for (std::size_t take = 0; take <= remaining; ++take) {
            parts[slot] = take;
            self(self, slot + 1, remaining - take);
        }
    };
    compose(compose, 0, grid);

    // Compass search along pairwise transfers, halving the step on failure.
    const double min_step = 1e-14 * std::max(demand, 1e-300);
    for (Candidate& c : best) {
        double step = demand / static_cast<double>(grid);
        while (step > min_step && demand > 0.0) {
            bool improved = false;
            for (Eigen::Index from = 0; from < k && !improved; ++from) {
                for (Eigen::Index to = 0; to < k && !improved; ++to) {
                    if (from == to || c.h[from] <= 0.0) {
                        continue;
                    }
                    Eigen::VectorXd trial = c.h;
                    const double moved = std::min(step, trial[from]);
                    trial[from] -= moved;
                    trial[to] += moved;
                    const double v = merit(trial);
                    if (v < c.value) {
                        c = {v, trial};
                        improved = true;
                    }
                }
            }
            if (!improved) {
                step *= 0.5;
            }
        }
    }
    const Candidate& winner = *std::min_element(
        best.begin(), best.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

    EquilibriumResult res;
    res.path_flow.paths = paths;
    res.path_flow.amounts = winner.h;
    res.flow = incidence * winner.h;
    const Eigen::VectorXd q = costs_at(winner.h);
    res.common_cost = q.minCoeff();
    const double total = winner.h.dot(q);
    const double gap = std::max(0.0, total - demand * res.common_cost);
    res.vi_residual = total > 0.0 ? gap / total : gap;
    res.iterations = evaluations;
    double excess = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (winner.h[j] > 1e-9 * demand) {
            excess = std::max(excess, q[j] - res.common_cost);
        }
    }
    res.converged = excess <= 1e-7 * std::max(res.common_cost, 1.0);
    return res;
}

}  // namespace riskroute
