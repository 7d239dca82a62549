#ifndef RISKROUTE_SHORTEST_PATH_HPP
#define RISKROUTE_SHORTEST_PATH_HPP

#include <Eigen/Dense>

#include "riskroute/network.hpp"

namespace riskroute {

struct ShortestPath {
    Path path;
    double cost = 0.0;
};

// Minimum-cost s-t path under nonnegative edge costs.  Among paths whose cost
// is within a relative 1e-12 of the optimum the fewest-edge ones are kept and
// the lexicographically smallest edge-id sequence wins.
ShortestPath shortest_path(const NetworkInstance& inst, const Eigen::VectorXd& edge_costs);

}  // namespace riskroute

#endif
