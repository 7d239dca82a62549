#ifndef RISKROUTE_TEST_HELPERS_HPP
#define RISKROUTE_TEST_HELPERS_HPP

#include <vector>

#include "riskroute/network.hpp"

namespace testing {

using riskroute::Edge;
using riskroute::LatencyFn;
using riskroute::NetworkInstance;
using riskroute::RiskModel;

// Two parallel s-t links with the given functions.
inline NetworkInstance two_links(LatencyFn l1, LatencyFn v1, LatencyFn l2, LatencyFn v2, double demand = 1.0,
                                 double gamma = 0.0, RiskModel model = RiskModel::MeanVar)
{
    std::vector<Edge> edges{{0, 1, std::move(l1), std::move(v1)}, {0, 1, std::move(l2), std::move(v2)}};
    return {2, std::move(edges), 0, 1, demand, gamma, model};
}

// l1 = 1, l2 = x, no variance.
inline NetworkInstance pigou(double demand = 1.0)
{
    return two_links(LatencyFn::constant(1.0), LatencyFn::constant(0.0), LatencyFn::affine(1.0, 0.0),
                     LatencyFn::constant(0.0), demand);
}

// s -> m -> t over two edges.
inline NetworkInstance series(LatencyFn l1, LatencyFn v1, LatencyFn l2, LatencyFn v2, double gamma,
                              RiskModel model)
{
    std::vector<Edge> edges{{0, 1, std::move(l1), std::move(v1)}, {1, 2, std::move(l2), std::move(v2)}};
    return {3, std::move(edges), 0, 2, 1.0, gamma, model};
}

}  // namespace testing

#endif
