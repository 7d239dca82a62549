#include "riskroute/shortest_path.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

struct Label {
    double cost = std::numeric_limits<double>::infinity();
    int hops = std::numeric_limits<int>::max();

    bool operator<(const Label& o) const { return std::tie(cost, hops) < std::tie(o.cost, o.hops); }
};

}  // namespace

ShortestPath shortest_path(const NetworkInstance& inst, const Eigen::VectorXd& edge_costs)
{
    const auto n = static_cast<std::size_t>(inst.num_vertices());
    if (edge_costs.size() != inst.num_edges()) {
        throw StructuralError("edge cost vector length does not match the edge count");
    }
    if (edge_costs.size() > 0 && edge_costs.minCoeff() < 0.0) {
        throw ParameterError("shortest_path needs nonnegative edge costs");
    }

    // Distances to the sink, via Dijkstra on the reversed graph.
    std::vector<Label> dist(n);
    std::vector<EdgeId> next_edge(n, -1);
    using Item = std::pair<Label, VertexId>;
    auto cmp = [](const Item& a, const Item& b) { return b.first < a.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    dist[static_cast<std::size_t>(inst.sink())] = {0.0, 0};
    heap.push({dist[static_cast<std::size_t>(inst.sink())], inst.sink()});
    while (!heap.empty()) {
        const auto [label, v] = heap.top();
        heap.pop();
        if (dist[static_cast<std::size_t>(v)] < label) {
            continue;
        }
        for (EdgeId e : inst.in_edges(v)) {
            const VertexId u = inst.edge(e).tail;
            const Label cand{label.cost + edge_costs[e], label.hops + 1};
            if (cand < dist[static_cast<std::size_t>(u)]) {
                dist[static_cast<std::size_t>(u)] = cand;
                next_edge[static_cast<std::size_t>(u)] = e;
                heap.push({cand, u});
            }
        }
    }
    const Label& at_source = dist[static_cast<std::size_t>(inst.source())];
    if (!std::isfinite(at_source.cost)) {
        throw StructuralError("sink is not reachable from source");
    }

    // Greedy walk over near-tight edges for the lexicographic tie-break.
    ShortestPath out;
    std::vector<char> visited(n, 0);
    VertexId at = inst.source();
    visited[static_cast<std::size_t>(at)] = 1;
    bool dead_end = false;
    while (at != inst.sink()) {
        double best = std::numeric_limits<double>::infinity();
        for (EdgeId e : inst.out_edges(at)) {
            const VertexId w = inst.edge(e).head;
            if (!visited[static_cast<std::size_t>(w)]) {
                best = std::min(best, edge_costs[e] + dist[static_cast<std::size_t>(w)].cost);
            }
        }
        if (!std::isfinite(best)) {
            dead_end = true;
            break;
        }
        const double slack = 1e-12 * std::max(1.0, std::abs(best));
        EdgeId pick = -1;
        int pick_hops = std::numeric_limits<int>::max();
        for (EdgeId e : inst.out_edges(at)) {
            const VertexId w = inst.edge(e).head;
            const Label& dw = dist[static_cast<std::size_t>(w)];
            if (visited[static_cast<std::size_t>(w)] || edge_costs[e] + dw.cost > best + slack) {
                continue;
            }
            if (dw.hops < pick_hops) {
                pick = e;
                pick_hops = dw.hops;
            }
        }
        out.path.push_back(pick);
        at = inst.edge(pick).head;
        visited[static_cast<std::size_t>(at)] = 1;
    }
    if (dead_end) {
        out.path.clear();
        for (VertexId v = inst.source(); v != inst.sink();) {
            const EdgeId e = next_edge[static_cast<std::size_t>(v)];
            out.path.push_back(e);
            v = inst.edge(e).head;
        }
    }
    out.cost = 0.0;
    for (EdgeId e : out.path) {
        out.cost += edge_costs[e];
    }
    return out;
}

}  // namespace riskroute
