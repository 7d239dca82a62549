#ifndef RISKROUTE_NETWORK_HPP
#define RISKROUTE_NETWORK_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "riskroute/latency.hpp"

namespace riskroute {

using VertexId = int;
using EdgeId = int;

// Edge-id sequence from source to sink.
using Path = std::vector<EdgeId>;

// Per-edge flow, indexed like NetworkInstance::edges().
using EdgeFlow = Eigen::VectorXd;

enum class RiskModel { MeanVar, MeanStdev };

std::string_view to_string(RiskModel model);
RiskModel parse_risk_model(std::string_view text);

struct Edge {
    VertexId tail = 0;
    VertexId head = 0;
    LatencyFn latency;
    // Stored as sigma^2 under both risk models.
    LatencyFn variability;
};

// Single-commodity routing game with stochastic edge delays.  Immutable after
// construction; the constructor rejects invalid ids, s == t, negative demand
// or gamma, and instances without an s-t path.
class NetworkInstance {
public:
    NetworkInstance(int num_vertices, std::vector<Edge> edges, VertexId source,
                    VertexId sink, double demand, double gamma, RiskModel model);

    int num_vertices() const { return num_vertices_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeId e) const;
    VertexId source() const { return source_; }
    VertexId sink() const { return sink_; }
    double demand() const { return demand_; }
    double gamma() const { return gamma_; }
    RiskModel risk_model() const { return model_; }

    // Outgoing edge ids of v, ascending.
    const std::vector<EdgeId>& out_edges(VertexId v) const { return out_[static_cast<std::size_t>(v)]; }
    const std::vector<EdgeId>& in_edges(VertexId v) const { return in_[static_cast<std::size_t>(v)]; }

    NetworkInstance with_demand(double demand) const;
    NetworkInstance with_gamma(double gamma) const;
    NetworkInstance with_risk_model(RiskModel model) const;
    NetworkInstance with_edges(std::vector<Edge> edges) const;

    EdgeFlow zero_flow() const { return EdgeFlow::Zero(num_edges()); }

private:
    int num_vertices_;
    std::vector<Edge> edges_;
    VertexId source_;
    VertexId sink_;
    double demand_;
    double gamma_;
    RiskModel model_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
};

bool operator==(const NetworkInstance& a, const NetworkInstance& b);

// Flow decomposed over explicit paths.
struct PathFlow {
    std::vector<Path> paths;
    Eigen::VectorXd amounts;

    double total() const { return amounts.sum(); }
};

// Mean latencies l_e(f_e) and variances sigma_e^2(f_e) at a flow.
Eigen::VectorXd mean_latencies(const NetworkInstance& inst, const EdgeFlow& flow);
Eigen::VectorXd variances(const NetworkInstance& inst, const EdgeFlow& flow);

// Additive edge costs l_e + gamma * sigma_e^2.
Eigen::VectorXd meanvar_edge_costs(const NetworkInstance& inst, const EdgeFlow& flow,
                                   double gamma);

// Throws StructuralError unless `path` is a simple s-t path of known edges.
void validate_path(const NetworkInstance& inst, const Path& path);

// Vertex sequence visited by a path (starts at the source).
std::vector<VertexId> path_vertices(const NetworkInstance& inst, const Path& path);

std::string format_path(const Path& path);

double path_mean_latency(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow);
double path_variance(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow);

// Q_p under the instance's risk model: mean + gamma * variance (MeanVar) or
// mean + gamma * sqrt(variance) (MeanStdev).
double path_cost(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow);
double path_cost(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow,
                 double gamma);

// Sum_e f_e l_e(f_e); variances never enter.
double social_cost(const NetworkInstance& inst, const EdgeFlow& flow);

EdgeFlow induced_edge_flow(const NetworkInstance& inst, const PathFlow& pf);

// Edge-by-path 0/1 matrix; column j is the incidence vector of paths[j].
Eigen::MatrixXd path_incidence(const NetworkInstance& inst, const std::vector<Path>& paths);

// All simple s-t paths, lexicographic by edge-id sequence.  Throws
// PathCapExceeded when more than `cap` exist.
std::vector<Path> enumerate_paths(const NetworkInstance& inst, std::size_t cap);

// Largest violation of nonnegativity, conservation, or demand at the source.
double feasibility_violation(const NetworkInstance& inst, const EdgeFlow& flow);

}  // namespace riskroute

#endif
