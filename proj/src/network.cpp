#include "riskroute/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

std::string_view to_string(RiskModel model)
{
    return model == RiskModel::MeanVar ? "mean-var" : "mean-stdev";
}

RiskModel parse_risk_model(std::string_view text)
{
    if (text == "mean-var") {
        return RiskModel::MeanVar;
    }
    if (text == "mean-stdev") {
        return RiskModel::MeanStdev;
    }
    throw ParseError("unknown risk model '" + std::string(text) + "'");
}

NetworkInstance::NetworkInstance(int num_vertices, std::vector<Edge> edges, VertexId source,
                                 VertexId sink, double demand, double gamma, RiskModel model)
    : num_vertices_(num_vertices),
      edges_(std::move(edges)),
      source_(source),
      sink_(sink),
      demand_(demand),
      gamma_(gamma),
      model_(model)
{
    if (num_vertices_ < 2) {
        throw StructuralError("an instance needs at least two vertices");
    }
    auto valid = [this](VertexId v) { return v >= 0 && v < num_vertices_; };
    if (!valid(source_) || !valid(sink_)) {
        throw StructuralError("source or sink is not a vertex");
    }
    if (source_ == sink_) {
        throw StructuralError("source and sink coincide");
    }
    if (!std::isfinite(demand_) || demand_ < 0.0) {
        throw ParameterError("demand must be finite and nonnegative");
    }
    if (!std::isfinite(gamma_) || gamma_ < 0.0) {
        throw ParameterError("gamma must be finite and nonnegative");
    }
    out_.assign(static_cast<std::size_t>(num_vertices_), {});
    in_.assign(static_cast<std::size_t>(num_vertices_), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        if (!valid(edge.tail) || !valid(edge.head)) {
            throw StructuralError("edge " + std::to_string(e) + " has an endpoint outside the vertex range");
        }
        out_[static_cast<std::size_t>(edge.tail)].push_back(static_cast<EdgeId>(e));
        in_[static_cast<std::size_t>(edge.head)].push_back(static_cast<EdgeId>(e));
    }

    std::vector<char> seen(static_cast<std::size_t>(num_vertices_), 0);
    std::vector<VertexId> stack{source_};
    seen[static_cast<std::size_t>(source_)] = 1;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : out_[static_cast<std::size_t>(v)]) {
            const VertexId w = edges_[static_cast<std::size_t>(e)].head;
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
        }
    }
    if (!seen[static_cast<std::size_t>(sink_)]) {
        throw StructuralError("sink is not reachable from source");
    }
}

const Edge& NetworkInstance::edge(EdgeId e) const
{
    if (e < 0 || e >= num_edges()) {
        throw StructuralError("unknown edge id " + std::to_string(e));
    }
    return edges_[static_cast<std::size_t>(e)];
}

NetworkInstance NetworkInstance::with_demand(double demand) const
{
    return {num_vertices_, edges_, source_, sink_, demand, gamma_, model_};
}

NetworkInstance NetworkInstance::with_gamma(double gamma) const
{
    return {num_vertices_, edges_, source_, sink_, demand_, gamma, model_};
}

NetworkInstance NetworkInstance::with_risk_model(RiskModel model) const
{
    return {num_vertices_, edges_, source_, sink_, demand_, gamma_, model};
}

NetworkInstance NetworkInstance::with_edges(std::vector<Edge> edges) const
{
    return {num_vertices_, std::move(edges), source_, sink_, demand_, gamma_, model_};
}

bool operator==(const NetworkInstance& a, const NetworkInstance& b)
{
    if (a.num_vertices() != b.num_vertices() || a.source() != b.source() || a.sink() != b.sink()
        || a.demand() != b.demand() || a.gamma() != b.gamma()
        || a.risk_model() != b.risk_model() || a.num_edges() != b.num_edges()) {
        return false;
    }
    for (EdgeId e = 0; e < a.num_edges(); ++e) {
        const Edge& x = a.edge(e);
        const Edge& y = b.edge(e);
        if (x.tail != y.tail || x.head != y.head || !(x.latency == y.latency)
            || !(x.variability == y.variability)) {
            return false;
        }
    }
    return true;
}

Eigen::VectorXd mean_latencies(const NetworkInstance& inst, const EdgeFlow& flow)
{
    Eigen::VectorXd out(inst.num_edges());
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
        out[e] = inst.edge(e).latency(flow[e]);
    }
    return out;
}

Eigen::VectorXd variances(const NetworkInstance& inst, const EdgeFlow& flow)
{
    Eigen::VectorXd out(inst.num_edges());
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
        out[e] = inst.edge(e).variability(flow[e]);
    }
    return out;
}

Eigen::VectorXd meanvar_edge_costs(const NetworkInstance& inst, const EdgeFlow& flow,
                                   double gamma)
{
    if (gamma == 0.0) {
        return mean_latencies(inst, flow);
    }
    return mean_latencies(inst, flow) + gamma * variances(inst, flow);
}

void validate_path(const NetworkInstance& inst, const Path& path)
{
    if (path.empty()) {
        throw StructuralError("empty path");
    }
    std::vector<char> seen(static_cast<std::size_t>(inst.num_vertices()), 0);
    VertexId at = inst.source();
    seen[static_cast<std::size_t>(at)] = 1;
    for (EdgeId e : path) {
        const Edge& edge = inst.edge(e);
        if (edge.tail != at) {
            throw StructuralError("path " + format_path(path) + " is not contiguous at edge "
                                  + std::to_string(e));
        }
        at = edge.head;
        if (seen[static_cast<std::size_t>(at)]) {
            throw StructuralError("path " + format_path(path) + " revisits vertex "
                                  + std::to_string(at));
        }
        seen[static_cast<std::size_t>(at)] = 1;
    }
    if (at != inst.sink()) {
        throw StructuralError("path " + format_path(path) + " does not end at the sink");
    }
}

std::vector<VertexId> path_vertices(const NetworkInstance& inst, const Path& path)
{
    std::vector<VertexId> out{inst.source()};
    for (EdgeId e : path) {
        out.push_back(inst.edge(e).head);
    }
    return out;
}

std::string format_path(const Path& path)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < path.size(); ++k) {
        os << (k ? " " : "") << 'e' << path[k];
    }
    os << ']';
    return os.str();
}

double path_mean_latency(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow)
{
    double acc = 0.0;
    for (EdgeId e : path) {
        acc += inst.edge(e).latency(flow[e]);
    }
    return acc;
}

double path_variance(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow)
{
    double acc = 0.0;
    for (EdgeId e : path) {
        acc += inst.edge(e).variability(flow[e]);
    }
    return acc;
}

double path_cost(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow)
{
    return path_cost(inst, path, flow, inst.gamma());
}

double path_cost(const NetworkInstance& inst, const Path& path, const EdgeFlow& flow,
                 double gamma)
{
    const double mean = path_mean_latency(inst, path, flow);
    if (gamma == 0.0) {
        return mean;
    }
    const double var = path_variance(inst, path, flow);
    return inst.risk_model() == RiskModel::MeanVar ? mean + gamma * var
                                                   : mean + gamma * std::sqrt(var);
}

double social_cost(const NetworkInstance& inst, const EdgeFlow& flow)
{
    return flow.dot(mean_latencies(inst, flow));
}

EdgeFlow induced_edge_flow(const NetworkInstance& inst, const PathFlow& pf)
{
    if (static_cast<Eigen::Index>(pf.paths.size()) != pf.amounts.size()) {
        throw StructuralError("path flow has mismatched path and amount counts");
    }
    EdgeFlow flow = inst.zero_flow();
    for (std::size_t j = 0; j < pf.paths.size(); ++j) {
        validate_path(inst, pf.paths[j]);
        for (EdgeId e : pf.paths[j]) {
            flow[e] += pf.amounts[static_cast<Eigen::Index>(j)];
        }
    }
    return flow;
}

Eigen::MatrixXd path_incidence(const NetworkInstance& inst, const std::vector<Path>& paths)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(inst.num_edges(), static_cast<Eigen::Index>(paths.size()));
    for (std::size_t j = 0; j < paths.size(); ++j) {
        for (EdgeId e : paths[j]) {
            m(e, static_cast<Eigen::Index>(j)) = 1.0;
        }
    }
    return m;
}

std::vector<Path> enumerate_paths(const NetworkInstance& inst, std::size_t cap)
{
    if (cap < 1) {
        throw ParameterError("path cap must be at least 1");
    }
    std::vector<Path> out;
    std::vector<char> on_path(static_cast<std::size_t>(inst.num_vertices()), 0);
    Path current;

    // Depth-first with ascending edge ids yields lexicographic order.
    auto visit = [&](auto&& self, VertexId v) -> void {
        if (v == inst.sink()) {
            if (out.size() == cap) {
                throw PathCapExceeded("instance too large for path enumeration (more than "
                                      + std::to_string(cap) + " simple paths)");
            }
            out.push_back(current);
            return;
        }
        on_path[static_cast<std::size_t>(v)] = 1;
        for (EdgeId e : inst.out_edges(v)) {
            const VertexId w = inst.edge(e).head;
            if (on_path[static_cast<std::size_t>(w)]) {
                continue;
            }
            current.push_back(e);
            self(self, w);
            current.pop_back();
        }
        on_path[static_cast<std::size_t>(v)] = 0;
    };
    visit(visit, inst.source());
    return out;
}

double feasibility_violation(const NetworkInstance& inst, const EdgeFlow& flow)
{
    if (flow.size() != inst.num_edges()) {
        throw StructuralError("flow vector length does not match the edge count");
    }
    double worst = std::max(0.0, -flow.minCoeff());
    Eigen::VectorXd net = Eigen::VectorXd::Zero(inst.num_vertices());
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
        net[inst.edge(e).tail] += flow[e];
        net[inst.edge(e).head] -= flow[e];
    }
    for (VertexId v = 0; v < inst.num_vertices(); ++v) {
        double expected = 0.0;
        if (v == inst.source()) {
            expected = inst.demand();
        } else if (v == inst.sink()) {
            expected = -inst.demand();
        }
        worst = std::max(worst, std::abs(net[v] - expected));
    }
    return worst;
}

}  // namespace riskroute
