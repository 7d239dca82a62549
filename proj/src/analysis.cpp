#include "riskroute/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "riskroute/errors.hpp"

namespace riskroute {

double compute_pra(const NetworkInstance& inst, const EdgeFlow& rawe, const EdgeFlow& rnwe)
{
    const double denom = social_cost(inst, rnwe);
    if (!(denom > 0.0)) {
        throw std::domain_error("PRA undefined: risk-neutral social cost is zero");
    }
    return social_cost(inst, rawe) / denom;
}

double compute_pra(const NetworkInstance& inst, const EquilibriumResult& rawe,
                   const EquilibriumResult& rnwe)
{
    return compute_pra(inst, rawe.flow, rnwe.flow);
}

KappaReport compute_kappa(const NetworkInstance& inst, const EdgeFlow& flow)
{
    KappaReport report;
    const Eigen::VectorXd means = mean_latencies(inst, flow);
    const Eigen::VectorXd vars = variances(inst, flow);
    const bool stdev = inst.risk_model() == RiskModel::MeanStdev;
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
        const double spread = stdev ? std::sqrt(vars[e]) : vars[e];
        if (spread <= 0.0) {
            continue;
        }
        if (means[e] <= 0.0) {
            report.unbounded.push_back(e);
            if (std::isfinite(report.value)) {
                report.value = std::numeric_limits<double>::infinity();
                report.argmax = e;
            }
            continue;
        }
        const double ratio = spread / means[e];
        if (ratio > report.value) {
            report.value = ratio;
            report.argmax = e;
        }
    }
    return report;
}

EdgePartition partition_edges(const EdgeFlow& rawe, const EdgeFlow& rnwe, double tie_tolerance)
{
    if (rawe.size() != rnwe.size()) {
        throw StructuralError("flows have different edge counts");
    }
    EdgePartition p;
    for (EdgeId e = 0; e < rawe.size(); ++e) {
        if (rawe[e] < rnwe[e] - tie_tolerance) {
            p.set_a.push_back(e);
        } else {
            p.set_b.push_back(e);
            if (rawe[e] <= rnwe[e] + tie_tolerance) {
                p.ties.push_back(e);
            }
        }
    }
    return p;
}

int AlternatingPath::forward_subpath_count() const
{
    return static_cast<int>(std::count_if(segments.begin(), segments.end(), [](const Segment& s) {
        return s.direction == Direction::Forward;
    }));
}

int AlternatingPath::distinct_vertex_count() const
{
    std::vector<VertexId> v = vertices;
    std::sort(v.begin(), v.end());
    return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

namespace {

// State = (vertex, direction of the last edge); direction 0 = none yet.
struct Label {
    int forward = std::numeric_limits<int>::max();
    int hops = std::numeric_limits<int>::max();

    bool operator<(const Label& o) const { return std::tie(forward, hops) < std::tie(o.forward, o.hops); }
};

}  // namespace

AlternatingPath find_alternating_path(const NetworkInstance& inst, const EdgePartition& partition)
{
    const auto n = static_cast<std::size_t>(inst.num_vertices());
    // moves[v]: (edge, direction, next vertex), in ascending edge id order
    struct Move {
        EdgeId edge;
        int dir;
        VertexId to;
    };
    std::vector<std::vector<Move>> moves(n);
    for (const auto* forward : {&partition.set_a, &partition.ties}) {
        for (EdgeId e : *forward) {
            const Edge& ed = inst.edge(e);
            moves[static_cast<std::size_t>(ed.tail)].push_back({e, 1, ed.head});
        }
    }
    for (EdgeId e : partition.set_b) {
        const Edge& ed = inst.edge(e);
        moves[static_cast<std::size_t>(ed.head)].push_back({e, 2, ed.tail});
    }
    for (auto& m : moves) {
        std::sort(m.begin(), m.end(), [](const Move& a, const Move& b) {
            return std::tie(a.edge, a.dir) < std::tie(b.edge, b.dir);
        });
    }

    auto index = [](VertexId v, int dir) { return static_cast<std::size_t>(v) * 3 + static_cast<std::size_t>(dir); };
    std::vector<Label> dist(n * 3);
    std::vector<std::pair<std::size_t, EdgeId>> parent(n * 3, {std::size_t(-1), -1});
    using Item = std::pair<Label, std::size_t>;
    auto cmp = [](const Item& a, const Item& b) {
        return b.first < a.first || (!(a.first < b.first) && b.second < a.second);
    };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    const std::size_t start = index(inst.source(), 0);
    dist[start] = {0, 0};
    heap.push({dist[start], start});
    while (!heap.empty()) {
        const auto [label, state] = heap.top();
        heap.pop();
        if (dist[state] < label) {
            continue;
        }
        const auto v = static_cast<VertexId>(state / 3);
        const int last = static_cast<int>(state % 3);
        for (const Move& m : moves[static_cast<std::size_t>(v)]) {
            if (last == 0 && m.dir == 2) {
                continue;
            }
            const Label cand{label.forward + (m.dir == 1 && last != 1 ? 1 : 0), label.hops + 1};
            const std::size_t next = index(m.to, m.dir);
            if (cand < dist[next]) {
                dist[next] = cand;
                parent[next] = {state, m.edge};
                heap.push({cand, next});
            }
        }
    }
    const std::size_t goal = index(inst.sink(), 1);
    if (dist[goal].forward == std::numeric_limits<int>::max()) {
        throw StructuralError("no alternating path from source to sink for the given partition");
    }

    std::vector<std::pair<EdgeId, int>> steps;
    for (std::size_t s = goal; s != start; s = parent[s].first) {
        steps.emplace_back(parent[s].second, static_cast<int>(s % 3));
    }
    std::reverse(steps.begin(), steps.end());

    AlternatingPath path;
    path.vertices.push_back(inst.source());
    for (const auto& [e, dir] : steps) {
        const Direction d = dir == 1 ? Direction::Forward : Direction::Backward;
        if (path.segments.empty() || path.segments.back().direction != d) {
            path.segments.push_back({d, {}});
        }
        path.segments.back().edges.push_back(e);
        const Edge& ed = inst.edge(e);
        path.vertices.push_back(d == Direction::Forward ? ed.head : ed.tail);
    }
    return path;
}

double estimate_smoothness_mu(const LatencyFn& fn, double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw ParameterError("smoothness needs a positive flow value");
    }
    const double lx = fn(x);
    if (!(lx > 0.0)) {
        throw ParameterError("smoothness undefined where the latency is zero");
    }
    auto gain = [&](double y) { return y * (lx - fn(y)); };
    double best = 0.0;
    auto consider = [&](double y) {
        if (y >= 0.0 && y <= x) {
            best = std::max(best, gain(y));
        }
    };

    if (std::holds_alternative<Affine>(fn.repr())) {
        consider(x / 2.0);
    } else if (const auto* p = std::get_if<PiecewiseLinear>(&fn.repr())) {
        consider(0.0);
        consider(x);
        const std::size_t m = p->xs.size();
        for (std::size_t k = 0; k < m; ++k) {
            consider(p->xs[k]);
        }
        // On a piece l(y) = alpha + beta y the gain peaks at (lx - alpha) / (2 beta).
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double beta = (p->ys[k + 1] - p->ys[k]) / (p->xs[k + 1] - p->xs[k]);
            if (beta <= 0.0) {
                continue;
            }
            const double alpha = p->ys[k] - beta * p->xs[k];
            const double y = (lx - alpha) / (2.0 * beta);
            const bool last = k + 2 == m;
            if (y >= p->xs[k] && (last || y <= p->xs[k + 1])) {
                consider(y);
            }
        }
    } else if (std::holds_alternative<Polynomial>(fn.repr())) {
        // y (l(x) - l(y)) is concave for convex l, so golden-section applies.
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0;
        double b = x;
        double c = b - phi * (b - a);
        double d = a + phi * (b - a);
        double fc = gain(c);
        double fd = gain(d);
        while (b - a > 1e-10 * std::max(1.0, x)) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = gain(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = gain(d);
            }
        }
        consider((a + b) / 2.0);
    }
    return best / (x * lx);
}

double polynomial_mu(int degree)
{
    if (degree < 1) {
        throw ParameterError("polynomial degree must be at least 1");
    }
    const double p = degree;
    return p * std::pow(p + 1.0, -(p + 1.0) / p);
}

std::string_view to_string(BoundKind kind)
{
    switch (kind) {
    case BoundKind::TopologicalEta: return "topological-eta";
    case BoundKind::TopologicalVertices: return "topological-vertices";
    case BoundKind::FunctionalSmooth: return "functional-smooth";
    case BoundKind::StdevZeroAlt: return "stdev-zero-alt";
    case BoundKind::StdevOneAlt: return "stdev-one-alt";
    }
    return "?";
}

BoundKind parse_bound_kind(std::string_view text)
{
    for (BoundKind k : kAllBoundKinds) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw ParseError("unknown bound kind '" + std::string(text) + "'");
}

BoundReport check_bound(const NetworkInstance& inst, const EquilibriumResult& rawe,
                        const EquilibriumResult& rnwe, BoundKind kind, const BoundOptions& opt)
{
    BoundReport r;
    r.bound_kind = kind;
    r.pra_observed = compute_pra(inst, rawe, rnwe);
    r.kappa = compute_kappa(inst, rawe.flow).value;
    const double gk = inst.gamma() * r.kappa;
    const bool stdev = inst.risk_model() == RiskModel::MeanStdev;

    const EdgePartition part =
        partition_edges(rawe.flow, rnwe.flow, opt.tie_tolerance * std::max(inst.demand(), 1e-300));
    try {
        r.eta = find_alternating_path(inst, part).forward_subpath_count();
    } catch (const StructuralError& e) {
        if (kind != BoundKind::TopologicalVertices && kind != BoundKind::FunctionalSmooth) {
            r.applicable = false;
            r.note = e.what();
        }
    }

    switch (kind) {
    case BoundKind::TopologicalEta:
        r.bound_value = 1.0 + std::max(r.eta, 0) * gk;
        if (stdev) {
            r.applicable = false;
            r.note = "eta bound is stated for the mean-var model";
        }
        break;
    case BoundKind::TopologicalVertices:
        r.bound_value = 1.0 + gk * max_forward_subpaths(inst.num_vertices());
        if (stdev) {
            r.applicable = false;
            r.note = "vertex bound is stated for the mean-var model";
        }
        break;
    case BoundKind::FunctionalSmooth: {
        for (EdgeId e = 0; e < inst.num_edges(); ++e) {
            const double x = rawe.flow[e];
            if (x <= opt.tie_tolerance * inst.demand() || !(inst.edge(e).latency(x) > 0.0)) {
                continue;
            }
            r.mu = std::max(r.mu, estimate_smoothness_mu(inst.edge(e).latency, x));
        }
        if (r.mu >= 1.0) {
            r.applicable = false;
            r.bound_value = std::numeric_limits<double>::infinity();
            r.note = "vacuous bound: mu >= 1";
        } else {
            r.bound_value = (1.0 + gk) / (1.0 - r.mu);
            r.note = "smoothness certified at the computed equilibrium only";
        }
        if (stdev) {
            r.applicable = false;
            r.note = "smoothness bound is stated for the mean-var model";
        }
        break;
    }
    case BoundKind::StdevZeroAlt:
        r.bound_value = 1.0 + gk;
        if (r.applicable && r.eta > 1) {
            r.applicable = false;
            r.note = "needs an alternating path with one forward subpath";
        }
        break;
    case BoundKind::StdevOneAlt:
        r.bound_value = 1.0 + 2.0 * gk;
        if (r.applicable && r.eta > 2) {
            r.applicable = false;
            r.note = "needs an alternating path with at most two forward subpaths";
        }
        break;
    }
    r.slack = r.bound_value - r.pra_observed;
    r.satisfied = r.pra_observed <= r.bound_value + opt.tolerance;
    return r;
}

PathPropertyReport verify_path_properties(int level, const NetworkInstance& inst,
                                          const OracleFlows& oracle, double tol)
{
    PathPropertyReport report;
    auto fail = [&report](std::string msg) {
        report.passed = false;
        report.failures.push_back(std::move(msg));
    };
    auto describe = [](const char* what, const Path& p, double got, double want) {
        std::ostringstream os;
        os.precision(17);
        os << what;
        if (!p.empty()) {
            os << " on path " << format_path(p);
        }
        os << " is " << got << ", expected " << want;
        return os.str();
    };
    const double target = 1.0 + std::ldexp(1.0, level) * oracle.gamma_kappa;
    const auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

    try {
        const NetworkInstance averse = inst.with_demand(oracle.rawe_demand);
        const EdgeFlow x = induced_edge_flow(averse, oracle.rawe);
        for (Eigen::Index j = 0; j < oracle.rawe.amounts.size(); ++j) {
            if (oracle.rawe.amounts[j] <= 0.0) {
                continue;
            }
            const Path& p = oracle.rawe.paths[static_cast<std::size_t>(j)];
            const double cost = path_cost(averse, p, x);
            const double mean = path_mean_latency(averse, p, x);
            if (!near(cost, target)) {
                fail(describe("risk-averse path cost", p, cost, target));
            }
            if (!near(mean, target)) {
                fail(describe("risk-averse mean latency", p, mean, target));
            }
        }
        if (!near(social_cost(averse, x), oracle.rawe_cost)) {
            fail(describe("risk-averse social cost", {}, social_cost(averse, x), oracle.rawe_cost));
        }

        const NetworkInstance neutral = inst.with_demand(oracle.rnwe_demand).with_gamma(0.0);
        const EdgeFlow z = induced_edge_flow(neutral, oracle.rnwe);
        for (Eigen::Index j = 0; j < oracle.rnwe.amounts.size(); ++j) {
            if (oracle.rnwe.amounts[j] <= 0.0) {
                continue;
            }
            const Path& p = oracle.rnwe.paths[static_cast<std::size_t>(j)];
            const double mean = path_mean_latency(neutral, p, z);
            if (!near(mean, 1.0)) {
                fail(describe("risk-neutral mean latency", p, mean, 1.0));
            }
        }
        if (!near(social_cost(neutral, z), oracle.rnwe_cost)) {
            fail(describe("risk-neutral social cost", {}, social_cost(neutral, z), oracle.rnwe_cost));
        }
    } catch (const StructuralError& e) {
        fail(std::string("oracle does not fit the instance: ") + e.what());
    }
    return report;
}

int max_forward_subpaths(int num_vertices)
{
    return num_vertices / 2;
}

double vertex_bound_gap_ratio(int num_vertices, double gamma_kappa, bool halved)
{
    if (num_vertices < 2) {
        throw ParameterError("need at least two vertices");
    }
    const int log2n = std::bit_width(static_cast<unsigned>(num_vertices)) - 1;
    const double lower = std::ldexp(1.0, halved ? log2n - 1 : log2n);
    return (1.0 + gamma_kappa * max_forward_subpaths(num_vertices)) / (1.0 + gamma_kappa * lower);
}

}  // namespace riskroute
