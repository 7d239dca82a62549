#include "riskroute/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "riskroute/errors.hpp"
#include "riskroute/solver.hpp"

namespace riskroute {

std::string_view to_string(FamilyVariant v)
{
    return v == FamilyVariant::Structural ? "structural" : "functional";
}

std::string_view to_string(RandomFamily f)
{
    switch (f) {
    case RandomFamily::AffineDag: return "random-affine";
    case RandomFamily::PolynomialDag: return "random-poly";
    case RandomFamily::SeriesParallel: return "random-sp";
    case RandomFamily::Braess: return "random-braess";
    case RandomFamily::DominoWithEars: return "random-domino";
    }
    return "?";
}

namespace {

double pow2(int k) { return std::ldexp(1.0, k); }

bool structural_precondition(int level, double r_a, double r_n)
{
    return pow2(level) * r_a > (pow2(level) - 1.0) * r_n;
}

struct Component {
    int num_vertices = 0;
    std::vector<Edge> edges;
    std::vector<EdgeRole> roles;
    std::vector<int> levels;
    VertexId source = 0;
    VertexId sink = 0;
    std::vector<std::pair<Path, double>> rawe;
    std::vector<std::pair<Path, double>> rnwe;
    std::vector<Path> parallel;
    std::vector<Path> zigzag;
};

Edge risky_edge(VertexId tail, VertexId head, double variability)
{
    return {tail, head, LatencyFn::constant(1.0), LatencyFn::constant(variability)};
}

Component single_edge(double variability)
{
    Component c;
    c.num_vertices = 2;
    c.edges.push_back(risky_edge(0, 1, variability));
    c.roles.push_back(EdgeRole::Risky);
    c.levels.push_back(0);
    c.source = 0;
    c.sink = 1;
    c.parallel.push_back({0});
    return c;
}

Path shifted(const Path& p, EdgeId offset)
{
    Path out;
    out.reserve(p.size());
    for (EdgeId e : p) {
        out.push_back(e + offset);
    }
    return out;
}

Path concat(Path a, const Path& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Braess-style join of two equal sub-components with level function `a`.
// Oracle path lists are filled by the caller.
Component join(const Component& lower, const Component& upper, const LatencyFn& a, int level)
{
    Component c;
    const int vertex_offset = lower.num_vertices;
    const auto lower_edges = static_cast<EdgeId>(lower.edges.size());
    const EdgeId vertical = lower_edges;
    const EdgeId upper_offset = lower_edges + 1;

    c.num_vertices = lower.num_vertices + upper.num_vertices;
    c.edges = lower.edges;
    c.roles = lower.roles;
    c.levels = lower.levels;
    c.edges.push_back({upper.source + vertex_offset, lower.sink, LatencyFn::constant(1.0),
                       LatencyFn::constant(0.0)});
    c.roles.push_back(EdgeRole::Vertical);
    c.levels.push_back(0);
    for (std::size_t k = 0; k < upper.edges.size(); ++k) {
        Edge e = upper.edges[k];
        e.tail += vertex_offset;
        e.head += vertex_offset;
        c.edges.push_back(std::move(e));
        c.roles.push_back(upper.roles[k]);
        c.levels.push_back(upper.levels[k]);
    }
    const auto upper_left = static_cast<EdgeId>(c.edges.size());
    c.edges.push_back({lower.source, upper.source + vertex_offset, a, LatencyFn::constant(0.0)});
    const auto lower_right = static_cast<EdgeId>(c.edges.size());
    c.edges.push_back({lower.sink, upper.sink + vertex_offset, a, LatencyFn::constant(0.0)});
    for (int k = 0; k < 2; ++k) {
        c.roles.push_back(EdgeRole::Level);
        c.levels.push_back(level);
    }
    c.source = lower.source;
    c.sink = upper.sink + vertex_offset;

    for (const Path& p : lower.parallel) {
        c.parallel.push_back(concat(p, {lower_right}));
    }
    for (const Path& p : upper.parallel) {
        c.parallel.push_back(concat({upper_left}, shifted(p, upper_offset)));
    }
    c.zigzag.push_back({upper_left, vertical, lower_right});
    for (const Path& p : lower.zigzag) {
        c.zigzag.push_back(concat(p, {lower_right}));
    }
    for (const Path& p : upper.zigzag) {
        c.zigzag.push_back(concat({upper_left}, shifted(p, upper_offset)));
    }

    // Oracle flows of the parts, routed through the matching a_i edge.
    for (const auto& [p, amount] : lower.rawe) {
        c.rawe.emplace_back(concat(p, {lower_right}), amount);
    }
    for (const auto& [p, amount] : upper.rawe) {
        c.rawe.emplace_back(concat({upper_left}, shifted(p, upper_offset)), amount);
    }
    for (const auto& [p, amount] : lower.rnwe) {
        c.rnwe.emplace_back(concat(p, {lower_right}), amount);
    }
    for (const auto& [p, amount] : upper.rnwe) {
        c.rnwe.emplace_back(concat({upper_left}, shifted(p, upper_offset)), amount);
    }
    return c;
}

// Zero up to `zero_until`, then linear through (`reach_at`, `value`).
LatencyFn ramp(double zero_until, double reach_at, double value)
{
    if (zero_until > 0.0) {
        return LatencyFn::piecewise_linear({0.0, zero_until, reach_at}, {0.0, 0.0, value});
    }
    return LatencyFn::piecewise_linear({0.0, reach_at}, {0.0, value});
}

Component build_structural(int level, double r_a, double r_n, double gamma_kappa,
                           double risky_variability)
{
    if (!structural_precondition(level, r_a, r_n)) {
        // Only reachable if the parameter recursion is wrong.
        throw std::logic_error("structural recursion produced parameters violating 2^i r_A > (2^i-1) r_N at level "
                               + std::to_string(level));
    }
    const double level_value = pow2(level - 1) * gamma_kappa;
    if (level == 1) {
        const Component leaf = single_edge(risky_variability);
        Component c = join(leaf, leaf, ramp(r_n / 2.0, r_a, level_value), 1);
        // Risk-averse players all take the zig-zag; risk-neutral split evenly.
        c.rawe = {{c.zigzag.front(), r_a}};
        c.rnwe = {{c.parallel[0], r_n / 2.0}, {c.parallel[1], r_n / 2.0}};
        std::erase_if(c.rnwe, [](const auto& pa) { return pa.second <= 0.0; });
        return c;
    }
    const double sub_a = (pow2(level) * r_a - r_n) / pow2(level + 1);
    const double sub_n = r_n / 2.0;
    const Component sub = build_structural(level - 1, sub_a, sub_n, gamma_kappa, risky_variability);
    const double reach = r_a / 2.0 + r_n / pow2(level + 1);
    Component c = join(sub, sub, ramp(r_n / 2.0, reach, level_value), level);
    const double zigzag_amount = r_n / pow2(level);
    if (zigzag_amount > 0.0) {
        c.rawe.emplace_back(c.zigzag.front(), zigzag_amount);
    }
    std::erase_if(c.rawe, [](const auto& pa) { return pa.second <= 0.0; });
    std::erase_if(c.rnwe, [](const auto& pa) { return pa.second <= 0.0; });
    return c;
}

Component build_functional_topology(int level, int top_level, double gamma_kappa,
                                    double risky_variability)
{
    const Component sub = level == 1 ? single_edge(risky_variability)
                                     : build_functional_topology(level - 1, top_level, gamma_kappa,
                                                                 risky_variability);
    const double share = pow2(level - 1);
    const double rnwe_flow = share / pow2(top_level);
    const double rawe_flow = share / (pow2(top_level) - 1.0);
    return join(sub, sub, ramp(rnwe_flow, rawe_flow, share * gamma_kappa), level);
}

PathFlow to_path_flow(const std::vector<std::pair<Path, double>>& list)
{
    PathFlow pf;
    pf.amounts.resize(static_cast<Eigen::Index>(list.size()));
    for (std::size_t j = 0; j < list.size(); ++j) {
        pf.paths.push_back(list[j].first);
        pf.amounts[static_cast<Eigen::Index>(j)] = list[j].second;
    }
    return pf;
}

PathFlow uniform_path_flow(const std::vector<Path>& paths, double total)
{
    PathFlow pf;
    pf.paths = paths;
    pf.amounts = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(paths.size()),
                                           total / static_cast<double>(paths.size()));
    return pf;
}

}  // namespace

void RecursiveFamilySpec::validate() const
{
    if (level < 1 || level > 20) {
        throw ParameterError("level must be between 1 and 20");
    }
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!nonneg(r_a) || !nonneg(r_n) || !nonneg(gamma_kappa)) {
        throw ParameterError("r_A, r_N and gamma*kappa must be finite and nonnegative");
    }
    if (!(std::isfinite(kappa) && kappa > 0.0)) {
        throw ParameterError("kappa must be positive");
    }
    if (variant == FamilyVariant::Structural && !structural_precondition(level, r_a, r_n)) {
        std::ostringstream os;
        os << "structural family needs 2^i r_A > (2^i - 1) r_N (i=" << level << ", r_A=" << r_a
           << ", r_N=" << r_n << ")";
        throw ParameterError(os.str());
    }
    if (variant == FamilyVariant::Functional && (r_a != 1.0 || r_n != 1.0)) {
        throw ParameterError("functional family is defined for r_A = r_N = 1");
    }
}

RecursiveInstance build_recursive(const RecursiveFamilySpec& spec)
{
    spec.validate();
    const double gamma = spec.gamma_kappa / spec.kappa;
    const double risky_variability =
        spec.risk_model == RiskModel::MeanVar ? spec.kappa : spec.kappa * spec.kappa;

    Component c;
    OracleFlows oracle;
    if (spec.variant == FamilyVariant::Structural) {
        c = build_structural(spec.level, spec.r_a, spec.r_n, spec.gamma_kappa, risky_variability);
        oracle.rawe = to_path_flow(c.rawe);
        oracle.rnwe = to_path_flow(c.rnwe);
    } else {
        c = build_functional_topology(spec.level, spec.level, spec.gamma_kappa, risky_variability);
        oracle.rawe = uniform_path_flow(c.zigzag, 1.0);
        oracle.rnwe = uniform_path_flow(c.parallel, 1.0);
    }
    oracle.rawe_demand = spec.r_a;
    oracle.rnwe_demand = spec.r_n;
    oracle.rawe_cost = (1.0 + pow2(spec.level) * spec.gamma_kappa) * spec.r_a;
    oracle.rnwe_cost = spec.r_n;
    oracle.expected_pra = spec.r_n > 0.0 ? oracle.rawe_cost / oracle.rnwe_cost
                                         : std::numeric_limits<double>::infinity();
    oracle.variant = spec.variant;
    oracle.level = spec.level;
    oracle.gamma_kappa = spec.gamma_kappa;

    NetworkInstance inst(c.num_vertices, std::move(c.edges), c.source, c.sink, spec.r_a, gamma,
                         spec.risk_model);
    return {std::move(inst), std::move(oracle), std::move(c.roles), std::move(c.levels)};
}

Topology topology_of(const NetworkInstance& inst)
{
    Topology t;
    t.num_vertices = inst.num_vertices();
    t.source = inst.source();
    t.sink = inst.sink();
    for (const Edge& e : inst.edges()) {
        t.arcs.emplace_back(e.tail, e.head);
    }
    return t;
}

NetworkInstance assign_functions(const Topology& topo, std::vector<LatencyFn> latencies,
                                 std::vector<LatencyFn> variabilities, double demand, double gamma,
                                 RiskModel model)
{
    if (latencies.size() != topo.arcs.size() || variabilities.size() != topo.arcs.size()) {
        throw ParameterError("need one latency and one variability function per arc");
    }
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < topo.arcs.size(); ++k) {
        edges.push_back({topo.arcs[k].first, topo.arcs[k].second, std::move(latencies[k]),
                         std::move(variabilities[k])});
    }
    return {topo.num_vertices, std::move(edges), topo.source, topo.sink, demand, gamma, model};
}

Topology braess_topology()
{
    return {4, {{0, 1}, {2, 1}, {2, 3}, {0, 2}, {1, 3}}, 0, 3};
}

NetworkInstance build_braess(const BraessFunctions& f)
{
    return assign_functions(braess_topology(),
                            {f.lower_left_latency, f.crossing_latency, f.upper_right_latency,
                             f.upper_left_latency, f.lower_right_latency},
                            {f.lower_left_var, f.crossing_var, f.upper_right_var, f.upper_left_var,
                             f.lower_right_var},
                            f.demand, f.gamma, f.model);
}

NetworkInstance build_braess()
{
    return build_recursive({}).instance;
}

BraessFunctions classic_braess_functions()
{
    BraessFunctions f;
    const LatencyFn x = LatencyFn::affine(1.0, 0.0);
    const LatencyFn one = LatencyFn::constant(1.0);
    f.upper_left_latency = x;
    f.lower_right_latency = x;
    f.upper_right_latency = one;
    f.lower_left_latency = one;
    f.crossing_latency = LatencyFn::constant(0.0);
    f.demand = 1.0;
    f.gamma = 0.0;
    return f;
}

Topology build_domino_with_ears()
{
    return {6, {{0, 2}, {2, 1}, {4, 3}, {3, 5}, {0, 4}, {2, 3}, {1, 5}, {0, 1}, {4, 5}}, 0, 5};
}

Topology contract_arcs(const Topology& topo, std::span<const EdgeId> arcs)
{
    std::vector<VertexId> parent(static_cast<std::size_t>(topo.num_vertices));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](VertexId v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        }
        return v;
    };
    std::set<EdgeId> removed;
    for (EdgeId e : arcs) {
        if (e < 0 || static_cast<std::size_t>(e) >= topo.arcs.size()) {
            throw StructuralError("cannot contract unknown arc " + std::to_string(e));
        }
        removed.insert(e);
        const VertexId a = find(topo.arcs[static_cast<std::size_t>(e)].first);
        const VertexId b = find(topo.arcs[static_cast<std::size_t>(e)].second);
        parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<VertexId> compact(static_cast<std::size_t>(topo.num_vertices), -1);
    int next = 0;
    for (VertexId v = 0; v < topo.num_vertices; ++v) {
        const VertexId r = find(v);
        if (compact[static_cast<std::size_t>(r)] < 0) {
            compact[static_cast<std::size_t>(r)] = next++;
        }
    }
    auto image = [&](VertexId v) { return compact[static_cast<std::size_t>(find(v))]; };
    Topology out;
    out.num_vertices = next;
    out.source = image(topo.source);
    out.sink = image(topo.sink);
    for (std::size_t k = 0; k < topo.arcs.size(); ++k) {
        if (removed.count(static_cast<EdgeId>(k))) {
            continue;
        }
        const VertexId a = image(topo.arcs[k].first);
        const VertexId b = image(topo.arcs[k].second);
        if (a != b) {
            out.arcs.emplace_back(a, b);
        }
    }
    return out;
}

bool is_braess_topology(const Topology& topo)
{
    if (topo.num_vertices != 4 || topo.source == topo.sink) {
        return false;
    }
    const std::set<std::pair<VertexId, VertexId>> arcs(topo.arcs.begin(), topo.arcs.end());
    if (arcs.size() != 5) {
        return false;
    }
    std::vector<VertexId> middle;
    for (VertexId v = 0; v < 4; ++v) {
        if (v != topo.source && v != topo.sink) {
            middle.push_back(v);
        }
    }
    const VertexId s = topo.source;
    const VertexId t = topo.sink;
    for (int flip = 0; flip < 2; ++flip) {
        const VertexId u = middle[static_cast<std::size_t>(flip)];
        const VertexId w = middle[static_cast<std::size_t>(1 - flip)];
        const std::set<std::pair<VertexId, VertexId>> expected{{s, u}, {s, w}, {u, t}, {w, t}, {u, w}};
        if (arcs == expected) {
            return true;
        }
    }
    return false;
}

bool domino_contracts_to_braess()
{
    const EdgeId verticals[] = {kDominoLowerLeftVertical, kDominoUpperRightVertical};
    return is_braess_topology(contract_arcs(build_domino_with_ears(), verticals));
}

ClosedFormReport closed_form_check(const NetworkInstance& inst, const OracleFlows& oracle,
                                   double tol)
{
    ClosedFormReport report;
    auto fail = [&report](std::string msg) {
        report.passed = false;
        report.failures.push_back(std::move(msg));
    };
    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

    struct Side {
        const char* name;
        const PathFlow& pf;
        double demand;
        double gamma;
        double expected_cost;
        double* gap;
        double* social;
    };
    const Side sides[] = {
        {"risk-averse", oracle.rawe, oracle.rawe_demand, inst.gamma(), oracle.rawe_cost,
         &report.rawe_equilibrium_gap, &report.rawe_social_cost},
        {"risk-neutral", oracle.rnwe, oracle.rnwe_demand, 0.0, oracle.rnwe_cost,
         &report.rnwe_equilibrium_gap, &report.rnwe_social_cost},
    };
    for (const Side& side : sides) {
        const NetworkInstance at = inst.with_demand(side.demand).with_gamma(side.gamma);
        EdgeFlow flow;
        try {
            flow = induced_edge_flow(at, side.pf);
        } catch (const StructuralError& e) {
            fail(std::string(side.name) + " oracle has an invalid path: " + e.what());
            continue;
        }
        if (side.pf.amounts.size() > 0 && side.pf.amounts.minCoeff() < 0.0) {
            fail(std::string(side.name) + " oracle has a negative path amount");
        }
        if (!close(side.pf.total(), side.demand)) {
            std::ostringstream os;
            os.precision(17);
            os << side.name << " oracle routes " << side.pf.total() << " but the demand is "
               << side.demand;
            fail(os.str());
        }
        const bool additive = at.risk_model() == RiskModel::MeanVar || side.gamma == 0.0;
        *side.gap = additive ? vi_residual(at, flow, side.gamma) : path_cost_gap(at, side.pf);
        if (!(*side.gap <= tol)) {
            std::ostringstream os;
            os.precision(17);
            os << side.name << " oracle is not an equilibrium: "
               << (additive ? "VI residual " : "path cost gap ") << *side.gap << " > " << tol;
            fail(os.str());
        }
        *side.social = social_cost(at, flow);
        if (!close(*side.social, side.expected_cost)) {
            std::ostringstream os;
            os.precision(17);
            os << side.name << " social cost " << *side.social << " differs from closed form "
               << side.expected_cost;
            fail(os.str());
        }
    }
    return report;
}

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p) { return uniform(0.0, 1.0) < p; }

    LatencyFn affine_latency() { return LatencyFn::affine(uniform(0.2, 2.0), uniform(0.1, 2.0)); }

    LatencyFn polynomial_latency(int degree)
    {
        std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
        coeffs.front() = uniform(0.1, 1.0);
        for (int k = 1; k < degree; ++k) {
            coeffs[static_cast<std::size_t>(k)] = coin(0.5) ? uniform(0.0, 1.0) : 0.0;
        }
        coeffs.back() = uniform(0.2, 2.0);
        return LatencyFn::polynomial(std::move(coeffs));
    }

    LatencyFn variability(RiskModel model)
    {
        if (model == RiskModel::MeanVar) {
            return LatencyFn::affine(uniform(0.0, 1.5), uniform(0.0, 1.5));
        }
        // sigma^2 quadratic, so sigma grows roughly linearly with flow
        return LatencyFn::polynomial({uniform(0.0, 1.0), uniform(0.0, 1.0), uniform(0.0, 1.0)});
    }

private:
    std::mt19937_64 rng_;
};

Topology random_dag(Sampler& s)
{
    Topology t;
    t.num_vertices = s.integer(4, 6);
    t.source = 0;
    t.sink = t.num_vertices - 1;
    for (VertexId i = 0; i < t.num_vertices; ++i) {
        for (VertexId j = i + 1; j < t.num_vertices; ++j) {
            // Short hops only, so every route crosses several congestible edges.
            if (j == i + 1 || (j == i + 2 && s.coin(0.7))) {
                t.arcs.emplace_back(i, j);
            }
        }
    }
    return t;
}

void grow_series_parallel(Sampler& s, int depth, VertexId from, VertexId to, Topology& t)
{
    const double r = s.uniform(0.0, 1.0);
    if (depth == 0 || r < 0.3) {
        t.arcs.emplace_back(from, to);
    } else if (r < 0.65) {
        const VertexId mid = t.num_vertices++;
        grow_series_parallel(s, depth - 1, from, mid, t);
        grow_series_parallel(s, depth - 1, mid, to, t);
    } else {
        grow_series_parallel(s, depth - 1, from, to, t);
        grow_series_parallel(s, depth - 1, from, to, t);
    }
}

}  // namespace

NetworkInstance random_instance(const RandomInstanceSpec& spec)
{
    Sampler s(spec.seed);
    Topology topo;
    switch (spec.family) {
    case RandomFamily::AffineDag:
    case RandomFamily::PolynomialDag:
        topo = random_dag(s);
        break;
    case RandomFamily::SeriesParallel:
        topo.num_vertices = 2;
        topo.source = 0;
        topo.sink = 1;
        // Parallel root so the instance always offers a route choice.
        grow_series_parallel(s, 3, 0, 1, topo);
        grow_series_parallel(s, 3, 0, 1, topo);
        break;
    case RandomFamily::Braess:
        topo = braess_topology();
        break;
    case RandomFamily::DominoWithEars:
        topo = build_domino_with_ears();
        break;
    }
    std::vector<LatencyFn> latencies;
    std::vector<LatencyFn> vars;
    for (std::size_t k = 0; k < topo.arcs.size(); ++k) {
        latencies.push_back(spec.family == RandomFamily::PolynomialDag
                                ? s.polynomial_latency(spec.degree)
                                : s.affine_latency());
        vars.push_back(s.variability(spec.model));
    }
    const double demand = s.uniform(0.5, 2.0);
    const double gamma = s.uniform(0.2, 2.0);
    return assign_functions(topo, std::move(latencies), std::move(vars), demand, gamma, spec.model);
}

}  // namespace riskroute
