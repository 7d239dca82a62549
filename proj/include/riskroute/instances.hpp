#ifndef RISKROUTE_INSTANCES_HPP
#define RISKROUTE_INSTANCES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskroute/network.hpp"

namespace riskroute {

enum class FamilyVariant {
    // a_j pinned at two flow values that depend on (r_A, r_N).
    Structural,
    // a_j(x) = max{0, slope (x - 2^{j-1}/2^i)}, (1, 1 - 2^-i)-smooth around the RAWE.
    Functional,
};

std::string_view to_string(FamilyVariant v);

struct RecursiveFamilySpec {
    int level = 1;
    double r_a = 1.0;
    double r_n = 1.0;
    double gamma_kappa = 1.0;
    FamilyVariant variant = FamilyVariant::Structural;
    // gamma_kappa is split as gamma = gamma_kappa / kappa with risky-edge
    // variability kappa (mean-var) or kappa^2 (mean-stdev, so sigma = kappa).
    double kappa = 1.0;
    RiskModel risk_model = RiskModel::MeanVar;

    // Throws ParameterError for a level < 1, 2^i r_A <= (2^i - 1) r_N
    // (Structural), or r_A, r_N != 1 (Functional).
    void validate() const;
};

// Closed-form equilibria of a recursive instance.  The risk-averse flow routes
// rawe_demand (= r_A) and the risk-neutral one rnwe_demand (= r_N).
struct OracleFlows {
    PathFlow rawe;
    PathFlow rnwe;
    double rawe_cost = 0.0;
    double rnwe_cost = 0.0;
    double expected_pra = 0.0;
    double rawe_demand = 0.0;
    double rnwe_demand = 0.0;

    FamilyVariant variant = FamilyVariant::Structural;
    int level = 0;
    double gamma_kappa = 0.0;
};

enum class EdgeRole { Risky, Vertical, Level };

struct RecursiveInstance {
    NetworkInstance instance;
    OracleFlows oracle;
    std::vector<EdgeRole> roles;
    // j for the a_j edges, 0 elsewhere.
    std::vector<int> edge_level;
};

// G^i: two copies of G^{i-1} (lower, upper) joined by a vertical edge from
// the upper source to the lower sink and two a_i edges (lower source -> upper
// source, lower sink -> upper sink).  Ids follow the recursion: lower
// component, vertical edge, upper component, then the two a_i edges.  The
// instance demand is r_A.
RecursiveInstance build_recursive(const RecursiveFamilySpec& spec);

struct Topology {
    int num_vertices = 0;
    std::vector<std::pair<VertexId, VertexId>> arcs;
    VertexId source = 0;
    VertexId sink = 0;
};

Topology topology_of(const NetworkInstance& inst);

NetworkInstance assign_functions(const Topology& topo, std::vector<LatencyFn> latencies,
                                 std::vector<LatencyFn> variabilities, double demand, double gamma,
                                 RiskModel model);

// Vertices s=0, w=1, u=2, t=3; edges in recursion order:
// 0 s->w, 1 u->w (crossing), 2 u->t, 3 s->u, 4 w->t.
Topology braess_topology();

struct BraessFunctions {
    LatencyFn lower_left_latency, crossing_latency, upper_right_latency, upper_left_latency,
        lower_right_latency;
    LatencyFn lower_left_var, crossing_var, upper_right_var, upper_left_var, lower_right_var;
    double demand = 1.0;
    double gamma = 0.0;
    RiskModel model = RiskModel::MeanVar;
};

NetworkInstance build_braess(const BraessFunctions& f);
// The structural i = 1 instance with r_A = r_N = 1 and gamma kappa = 1.
NetworkInstance build_braess();
// l = x on s->u and w->t, 1 on s->w and u->t, 0 on the crossing; d = 1, no variance.
BraessFunctions classic_braess_functions();

// Domino (3x2 grid) plus two ears closing each long side into a triangle.
// Vertices: 0 s (top-left), 1 bottom-left, 2 middle-left, 3 middle-right,
// 4 top-right, 5 t (bottom-right).  Edges: 0 s->2, 1 2->1 (lower-left
// vertical), 2 4->3 (upper-right vertical), 3 3->t, 4 s->4, 5 2->3,
// 6 1->t, 7 s->1 (ear), 8 4->t (ear).
Topology build_domino_with_ears();

inline constexpr EdgeId kDominoLowerLeftVertical = 1;
inline constexpr EdgeId kDominoUpperRightVertical = 2;

// Merges the endpoints of each listed arc; the contracted arcs disappear and
// other arcs that become loops are dropped.  Vertex ids are compacted in
// ascending order of their smallest original member.
Topology contract_arcs(const Topology& topo, std::span<const EdgeId> arcs);

// True when, after removing duplicate parallel arcs, the topology is the
// directed Braess graph with the same terminals.
bool is_braess_topology(const Topology& topo);

// Contracting the lower-left and upper-right verticals of the domino with
// ears yields the Braess graph.
bool domino_contracts_to_braess();

struct ClosedFormReport {
    bool passed = true;
    double rawe_equilibrium_gap = 0.0;
    double rnwe_equilibrium_gap = 0.0;
    double rawe_social_cost = 0.0;
    double rnwe_social_cost = 0.0;
    std::vector<std::string> failures;
};

// Checks that the oracle flows are equilibria (VI residual for mean-var, path
// cost gap for mean-stdev) and that their social costs match the closed forms.
ClosedFormReport closed_form_check(const NetworkInstance& inst, const OracleFlows& oracle,
                                   double tol);

// Synthetic instances for exercising the bounds; not part of any closed form.
enum class RandomFamily { AffineDag, PolynomialDag, SeriesParallel, Braess, DominoWithEars };

std::string_view to_string(RandomFamily f);

struct RandomInstanceSpec {
    RandomFamily family = RandomFamily::AffineDag;
    std::uint64_t seed = 0;
    // Degree of the mean latency polynomials (PolynomialDag only).
    int degree = 1;
    RiskModel model = RiskModel::MeanVar;
};

NetworkInstance random_instance(const RandomInstanceSpec& spec);

}  // namespace riskroute

#endif
