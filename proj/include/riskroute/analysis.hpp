#ifndef RISKROUTE_ANALYSIS_HPP
#define RISKROUTE_ANALYSIS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "riskroute/instances.hpp"
#include "riskroute/network.hpp"
#include "riskroute/solver.hpp"

namespace riskroute {

// C(x) / C(z).  Throws std::domain_error when C(z) = 0.
double compute_pra(const NetworkInstance& inst, const EdgeFlow& rawe, const EdgeFlow& rnwe);
double compute_pra(const NetworkInstance& inst, const EquilibriumResult& rawe,
                   const EquilibriumResult& rnwe);

struct KappaReport {
    double value = 0.0;
    // Edge attaining the maximum, -1 if every edge was skipped.
    EdgeId argmax = -1;
    // Edges with zero mean latency but positive variance (value is then +inf).
    std::vector<EdgeId> unbounded;
};

// max_e sigma_e^2/l_e (MeanVar) or sigma_e/l_e (MeanStdev) at `flow`, over all
// edges; edges where both vanish are skipped.
KappaReport compute_kappa(const NetworkInstance& inst, const EdgeFlow& flow);

struct EdgePartition {
    // x_e < z_e
    std::vector<EdgeId> set_a;
    // z_e <= x_e, including near-ties
    std::vector<EdgeId> set_b;
    // Members of B with |x_e - z_e| within the tie tolerance.  They satisfy
    // both inequalities, so the path search may also walk them forwards.
    std::vector<EdgeId> ties;
};

// Every edge lands in exactly one of A and B; near-ties go to B.
EdgePartition partition_edges(const EdgeFlow& rawe, const EdgeFlow& rnwe,
                              double tie_tolerance = 1e-7);

enum class Direction { Forward, Backward };

struct Segment {
    Direction direction = Direction::Forward;
    std::vector<EdgeId> edges;
};

struct AlternatingPath {
    std::vector<Segment> segments;
    // Vertices in visiting order, from s to t.
    std::vector<VertexId> vertices;

    int forward_subpath_count() const;
    int distinct_vertex_count() const;
};

// s-t walk using A edges (and ties) forwards and B edges backwards, starting and ending
// with a forward segment, with the fewest forward segments (then fewest edges,
// then smallest edge ids).  Throws StructuralError if none exists.
AlternatingPath find_alternating_path(const NetworkInstance& inst, const EdgePartition& partition);

// sup_{0<=y<=x} y (l(x) - l(y)) / (x l(x)).  Throws ParameterError for
// x <= 0 or l(x) = 0.
double estimate_smoothness_mu(const LatencyFn& fn, double x);

// p (p+1)^{-(p+1)/p}: the smoothness constant of degree-p polynomials with
// nonnegative coefficients.
double polynomial_mu(int degree);

enum class BoundKind { TopologicalEta, TopologicalVertices, FunctionalSmooth, StdevZeroAlt, StdevOneAlt };

std::string_view to_string(BoundKind kind);
BoundKind parse_bound_kind(std::string_view text);
inline constexpr BoundKind kAllBoundKinds[] = {BoundKind::TopologicalEta,
                                               BoundKind::TopologicalVertices,
                                               BoundKind::FunctionalSmooth,
                                               BoundKind::StdevZeroAlt, BoundKind::StdevOneAlt};

struct BoundReport {
    double pra_observed = 0.0;
    double kappa = 0.0;
    double bound_value = 0.0;
    BoundKind bound_kind = BoundKind::TopologicalEta;
    bool satisfied = false;
    double slack = 0.0;

    // Forward subpaths of the alternating path, -1 when none was found.
    int eta = -1;
    // Max per-edge smoothness at the RAWE (FunctionalSmooth only, else 0).
    double mu = 0.0;
    // False when the bound's hypothesis fails for this instance (wrong risk
    // model, too many forward subpaths, mu >= 1, no alternating path).
    bool applicable = true;
    std::string note;
};

struct BoundOptions {
    double tolerance = 1e-6;
    // Relative to the demand.
    double tie_tolerance = 1e-7;
};

BoundReport check_bound(const NetworkInstance& inst, const EquilibriumResult& rawe,
                        const EquilibriumResult& rnwe, BoundKind kind, const BoundOptions& opt = {});

struct PathPropertyReport {
    bool passed = true;
    std::vector<std::string> failures;
};

// On a Structural instance: every oracle-RAWE path has cost and mean latency
// 1 + 2^i gamma kappa, every oracle-RNWE path mean latency 1, and the social
// costs match the closed forms, all within `tol`.
PathPropertyReport verify_path_properties(int level, const NetworkInstance& inst,
                                          const OracleFlows& oracle, double tol = 1e-9);

// ceil((n-1)/2)
int max_forward_subpaths(int num_vertices);

// (1 + gk ceil((n-1)/2)) / (1 + gk 2^floor(log2 n)); with `halved` the lower
// bound term uses 2^(floor(log2 n) - 1), the forward-subpath count of the
// largest recursive instance with at most n vertices.
double vertex_bound_gap_ratio(int num_vertices, double gamma_kappa, bool halved = false);

}  // namespace riskroute

#endif
