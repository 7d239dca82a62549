#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskroute/errors.hpp"
#include "riskroute/instances.hpp"
#include "riskroute/solver.hpp"

using namespace riskroute;

namespace {

RecursiveInstance make(int level, FamilyVariant variant, double gk = 1.0, double r_a = 1.0, double r_n = 1.0)
{
    RecursiveFamilySpec spec;
    spec.level = level;
    spec.variant = variant;
    spec.gamma_kappa = gk;
    spec.r_a = r_a;
    spec.r_n = r_n;
    return build_recursive(spec);
}

SolverConfig tight()
{
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    return cfg;
}

}  // namespace

TEST_CASE("recursive family sizes and edge roles")
{
    for (int i = 1; i <= 6; ++i) {
        for (FamilyVariant v : {FamilyVariant::Structural, FamilyVariant::Functional}) {
            const RecursiveInstance r = make(i, v);
            CAPTURE(i);
            CHECK(r.instance.num_vertices() == (1 << (i + 1)));
            CHECK(r.roles.size() == static_cast<std::size_t>(r.instance.num_edges()));
            int risky = 0;
            int per_level = 0;
            for (std::size_t e = 0; e < r.roles.size(); ++e) {
                risky += r.roles[e] == EdgeRole::Risky;
                per_level += r.edge_level[e] == i;
            }
            CHECK(risky == (1 << i));
            CHECK(per_level == 2);
        }
    }
}

TEST_CASE("parameter validation")
{
    RecursiveFamilySpec spec;
    spec.level = 0;
    CHECK_THROWS_AS(build_recursive(spec), ParameterError);
    spec.level = 2;
    // 4 * 0.7 <= 3 * 1
    spec.r_a = 0.7;
    CHECK_THROWS_AS(build_recursive(spec), ParameterError);
    spec.r_a = 0.76;
    CHECK_NOTHROW(build_recursive(spec));
    spec.variant = FamilyVariant::Functional;
    CHECK_THROWS_AS(build_recursive(spec), ParameterError);
    spec = {};
    spec.kappa = 0.0;
    CHECK_THROWS_AS(build_recursive(spec), ParameterError);
    spec.kappa = 1.0;
    spec.gamma_kappa = -1.0;
    CHECK_THROWS_AS(build_recursive(spec), ParameterError);
}

TEST_CASE("every path has at most one edge with variance")
{
    for (int i = 1; i <= 4; ++i) {
        for (FamilyVariant v : {FamilyVariant::Structural, FamilyVariant::Functional}) {
            const RecursiveInstance r = make(i, v);
            for (const Path& p : enumerate_paths(r.instance, 100000)) {
                int with_variance = 0;
                for (EdgeId e : p) {
                    with_variance += !r.instance.edge(e).variability.is_constant_on(1.0)
                                     || r.instance.edge(e).variability(0.0) != 0.0;
                }
                CHECK(with_variance <= 1);
            }
        }
    }
}

TEST_CASE("solved equilibria reproduce the closed-form costs")
{
    for (FamilyVariant v : {FamilyVariant::Structural, FamilyVariant::Functional}) {
        for (int i = 1; i <= 4; ++i) {
            for (double gk : {0.0, 0.5, 1.0, 3.0}) {
                const RecursiveInstance r = make(i, v, gk);
                CAPTURE(i);
                CAPTURE(gk);
                const EquilibriumResult x = solve_rawe(r.instance, tight());
                const EquilibriumResult z = solve_rnwe(r.instance, tight());
                REQUIRE(x.converged);
                REQUIRE(z.converged);
                // all risk-averse players pay 1 + 2^i gk, all risk-neutral ones 1
                CHECK(x.common_cost == doctest::Approx(1.0 + std::ldexp(gk, i)).epsilon(1e-8));
                CHECK(z.common_cost == doctest::Approx(1.0).epsilon(1e-8));
                CHECK(r.oracle.expected_pra == doctest::Approx(1.0 + std::ldexp(gk, i)));
            }
        }
    }
}

TEST_CASE("structural family with different demands")
{
    for (int i = 1; i <= 4; ++i) {
        const double r_n = 1.0;
        const double r_a = (std::ldexp(1.0, i) - 1.0) / std::ldexp(1.0, i) * r_n + 0.1;
        const RecursiveInstance r = make(i, FamilyVariant::Structural, 1.0, r_a, r_n);
        const EquilibriumResult x = solve_rawe(r.instance, tight());
        const EquilibriumResult z = solve_rnwe(r.instance.with_demand(r_n), tight());
        CHECK(social_cost(r.instance, x.flow) == doctest::Approx(r.oracle.rawe_cost).epsilon(1e-7));
        CHECK(social_cost(r.instance, z.flow) == doctest::Approx(r.oracle.rnwe_cost).epsilon(1e-7));
        CHECK(r.oracle.rawe_cost == doctest::Approx((1.0 + std::ldexp(1.0, i)) * r_a));
    }
}

TEST_CASE("functional a_j values at the two equilibria")
{
    for (int i = 1; i <= 4; ++i) {
        const RecursiveInstance r = make(i, FamilyVariant::Functional, 1.0);
        const EdgeFlow x = induced_edge_flow(r.instance, r.oracle.rawe);
        const EdgeFlow z = induced_edge_flow(r.instance, r.oracle.rnwe);
        const double n = std::ldexp(1.0, i);
        for (EdgeId e = 0; e < r.instance.num_edges(); ++e) {
            const int j = r.edge_level[static_cast<std::size_t>(e)];
            if (j == 0) {
                continue;
            }
            CAPTURE(i);
            CAPTURE(j);
            const double share = std::ldexp(1.0, j - 1);
            // each a_j edge carries 2^{j-1}/2^i risk-neutral and 2^{j-1}/(2^i - 1) risk-averse flow
            CHECK(z[e] == doctest::Approx(share / n));
            CHECK(x[e] == doctest::Approx(share / (n - 1.0)));
            const LatencyFn& a = r.instance.edge(e).latency;
            CHECK(a(z[e]) == doctest::Approx(0.0));
            CHECK(a(x[e]) == doctest::Approx(share));
            CHECK(a(0.5 * z[e]) == 0.0);
        }
    }
}

TEST_CASE("closed-form check")
{
    const RecursiveInstance r = make(3, FamilyVariant::Structural);
    CHECK(closed_form_check(r.instance, r.oracle, 1e-9).passed);

    SUBCASE("perturbed a_j latency is caught")
    {
        std::vector<Edge> edges = r.instance.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (r.edge_level[e] == 2) {
                PiecewiseLinear pwl = std::get<PiecewiseLinear>(edges[e].latency.repr());
                for (double& y : pwl.ys) {
                    y += 0.1;
                }
                edges[e].latency = LatencyFn::piecewise_linear(pwl.xs, pwl.ys);
                break;
            }
        }
        const ClosedFormReport rep = closed_form_check(r.instance.with_edges(edges), r.oracle, 1e-9);
        CHECK_FALSE(rep.passed);
        CHECK_FALSE(rep.failures.empty());
    }
    SUBCASE("gamma = 0 keeps the closed form")
    {
        const RecursiveInstance g0 = make(2, FamilyVariant::Functional, 0.0);
        CHECK(closed_form_check(g0.instance, g0.oracle, 1e-9).passed);
    }
    SUBCASE("wrong demand total is caught")
    {
        OracleFlows bad = r.oracle;
        bad.rawe.amounts *= 0.5;
        CHECK_FALSE(closed_form_check(r.instance, bad, 1e-9).passed);
    }
}

TEST_CASE("Braess graph")
{
    const Topology topo = braess_topology();
    CHECK(topo.num_vertices == 4);
    CHECK(topo.arcs.size() == 5);
    CHECK(is_braess_topology(topo));
    CHECK(is_braess_topology(topology_of(build_braess())));

    // classic instance: everyone on the zig-zag, cost 2, against 1.5 when split
    const NetworkInstance classic = build_braess(classic_braess_functions());
    const EquilibriumResult b = brute_force_equilibrium(classic, 30);
    CHECK(b.common_cost == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(solve_rnwe(classic).common_cost == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("domino with ears")
{
    const Topology d = build_domino_with_ears();
    CHECK(d.num_vertices == 6);
    CHECK(d.arcs.size() == 9);
    CHECK_FALSE(is_braess_topology(d));
    const std::vector<EdgeId> verticals = {kDominoLowerLeftVertical, kDominoUpperRightVertical};
    const Topology c = contract_arcs(d, verticals);
    CHECK(c.num_vertices == 4);
    CHECK(is_braess_topology(c));
    CHECK(domino_contracts_to_braess());

    const std::vector<EdgeId> one = {kDominoLowerLeftVertical};
    CHECK_FALSE(is_braess_topology(contract_arcs(d, one)));
}

TEST_CASE("random instances are deterministic and valid")
{
    for (RandomFamily f : {RandomFamily::AffineDag, RandomFamily::PolynomialDag, RandomFamily::SeriesParallel,
                           RandomFamily::Braess, RandomFamily::DominoWithEars}) {
        for (RiskModel m : {RiskModel::MeanVar, RiskModel::MeanStdev}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const RandomInstanceSpec spec{f, seed, 2, m};
                const NetworkInstance a = random_instance(spec);
                CHECK(a == random_instance(spec));
                CHECK(a.risk_model() == m);
                CHECK(a.demand() > 0.0);
            }
        }
        CHECK_FALSE(random_instance({f, 1, 2, RiskModel::MeanVar}) == random_instance({f, 2, 2, RiskModel::MeanVar}));
    }
    CHECK(is_braess_topology(topology_of(random_instance({RandomFamily::Braess, 7, 1, RiskModel::MeanVar}))));
}
