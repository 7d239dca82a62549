#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "helpers.hpp"
#include "riskroute/errors.hpp"
#include "riskroute/instances.hpp"
#include "riskroute/network.hpp"
#include "riskroute/shortest_path.hpp"

using namespace riskroute;

TEST_CASE("latency functions evaluate and integrate exactly")
{
    const LatencyFn c = LatencyFn::constant(2.5);
    CHECK(c(0.0) == 2.5);
    CHECK(c(7.0) == 2.5);
    CHECK(c.integral(2.0) == doctest::Approx(5.0));

    const LatencyFn a = LatencyFn::affine(3.0, 1.0);
    CHECK(a(2.0) == 7.0);
    CHECK(a.integral(2.0) == doctest::Approx(3.0 * 2.0 + 2.0));

    const LatencyFn p = LatencyFn::polynomial({1.0, 0.0, 2.0});
    CHECK(p(3.0) == 19.0);
    CHECK(p.integral(3.0) == doctest::Approx(3.0 + 2.0 * 9.0));
    CHECK(LatencyFn::monomial(2.0, 3)(2.0) == 16.0);

    const LatencyFn pwl = LatencyFn::piecewise_linear({1.0, 2.0, 4.0}, {1.0, 3.0, 3.0});
    CHECK(pwl(0.0) == 1.0);
    CHECK(pwl(1.5) == 2.0);
    CHECK(pwl(3.0) == 3.0);
    // past the last breakpoint the last slope (0) continues
    CHECK(pwl(10.0) == 3.0);
    // 1 on [0,1], trapezoid on [1,2], flat 3 on [2,3]
    CHECK(pwl.integral(3.0) == doctest::Approx(1.0 + 2.0 + 3.0));

    const LatencyFn ramp = LatencyFn::piecewise_linear({0.0, 1.0}, {0.0, 2.0});
    CHECK(ramp(3.0) == 6.0);
    CHECK(ramp.integral(3.0) == doctest::Approx(9.0));
}

TEST_CASE("latency factories reject invalid parameters")
{
    CHECK_THROWS_AS(LatencyFn::constant(-1.0), ParameterError);
    CHECK_THROWS_AS(LatencyFn::affine(-1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(LatencyFn::polynomial({}), ParameterError);
    CHECK_THROWS_AS(LatencyFn::polynomial({1.0, -0.5}), ParameterError);
    CHECK_THROWS_AS(LatencyFn::piecewise_linear({0.0, 0.0}, {0.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(LatencyFn::piecewise_linear({0.0, 1.0}, {1.0, 0.5}), ParameterError);
    CHECK_THROWS_AS(LatencyFn::piecewise_linear({0.0, 1.0}, {1.0}), ParameterError);
    CHECK_THROWS_AS(LatencyFn::constant(std::nan("")), ParameterError);
}

TEST_CASE("latency evaluation is monotone over random breakpoint sets")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + static_cast<int>(u(rng) * 6);
        std::vector<double> xs;
        std::vector<double> ys;
        double x = u(rng);
        double y = u(rng);
        for (int j = 0; j < k; ++j) {
            xs.push_back(x);
            ys.push_back(y);
            x += 0.01 + u(rng);
            y += u(rng) < 0.3 ? 0.0 : u(rng);
        }
        const LatencyFn f = LatencyFn::piecewise_linear(xs, ys);
        const LatencyFn g = LatencyFn::polynomial({u(rng), u(rng), u(rng) * 3.0});
        double prev_f = f(0.0);
        double prev_g = g(0.0);
        for (double t = 0.0; t < x + 2.0; t += 0.013) {
            CHECK(f(t) >= prev_f);
            CHECK(g(t) >= prev_g);
            prev_f = f(t);
            prev_g = g(t);
        }
    }
}

TEST_CASE("is_constant_on detects flat prefixes")
{
    CHECK(LatencyFn::constant(1.0).is_constant_on(5.0));
    CHECK_FALSE(LatencyFn::affine(1.0, 0.0).is_constant_on(0.5));
    CHECK(LatencyFn::affine(0.0, 2.0).is_constant_on(0.5));
    const LatencyFn ramp = LatencyFn::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 0.0, 1.0});
    CHECK(ramp.is_constant_on(0.5));
    CHECK_FALSE(ramp.is_constant_on(0.6));
}

TEST_CASE("network instances validate their invariants")
{
    const LatencyFn one = LatencyFn::constant(1.0);
    const LatencyFn zero = LatencyFn::constant(0.0);
    CHECK_THROWS_AS(NetworkInstance(2, {{0, 1, one, zero}}, 0, 0, 1.0, 0.0, RiskModel::MeanVar), StructuralError);
    CHECK_THROWS_AS(NetworkInstance(2, {{0, 2, one, zero}}, 0, 1, 1.0, 0.0, RiskModel::MeanVar), StructuralError);
    CHECK_THROWS_AS(NetworkInstance(2, {{1, 0, one, zero}}, 0, 1, 1.0, 0.0, RiskModel::MeanVar), StructuralError);
    CHECK_THROWS_AS(NetworkInstance(2, {{0, 1, one, zero}}, 0, 1, -1.0, 0.0, RiskModel::MeanVar), ParameterError);
    CHECK_THROWS_AS(NetworkInstance(2, {{0, 1, one, zero}}, 0, 1, 1.0, -0.1, RiskModel::MeanVar), ParameterError);

    const NetworkInstance ok(3, {{0, 1, one, zero}, {1, 2, one, zero}, {0, 2, one, zero}}, 0, 2, 1.0, 0.5,
                             RiskModel::MeanVar);
    CHECK(ok.out_edges(0) == std::vector<EdgeId>{0, 2});
    CHECK(ok.in_edges(2) == std::vector<EdgeId>{1, 2});
    CHECK_THROWS_AS(ok.edge(3), StructuralError);
    CHECK(ok.with_demand(2.0).demand() == 2.0);
    CHECK(ok.with_gamma(0.0).gamma() == 0.0);
    CHECK(ok.with_risk_model(RiskModel::MeanStdev).risk_model() == RiskModel::MeanStdev);
    CHECK(ok == ok.with_demand(1.0));
    CHECK_FALSE(ok == ok.with_demand(2.0));
}

TEST_CASE("risk model names")
{
    CHECK(parse_risk_model("mean-var") == RiskModel::MeanVar);
    CHECK(parse_risk_model("mean-stdev") == RiskModel::MeanStdev);
    CHECK(to_string(RiskModel::MeanStdev) == "mean-stdev");
    CHECK_THROWS_AS(parse_risk_model("variance"), ParseError);
}

TEST_CASE("path cost examples")
{
    SUBCASE("zig-zag of the level-1 instance at its risk-averse flow")
    {
        const RecursiveInstance r = build_recursive({});
        const EdgeFlow x = induced_edge_flow(r.instance, r.oracle.rawe);
        CHECK(path_cost(r.instance, r.oracle.rawe.paths.front(), x) == doctest::Approx(3.0));
    }
    SUBCASE("gamma = 0 gives the bare mean latency under both models")
    {
        for (RiskModel m : {RiskModel::MeanVar, RiskModel::MeanStdev}) {
            const NetworkInstance inst =
                testing::series(LatencyFn::affine(1.0, 1.0), LatencyFn::constant(4.0), LatencyFn::constant(2.0),
                                LatencyFn::constant(9.0), 0.0, m);
            EdgeFlow f(2);
            f << 1.0, 1.0;
            CHECK(path_cost(inst, {0, 1}, f) == doctest::Approx(4.0));
            CHECK(path_cost(inst, {0, 1}, f) == doctest::Approx(path_mean_latency(inst, {0, 1}, f)));
        }
    }
    SUBCASE("mean-stdev takes the square root of the summed variances")
    {
        const NetworkInstance inst =
            testing::series(LatencyFn::constant(1.0), LatencyFn::constant(9.0), LatencyFn::constant(1.0),
                            LatencyFn::constant(16.0), 1.0, RiskModel::MeanStdev);
        const EdgeFlow f = EdgeFlow::Ones(2);
        CHECK(path_cost(inst, {0, 1}, f) == doctest::Approx(7.0));
        CHECK(path_cost(inst.with_risk_model(RiskModel::MeanVar), {0, 1}, f) == doctest::Approx(27.0));
        CHECK(path_cost(inst, {0, 1}, f, 2.0) == doctest::Approx(12.0));
    }
    SUBCASE("unknown edges are structural errors")
    {
        const NetworkInstance inst = testing::pigou();
        CHECK_THROWS_AS(path_cost(inst, {5}, inst.zero_flow()), StructuralError);
    }
}

TEST_CASE("social cost uses means only")
{
    const RecursiveInstance r = build_recursive({});
    const NetworkInstance& inst = r.instance;
    CHECK(social_cost(inst, induced_edge_flow(inst, r.oracle.rnwe)) == doctest::Approx(1.0));
    CHECK(social_cost(inst, induced_edge_flow(inst, r.oracle.rawe)) == doctest::Approx(3.0));
    CHECK(social_cost(inst, inst.zero_flow()) == 0.0);
    // independent of gamma
    const EdgeFlow x = induced_edge_flow(inst, r.oracle.rawe);
    CHECK(social_cost(inst.with_gamma(0.0), x) == social_cost(inst, x));
}

TEST_CASE("induced edge flow")
{
    const NetworkInstance two = testing::pigou(2.0);
    PathFlow single;
    single.paths = {{1}};
    single.amounts = Eigen::VectorXd::Constant(1, 2.0);
    const EdgeFlow f = induced_edge_flow(two, single);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 2.0);

    PathFlow split;
    split.paths = {{0}, {1}};
    split.amounts = Eigen::VectorXd::Constant(2, 1.0);
    const EdgeFlow g = induced_edge_flow(two, split);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 1.0);

    PathFlow broken;
    broken.paths = {{0, 1}};
    broken.amounts = Eigen::VectorXd::Constant(1, 2.0);
    CHECK_THROWS_AS(induced_edge_flow(two, broken), StructuralError);
}

TEST_CASE("zig-zag paths of the level-2 functional instance load each a_2 edge with 2/3")
{
    RecursiveFamilySpec spec;
    spec.level = 2;
    spec.variant = FamilyVariant::Functional;
    const RecursiveInstance r = build_recursive(spec);
    const auto paths = enumerate_paths(r.instance, 100);
    // A zig-zag path uses a vertical edge; put 1/3 on each.
    PathFlow pf;
    for (const Path& p : paths) {
        const bool zigzag = std::any_of(p.begin(), p.end(), [&](EdgeId e) {
            return r.roles[static_cast<std::size_t>(e)] == EdgeRole::Vertical;
        });
        if (zigzag) {
            pf.paths.push_back(p);
        }
    }
    REQUIRE(pf.paths.size() == 3);
    pf.amounts = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    const EdgeFlow f = induced_edge_flow(r.instance, pf);
    int a2_edges = 0;
    for (EdgeId e = 0; e < r.instance.num_edges(); ++e) {
        if (r.edge_level[static_cast<std::size_t>(e)] == 2) {
            CHECK(f[e] == doctest::Approx(2.0 / 3.0));
            ++a2_edges;
        }
    }
    CHECK(a2_edges == 2);
}

TEST_CASE("path enumeration")
{
    const NetworkInstance braess = build_braess();
    const auto paths = enumerate_paths(braess, 10);
    CHECK(paths.size() == 3);
    CHECK(std::is_sorted(paths.begin(), paths.end()));

    RecursiveFamilySpec spec;
    spec.level = 2;
    CHECK(enumerate_paths(build_recursive(spec).instance, 100).size() == 7);

    const NetworkInstance single(2, {{0, 1, LatencyFn::constant(1.0), LatencyFn::constant(0.0)}}, 0, 1, 1.0, 0.0,
                                 RiskModel::MeanVar);
    CHECK(enumerate_paths(single, 1).size() == 1);

    try {
        enumerate_paths(braess, 2);
        FAIL("expected the path cap to trip");
    } catch (const PathCapExceeded& e) {
        CHECK(std::string(e.what()).find("instance too large for path enumeration") != std::string::npos);
    }
    CHECK_THROWS_AS(enumerate_paths(braess, 0), ParameterError);
}

TEST_CASE("path/edge sum interchange for social cost")
{
    const NetworkInstance inst = random_instance({RandomFamily::AffineDag, 11, 1, RiskModel::MeanVar});
    const auto paths = enumerate_paths(inst, 100);
    PathFlow pf;
    pf.paths = paths;
    pf.amounts = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(paths.size()), 1.0, 2.0);
    pf.amounts *= inst.demand() / pf.amounts.sum();
    const EdgeFlow f = induced_edge_flow(inst, pf);
    double by_path = 0.0;
    for (std::size_t j = 0; j < paths.size(); ++j) {
        by_path += pf.amounts[static_cast<Eigen::Index>(j)] * path_mean_latency(inst, paths[j], f);
    }
    CHECK(social_cost(inst, f) == doctest::Approx(by_path).epsilon(1e-12));
    CHECK(feasibility_violation(inst, f) < 1e-12);
}

TEST_CASE("feasibility violation")
{
    const NetworkInstance inst = testing::pigou();
    EdgeFlow f(2);
    f << 0.5, 0.5;
    CHECK(feasibility_violation(inst, f) == doctest::Approx(0.0));
    f << 0.5, 0.2;
    CHECK(feasibility_violation(inst, f) == doctest::Approx(0.3));
    f << -0.1, 1.1;
    CHECK(feasibility_violation(inst, f) >= 0.1);
}

TEST_CASE("shortest path breaks ties by hop count then edge ids")
{
    const NetworkInstance braess = build_braess();
    Eigen::VectorXd costs = Eigen::VectorXd::Zero(5);
    // all paths cost 0; two-edge paths win over the zig-zag, then [0 4] < [3 2]
    CHECK(shortest_path(braess, costs).path == Path{0, 4});
    costs << 1.0, 0.0, 0.0, 0.0, 0.0;
    CHECK(shortest_path(braess, costs).path == Path{3, 2});
    costs << 1.0, 0.0, 1.0, 0.0, 0.0;
    const ShortestPath zz = shortest_path(braess, costs);
    CHECK(zz.path == Path{3, 1, 4});
    CHECK(zz.cost == 0.0);
    costs[0] = -1.0;
    CHECK_THROWS_AS(shortest_path(braess, costs), ParameterError);
}
