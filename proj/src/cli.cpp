#include "riskroute/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "riskroute/analysis.hpp"
#include "riskroute/errors.hpp"
#include "riskroute/instances.hpp"
#include "riskroute/io.hpp"
#include "riskroute/solver.hpp"

namespace riskroute {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kFamilies = {
    "structural",    "functional", "braess",        "domino",       "random-affine",
    "random-poly",   "random-sp",  "random-braess", "random-domino",
};

struct FamilyOptions {
    std::string family = "structural";
    int level = 1;
    double r_a = 1.0;
    double r_n = 1.0;
    double kappa = 1.0;
    std::string risk_model = "mean-var";
    int degree = 1;
};

struct SolveOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    std::string step_rule = "exact";

    SolverConfig config() const
    {
        SolverConfig cfg;
        cfg.tolerance = tolerance;
        cfg.max_iterations = max_iterations;
        cfg.step_rule = step_rule == "msa" ? StepRule::SuccessiveAverages : StepRule::ExactLineSearch;
        cfg.validate();
        return cfg;
    }
};

struct Built {
    NetworkInstance instance;
    std::optional<OracleFlows> oracle;
    int level = 0;
    std::string id;
};

bool is_random(const std::string& family)
{
    return family.rfind("random-", 0) == 0;
}

RandomFamily random_family(const std::string& name)
{
    for (RandomFamily f : {RandomFamily::AffineDag, RandomFamily::PolynomialDag, RandomFamily::SeriesParallel,
                           RandomFamily::Braess, RandomFamily::DominoWithEars}) {
        if (to_string(f) == name) {
            return f;
        }
    }
    throw ParameterError("unknown random family '" + name + "'");
}

Built build_family(const FamilyOptions& o, int level, double gamma_kappa, std::uint64_t seed)
{
    const RiskModel model = parse_risk_model(o.risk_model);
    std::ostringstream id;
    id << o.family;
    if (is_random(o.family)) {
        RandomInstanceSpec spec;
        spec.family = random_family(o.family);
        spec.seed = seed;
        spec.degree = o.degree;
        spec.model = model;
        id << "-s" << seed;
        if (spec.family == RandomFamily::PolynomialDag) {
            id << "-p" << o.degree;
        }
        return {random_instance(spec), std::nullopt, 0, id.str()};
    }
    if (o.family == "domino") {
        Topology topo = build_domino_with_ears();
        std::vector<LatencyFn> lat(topo.arcs.size(), LatencyFn::affine(1.0, 1.0));
        std::vector<LatencyFn> var(topo.arcs.size(), LatencyFn::constant(0.0));
        id << "-gk" << format_double(gamma_kappa);
        return {assign_functions(topo, std::move(lat), std::move(var), 1.0, gamma_kappa, model),
                std::nullopt, 0, id.str()};
    }
    RecursiveFamilySpec spec;
    spec.level = o.family == "braess" ? 1 : level;
    spec.r_a = o.r_a;
    spec.r_n = o.r_n;
    spec.kappa = o.kappa;
    spec.gamma_kappa = gamma_kappa;
    spec.risk_model = model;
    spec.variant = o.family == "functional" ? FamilyVariant::Functional : FamilyVariant::Structural;
    if (o.family != "braess") {
        id << "-i" << spec.level;
    }
    id << "-gk" << format_double(gamma_kappa);
    RecursiveInstance r = build_recursive(spec);
    return {std::move(r.instance), std::move(r.oracle), spec.level, id.str()};
}

void add_family_options(CLI::App* cmd, FamilyOptions& o)
{
    cmd->add_option("--family", o.family, "Instance family")->check(CLI::IsMember(kFamilies));
    cmd->add_option("--r-a", o.r_a, "Risk-averse demand of the structural family");
    cmd->add_option("--r-n", o.r_n, "Risk-neutral demand of the structural family");
    cmd->add_option("--kappa", o.kappa, "Variance scale of the risky edges");
    cmd->add_option("--risk-model", o.risk_model, "mean-var or mean-stdev")
        ->check(CLI::IsMember({"mean-var", "mean-stdev"}));
    cmd->add_option("--degree", o.degree, "Latency degree for random-poly")->check(CLI::Range(1, 8));
}

void add_solve_options(CLI::App* cmd, SolveOptions& o)
{
    cmd->add_option("--tolerance", o.tolerance, "Relative VI residual at which to stop");
    cmd->add_option("--max-iters", o.max_iterations, "Iteration limit per solve");
    cmd->add_option("--step-rule", o.step_rule, "exact or msa")->check(CLI::IsMember({"exact", "msa"}));
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write)
{
    if (path.empty()) {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::trunc);
    if (!file) {
        throw ParseError("cannot write " + path);
    }
    write(file);
}

struct EquilibriumPair {
    EquilibriumResult rawe;
    EquilibriumResult rnwe;
};

EquilibriumPair solve_pair(const NetworkInstance& inst, const SolverConfig& cfg)
{
    return {solve_rawe(inst, cfg), solve_rnwe(inst, cfg)};
}

std::vector<BoundKind> kinds_for(RiskModel model)
{
    if (model == RiskModel::MeanStdev) {
        return {BoundKind::StdevZeroAlt, BoundKind::StdevOneAlt};
    }
    return {BoundKind::TopologicalEta, BoundKind::TopologicalVertices, BoundKind::FunctionalSmooth};
}

BoundKind default_sweep_kind(const std::string& family, RiskModel model)
{
    if (model == RiskModel::MeanStdev) {
        return family == "random-sp" ? BoundKind::StdevZeroAlt : BoundKind::StdevOneAlt;
    }
    if (family == "functional" || family == "random-affine" || family == "random-poly") {
        return BoundKind::FunctionalSmooth;
    }
    return BoundKind::TopologicalEta;
}

int cmd_generate(const FamilyOptions& fo, int level, double gamma_kappa, std::uint64_t seed,
                 std::string out_path, std::ostream& out)
{
    const Built b = build_family(fo, level, gamma_kappa, seed);
    if (out_path.empty()) {
        const char* dir = std::getenv(kOutDirEnv);
        out_path = (fs::path(dir && *dir ? dir : ".") / (b.id + ".txt")).string();
    }
    save_instance(out_path, b.instance);
    out << "wrote " << out_path << " (" << b.instance.num_vertices() << " vertices, "
        << b.instance.num_edges() << " edges)\n";
    if (b.oracle) {
        const fs::path sidecar = oracle_path_for(out_path);
        save_oracle(sidecar, *b.oracle);
        out << "wrote " << sidecar.string() << '\n';
    }
    return kExitOk;
}

int cmd_solve(const std::string& path, bool neutral, const SolveOptions& so, const std::string& out_path,
              std::ostream& out)
{
    const NetworkInstance inst = load_instance(path);
    const SolverConfig cfg = so.config();
    const EquilibriumResult res = neutral ? solve_rnwe(inst, cfg) : solve_rawe(inst, cfg);
    emit(out_path, out, [&](std::ostream& os) { write_solution(os, res); });
    return res.converged ? kExitOk : kExitCheckFailed;
}

int level_from_sidecar(const std::string& path)
{
    const fs::path sidecar = oracle_path_for(path);
    return fs::exists(sidecar) ? load_oracle(sidecar).level : 0;
}

int cmd_analyze(const std::string& path, const std::vector<std::string>& kind_names, const SolveOptions& so,
                const std::string& out_path, std::ostream& out)
{
    const NetworkInstance inst = load_instance(path);
    std::vector<BoundKind> kinds;
    for (const std::string& k : kind_names) {
        kinds.push_back(parse_bound_kind(k));
    }
    if (kinds.empty()) {
        kinds = kinds_for(inst.risk_model());
    }
    const EquilibriumPair eq = solve_pair(inst, so.config());
    const bool converged = eq.rawe.converged && eq.rnwe.converged;
    BoundRow row;
    row.instance_id = fs::path(path).stem().string();
    row.num_vertices = inst.num_vertices();
    row.level = level_from_sidecar(path);
    row.gamma = inst.gamma();
    row.converged = converged;
    bool violated = !converged;
    emit(out_path, out, [&](std::ostream& os) {
        write_bound_csv_header(os);
        for (BoundKind k : kinds) {
            row.report = check_bound(inst, eq.rawe, eq.rnwe, k);
            violated = violated || (row.report.applicable && !row.report.satisfied);
            write_bound_csv_row(os, row);
        }
    });
    return violated ? kExitCheckFailed : kExitOk;
}

int cmd_verify(const std::string& path, std::string oracle_path, const SolveOptions& so,
               const std::string& csv_path, std::ostream& out)
{
    const NetworkInstance inst = load_instance(path);
    if (oracle_path.empty()) {
        oracle_path = oracle_path_for(path).string();
    }
    const OracleFlows oracle = load_oracle(oracle_path);
    const SolverConfig cfg = so.config();
    std::vector<std::string> failures;
    auto record = [&](const std::string& check, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << check << (detail.empty() ? "" : ": " + detail) << '\n';
        if (!ok) {
            failures.push_back(check);
        }
    };

    const ClosedFormReport cf = closed_form_check(inst, oracle, 1e-10);
    std::string cf_detail;
    for (const std::string& f : cf.failures) {
        cf_detail += (cf_detail.empty() ? "" : "; ") + f;
    }
    record("closed-form", cf.passed, cf_detail);

    if (oracle.variant == FamilyVariant::Structural) {
        const PathPropertyReport props = verify_path_properties(oracle.level, inst, oracle);
        std::string detail;
        for (const std::string& f : props.failures) {
            detail += (detail.empty() ? "" : "; ") + f;
        }
        record("path-costs", props.passed, detail);
    }

    const EquilibriumResult rawe = solve_rawe(inst.with_demand(oracle.rawe_demand), cfg);
    const EquilibriumResult rnwe =
        oracle.rnwe_demand == oracle.rawe_demand ? solve_rnwe(inst, cfg)
                                                 : solve_rnwe(inst.with_demand(oracle.rnwe_demand), cfg);
    const double pra = compute_pra(inst, rawe, rnwe);
    const double rel = std::abs(pra - oracle.expected_pra) / oracle.expected_pra;
    record("pra", rawe.converged && rnwe.converged && rel <= 1e-5,
           "observed " + format_double(pra) + ", expected " + format_double(oracle.expected_pra));

    const EquilibriumResult same_demand_rnwe =
        oracle.rnwe_demand == oracle.rawe_demand ? rnwe : solve_rnwe(inst.with_demand(oracle.rawe_demand), cfg);
    const NetworkInstance at = inst.with_demand(oracle.rawe_demand);
    std::ostringstream csv;
    write_bound_csv_header(csv);
    for (BoundKind k : kinds_for(inst.risk_model())) {
        BoundRow row;
        row.instance_id = fs::path(path).stem().string();
        row.num_vertices = inst.num_vertices();
        row.level = oracle.level;
        row.gamma = inst.gamma();
        row.report = check_bound(at, rawe, same_demand_rnwe, k);
        row.converged = rawe.converged && same_demand_rnwe.converged;
        write_bound_csv_row(csv, row);
        const BoundReport& b = row.report;
        std::string detail = "pra " + format_double(b.pra_observed) + " <= bound " + format_double(b.bound_value);
        if (k == BoundKind::TopologicalEta || k == BoundKind::StdevZeroAlt || k == BoundKind::StdevOneAlt) {
            detail += " (eta " + std::to_string(b.eta) + ")";
        }
        if (k == BoundKind::FunctionalSmooth) {
            detail += " (mu " + format_double(b.mu) + ")";
        }
        if (!b.applicable) {
            detail += " [not applicable: " + b.note + "]";
        }
        record(std::string("bound ") + std::string(to_string(k)), !b.applicable || b.satisfied, detail);
    }
    if (!csv_path.empty()) {
        emit(csv_path, out, [&](std::ostream& os) { os << csv.str(); });
    }
    out << (failures.empty() ? "all checks passed\n" : std::to_string(failures.size()) + " check(s) failed\n");
    return failures.empty() ? kExitOk : kExitCheckFailed;
}

struct SweepPoint {
    int level = 0;
    double gamma_kappa = 0.0;
    std::uint64_t seed = 0;
};

BoundRow sweep_row(const FamilyOptions& fo, const SweepPoint& p, BoundKind kind, const SolverConfig& cfg)
{
    const Built b = build_family(fo, p.level, p.gamma_kappa, p.seed);
    const EquilibriumPair eq = solve_pair(b.instance, cfg);
    BoundRow row;
    row.instance_id = b.id;
    row.num_vertices = b.instance.num_vertices();
    row.level = b.level;
    row.gamma = b.instance.gamma();
    row.converged = eq.rawe.converged && eq.rnwe.converged;
    row.report = check_bound(b.instance, eq.rawe, eq.rnwe, kind);
    return row;
}

int cmd_sweep(const FamilyOptions& fo, const std::vector<int>& levels, const std::vector<double>& gks,
              int seeds, std::uint64_t first_seed, const std::string& kind_name, const SolveOptions& so,
              const std::string& out_path, std::ostream& out)
{
    const BoundKind kind =
        kind_name.empty() ? default_sweep_kind(fo.family, parse_risk_model(fo.risk_model)) : parse_bound_kind(kind_name);
    const SolverConfig cfg = so.config();
    std::vector<SweepPoint> grid;
    if (is_random(fo.family)) {
        for (int k = 0; k < seeds; ++k) {
            grid.push_back({0, 0.0, first_seed + static_cast<std::uint64_t>(k)});
        }
    } else {
        for (int level : levels) {
            for (double gk : gks) {
                grid.push_back({level, gk, 0});
            }
        }
    }
    if (grid.empty()) {
        throw ParameterError("sweep grid is empty");
    }
    // Validate every point up front so bad input is an input error, not a worker failure.
    for (const SweepPoint& p : grid) {
        build_family(fo, p.level, p.gamma_kappa, p.seed);
    }

    std::vector<BoundRow> rows(grid.size());
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < grid.size(); begin += width) {
        const std::size_t end = std::min(grid.size(), begin + width);
        std::vector<std::future<BoundRow>> jobs;
        for (std::size_t k = begin; k < end; ++k) {
            jobs.push_back(std::async(std::launch::async, sweep_row, std::cref(fo), std::cref(grid[k]), kind,
                                      std::cref(cfg)));
        }
        for (std::size_t k = begin; k < end; ++k) {
            rows[k] = jobs[k - begin].get();
        }
    }

    bool violated = false;
    emit(out_path, out, [&](std::ostream& os) {
        write_bound_csv_header(os);
        for (const BoundRow& row : rows) {
            violated = violated || (row.converged && row.report.applicable && !row.report.satisfied);
            write_bound_csv_row(os, row);
        }
    });
    return violated ? kExitCheckFailed : kExitOk;
}

// Looks for mean-stdev instances with PRAS above 1 + eta gamma kappa.  The
// inequality is only conjectured, so hits are reported, never treated as errors.
int cmd_conjecture(FamilyOptions fo, int seeds, std::uint64_t first_seed, const SolveOptions& so,
                   std::ostream& out)
{
    if (!is_random(fo.family)) {
        throw ParameterError("conjecture-search needs a random-* family");
    }
    fo.risk_model = "mean-stdev";
    const SolverConfig cfg = so.config();
    int hits = 0;
    int skipped = 0;
    for (int k = 0; k < seeds; ++k) {
        const Built b = build_family(fo, 0, 0.0, first_seed + static_cast<std::uint64_t>(k));
        const EquilibriumPair eq = solve_pair(b.instance, cfg);
        const BoundReport r = check_bound(b.instance, eq.rawe, eq.rnwe, BoundKind::StdevOneAlt);
        if (!eq.rawe.converged || !eq.rnwe.converged || r.eta < 0) {
            ++skipped;
            continue;
        }
        const double conjectured = 1.0 + r.eta * b.instance.gamma() * r.kappa;
        if (r.pra_observed > conjectured + 1e-6) {
            ++hits;
            out << "candidate " << b.id << ": pras " << format_double(r.pra_observed) << " > "
                << format_double(conjectured) << " (eta " << r.eta << ")\n";
        }
    }
    out << "searched " << seeds << " instances, " << hits << " candidate(s), " << skipped << " skipped\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Risk-averse and risk-neutral Wardrop equilibria and price-of-risk-aversion bounds", "riskroute"};
    app.require_subcommand(1);

    FamilyOptions fo;
    SolveOptions so;
    int level = 1;
    double gamma_kappa = 1.0;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string instance_path;

    CLI::App* gen = app.add_subcommand("generate", "Write an instance file (plus oracle sidecar)");
    add_family_options(gen, fo);
    gen->add_option("--level", level, "Recursion level i")->check(CLI::Range(1, 20));
    gen->add_option("--gamma-kappa", gamma_kappa, "Product gamma * kappa");
    gen->add_option("--seed", seed, "Seed for random-* families");
    gen->add_option("--out", out_path, "Output file (default: $RISKROUTE_OUT_DIR/<id>.txt)");

    bool neutral = false;
    CLI::App* solve = app.add_subcommand("solve", "Solve one equilibrium of an instance file");
    solve->add_option("instance", instance_path, "Instance file")->required();
    solve->add_flag("--neutral", neutral, "Risk-neutral equilibrium instead of risk-averse");
    add_solve_options(solve, so);
    solve->add_option("--out", out_path, "Solution file (default: stdout)");

    std::vector<std::string> kind_names;
    CLI::App* analyze = app.add_subcommand("analyze", "Solve both equilibria and report bounds as CSV");
    analyze->add_option("instance", instance_path, "Instance file")->required();
    analyze->add_option("--kind", kind_names, "Bound kind(s); default: all for the risk model")->delimiter(',');
    add_solve_options(analyze, so);
    analyze->add_option("--out", out_path, "CSV file (default: stdout)");

    std::string oracle_path;
    CLI::App* verify = app.add_subcommand("verify", "Check an instance against its closed-form oracle");
    verify->add_option("instance", instance_path, "Instance file")->required();
    verify->add_option("--oracle", oracle_path, "Oracle file (default: <instance>.oracle)");
    add_solve_options(verify, so);
    verify->add_option("--out", out_path, "Bound CSV file");

    std::vector<int> levels{1, 2, 3, 4};
    std::vector<double> gks{1.0};
    int seeds = 10;
    std::string kind_name;
    CLI::App* sweep = app.add_subcommand("sweep", "Bound table over a grid of levels and gamma*kappa values");
    add_family_options(sweep, fo);
    sweep->add_option("--level", levels, "Levels, comma separated")->delimiter(',')->check(CLI::Range(1, 20));
    sweep->add_option("--gamma-kappa", gks, "gamma*kappa values, comma separated")->delimiter(',');
    sweep->add_option("--seeds", seeds, "Instances per random family")->check(CLI::Range(1, 100000));
    sweep->add_option("--seed", seed, "First seed for random families");
    sweep->add_option("--kind", kind_name, "Bound kind");
    add_solve_options(sweep, so);
    sweep->add_option("--out", out_path, "CSV file (default: stdout)");

    CLI::App* conj = app.add_subcommand("conjecture-search",
                                        "Experimental: search mean-stdev instances with PRAS > 1 + eta gamma kappa");
    conj->add_option("--family", fo.family, "random-* family")->check(CLI::IsMember(kFamilies));
    conj->add_option("--seeds", seeds, "Number of instances")->check(CLI::Range(1, 100000));
    conj->add_option("--seed", seed, "First seed");
    add_solve_options(conj, so);

    std::vector<const char*> argv;
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*gen) {
            return cmd_generate(fo, level, gamma_kappa, seed, out_path, out);
        }
        if (*solve) {
            return cmd_solve(instance_path, neutral, so, out_path, out);
        }
        if (*analyze) {
            return cmd_analyze(instance_path, kind_names, so, out_path, out);
        }
        if (*verify) {
            return cmd_verify(instance_path, oracle_path, so, out_path, out);
        }
        if (*sweep) {
            return cmd_sweep(fo, levels, gks, seeds, seed, kind_name, so, out_path, out);
        }
        return cmd_conjecture(fo, seeds, seed, so, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitInputError;
}

}  // namespace riskroute
