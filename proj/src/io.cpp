#include "riskroute/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "riskroute/errors.hpp"

namespace riskroute {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token)
{
    double v = 0.0;
    const char* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
        throw ParseError("expected a finite number, got '" + std::string(token) + "'");
    }
    return v;
}

namespace {

long long parse_integer(std::string_view token)
{
    long long v = 0;
    const char* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("expected an integer, got '" + std::string(token) + "'");
    }
    return v;
}

int parse_int(std::string_view token)
{
    const long long v = parse_integer(token);
    if (v < -1'000'000'000LL || v > 1'000'000'000LL) {
        throw ParseError("integer out of range: " + std::string(token));
    }
    return static_cast<int>(v);
}

int parse_count(std::string_view token)
{
    const int v = parse_int(token);
    if (v < 0) {
        throw ParseError("expected a nonnegative count, got '" + std::string(token) + "'");
    }
    return v;
}

// Token stream over the meaningful lines of a versioned text file.
class Reader {
public:
    Reader(std::istream& is, std::string_view kind) : is_(is)
    {
        std::string first;
        const std::string expected = "# riskroute " + std::string(kind) + " v1";
        if (!std::getline(is_, first) || strip(first) != expected) {
            throw ParseError("missing header '" + expected + "'");
        }
        line_no_ = 1;
    }

    // Next non-comment line split on whitespace; empty at end of input.
    std::vector<std::string> next()
    {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            const std::string_view s = strip(line);
            if (s.empty() || s.front() == '#') {
                continue;
            }
            std::istringstream ss{std::string(s)};
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) {
                tokens.push_back(t);
            }
            return tokens;
        }
        return {};
    }

    // Reads "<key> <value>" and returns the value token.
    std::string value(std::string_view key)
    {
        const auto t = next();
        if (t.size() != 2 || t[0] != key) {
            fail("expected '" + std::string(key) + " <value>'");
        }
        return t[1];
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError("line " + std::to_string(line_no_) + ": " + msg);
    }

    template <class F>
    auto at_line(F&& f) -> decltype(f())
    {
        try {
            return f();
        } catch (const ParseError& e) {
            fail(e.what());
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

private:
    static std::string_view strip(std::string_view s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) {
            return {};
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::istream& is_;
    int line_no_ = 0;
};

// Parses a function spec starting at tokens[pos]; advances pos.
LatencyFn parse_latency(const std::vector<std::string>& t, std::size_t& pos)
{
    auto take = [&]() -> const std::string& {
        if (pos >= t.size()) {
            throw ParseError("function spec ends early");
        }
        return t[pos++];
    };
    const std::string kind = take();
    if (kind == "const") {
        return LatencyFn::constant(parse_double(take()));
    }
    if (kind == "affine") {
        const double a = parse_double(take());
        const double b = parse_double(take());
        return LatencyFn::affine(a, b);
    }
    if (kind == "poly") {
        const int k = parse_count(take());
        std::vector<double> coeffs;
        for (int j = 0; j < k; ++j) {
            coeffs.push_back(parse_double(take()));
        }
        return LatencyFn::polynomial(std::move(coeffs));
    }
    if (kind == "pwl") {
        const int k = parse_count(take());
        std::vector<double> xs;
        std::vector<double> ys;
        for (int j = 0; j < k; ++j) {
            xs.push_back(parse_double(take()));
            ys.push_back(parse_double(take()));
        }
        return LatencyFn::piecewise_linear(std::move(xs), std::move(ys));
    }
    throw ParseError("unknown function kind '" + kind + "'");
}

void write_path(std::ostream& os, const Path& p, double amount)
{
    os << "path " << format_double(amount) << ' ' << p.size();
    for (EdgeId e : p) {
        os << ' ' << e;
    }
    os << '\n';
}

void write_path_flow(std::ostream& os, std::string_view key, const PathFlow& pf)
{
    os << key << ' ' << pf.paths.size() << '\n';
    for (std::size_t j = 0; j < pf.paths.size(); ++j) {
        write_path(os, pf.paths[j], pf.amounts[static_cast<Eigen::Index>(j)]);
    }
}

PathFlow read_path_flow(Reader& r, std::string_view key)
{
    const int count = r.at_line([&] { return parse_count(r.value(key)); });
    PathFlow pf;
    pf.amounts.resize(count);
    for (int j = 0; j < count; ++j) {
        const auto t = r.next();
        r.at_line([&] {
            if (t.size() < 3 || t[0] != "path") {
                throw ParseError("expected 'path <amount> <k> <edges...>'");
            }
            pf.amounts[j] = parse_double(t[1]);
            const int k = parse_count(t[2]);
            if (t.size() != static_cast<std::size_t>(k) + 3) {
                throw ParseError("path edge count does not match");
            }
            Path p;
            for (int m = 0; m < k; ++m) {
                p.push_back(parse_int(t[static_cast<std::size_t>(m) + 3]));
            }
            pf.paths.push_back(std::move(p));
            return 0;
        });
    }
    return pf;
}

template <class T, class F>
T with_file(const std::filesystem::path& path, std::ios::openmode mode, F&& f)
{
    std::fstream fs(path, mode);
    if (!fs) {
        throw ParseError("cannot open " + path.string());
    }
    try {
        return f(fs);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace

void write_latency(std::ostream& os, const LatencyFn& fn)
{
    std::visit(
        [&os](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                os << "const " << format_double(f.value);
            } else if constexpr (std::is_same_v<T, Affine>) {
                os << "affine " << format_double(f.slope) << ' ' << format_double(f.intercept);
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                os << "poly " << f.coeffs.size();
                for (double c : f.coeffs) {
                    os << ' ' << format_double(c);
                }
            } else {
                os << "pwl " << f.xs.size();
                for (std::size_t k = 0; k < f.xs.size(); ++k) {
                    os << ' ' << format_double(f.xs[k]) << ' ' << format_double(f.ys[k]);
                }
            }
        },
        fn.repr());
}

void write_instance(std::ostream& os, const NetworkInstance& inst)
{
    os << "# riskroute instance v1\n"
       << "vertices " << inst.num_vertices() << '\n'
       << "source " << inst.source() << '\n'
       << "sink " << inst.sink() << '\n'
       << "demand " << format_double(inst.demand()) << '\n'
       << "gamma " << format_double(inst.gamma()) << '\n'
       << "risk_model " << to_string(inst.risk_model()) << '\n'
       << "edges " << inst.num_edges() << '\n';
    for (const Edge& e : inst.edges()) {
        os << "edge " << e.tail << ' ' << e.head << " latency ";
        write_latency(os, e.latency);
        os << " variability ";
        write_latency(os, e.variability);
        os << '\n';
    }
}

NetworkInstance read_instance(std::istream& is)
{
    Reader r(is, "instance");
    const int n = r.at_line([&] { return parse_count(r.value("vertices")); });
    const int s = r.at_line([&] { return parse_int(r.value("source")); });
    const int t = r.at_line([&] { return parse_int(r.value("sink")); });
    const double demand = r.at_line([&] { return parse_double(r.value("demand")); });
    const double gamma = r.at_line([&] { return parse_double(r.value("gamma")); });
    const RiskModel model = r.at_line([&] { return parse_risk_model(r.value("risk_model")); });
    const int m = r.at_line([&] { return parse_count(r.value("edges")); });
    std::vector<Edge> edges;
    for (int k = 0; k < m; ++k) {
        const auto tok = r.next();
        edges.push_back(r.at_line([&] {
            if (tok.size() < 4 || tok[0] != "edge" || tok[3] != "latency") {
                throw ParseError("expected 'edge <tail> <head> latency <fn> variability <fn>'");
            }
            Edge e;
            e.tail = parse_int(tok[1]);
            e.head = parse_int(tok[2]);
            std::size_t pos = 4;
            e.latency = parse_latency(tok, pos);
            if (pos >= tok.size() || tok[pos] != "variability") {
                throw ParseError("expected 'variability' after the latency spec");
            }
            ++pos;
            e.variability = parse_latency(tok, pos);
            if (pos != tok.size()) {
                throw ParseError("trailing tokens after the variability spec");
            }
            return e;
        }));
    }
    if (!r.next().empty()) {
        r.fail("unexpected content after the last edge");
    }
    try {
        return {n, std::move(edges), s, t, demand, gamma, model};
    } catch (const StructuralError& e) {
        throw ParseError(std::string("invalid instance: ") + e.what());
    } catch (const ParameterError& e) {
        throw ParseError(std::string("invalid instance: ") + e.what());
    }
}

void write_oracle(std::ostream& os, const OracleFlows& o)
{
    os << "# riskroute oracle v1\n"
       << "variant " << to_string(o.variant) << '\n'
       << "level " << o.level << '\n'
       << "gamma_kappa " << format_double(o.gamma_kappa) << '\n'
       << "rawe_demand " << format_double(o.rawe_demand) << '\n'
       << "rnwe_demand " << format_double(o.rnwe_demand) << '\n'
       << "rawe_cost " << format_double(o.rawe_cost) << '\n'
       << "rnwe_cost " << format_double(o.rnwe_cost) << '\n'
       << "expected_pra " << format_double(o.expected_pra) << '\n';
    write_path_flow(os, "rawe_paths", o.rawe);
    write_path_flow(os, "rnwe_paths", o.rnwe);
}

OracleFlows read_oracle(std::istream& is)
{
    Reader r(is, "oracle");
    OracleFlows o;
    const std::string variant = r.value("variant");
    if (variant == "structural") {
        o.variant = FamilyVariant::Structural;
    } else if (variant == "functional") {
        o.variant = FamilyVariant::Functional;
    } else {
        r.fail("unknown variant '" + variant + "'");
    }
    auto num = [&r](std::string_view key) { return r.at_line([&] { return parse_double(r.value(key)); }); };
    o.level = r.at_line([&] { return parse_count(r.value("level")); });
    o.gamma_kappa = num("gamma_kappa");
    o.rawe_demand = num("rawe_demand");
    o.rnwe_demand = num("rnwe_demand");
    o.rawe_cost = num("rawe_cost");
    o.rnwe_cost = num("rnwe_cost");
    o.expected_pra = num("expected_pra");
    o.rawe = read_path_flow(r, "rawe_paths");
    o.rnwe = read_path_flow(r, "rnwe_paths");
    return o;
}

void write_solution(std::ostream& os, const EquilibriumResult& res)
{
    os << "# riskroute solution v1\n"
       << "converged " << (res.converged ? 1 : 0) << '\n'
       << "iterations " << res.iterations << '\n'
       << "common_cost " << format_double(res.common_cost) << '\n'
       << "vi_residual " << format_double(res.vi_residual) << '\n'
       << "flow " << res.flow.size();
    for (Eigen::Index e = 0; e < res.flow.size(); ++e) {
        os << ' ' << format_double(res.flow[e]);
    }
    os << '\n';
    write_path_flow(os, "paths", res.path_flow);
}

EquilibriumResult read_solution(std::istream& is)
{
    Reader r(is, "solution");
    EquilibriumResult res;
    res.converged = r.at_line([&] { return parse_count(r.value("converged")); }) != 0;
    res.iterations = static_cast<std::size_t>(r.at_line([&] { return parse_integer(r.value("iterations")); }));
    res.common_cost = r.at_line([&] { return parse_double(r.value("common_cost")); });
    res.vi_residual = r.at_line([&] { return parse_double(r.value("vi_residual")); });
    const auto t = r.next();
    r.at_line([&] {
        if (t.size() < 2 || t[0] != "flow") {
            throw ParseError("expected 'flow <m> <values...>'");
        }
        const int m = parse_count(t[1]);
        if (t.size() != static_cast<std::size_t>(m) + 2) {
            throw ParseError("flow value count does not match");
        }
        res.flow.resize(m);
        for (int e = 0; e < m; ++e) {
            res.flow[e] = parse_double(t[static_cast<std::size_t>(e) + 2]);
        }
        return 0;
    });
    res.path_flow = read_path_flow(r, "paths");
    return res;
}

void save_instance(const std::filesystem::path& path, const NetworkInstance& inst)
{
    with_file<int>(path, std::ios::out | std::ios::trunc, [&](std::ostream& os) {
        write_instance(os, inst);
        return 0;
    });
}

NetworkInstance load_instance(const std::filesystem::path& path)
{
    return with_file<NetworkInstance>(path, std::ios::in, [](std::istream& is) { return read_instance(is); });
}

void save_oracle(const std::filesystem::path& path, const OracleFlows& oracle)
{
    with_file<int>(path, std::ios::out | std::ios::trunc, [&](std::ostream& os) {
        write_oracle(os, oracle);
        return 0;
    });
}

OracleFlows load_oracle(const std::filesystem::path& path)
{
    return with_file<OracleFlows>(path, std::ios::in, [](std::istream& is) { return read_oracle(is); });
}

std::filesystem::path oracle_path_for(const std::filesystem::path& instance_path)
{
    return std::filesystem::path(instance_path.string() + ".oracle");
}

void write_bound_csv_header(std::ostream& os)
{
    os << kBoundCsvVersion << '\n'
       << "instance_id,n,i,gamma,kappa,eta,mu,pra,bound,slack,kind,status\n";
}

void write_bound_csv_row(std::ostream& os, const BoundRow& row)
{
    const BoundReport& b = row.report;
    const char* status = !row.converged ? "nonconverged"
                          : !b.applicable ? "n/a"
                          : b.satisfied   ? "ok"
                                          : "violated";
    os << row.instance_id << ',' << row.num_vertices << ',' << row.level << ','
       << format_double(row.gamma) << ',' << format_double(b.kappa) << ',' << b.eta << ','
       << format_double(b.mu) << ',' << format_double(b.pra_observed) << ','
       << format_double(b.bound_value) << ',' << format_double(b.slack) << ','
       << to_string(b.bound_kind) << ',' << status << '\n';
}

}  // namespace riskroute
