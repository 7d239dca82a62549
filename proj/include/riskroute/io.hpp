#ifndef RISKROUTE_IO_HPP
#define RISKROUTE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "riskroute/analysis.hpp"
#include "riskroute/instances.hpp"
#include "riskroute/network.hpp"
#include "riskroute/solver.hpp"

namespace riskroute {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
// Throws ParseError unless the whole token is a finite number.
double parse_double(std::string_view token);

// Line-oriented text formats.  Every file starts with a "# riskroute <kind> v1"
// line; other lines starting with '#' and blank lines are ignored.
//
//   vertices <n> / source <s> / sink <t> / demand <d> / gamma <g>
//   risk_model mean-var|mean-stdev / edges <m>
//   edge <tail> <head> latency <fn> variability <fn>      (m times)
//
// with <fn> one of: const c | affine a b | poly k c0 .. c(k-1) |
// pwl k x0 y0 .. x(k-1) y(k-1).
void write_instance(std::ostream& os, const NetworkInstance& inst);
NetworkInstance read_instance(std::istream& is);

void write_latency(std::ostream& os, const LatencyFn& fn);

void write_oracle(std::ostream& os, const OracleFlows& oracle);
OracleFlows read_oracle(std::istream& is);

void write_solution(std::ostream& os, const EquilibriumResult& result);
EquilibriumResult read_solution(std::istream& is);

// File wrappers; errors name the path.
void save_instance(const std::filesystem::path& path, const NetworkInstance& inst);
NetworkInstance load_instance(const std::filesystem::path& path);
void save_oracle(const std::filesystem::path& path, const OracleFlows& oracle);
OracleFlows load_oracle(const std::filesystem::path& path);

// Oracle sidecar of an instance file: "<path>.oracle".
std::filesystem::path oracle_path_for(const std::filesystem::path& instance_path);

struct BoundRow {
    std::string instance_id;
    int num_vertices = 0;
    // Recursion level, 0 for non-recursive instances.
    int level = 0;
    double gamma = 0.0;
    BoundReport report;
    // False when either equilibrium solve hit its iteration limit.
    bool converged = true;
};

inline constexpr std::string_view kBoundCsvVersion = "# riskroute bounds v1";

// Version comment plus the column header.
void write_bound_csv_header(std::ostream& os);
// status is ok, violated, n/a (hypothesis not met) or nonconverged.
void write_bound_csv_row(std::ostream& os, const BoundRow& row);

}  // namespace riskroute

#endif
