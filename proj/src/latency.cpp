#include "riskroute/latency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

void require_finite_nonnegative(double v, const char* what)
{
    if (!std::isfinite(v) || v < 0.0) {
        throw ParameterError(std::string(what) + " must be finite and nonnegative");
    }
}

double pwl_value(const PiecewiseLinear& f, double x)
{
    const auto& xs = f.xs;
    const auto& ys = f.ys;
    const std::size_t n = xs.size();
    if (n == 1 || x <= xs.front()) {
        return ys.front();
    }
    if (x >= xs.back()) {
        const double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys.back() + slope * (x - xs.back());
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

double pwl_integral(const PiecewiseLinear& f, double x)
{
    const auto& xs = f.xs;
    const auto& ys = f.ys;
    const std::size_t n = xs.size();
    // flat head on [0, xs[0]]
    double acc = ys.front() * std::min(x, xs.front());
    if (x <= xs.front()) {
        return acc;
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double lo = xs[k - 1];
        const double hi = std::min(xs[k], x);
        const double ylo = ys[k - 1];
        const double yhi = pwl_value(f, hi);
        acc += 0.5 * (ylo + yhi) * (hi - lo);
        if (x <= xs[k]) {
            return acc;
        }
    }
    // linear tail (or flat tail when there is a single breakpoint)
    const double yhi = pwl_value(f, x);
    acc += 0.5 * (ys.back() + yhi) * (x - xs.back());
    return acc;
}

}  // namespace

std::string_view to_string(FunctionKind kind)
{
    switch (kind) {
    case FunctionKind::Constant: return "const";
    case FunctionKind::Affine: return "affine";
    case FunctionKind::Polynomial: return "poly";
    case FunctionKind::PiecewiseLinear: return "pwl";
    }
    return "?";
}

LatencyFn LatencyFn::constant(double value)
{
    require_finite_nonnegative(value, "constant value");
    return LatencyFn(Constant{value});
}

LatencyFn LatencyFn::affine(double slope, double intercept)
{
    require_finite_nonnegative(slope, "affine slope");
    require_finite_nonnegative(intercept, "affine intercept");
    return LatencyFn(Affine{slope, intercept});
}

LatencyFn LatencyFn::polynomial(std::vector<double> coeffs)
{
    if (coeffs.empty()) {
        throw ParameterError("polynomial needs at least one coefficient");
    }
    for (double c : coeffs) {
        require_finite_nonnegative(c, "polynomial coefficient");
    }
    return LatencyFn(Polynomial{std::move(coeffs)});
}

LatencyFn LatencyFn::monomial(double scale, int degree)
{
    if (degree < 0) {
        throw ParameterError("monomial degree must be nonnegative");
    }
    std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
    coeffs.back() = scale;
    return polynomial(std::move(coeffs));
}

LatencyFn LatencyFn::piecewise_linear(std::vector<double> xs, std::vector<double> ys)
{
    if (xs.empty() || xs.size() != ys.size()) {
        throw ParameterError("piecewise-linear function needs matching, non-empty breakpoint lists");
    }
    for (std::size_t k = 0; k < xs.size(); ++k) {
        require_finite_nonnegative(xs[k], "breakpoint x");
        require_finite_nonnegative(ys[k], "breakpoint y");
        if (k > 0 && !(xs[k] > xs[k - 1])) {
            throw ParameterError("breakpoint x values must be strictly increasing");
        }
        if (k > 0 && ys[k] < ys[k - 1]) {
            throw ParameterError("breakpoint y values must be non-decreasing");
        }
    }
    return LatencyFn(PiecewiseLinear{std::move(xs), std::move(ys)});
}

double LatencyFn::operator()(double x) const
{
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, Affine>) {
                return f.slope * x + f.intercept;
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                double acc = 0.0;
                for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) {
                    acc = acc * x + *it;
                }
                return acc;
            } else {
                return pwl_value(f, x);
            }
        },
        repr_);
}

double LatencyFn::integral(double x) const
{
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return f.value * x;
            } else if constexpr (std::is_same_v<T, Affine>) {
                return 0.5 * f.slope * x * x + f.intercept * x;
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                double acc = 0.0;
                for (std::size_t k = f.coeffs.size(); k-- > 0;) {
                    acc = acc * x + f.coeffs[k] / static_cast<double>(k + 1);
                }
                return acc * x;
            } else {
                return pwl_integral(f, x);
            }
        },
        repr_);
}

FunctionKind LatencyFn::kind() const
{
    return static_cast<FunctionKind>(repr_.index());
}

bool LatencyFn::is_constant_on(double x) const
{
    return std::visit(
        [x](const auto& f) -> bool {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return true;
            } else if constexpr (std::is_same_v<T, Affine>) {
                return f.slope == 0.0 || x <= 0.0;
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                if (x <= 0.0) {
                    return true;
                }
                return std::all_of(f.coeffs.begin() + 1, f.coeffs.end(),
                                   [](double c) { return c == 0.0; });
            } else {
                // non-decreasing, so constant on [0, x] iff the endpoints agree
                return pwl_value(f, x) == pwl_value(f, 0.0);
            }
        },
        repr_);
}

bool operator==(const Constant& a, const Constant& b) { return a.value == b.value; }
bool operator==(const Affine& a, const Affine& b)
{
    return a.slope == b.slope && a.intercept == b.intercept;
}
bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs == b.coeffs; }
bool operator==(const PiecewiseLinear& a, const PiecewiseLinear& b)
{
    return a.xs == b.xs && a.ys == b.ys;
}

bool operator==(const LatencyFn& a, const LatencyFn& b) { return a.repr_ == b.repr_; }

}  // namespace riskroute
