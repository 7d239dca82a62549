#ifndef RISKROUTE_LATENCY_HPP
#define RISKROUTE_LATENCY_HPP

#include <string_view>
#include <variant>
#include <vector>

namespace riskroute {

struct Constant {
    double value = 0.0;
};

// slope * x + intercept
struct Affine {
    double slope = 0.0;
    double intercept = 0.0;
};

// coeffs[k] * x^k, all coefficients nonnegative
struct Polynomial {
    std::vector<double> coeffs;
};

// Linear interpolation through (xs[k], ys[k]); constant at ys.front() left of
// the first breakpoint and continued with the last segment's slope past the
// last one.
struct PiecewiseLinear {
    std::vector<double> xs;
    std::vector<double> ys;
};

enum class FunctionKind { Constant, Affine, Polynomial, PiecewiseLinear };

std::string_view to_string(FunctionKind kind);

// Nonnegative, continuous, non-decreasing scalar function on [0, inf).
// Used both for mean latencies and for variances.
class LatencyFn {
public:
    using Repr = std::variant<Constant, Affine, Polynomial, PiecewiseLinear>;

    LatencyFn() : repr_(Constant{0.0}) {}

    static LatencyFn constant(double value);
    static LatencyFn affine(double slope, double intercept);
    static LatencyFn polynomial(std::vector<double> coeffs);
    static LatencyFn piecewise_linear(std::vector<double> xs, std::vector<double> ys);
    // Monomial scale * x^degree.
    static LatencyFn monomial(double scale, int degree);

    double operator()(double x) const;

    // Definite integral over [0, x], x >= 0.
    double integral(double x) const;

    FunctionKind kind() const;
    const Repr& repr() const { return repr_; }

    // True when the function takes the same value everywhere on [0, x].
    bool is_constant_on(double x) const;

    friend bool operator==(const LatencyFn& a, const LatencyFn& b);

private:
    explicit LatencyFn(Repr repr) : repr_(std::move(repr)) {}

    Repr repr_;
};

bool operator==(const Constant& a, const Constant& b);
bool operator==(const Affine& a, const Affine& b);
bool operator==(const Polynomial& a, const Polynomial& b);
bool operator==(const PiecewiseLinear& a, const PiecewiseLinear& b);

}  // namespace riskroute

#endif
