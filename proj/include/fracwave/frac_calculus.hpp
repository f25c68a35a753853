#pragma once

#include <functional>
#include <vector>

namespace fracwave {

// Scalar function of time sampled on a strictly increasing node set
// 0 = nodes.front() < ... < nodes.back() = T.
struct TimeSamples {
    std::vector<double> nodes;
    std::vector<double> values;

    double horizon() const { return nodes.back(); }
    std::size_t size() const { return nodes.size(); }
    // Throws InvalidSamples when the layout invariants do not hold.
    void validate() const;
};

// t_j = T (j/n)^chi, j = 0..n.
std::vector<double> graded_nodes(double horizon, int steps, double chi = 1.0);
TimeSamples sample(const std::function<double(double)>& fn, const std::vector<double>& nodes);

// Left Riemann-Liouville integral of order alpha in (0,1), by product
// integration of the kernel against the piecewise-linear interpolant.
TimeSamples rl_integral(const TimeSamples& f, double alpha);

// Left Caputo derivative, alpha in (0,1) or (1,2): finite-difference f' or
// f'' followed by rl_integral of order m - alpha. Needs at least 8 nodes.
TimeSamples caputo_left(const TimeSamples& f, double alpha);

// Right Caputo derivative anchored at T. Uses the reflection
// s = T - t, which maps it onto caputo_left of f(T - s).
TimeSamples caputo_right(const TimeSamples& f, double alpha);

// Left and right Riemann-Liouville derivatives for alpha in (0,1), with f'
// taken piecewise constant and the kernel integrated exactly. The endpoint
// where the boundary term is singular holds +-inf unless the boundary value
// is zero.
TimeSamples rl_deriv_left(const TimeSamples& f, double alpha);
TimeSamples rl_deriv_right(const TimeSamples& f, double alpha);

struct TestFunctionParams {
    double l = 2.0;    // temporal power
    double lam = 1.0;  // spatial scaling exponent
    double horizon = 1.0;
};

// (1 - t/T)_+^l
double test_function_time(const TestFunctionParams& params, double t);
// Phi(|x| / T^lam)^l
double test_function_space(const TestFunctionParams& params, double radius);
// Smooth cutoff: 1 on |r| <= 1, 0 on |r| >= 2.
double cutoff_profile(double r);

// Exact right Caputo derivative of (1 - t/T)^l.
double caputo_right_testfn(const TestFunctionParams& params, double alpha, double t);

enum class BoundaryConvention {
    AsPrinted,  // f(a) [(J^{1-alpha} g)(t)]_{t=a}^{t=b}
    Standard,   // [f(t) (J^{1-alpha} g)(t)]_{t=a}^{t=b}
};

// |int f D^alpha g - int g (C D_{t|T}^alpha f) - boundary| on [0, T].
double check_integration_by_parts(const TimeSamples& f, const TimeSamples& g, double alpha,
                                  BoundaryConvention convention = BoundaryConvention::AsPrinted);

}  // namespace fracwave
