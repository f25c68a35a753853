#include "fracwave/frac_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>
#include <string>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_order(double alpha, double lo, double hi, const char* what)
{
    if (!(alpha > lo && alpha < hi))
        throw Error(Errc::InvalidOrder, std::string(what) + ": order " + std::to_string(alpha) + " outside (" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

// Fornberg weights for the derivative of order `order` (<= 2) at `at` from
// the stencil x[0..n).
void fornberg(const double* x, int n, double at, int order, double* w)
{
    double c[4][3][4] = {};
    c[0][0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < n; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            for (int k = std::min(i, order); k >= 0; --k) {
                const double prev_i = k > 0 ? c[i - 1][k - 1][j] : 0.0;
                c[i][k][j] = ((x[i] - at) * c[i - 1][k][j] - k * prev_i) / c3;
            }
        }
        for (int k = std::min(i, order); k >= 0; --k) {
            const double prev = k > 0 ? c[i - 1][k - 1][i - 1] : 0.0;
            c[i][k][i] = c1 / c2 * (k * prev - (x[i - 1] - at) * c[i - 1][k][i - 1]);
        }
        c1 = c2;
    }
    for (int j = 0; j < n; ++j)
        w[j] = c[n - 1][order][j];
}

// Central three-point stencils inside, four-point one-sided at the ends.
std::vector<double> finite_difference(const TimeSamples& f, int order)
{
    const std::size_t n = f.size();
    std::vector<double> d(n);
    double w[4];
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t first;
        int width;
        if (i == 0 || i + 1 == n) {
            width = 4;
            first = i == 0 ? 0 : n - 4;
        } else {
            width = 3;
            first = i - 1;
        }
        fornberg(&f.nodes[first], width, f.nodes[i], order, w);
        double acc = 0.0;
        for (int k = 0; k < width; ++k)
            acc += w[k] * f.values[first + k];
        d[i] = acc;
    }
    return d;
}

// b^e - a^e for 0 <= a < b with h = b - a, without cancellation when h << b.
double pow_diff(double b, double h, double e)
{
    return -std::pow(b, e) * std::expm1(e * std::log1p(-h / b));
}

// Weights of the piecewise-linear interpolant for int_a^b s^(alpha-1) g ds
// with g(b) = left (node j) and g(a) = right (node j+1). Returned as
// {int s^(alpha-1)(s-a)/h, int s^(alpha-1)(b-s)/h}.
std::pair<double, double> linear_moments(double b, double h, double alpha)
{
    const double r = h / b;
    const double scale = std::pow(b, alpha + 1.0) / h;
    if (r <= 0.125) {
        // int_0^r (1-v)^(alpha-1) v dv and int_0^r (1-v)^(alpha-1) (r-v) dv
        double ck = 1.0;
        double rk = r * r;
        double right = 0.0;
        double left = 0.0;
        for (int k = 0; k < 40; ++k) {
            const double tr = ck * rk / (k + 2);
            const double tl = ck * rk / ((k + 1.0) * (k + 2.0));
            right += tr;
            left += tl;
            if (std::fabs(tr) < 1e-18 * std::fabs(right))
                break;
            ck *= -(alpha - 1.0 - k) / (k + 1.0);
            rk *= r;
        }
        return {scale * left, scale * right};
    }
    const double a = b - h;
    const double m0 = pow_diff(b, h, alpha) / alpha;
    const double m1 = b * m0 - (std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) / (alpha + 1.0);
    return {(h * m0 - m1) / h, m1 / h};
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y)
{
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < t.size(); ++j)
        s += 0.5 * (t[j + 1] - t[j]) * (y[j] + y[j + 1]);
    return s;
}

TimeSamples reflect(const TimeSamples& f)
{
    const std::size_t n = f.size();
    const double horizon = f.horizon();
    TimeSamples r;
    r.nodes.resize(n);
    r.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.nodes[i] = horizon - f.nodes[n - 1 - i];
        r.values[i] = f.values[n - 1 - i];
    }
    r.nodes.front() = 0.0;
    r.nodes.back() = horizon;
    return r;
}

}  // namespace

void TimeSamples::validate() const
{
    if (nodes.size() < 2)
        throw Error(Errc::InvalidSamples, "at least two nodes required");
    if (nodes.size() != values.size())
        throw Error(Errc::InvalidSamples, "nodes and values differ in length");
    if (nodes.front() != 0.0)
        throw Error(Errc::InvalidSamples, "first node must be 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw Error(Errc::InvalidSamples, "nodes must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v))
            throw Error(Errc::InvalidSamples, "sample values must be finite");
}

std::vector<double> graded_nodes(double horizon, int steps, double chi)
{
    if (!(horizon > 0.0) || steps < 1 || !(chi >= 1.0))
        throw Error(Errc::InvalidParams, "graded mesh needs T > 0, steps >= 1, chi >= 1");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j)
        t[j] = horizon * std::pow(static_cast<double>(j) / steps, chi);
    t.back() = horizon;
    return t;
}

TimeSamples sample(const std::function<double(double)>& fn, const std::vector<double>& nodes)
{
    TimeSamples s;
    s.nodes = nodes;
    s.values.reserve(nodes.size());
    for (double t : nodes)
        s.values.push_back(fn(t));
    return s;
}

TimeSamples rl_integral(const TimeSamples& f, double alpha)
{
    require_order(alpha, 0.0, 1.0, "rl_integral");
    f.validate();
    const std::size_t n = f.size();
    const double ga = std::tgamma(alpha);
    TimeSamples out{f.nodes, std::vector<double>(n, 0.0)};
    for (std::size_t m = 1; m < n; ++m) {
        const double tm = f.nodes[m];
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto [wl, wr] = linear_moments(tm - f.nodes[j], f.nodes[j + 1] - f.nodes[j], alpha);
            acc += f.values[j] * wl + f.values[j + 1] * wr;
        }
        out.values[m] = acc / ga;
    }
    return out;
}

TimeSamples caputo_left(const TimeSamples& f, double alpha)
{
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw Error(Errc::InvalidOrder, "caputo_left needs alpha in (0,1) or (1,2)");
    f.validate();
    if (f.size() < 8)
        throw Error(Errc::TooFewNodes, "caputo_left needs at least 8 nodes");
    const int m = alpha < 1.0 ? 1 : 2;
    TimeSamples d{f.nodes, finite_difference(f, m)};
    return rl_integral(d, m - alpha);
}

TimeSamples caputo_right(const TimeSamples& f, double alpha)
{
    f.validate();
    TimeSamples r = caputo_left(reflect(f), alpha);
    TimeSamples out = reflect(r);
    out.nodes = f.nodes;
    return out;
}

TimeSamples rl_deriv_left(const TimeSamples& f, double alpha)
{
    require_order(alpha, 0.0, 1.0, "rl_deriv_left");
    f.validate();
    const std::size_t n = f.size();
    const double g1 = std::tgamma(1.0 - alpha);
    const double e = 1.0 - alpha;
    const double f0 = f.values.front();
    TimeSamples out{f.nodes, std::vector<double>(n, 0.0)};
    out.values[0] = f0 == 0.0 ? 0.0 : std::copysign(inf, f0);
    std::vector<double> pw(n);
    for (std::size_t m = 1; m < n; ++m) {
        const double tm = f.nodes[m];
        double acc = f0 / std::pow(tm, alpha);
        for (std::size_t j = 0; j < m; ++j) {
            const double h = f.nodes[j + 1] - f.nodes[j];
            acc += (f.values[j + 1] - f.values[j]) / h * pow_diff(tm - f.nodes[j], h, e) / e;
        }
        out.values[m] = acc / g1;
    }
    return out;
}

TimeSamples rl_deriv_right(const TimeSamples& f, double alpha)
{
    require_order(alpha, 0.0, 1.0, "rl_deriv_right");
    f.validate();
    const std::size_t n = f.size();
    const double g1 = std::tgamma(1.0 - alpha);
    const double e = 1.0 - alpha;
    const double horizon = f.horizon();
    const double fT = f.values.back();
    TimeSamples out{f.nodes, std::vector<double>(n, 0.0)};
    out.values[n - 1] = fT == 0.0 ? 0.0 : std::copysign(inf, fT);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double tm = f.nodes[m];
        double acc = fT / std::pow(horizon - tm, alpha);
        for (std::size_t j = m; j + 1 < n; ++j) {
            const double h = f.nodes[j + 1] - f.nodes[j];
            acc -= (f.values[j + 1] - f.values[j]) / h * pow_diff(f.nodes[j + 1] - tm, h, e) / e;
        }
        out.values[m] = acc / g1;
    }
    return out;
}

double cutoff_profile(double r)
{
    const double a = std::fabs(r);
    if (a <= 1.0)
        return 1.0;
    if (a >= 2.0)
        return 0.0;
    const double s = a - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double test_function_time(const TestFunctionParams& params, double t)
{
    const double x = 1.0 - t / params.horizon;
    return x > 0.0 ? std::pow(x, params.l) : 0.0;
}

double test_function_space(const TestFunctionParams& params, double radius)
{
    return std::pow(cutoff_profile(radius / std::pow(params.horizon, params.lam)), params.l);
}

double caputo_right_testfn(const TestFunctionParams& params, double alpha, double t)
{
    if (!(params.horizon > 0.0) || !(t >= 0.0 && t <= params.horizon))
        throw Error(Errc::InvalidParams, "caputo_right_testfn needs 0 <= t <= T");
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(Errc::InvalidOrder, "caputo_right_testfn needs alpha in (0,2)");
    const double l = params.l;
    const double x = 1.0 - t / params.horizon;
    const double c = std::exp(std::lgamma(l + 1.0) - std::lgamma(l + 1.0 - alpha));
    return c * std::pow(params.horizon, -alpha) * (x > 0.0 ? std::pow(x, l - alpha) : 0.0);
}

double check_integration_by_parts(const TimeSamples& f, const TimeSamples& g, double alpha,
                                  BoundaryConvention convention)
{
    require_order(alpha, 0.0, 1.0, "check_integration_by_parts");
    f.validate();
    g.validate();
    if (f.nodes != g.nodes)
        throw Error(Errc::InvalidSamples, "f and g must share the node set");
    const std::vector<double>& t = f.nodes;
    const std::size_t n = t.size();

    // D^alpha g = g(0) t^-alpha / Gamma(1-alpha) + D^alpha (g - g(0)); the
    // singular part is integrated exactly against the linear interpolant of f.
    const double g0 = g.values.front();
    TimeSamples shifted = g;
    for (double& v : shifted.values)
        v -= g0;
    const TimeSamples dg = rl_deriv_left(shifted, alpha);
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i)
        prod[i] = f.values[i] * dg.values[i];
    double lhs = trapezoid(t, prod);
    if (g0 != 0.0) {
        const double e = 1.0 - alpha;
        double sing = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double h = t[j + 1] - t[j];
            const double m0 = (std::pow(t[j + 1], e) - std::pow(t[j], e)) / e;
            const double m1 = (std::pow(t[j + 1], e + 1.0) - std::pow(t[j], e + 1.0)) / (e + 1.0);
            sing += (f.values[j] * (t[j + 1] * m0 - m1) + f.values[j + 1] * (m1 - t[j] * m0)) / h;
        }
        lhs += g0 * sing / std::tgamma(1.0 - alpha);
    }

    const TimeSamples cf = caputo_right(f, alpha);
    for (std::size_t i = 0; i < n; ++i)
        prod[i] = g.values[i] * cf.values[i];
    const double rhs = trapezoid(t, prod);

    const double jg_end = rl_integral(g, 1.0 - alpha).values.back();
    const double boundary = convention == BoundaryConvention::AsPrinted ? f.values.front() * jg_end
                                                                        : f.values.back() * jg_end;
    return std::fabs(lhs - rhs - boundary);
}

}  // namespace fracwave
