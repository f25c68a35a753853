#include "fracwave/estimate_validator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

std::vector<double> log_spaced(double lo, double hi, int count)
{
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        t[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return t;
}

struct Bump {
    std::array<double, 3> center;
    double weight;
};

std::vector<Bump> random_bumps(std::uint64_t seed, int dim)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    std::vector<Bump> bumps(6);
    for (std::size_t k = 0; k < bumps.size(); ++k) {
        Bump& b = bumps[k];
        b.center = {0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d)
            b.center[d] = pos(rng);
        b.weight = (k % 2 == 0 ? 1.0 : -1.0) * amp(rng);
    }
    return bumps;
}

GridFunction make_probe(const BoxGeometry& g, ProbeKind kind, const std::vector<Bump>& bumps, double width)
{
    if (kind == ProbeKind::Gaussian)
        return GridFunction::from_radial(g, [width](double r) { return std::exp(-0.5 * r * r / (width * width)); });
    const double w = 0.5 * width;
    return GridFunction::from(g, [&](double x, double y, double z) {
        double s = 0.0;
        for (const Bump& b : bumps) {
            const double dx = x - width * b.center[0], dy = y - width * b.center[1], dz = z - width * b.center[2];
            s += b.weight * std::exp(-0.5 * (dx * dx + dy * dy + dz * dz) / (w * w));
        }
        return s;
    });
}

double radius_at(const BoxGeometry& g, std::size_t flat)
{
    double r2 = 0.0;
    std::size_t rest = flat;
    for (int d = 0; d < g.dim; ++d) {
        const int i = static_cast<int>(rest % static_cast<std::size_t>(g.n));
        rest /= static_cast<std::size_t>(g.n);
        const double x = g.coord(i);
        r2 += x * x;
    }
    return std::sqrt(r2);
}

// Second-order coefficient of the least-squares quadratic through (x, y).
double quadratic_curvature(const std::vector<double>& x, const std::vector<double>& y)
{
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double b[3] = {1.0, x[i], x[i] * x[i]};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                m[r][c] += b[r] * b[c];
            m[r][3] += b[r] * y[i];
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c]))
                piv = r;
        std::swap(m[c], m[piv]);
        if (m[c][c] == 0.0)
            return 0.0;
        for (int r = 0; r < 3; ++r) {
            if (r == c)
                continue;
            const double f = m[r][c] / m[c][c];
            for (int k = c; k < 4; ++k)
                m[r][k] -= f * m[c][k];
        }
    }
    return m[2][3] / m[2][2];
}

}  // namespace

double SlopeFit::relative_error() const
{
    if (predicted_slope == 0.0)
        return std::fabs(fitted_slope);
    return std::fabs(fitted_slope - predicted_slope) / std::fabs(predicted_slope);
}

double predicted_smoothing_slope(MultiplierFamily family, double alpha, double lambda)
{
    const double rate = -0.5 * alpha * lambda;
    return family == MultiplierFamily::E2 ? 1.0 + rate : rate;
}

std::string smoothing_rule(MultiplierFamily family, double alpha, int dim, double p1, double p2)
{
    if (!(alpha > 1.0 && alpha < 2.0))
        throw Error(Errc::WindowViolation, "order must lie in (1,2)");
    if (!(p1 >= 1.0) || !(p2 >= p1))
        throw Error(Errc::WindowViolation, "need 1 <= p1 <= p2");
    const double n = dim;
    if (p1 == p2)
        return "bounded";
    if (std::isinf(p2)) {
        // The kernel then has to lie in the dual space of L^p1, which near the
        // origin means p1 > N/2.
        if (p1 > 0.5 * n)
            return "sup";
        throw Error(Errc::WindowViolation, "max-norm rate needs p1 > N/2");
    }
    if (!(p1 > 1.0))
        throw Error(Errc::WindowViolation, "finite-p2 rates need p1 > 1");
    const double lambda = n / p1 - n / p2;
    double lo = 0.0;
    if (family == MultiplierFamily::E2)
        lo = 2.0 / alpha;
    else if (family == MultiplierFamily::Ealpha)
        lo = 2.0 - 2.0 / alpha;
    const bool open_lo = family != MultiplierFamily::E1;
    if (lambda < 2.0 && (open_lo ? lambda > lo : lambda >= lo))
        return "smoothing";
    throw Error(Errc::WindowViolation, "lambda = " + std::to_string(lambda) + " outside the admissible range for " +
                                           family_name(family));
}

std::pair<double, double> smoothing_time_range(const BoxGeometry& g, double alpha, double min_width_cells)
{
    g.validate();
    const double t_lo = std::pow(min_width_cells * g.dx(), 2.0 / alpha);
    const double t_hi = g.max_time_window(alpha);
    if (!(t_lo < t_hi))
        throw Error(Errc::WindowTooSmall, "geometry cannot resolve any admissible time");
    return {t_lo, t_hi};
}

SlopeFit validate_smoothing(const SmoothingRequest& req)
{
    SlopeFit fit;
    fit.rule = smoothing_rule(req.family, req.alpha, req.geometry.dim, req.p1, req.p2);
    if (req.samples < 3)
        throw Error(Errc::WindowTooSmall, "need at least 3 time samples");
    const auto [t_lo, t_hi] = smoothing_time_range(req.geometry, req.alpha, req.min_width_cells);
    const double n = req.geometry.dim;
    fit.lambda = n / req.p1 - (std::isinf(req.p2) ? 0.0 : n / req.p2);
    fit.predicted_slope = predicted_smoothing_slope(req.family, req.alpha, fit.lambda);
    fit.times = log_spaced(t_lo, t_hi, req.samples);
    fit.decades = std::log10(t_hi / t_lo);

    const auto bumps = random_bumps(req.seed, req.geometry.dim);
    std::vector<double> lx, ly;
    for (double t : fit.times) {
        const GridFunction probe = make_probe(req.geometry, req.probe, bumps, std::pow(t, 0.5 * req.alpha));
        const GridFunction out = apply_multiplier({req.family, req.alpha, t}, probe);
        const double ratio = lp_norm(out, req.p2) / lp_norm(probe, req.p1);
        fit.values.push_back(ratio);
        lx.push_back(std::log(t));
        ly.push_back(std::log(ratio));
    }
    fit.fitted_slope = least_squares(lx, ly).slope;

    double mean_log = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
        mean_log += ly[i] - fit.predicted_slope * lx[i];
    mean_log /= static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double model = std::exp(mean_log + fit.predicted_slope * lx[i]);
        fit.max_ratio_deviation = std::max(fit.max_ratio_deviation, std::fabs(fit.values[i] / model - 1.0));
    }
    return fit;
}

std::vector<double> boundedness_ratios(MultiplierFamily family, double alpha, const BoxGeometry& g,
                                       const std::vector<double>& times, double p)
{
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!(t > 0.0))
            throw Error(Errc::InvalidParams, "times must be positive");
        const double w = std::pow(t, 0.5 * alpha);
        const GridFunction probe = make_probe(g, ProbeKind::Gaussian, {}, w);
        const GridFunction img = apply_multiplier({family, alpha, t}, probe);
        double ratio = lp_norm(img, p) / lp_norm(probe, p);
        if (family == MultiplierFamily::E2)
            ratio /= t;
        out.push_back(ratio);
    }
    return out;
}

PointwiseKernelReport validate_pointwise_kernel(double alpha, const BoxGeometry& geometry,
                                                const std::vector<double>& times)
{
    geometry.validate();
    if (!(alpha > 1.0 && alpha < 2.0))
        throw Error(Errc::InvalidParams, "order must lie in (1,2)");
    PointwiseKernelReport rep;
    rep.alpha = alpha;
    rep.geometry = geometry;
    const double window = geometry.max_time_window(alpha);
    for (double t : times)
        if (t > 0.0 && t <= window)
            rep.times.push_back(t);
    if (rep.times.empty())
        throw Error(Errc::WindowTooSmall, "no time inside the box-validity window");

    const int N = geometry.dim;
    const double dv = geometry.cell_volume();
    const double tail_power = 1.0 / (2.0 - alpha);
    std::vector<double> rho, yv;
    std::vector<std::vector<double>> inner_ratio(rep.times.size());

    for (std::size_t it = 0; it < rep.times.size(); ++it) {
        const double t = rep.times[it];
        const GridFunction k = realize_kernel({MultiplierFamily::Ealpha, alpha, t}, geometry);
        double kmax = 0.0, mass = 0.0;
        for (double v : k.samples) {
            kmax = std::max(kmax, std::fabs(v));
            mass += std::fabs(v);
        }
        rep.l1_mass.push_back(mass * dv);
        const double ta = std::pow(t, alpha);
        // Truncating the delta's flat spectrum leaves a ripple decaying about
        // like |x|^-2. Its far-field level, scaled back inwards, marks what the
        // tail fit can trust.
        const double far = 0.4 * geometry.L;
        double ripple = 0.0;
        for (std::size_t i = 0; i < k.samples.size(); ++i)
            if (radius_at(geometry, i) >= far)
                ripple = std::max(ripple, std::fabs(k.samples[i]));
        auto floor_at = [&](double r) {
            const double s = far / std::max(r, geometry.dx());
            return std::max(1e-10 * kmax, 100.0 * ripple * s * s);
        };
        double peak = 0.0, c_in = 0.0;
        for (std::size_t i = 0; i < k.samples.size(); ++i) {
            const double r = radius_at(geometry, i);
            const double a = std::fabs(k.samples[i]);
            if (r == 0.0)
                peak = a;
            const double R = r * r / ta;
            if (R < 1.0) {
                double shape;
                if (N < 2)
                    shape = std::pow(t, -0.5 * alpha * N);
                else if (r == 0.0)
                    continue;  // the bound is infinite at the origin
                else if (N == 2)
                    shape = (1.0 + std::fabs(std::log(R))) / ta;
                else
                    shape = std::pow(r, 2.0 - N) / ta;
                c_in = std::max(c_in, a / shape);
            } else if (a > floor_at(r)) {
                rho.push_back(std::pow(R, tail_power));
                yv.push_back(std::log(a) + N * std::log(r));
            }
        }
        rep.peak.push_back(peak);
        rep.inner_constant_per_time.push_back(c_in);
        rep.inner_constant = std::max(rep.inner_constant, c_in);
    }

    rep.outer_samples = static_cast<int>(rho.size());
    if (rho.size() >= 2) {
        rep.outer_slope = least_squares(rho, yv).slope;
        rep.outer_decreasing = rep.outer_slope < 0.0;
        rep.outer_c = std::max(0.0, -rep.outer_slope);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rho.size(); ++i)
            m = std::max(m, yv[i] + rep.outer_c * rho[i]);
        rep.outer_C = std::exp(m);
        rep.outer_curvature = quadratic_curvature(rho, yv);
        for (std::size_t i = 0; i < rho.size(); ++i)
            if (yv[i] > std::log(rep.outer_C) - rep.outer_c * rho[i] + 1e-9)
                ++rep.violations;
    }
    if (rep.times.size() >= 2) {
        std::vector<double> lt, lp;
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            lt.push_back(std::log(rep.times[i]));
            lp.push_back(std::log(rep.peak[i]));
        }
        rep.peak_slope = least_squares(lt, lp).slope;
    }
    rep.peak_slope_predicted = -0.5 * alpha * N;
    const auto [mn, mx] = std::minmax_element(rep.l1_mass.begin(), rep.l1_mass.end());
    rep.l1_mass_spread = *mx / *mn;
    return rep;
}

PolDecBound::PolDecBound(double c1, double c2, double alpha, double beta, PolDecConstant constant)
    : beta_(beta), constant_(std::max(c1, c2))
{
    if (!(beta > 0.0) || !(beta <= alpha))
        throw Error(Errc::InvalidBeta, "need 0 < beta <= alpha");
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw Error(Errc::InvalidParams, "constants must be positive");
    if (constant == PolDecConstant::Corrected)
        constant_ *= std::pow(2.0, beta);
}

double PolDecBound::operator()(double t) const { return constant_ * std::pow(1.0 + t, -beta_); }

PolDecCheck PolDecBound::check(const std::vector<double>& times, const std::vector<double>& norms) const
{
    if (times.size() != norms.size())
        throw Error(Errc::InvalidParams, "times and norms differ in length");
    PolDecCheck c;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (norms[i] > (*this)(times[i]) * (1.0 + 1e-12)) {
            c.passed = false;
            c.first_violation = i;
            c.t_violation = times[i];
            break;
        }
    }
    return c;
}

PolDecBound poldec_combine(double c1, double c2, double alpha, double beta, PolDecConstant constant)
{
    return PolDecBound(c1, c2, alpha, beta, constant);
}

}  // namespace fracwave
