#include "fracwave/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <string>

#include "fracwave/error.hpp"
#include "fracwave/mittag_leffler.hpp"

namespace fracwave {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

std::size_t ipow(std::size_t b, int e)
{
    std::size_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

void require_geometry(const GridFunction& f)
{
    f.geometry.validate();
    if (f.samples.size() != f.geometry.size())
        throw Error(Errc::GeometryMismatch, "sample count " + std::to_string(f.samples.size()) +
                                                " does not match geometry size " +
                                                std::to_string(f.geometry.size()));
}

std::shared_ptr<const SpectralGrid> cached_grid(const BoxGeometry& g)
{
    static std::mutex m;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<const SpectralGrid>> cache;
    std::lock_guard lock(m);
    auto key = std::make_tuple(g.dim, g.n, g.L);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    if (cache.size() > 16)
        cache.clear();
    auto grid = std::make_shared<const SpectralGrid>(g);
    cache.emplace(key, grid);
    return grid;
}

}  // namespace

void BoxGeometry::validate() const
{
    if (dim < 1 || dim > 3)
        throw Error(Errc::GeometryMismatch, "dimension must be 1, 2 or 3");
    if (n < 8 || n % 2 != 0)
        throw Error(Errc::GeometryMismatch, "points per side must be even and >= 8");
    if (!(L > 0.0) || !std::isfinite(L))
        throw Error(Errc::GeometryMismatch, "box side must be positive");
}

std::size_t BoxGeometry::size() const { return ipow(static_cast<std::size_t>(n), dim); }

std::size_t BoxGeometry::spectral_size() const
{
    return ipow(static_cast<std::size_t>(n), dim - 1) * static_cast<std::size_t>(n / 2 + 1);
}

double BoxGeometry::cell_volume() const { return std::pow(dx(), dim); }

double BoxGeometry::volume() const { return std::pow(L, dim); }

double BoxGeometry::max_time_window(double alpha) const { return std::pow(L / 8.0, 2.0 / alpha); }

GridFunction GridFunction::zeros(const BoxGeometry& g)
{
    g.validate();
    return GridFunction{g, std::vector<double>(g.size(), 0.0)};
}

GridFunction GridFunction::from(const BoxGeometry& g, const std::function<double(double, double, double)>& fn)
{
    GridFunction f = zeros(g);
    const int n = g.n;
    const int n1 = g.dim >= 2 ? n : 1;
    const int n2 = g.dim >= 3 ? n : 1;
    std::size_t idx = 0;
    // lexicographic order, first coordinate slowest
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n1; ++j)
            for (int k = 0; k < n2; ++k) {
                const double x = g.coord(i);
                const double y = g.dim >= 2 ? g.coord(j) : 0.0;
                const double z = g.dim >= 3 ? g.coord(k) : 0.0;
                f.samples[idx++] = fn(x, y, z);
            }
    return f;
}

GridFunction GridFunction::from_radial(const BoxGeometry& g, const std::function<double(double)>& fn)
{
    return from(g, [&](double x, double y, double z) { return fn(std::sqrt(x * x + y * y + z * z)); });
}

const char* family_name(MultiplierFamily f)
{
    switch (f) {
    case MultiplierFamily::E1: return "E1";
    case MultiplierFamily::E2: return "E2";
    case MultiplierFamily::Ealpha: return "Ealpha";
    }
    return "?";
}

MultiplierFamily family_from_name(const std::string& s)
{
    if (s == "E1")
        return MultiplierFamily::E1;
    if (s == "E2")
        return MultiplierFamily::E2;
    if (s == "Ealpha")
        return MultiplierFamily::Ealpha;
    throw Error(Errc::InvalidParams, "unknown multiplier family '" + s + "'");
}

double family_beta(MultiplierFamily f, double alpha)
{
    switch (f) {
    case MultiplierFamily::E1: return 1.0;
    case MultiplierFamily::E2: return 2.0;
    case MultiplierFamily::Ealpha: return alpha;
    }
    return 1.0;
}

struct SpectralGrid::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

SpectralGrid::SpectralGrid(const BoxGeometry& g) : geom_(g), plans_(std::make_unique<Plans>())
{
    g.validate();
    const std::size_t nr = g.size();
    const std::size_t nc = g.spectral_size();
    std::vector<int> dims(static_cast<std::size_t>(g.dim), g.n);
    {
        std::lock_guard lock(planner_mutex());
        double* rbuf = fftw_alloc_real(nr);
        fftw_complex* cbuf = fftw_alloc_complex(nc);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans_->r2c = fftw_plan_dft_r2c(g.dim, dims.data(), rbuf, cbuf, flags);
        plans_->c2r = fftw_plan_dft_c2r(g.dim, dims.data(), cbuf, rbuf, flags);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
    if (!plans_->r2c || !plans_->c2r)
        throw Error(Errc::GeometryMismatch, "FFTW planning failed");

    // integer |k|^2 of every stored mode, then classes in increasing order
    const int n = g.n;
    const int half = n / 2 + 1;
    std::vector<std::int64_t> k2(nc);
    auto wrap = [n](int i) { return static_cast<std::int64_t>(i <= n / 2 ? i : i - n); };
    mode_weight_.resize(nc);
    const int outer0 = g.dim >= 2 ? n : 1;
    const int outer1 = g.dim >= 3 ? n : 1;
    std::size_t idx = 0;
    for (int a = 0; a < outer0; ++a)
        for (int b = 0; b < outer1; ++b)
            for (int c = 0; c < half; ++c) {
                std::int64_t s = static_cast<std::int64_t>(c) * c;
                if (g.dim >= 2)
                    s += wrap(a) * wrap(a);
                if (g.dim >= 3)
                    s += wrap(b) * wrap(b);
                k2[idx] = s;
                mode_weight_[idx] = (c == 0 || c == n / 2) ? 1.0 : 2.0;
                ++idx;
            }
    std::vector<std::int64_t> distinct(k2);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const double dk = 2.0 * std::numbers::pi / g.L;
    class_mu_.resize(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i)
        class_mu_[i] = dk * dk * static_cast<double>(distinct[i]);
    mode_class_.resize(nc);
    for (std::size_t i = 0; i < nc; ++i)
        mode_class_[i] = static_cast<std::uint32_t>(
            std::lower_bound(distinct.begin(), distinct.end(), k2[i]) - distinct.begin());
}

SpectralGrid::~SpectralGrid()
{
    std::lock_guard lock(planner_mutex());
    if (plans_->r2c)
        fftw_destroy_plan(plans_->r2c);
    if (plans_->c2r)
        fftw_destroy_plan(plans_->c2r);
}

void SpectralGrid::forward(const double* in, cplx* out) const
{
    // r2c leaves the input untouched for out-of-place transforms
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void SpectralGrid::inverse(const cplx* in, double* out) const
{
    // c2r overwrites its input
    std::vector<cplx> scratch(in, in + spectral_size());
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out);
    const double s = 1.0 / static_cast<double>(geom_.size());
    const std::size_t n = geom_.size();
    for (std::size_t i = 0; i < n; ++i)
        out[i] *= s;
}

std::vector<cplx> SpectralGrid::forward(const GridFunction& f) const
{
    require_geometry(f);
    if (!(f.geometry == geom_))
        throw Error(Errc::GeometryMismatch, "grid function geometry differs from transform geometry");
    std::vector<cplx> out(spectral_size());
    forward(f.samples.data(), out.data());
    return out;
}

GridFunction SpectralGrid::inverse(const std::vector<cplx>& spec) const
{
    if (spec.size() != spectral_size())
        throw Error(Errc::GeometryMismatch, "spectrum size mismatch");
    GridFunction f = GridFunction::zeros(geom_);
    inverse(spec.data(), f.samples.data());
    return f;
}

double SpectralGrid::spectral_l2(const std::vector<cplx>& spec) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        s += mode_weight_[i] * std::norm(spec[i]);
    return std::sqrt(s * geom_.cell_volume() / static_cast<double>(geom_.size()));
}

namespace kernels {

void scale_by_class(const cplx* in, cplx* out, const std::uint32_t* cls, const double* factor, std::size_t n,
                    ExecPolicy policy)
{
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        out[i] = in[i] * factor[cls[i]];
}

void accumulate_by_class(cplx* acc, const cplx* src, const std::uint32_t* cls, const double* weight, std::size_t n,
                         ExecPolicy policy)
{
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        acc[i] += weight[cls[i]] * src[i];
}

}  // namespace kernels

std::vector<double> class_multipliers(const SpectralGrid& grid, const MultiplierKind& kind)
{
    if (!(kind.t >= 0.0) || !std::isfinite(kind.t))
        throw Error(Errc::InvalidParams, "multiplier time must be finite and >= 0");
    const double beta = family_beta(kind.family, kind.alpha);
    const double ta = std::pow(kind.t, kind.alpha);
    const double scale = kind.family == MultiplierFamily::E2 ? kind.t : 1.0;
    const std::vector<double>& mu = grid.class_mu();
    std::vector<double> out(mu.size());
    for (std::size_t c = 0; c < mu.size(); ++c)
        out[c] = scale * ml_eval(kind.alpha, beta, -mu[c] * ta);
    return out;
}

GridFunction apply_multiplier(const SpectralGrid& grid, const MultiplierKind& kind, const GridFunction& f,
                              ExecPolicy policy)
{
    require_geometry(f);
    if (!(f.geometry == grid.geometry()))
        throw Error(Errc::GeometryMismatch, "grid function geometry differs from transform geometry");
    if (kind.t == 0.0 && kind.family == MultiplierFamily::E1)
        return f;
    if (kind.t == 0.0 && kind.family == MultiplierFamily::E2)
        return GridFunction::zeros(f.geometry);
    const std::vector<double> factor = class_multipliers(grid, kind);
    std::vector<cplx> spec = grid.forward(f);
    kernels::scale_by_class(spec.data(), spec.data(), grid.mode_class().data(), factor.data(), spec.size(), policy);
    return grid.inverse(spec);
}

GridFunction apply_multiplier(const MultiplierKind& kind, const GridFunction& f, ExecPolicy policy)
{
    require_geometry(f);
    return apply_multiplier(*cached_grid(f.geometry), kind, f, policy);
}

GridFunction realize_kernel(const MultiplierKind& kind, const BoxGeometry& g)
{
    GridFunction delta = GridFunction::zeros(g);
    const std::size_t half = static_cast<std::size_t>(g.n / 2);
    std::size_t origin = 0;
    for (int d = 0; d < g.dim; ++d)
        origin = origin * static_cast<std::size_t>(g.n) + half;
    delta.samples[origin] = 1.0 / g.cell_volume();
    return apply_multiplier(kind, delta, ExecPolicy::Parallel);
}

double lp_norm(const GridFunction& f, double p)
{
    if (std::isnan(p) || p < 1.0)
        throw Error(Errc::InvalidExponent, "norm exponent must be >= 1 or infinity");
    require_geometry(f);
    double mx = 0.0;
    for (double v : f.samples)
        mx = std::max(mx, std::fabs(v));
    if (std::isinf(p) || mx == 0.0)
        return mx;
    double s = 0.0;
    for (double v : f.samples)
        s += std::pow(std::fabs(v) / mx, p);
    return mx * std::pow(s * f.geometry.cell_volume(), 1.0 / p);
}

double sobolev_neg_norm(const GridFunction& f, double order, double p_index)
{
    if (!(order > 0.0))
        throw Error(Errc::InvalidExponent, "order must be positive");
    require_geometry(f);
    double mean = 0.0;
    double mx = 0.0;
    for (double v : f.samples) {
        mean += v;
        mx = std::max(mx, std::fabs(v));
    }
    mean /= static_cast<double>(f.samples.size());
    if (std::fabs(mean) > 1e-12 * mx)
        throw Error(Errc::NonzeroMean, "negative-order norm needs a zero-mean function");
    const auto grid = cached_grid(f.geometry);
    const std::vector<double>& mu = grid->class_mu();
    std::vector<double> factor(mu.size());
    for (std::size_t c = 0; c < mu.size(); ++c)
        factor[c] = mu[c] > 0.0 ? std::pow(mu[c], -0.5 * order) : 0.0;
    std::vector<cplx> spec = grid->forward(f);
    kernels::scale_by_class(spec.data(), spec.data(), grid->mode_class().data(), factor.data(), spec.size(),
                            ExecPolicy::Sequential);
    return lp_norm(grid->inverse(spec), p_index);
}

}  // namespace fracwave
