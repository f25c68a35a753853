#include "fracwave/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracwave/error.hpp"
#include "fracwave/mittag_leffler.hpp"

namespace fracwave {

namespace {

double apply_form(NonlinearForm form, int sign, double e, double w)
{
    switch (form) {
        case NonlinearForm::SignedPower: return sign * std::pow(std::fabs(w), e - 1.0) * w;
        case NonlinearForm::AbsolutePower: return sign * std::pow(std::fabs(w), e);
        case NonlinearForm::Zero: return 0.0;
    }
    return 0.0;
}

double sup_norm(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x))
            return std::numeric_limits<double>::infinity();
        m = std::max(m, std::fabs(x));
    }
    return m;
}

void require_matching(const GridFunction& f, const BoxGeometry& g, const char* name)
{
    if (!(f.geometry == g) || f.samples.size() != g.size())
        throw Error(Errc::GeometryMismatch, std::string("initial field ") + name + " does not match the geometry");
}

// Per-mode solution operator for one component of the system.
struct Component {
    double gamma;
    MLKernelTable e1;     // E_{g,1}
    MLKernelTable e2;     // E_{g,2}
    MLKernelTable prim;   // E_{g,g+1}: s^g E_{g,g+1}(-mu s^g) is the kernel primitive
    std::vector<double> root;  // mu^(1/g) per class

    Component(double g, const std::vector<double>& mu)
        : gamma(g), e1(g, 1.0), e2(g, 2.0), prim(g, g + 1.0), root(mu.size())
    {
        for (std::size_t c = 0; c < mu.size(); ++c)
            root[c] = std::pow(mu[c], 1.0 / g);
    }

    // Primitive of s^(g-1) E_{g,g}(-mu s^g) vanishing at s = 0.
    void primitive(double s, std::vector<double>& out) const
    {
        if (s <= 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const double sg = std::pow(s, gamma);
        for (std::size_t c = 0; c < root.size(); ++c)
            out[c] = sg * prim(root[c] * s);
    }
};

class Integrator {
public:
    Integrator(const SystemConfig& cfg, const TimeMesh& mesh)
        : cfg_(cfg), grid_(cfg.geometry), nodes_(mesh.nodes()), m_(grid_.spectral_size()),
          classes_(grid_.class_mu().size()), u_(cfg.gamma1, grid_.class_mu()), v_(cfg.gamma2, grid_.class_mu()),
          ga_(classes_), gb_(classes_), w_(classes_)
    {
        auto scaled = [&](const GridFunction& f) {
            GridFunction s = f;
            for (double& x : s.samples)
                x *= cfg.data_scale;
            return s;
        };
        u_now_ = scaled(cfg.u0);
        v_now_ = scaled(cfg.v0);
        u0_hat_ = grid_.forward(u_now_);
        v0_hat_ = grid_.forward(v_now_);
        u1_hat_ = grid_.forward(scaled(cfg.u1));
        v1_hat_ = grid_.forward(scaled(cfg.v1));
    }

    SolutionHistory run(const TimeMesh& mesh, int sweeps)
    {
        SolutionHistory h;
        h.mesh = mesh;
        const double window = cfg_.geometry.max_time_window(std::max(cfg_.gamma1, cfg_.gamma2));
        if (mesh.horizon > window)
            h.warnings.push_back("AliasWarning: horizon " + std::to_string(mesh.horizon) +
                                 " exceeds the box-validity window " + std::to_string(window));
        std::vector<double> snaps = cfg_.snapshot_times;
        std::sort(snaps.begin(), snaps.end());
        std::size_t next_snap = 0;
        auto take_snapshots = [&](double t) {
            while (next_snap < snaps.size() && snaps[next_snap] <= t) {
                h.snapshots.push_back({t, u_now_, v_now_});
                ++next_snap;
            }
        };
        h.records.push_back(record(0.0));
        take_snapshots(0.0);

        std::vector<cplx> base_u(m_), base_v(m_);
        std::vector<double> last_wu, last_wv;
        for (std::size_t n = 1; n < nodes_.size(); ++n) {
            const double t = nodes_[n];
            push_interval(nonlinear_spectrum(v_now_, true), nonlinear_spectrum(u_now_, false));

            assemble(t, base_u, base_v, last_wu, last_wv);
            GridFunction un = finish(base_u, last_wu, f_hist_.back());
            GridFunction vn = finish(base_v, last_wv, g_hist_.back());

            for (int k = 0; k < sweeps; ++k) {
                GridFunction vm = midpoint(v_now_, vn), um = midpoint(u_now_, un);
                f_hist_.back() = nonlinear_spectrum(vm, true);
                g_hist_.back() = nonlinear_spectrum(um, false);
                GridFunction un2 = finish(base_u, last_wu, f_hist_.back());
                GridFunction vn2 = finish(base_v, last_wv, g_hist_.back());
                const double change = sup_diff(un2, un) + sup_diff(vn2, vn);
                const double size = std::max(1.0, sup_norm(un2.samples) + sup_norm(vn2.samples));
                un = std::move(un2);
                vn = std::move(vn2);
                if (k + 1 == sweeps && !(change <= cfg_.picard_tol * size)) {
                    const double ind = sup_norm(un.samples) + sup_norm(vn.samples);
                    if (!std::isfinite(ind) || ind > cfg_.blowup_cap)
                        break;  // reported as blow-up below
                    h.termination = {Termination::Kind::Aborted, t, "NoConvergence"};
                    return h;
                }
            }

            const double ind_prev = sup_norm(u_now_.samples) + sup_norm(v_now_.samples);
            const double ind = sup_norm(un.samples) + sup_norm(vn.samples);
            if (!std::isfinite(ind) || ind > cfg_.blowup_cap) {
                h.termination = {Termination::Kind::BlewUp, estimate_crossing(n, ind_prev, ind), {}};
                return h;
            }
            u_now_ = std::move(un);
            v_now_ = std::move(vn);
            h.records.push_back(record(t));
            take_snapshots(t);
        }
        h.termination = {Termination::Kind::Completed, nodes_.back(), {}};
        return h;
    }

private:
    NormRecord record(double t) const
    {
        NormRecord r;
        r.t = t;
        r.u_s = lp_norm(u_now_, cfg_.norm_index_u);
        r.v_s = lp_norm(v_now_, cfg_.norm_index_v);
        r.u_inf = lp_norm(u_now_, p_infinity);
        r.v_inf = lp_norm(v_now_, p_infinity);
        r.u_1 = lp_norm(u_now_, 1.0);
        r.v_1 = lp_norm(v_now_, 1.0);
        return r;
    }

    // f(v) drives u and g(u) drives v.
    std::vector<cplx> nonlinear_spectrum(const GridFunction& w, bool drives_u) const
    {
        const NonlinearForm form = drives_u ? cfg_.f_form : cfg_.g_form;
        if (form == NonlinearForm::Zero)
            return std::vector<cplx>(m_);
        const int sign = drives_u ? cfg_.sign_f : cfg_.sign_g;
        const double e = drives_u ? cfg_.p : cfg_.q;
        GridFunction out = w;
        for (double& x : out.samples)
            x = apply_form(form, sign, e, x);
        return grid_.forward(out);
    }

    void push_interval(std::vector<cplx> f, std::vector<cplx> g)
    {
        f_hist_.push_back(std::move(f));
        g_hist_.push_back(std::move(g));
    }

    static GridFunction midpoint(const GridFunction& a, const GridFunction& b)
    {
        GridFunction m = a;
        for (std::size_t i = 0; i < m.samples.size(); ++i)
            m.samples[i] = 0.5 * (a.samples[i] + b.samples[i]);
        return m;
    }

    static double sup_diff(const GridFunction& a, const GridFunction& b)
    {
        double m = 0.0;
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            m = std::max(m, std::fabs(a.samples[i] - b.samples[i]));
        return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    }

    void linear_part(const Component& c, double t, const std::vector<cplx>& h0, const std::vector<cplx>& h1,
                     std::vector<cplx>& out)
    {
        for (std::size_t k = 0; k < classes_; ++k) {
            ga_[k] = c.e1(c.root[k] * t);
            gb_[k] = t * c.e2(c.root[k] * t);
        }
        const auto& cls = grid_.mode_class();
        kernels::scale_by_class(h0.data(), out.data(), cls.data(), ga_.data(), m_, cfg_.policy);
        kernels::accumulate_by_class(out.data(), h1.data(), cls.data(), gb_.data(), m_, cfg_.policy);
    }

    // Sum over every stored interval but the newest, whose end is clipped to t.
    void memory_part(const Component& c, double t, const std::vector<std::vector<cplx>>& hist,
                     std::vector<cplx>& acc, std::vector<double>& last_w)
    {
        const auto& cls = grid_.mode_class();
        const std::size_t count = hist.size();
        c.primitive(t - nodes_[0], gb_);
        for (std::size_t j = 0; j < count; ++j) {
            const double a = std::max(0.0, t - nodes_[j + 1]);
            c.primitive(a, ga_);
            for (std::size_t k = 0; k < classes_; ++k)
                w_[k] = gb_[k] - ga_[k];
            if (j + 1 == count)
                last_w = w_;
            else
                kernels::accumulate_by_class(acc.data(), hist[j].data(), cls.data(), w_.data(), m_, cfg_.policy);
            std::swap(ga_, gb_);
        }
    }

    void assemble(double t, std::vector<cplx>& base_u, std::vector<cplx>& base_v, std::vector<double>& wu,
                  std::vector<double>& wv)
    {
        linear_part(u_, t, u0_hat_, u1_hat_, base_u);
        memory_part(u_, t, f_hist_, base_u, wu);
        linear_part(v_, t, v0_hat_, v1_hat_, base_v);
        memory_part(v_, t, g_hist_, base_v, wv);
    }

    GridFunction finish(const std::vector<cplx>& base, const std::vector<double>& w, const std::vector<cplx>& src)
    {
        std::vector<cplx> spec = base;
        kernels::accumulate_by_class(spec.data(), src.data(), grid_.mode_class().data(), w.data(), m_, cfg_.policy);
        return grid_.inverse(spec);
    }

    // The cap was crossed on (t_{n-1}, t_n]; one extra half-step locates the
    // bracket, then the crossing is interpolated in log of the indicator.
    double estimate_crossing(std::size_t n, double ind_a, double ind_b)
    {
        double ta = nodes_[n - 1], tb = nodes_[n];
        const double tm = 0.5 * (ta + tb);
        std::vector<cplx> bu(m_), bv(m_);
        std::vector<double> wu, wv;
        assemble(tm, bu, bv, wu, wv);
        const GridFunction um = finish(bu, wu, f_hist_.back());
        const GridFunction vm = finish(bv, wv, g_hist_.back());
        const double ind_m = sup_norm(um.samples) + sup_norm(vm.samples);
        if (!std::isfinite(ind_m) || ind_m > cfg_.blowup_cap) {
            tb = tm;
            ind_b = ind_m;
        } else {
            ta = tm;
            ind_a = ind_m;
        }
        if (std::isfinite(ind_b) && ind_a > 0.0 && ind_b > ind_a) {
            const double frac = (std::log(cfg_.blowup_cap) - std::log(ind_a)) / (std::log(ind_b) - std::log(ind_a));
            return ta + std::clamp(frac, 0.0, 1.0) * (tb - ta);
        }
        return 0.5 * (ta + tb);
    }

    const SystemConfig& cfg_;
    SpectralGrid grid_;
    std::vector<double> nodes_;
    std::size_t m_;
    std::size_t classes_;
    Component u_, v_;
    std::vector<double> ga_, gb_, w_;
    GridFunction u_now_, v_now_;
    std::vector<cplx> u0_hat_, u1_hat_, v0_hat_, v1_hat_;
    std::vector<std::vector<cplx>> f_hist_, g_hist_;  // interval values of f(v) and g(u)
};

}  // namespace

const char* form_name(NonlinearForm f)
{
    switch (f) {
        case NonlinearForm::SignedPower: return "signed_power";
        case NonlinearForm::AbsolutePower: return "absolute_power";
        case NonlinearForm::Zero: return "zero";
    }
    return "?";
}

NonlinearForm form_from_name(const std::string& s)
{
    if (s == "signed_power")
        return NonlinearForm::SignedPower;
    if (s == "absolute_power")
        return NonlinearForm::AbsolutePower;
    if (s == "zero")
        return NonlinearForm::Zero;
    throw Error(Errc::InvalidParams, "unknown nonlinearity form '" + s + "'");
}

const char* profile_name(DataProfile::Kind k)
{
    switch (k) {
        case DataProfile::Kind::Zero: return "zero";
        case DataProfile::Kind::Gaussian: return "gaussian";
        case DataProfile::Kind::Bump: return "bump";
        case DataProfile::Kind::SingleMode: return "single_mode";
    }
    return "?";
}

DataProfile::Kind profile_from_name(const std::string& s)
{
    if (s == "zero")
        return DataProfile::Kind::Zero;
    if (s == "gaussian")
        return DataProfile::Kind::Gaussian;
    if (s == "bump")
        return DataProfile::Kind::Bump;
    if (s == "single_mode")
        return DataProfile::Kind::SingleMode;
    throw Error(Errc::InvalidParams, "unknown data profile '" + s + "'");
}

GridFunction DataProfile::realize(const BoxGeometry& g) const
{
    g.validate();
    const double a = amplitude, w = width;
    const auto c = center;
    switch (kind) {
        case Kind::Zero: return GridFunction::zeros(g);
        case Kind::Gaussian:
            return GridFunction::from(g, [=](double x, double y, double z) {
                const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]);
                return a * std::exp(-0.5 * r2 / (w * w));
            });
        case Kind::Bump:
            return GridFunction::from(g, [=](double x, double y, double z) {
                const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]);
                const double s = r2 / (w * w);
                return s < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
            });
        case Kind::SingleMode: {
            const double k = 2.0 * std::numbers::pi / g.L;
            const auto m = mode;
            return GridFunction::from(
                g, [=](double x, double y, double z) { return a * std::cos(k * (m[0] * x + m[1] * y + m[2] * z)); });
        }
    }
    return GridFunction::zeros(g);
}

void SystemConfig::validate() const
{
    auto order_ok = [](double g) { return g > 1.0 && g < 2.0; };
    if (!order_ok(gamma1) || !order_ok(gamma2))
        throw Error(Errc::InvalidParams, "orders must lie in (1,2)");
    if (!(p >= 1.0) || !(q >= 1.0) || !(p * q > 1.0))
        throw Error(Errc::InvalidParams, "exponents need p, q >= 1 and pq > 1");
    if ((sign_f != 1 && sign_f != -1) || (sign_g != 1 && sign_g != -1))
        throw Error(Errc::InvalidParams, "signs must be +1 or -1");
    if (!(data_scale > 0.0) || !std::isfinite(data_scale))
        throw Error(Errc::InvalidParams, "data scale must be positive");
    if (!(blowup_cap > 0.0))
        throw Error(Errc::InvalidParams, "blow-up cap must be positive");
    if (!(norm_index_u >= 1.0) || !(norm_index_v >= 1.0))
        throw Error(Errc::InvalidParams, "norm indices must be >= 1");
    if (!(picard_tol > 0.0))
        throw Error(Errc::InvalidParams, "picard tolerance must be positive");
    geometry.validate();
    require_matching(u0, geometry, "u0");
    require_matching(u1, geometry, "u1");
    require_matching(v0, geometry, "v0");
    require_matching(v1, geometry, "v1");
}

void TimeMesh::validate() const
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(Errc::InvalidParams, "horizon must be positive");
    if (steps < 1)
        throw Error(Errc::InvalidParams, "mesh needs at least one step");
    if (!(chi >= 1.0) || !std::isfinite(chi))
        throw Error(Errc::InvalidParams, "grading must be >= 1");
}

std::vector<double> TimeMesh::nodes() const
{
    validate();
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j)
        t[j] = horizon * std::pow(static_cast<double>(j) / steps, chi);
    t.back() = horizon;
    return t;
}

TimeMesh TimeMesh::graded(double horizon, int steps, double gamma1, double gamma2)
{
    return {horizon, steps, 2.0 / std::min(gamma1, gamma2)};
}

double select_norm(const NormRecord& r, NormSelector which)
{
    switch (which) {
        case NormSelector::U_s: return r.u_s;
        case NormSelector::V_s: return r.v_s;
        case NormSelector::U_inf: return r.u_inf;
        case NormSelector::V_inf: return r.v_inf;
        case NormSelector::U_1: return r.u_1;
        case NormSelector::V_1: return r.v_1;
    }
    return 0.0;
}

NormSelector selector_from_name(const std::string& s)
{
    if (s == "norm_u_s1")
        return NormSelector::U_s;
    if (s == "norm_v_s2")
        return NormSelector::V_s;
    if (s == "norm_u_inf")
        return NormSelector::U_inf;
    if (s == "norm_v_inf")
        return NormSelector::V_inf;
    if (s == "norm_u_1")
        return NormSelector::U_1;
    if (s == "norm_v_1")
        return NormSelector::V_1;
    throw Error(Errc::InvalidParams, "unknown norm selector '" + s + "'");
}

const char* termination_name(Termination::Kind k)
{
    switch (k) {
        case Termination::Kind::Completed: return "completed";
        case Termination::Kind::BlewUp: return "blew_up";
        case Termination::Kind::Aborted: return "aborted";
    }
    return "?";
}

SolutionHistory step_mild_system(const SystemConfig& config, const TimeMesh& mesh)
{
    return picard_refine(config, mesh, 0);
}

SolutionHistory picard_refine(const SystemConfig& config, const TimeMesh& mesh, int sweeps)
{
    config.validate();
    mesh.validate();
    if (sweeps < 0)
        throw Error(Errc::InvalidParams, "sweeps must be >= 0");
    Integrator run(config, mesh);
    return run.run(mesh, sweeps);
}

DecayFit fit_decay_rate(const SolutionHistory& history, double t_lo, double t_hi, NormSelector which)
{
    if (history.termination.kind != Termination::Kind::Completed)
        throw Error(Errc::InvalidParams, "decay fit needs a completed history");
    std::vector<double> xs, ys;
    for (const NormRecord& r : history.records) {
        const double v = select_norm(r, which);
        if (r.t >= t_lo && r.t <= t_hi && v > 0.0 && std::isfinite(v)) {
            xs.push_back(std::log1p(r.t));
            ys.push_back(std::log(v));
        }
    }
    if (xs.size() < 8)
        throw Error(Errc::WindowTooSmall, "fewer than 8 nodes in the fit window");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0))
        throw Error(Errc::WindowTooSmall, "fit window has no time spread");
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.points = static_cast<int>(xs.size());
    return fit;
}

}  // namespace fracwave
