#include "fracwave/regime_analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

double scale_tol(double a, double b) { return boundary_tolerance * std::max({1.0, std::fabs(a), std::fabs(b)}); }

Inequality ge(std::string name, double lhs, double rhs)
{
    return {std::move(name), lhs, rhs, lhs >= rhs - scale_tol(lhs, rhs)};
}

Inequality lt(std::string name, double lhs, double rhs)
{
    return {std::move(name), lhs, rhs, lhs < rhs + scale_tol(lhs, rhs)};
}

Inequality gt_strict(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs > rhs}; }

bool near(const Inequality& in) { return std::fabs(in.lhs - in.rhs) <= scale_tol(in.lhs, in.rhs); }

double global_threshold(const ParamPoint& pt)
{
    const double g1 = pt.gamma1, g2 = pt.gamma2, p = pt.p, q = pt.q;
    const double d = p * q - 1.0;
    return std::max(1.0 / g1 + (q + 1.0) / d, 1.0 / g1 + (p * g2 + g1) / (g1 * d));
}

double blowup_block1(const ParamPoint& pt)
{
    const double g1 = pt.gamma1, g2 = pt.gamma2, p = pt.p, q = pt.q;
    const double d = p * q - 1.0;
    return std::min({1.0 / g1 + (g1 + p * g2) / (g1 * d), 1.0 / g1 + (1.0 + p) / d,
                     1.0 / g1 + (g2 + q * g1) / (g1 * d), (1.0 - g2) / g1 + q * (p + 1.0) / d});
}

double blowup_block2(const ParamPoint& pt) { return blowup_block1(pt.swapped()); }

}  // namespace

void ParamPoint::validate() const
{
    const bool finite = std::isfinite(gamma1) && std::isfinite(gamma2) && std::isfinite(p) && std::isfinite(q);
    if (!finite)
        throw Error(Errc::InvalidParams, "non-finite parameter");
    if (!(gamma1 > 1.0 && gamma1 < 2.0) || !(gamma2 > 1.0 && gamma2 < 2.0))
        throw Error(Errc::InvalidParams, "orders must lie in (1,2)");
    if (!(p >= 1.0) || !(q >= 1.0))
        throw Error(Errc::InvalidParams, "exponents must be >= 1");
    if (!(p * q > 1.0))
        throw Error(Errc::InvalidParams, "pq must exceed 1");
    if (N < 1)
        throw Error(Errc::InvalidParams, "dimension must be positive");
}

const char* regime_name(Regime r)
{
    switch (r) {
        case Regime::GlobalSmallData: return "GlobalSmallData";
        case Regime::BlowUp: return "BlowUp";
        case Regime::Indeterminate: return "Indeterminate";
        case Regime::BothConditionsFail: return "BothConditionsFail";
    }
    return "?";
}

bool LedgerCheck::all_window_hold() const
{
    return std::all_of(window.begin(), window.end(), [](const Inequality& i) { return i.satisfied; });
}

double LedgerCheck::max_identity_residual() const
{
    return std::max({std::fabs(identity_sigma), std::fabs(identity_chain), std::fabs(identity_delta_a),
                     std::fabs(identity_delta_b), std::fabs(identity_r1), std::fabs(identity_r2)});
}

std::optional<ParamPoint> normalize_roles(const ParamPoint& pt, bool* swapped)
{
    if (swapped)
        *swapped = false;
    if (pt.gamma1 <= pt.gamma2 && pt.p <= pt.q)
        return pt;
    const ParamPoint s = pt.swapped();
    if (s.gamma1 <= s.gamma2 && s.p <= s.q) {
        if (swapped)
            *swapped = true;
        return s;
    }
    return std::nullopt;
}

DerivedExponents derive_exponents(const ParamPoint& point, std::optional<double> delta)
{
    point.validate();
    const auto norm = normalize_roles(point);
    if (!norm)
        throw Error(Errc::InvalidParams, "orders and exponents cannot be ordered consistently");
    const ParamPoint& pt = *norm;
    const double g1 = pt.gamma1, g2 = pt.gamma2, p = pt.p, q = pt.q;
    const double N = pt.N;
    const double d = p * q - 1.0;

    DerivedExponents e;
    e.point = pt;
    e.delta_lo = 1.0 - d / (q * (p + 1.0) * g2);
    e.delta_hi = std::min(1.0, N * d / (2.0 * q * (p + 1.0)));
    if (!(e.delta_lo < e.delta_hi))
        throw Error(Errc::EmptyDeltaWindow, "admissible delta window is empty");
    if (delta) {
        if (!(*delta > e.delta_lo && *delta < e.delta_hi))
            throw Error(Errc::InvalidDelta, "delta outside the open admissible window");
        e.delta = *delta;
    } else {
        e.delta = 0.5 * (e.delta_lo + e.delta_hi);
    }
    const double dl = e.delta;
    e.r1 = N * g1 * d / (2.0 * (g1 * (1.0 + dl * p) + g2 * p * (1.0 - dl)));
    e.r2 = N * g2 * d / (2.0 * (g2 * (1.0 + dl * q) + g1 * q * (1.0 - dl)));
    e.s1 = 1.0 / ((2.0 * dl / N) * (p + 1.0) / d);
    e.s2 = 1.0 / ((2.0 * dl / N) * (q + 1.0) / d);
    e.sigma1 = (1.0 - dl) * (g1 + g2 * p) / d;
    e.sigma2 = (1.0 - dl) * (g2 + g1 * q) / d;
    return e;
}

LedgerCheck check_ledger(const DerivedExponents& e)
{
    const ParamPoint& pt = e.point;
    const double g1 = pt.gamma1, g2 = pt.gamma2, p = pt.p, q = pt.q;
    const double h = 0.5 * pt.N;
    const double d = p * q - 1.0;
    const double gap1 = p / e.s2 - 1.0 / e.s1;
    const double gap2 = q / e.s1 - 1.0 / e.s2;

    LedgerCheck c;
    c.identity_sigma = e.sigma1 + g1 - h * g1 * gap1 - p * e.sigma2;
    c.identity_chain = e.sigma1 + g1 - h * g1 * gap1 + (g2 - h * g2 * gap2 - q * e.sigma1) * p;
    c.identity_delta_a = h * gap1 - e.delta;
    c.identity_delta_b = h * gap2 - e.delta;
    c.identity_r1 = 1.0 / e.r1 - ((1.0 / (h * g1)) * e.sigma1 + (e.delta / h) * (p + 1.0) / d);
    c.identity_r2 = 1.0 / e.r2 - ((1.0 / (h * g2)) * e.sigma2 + (e.delta / h) * (q + 1.0) / d);

    c.window = {
        gt_strict("s1 > q", e.s1, q),
        gt_strict("s2 > p", e.s2, p),
        gt_strict("p s1 > s2", p * e.s1, e.s2),
        gt_strict("q s2 > s1", q * e.s2, e.s1),
        gt_strict("s1 > r1", e.s1, e.r1),
        gt_strict("r1 > 1", e.r1, 1.0),
        gt_strict("s2 > r2", e.s2, e.r2),
        gt_strict("r2 > 1", e.r2, 1.0),
    };
    return c;
}

BootstrapResult bootstrap_indices(const ParamPoint& point, const DerivedExponents& exps, double eta)
{
    point.validate();
    const ParamPoint& pt = exps.point;
    const double N = pt.N;
    if (!(eta > 0.0 && eta < 2.0 * (1.0 - exps.delta) / N))
        throw Error(Errc::InvalidParams, "eta must lie in (0, 2(1-delta)/N)");
    const double p = pt.p, q = pt.q, two_n = 2.0 / N;
    constexpr int max_iter = 10000;

    BootstrapResult r;
    r.inv_s_prime.push_back(1.0 / exps.s1);
    r.inv_s_double_prime.push_back(1.0 / exps.s2);
    for (int i = 1;; ++i) {
        const double a = r.inv_s_prime.back();
        const double b = r.inv_s_double_prime.back();
        if (p * b < two_n || q * a < two_n) {
            r.i0 = i;
            break;
        }
        if (i >= max_iter)
            throw Error(Errc::DivergedIteration, "bootstrap did not stop within 1e4 iterations");
        const double na = p * b - two_n + eta;
        const double nb = q * a - two_n + eta;
        if (!(na < a && nb < b))
            r.increasing = false;
        r.inv_s_prime.push_back(na);
        r.inv_s_double_prime.push_back(nb);
    }
    const auto recip = [](double x) { return x > 0.0 ? 1.0 / x : std::numeric_limits<double>::infinity(); };
    for (std::size_t k = 0; k < r.inv_s_prime.size(); ++k) {
        r.s_prime.push_back(recip(r.inv_s_prime[k]));
        r.s_double_prime.push_back(recip(r.inv_s_double_prime[k]));
    }
    return r;
}

BlowupExponents blowup_exponents_at(const ParamPoint& point, double lambda)
{
    point.validate();
    const double g1 = point.gamma1, g2 = point.gamma2, p = point.p, q = point.q;
    if (!(p > 1.0 && q > 1.0))
        throw Error(Errc::InvalidParams, "blow-up exponents need p > 1 and q > 1");
    const double N = point.N;
    const double qc = q / (q - 1.0), pc = p / (p - 1.0);
    const double a[2] = {(-qc * g1 + 1.0 + N * lambda) / qc, (-2.0 * lambda * qc + 1.0 + N * lambda) / qc};
    const double b[2] = {(-pc * g2 + 1.0 + N * lambda) / pc, (-2.0 * lambda * pc + 1.0 + N * lambda) / pc};
    const double f = p * q / (p * q - 1.0);
    double m1 = -std::numeric_limits<double>::infinity();
    double m2 = m1;
    for (double ai : a)
        for (double bj : b) {
            m1 = std::max(m1, (ai + bj / q) * f);
            m2 = std::max(m2, (bj + ai / p) * f);
        }
    return {lambda, m1 + g1 - 2.0, m2 + g2 - 2.0};
}

std::vector<BlowupExponents> blowup_proof_exponents(const ParamPoint& point)
{
    return {blowup_exponents_at(point, 0.5 * point.gamma1), blowup_exponents_at(point, 0.5 * point.gamma2)};
}

double test_exponent_floor(const ParamPoint& point)
{
    point.validate();
    const double p = point.p, q = point.q;
    if (!(p > 1.0 && q > 1.0))
        throw Error(Errc::InvalidParams, "test exponent needs p > 1 and q > 1");
    return std::max({1.0, q * point.gamma1 / (q - 1.0) - 1.0, p * point.gamma2 / (p - 1.0) - 1.0});
}

RegimeReport classify(const ParamPoint& point, std::optional<double> delta)
{
    point.validate();
    RegimeReport r;
    r.point = point;
    const double half_n = 0.5 * point.N;

    const auto norm = normalize_roles(point, &r.swapped);
    r.normalized = norm.value_or(point);
    r.global_applicable = norm.has_value() && point.N >= 2;
    if (norm) {
        auto in = ge("global: N/2 >= max{...}", half_n, global_threshold(*norm));
        r.global_holds = r.global_applicable && in.satisfied;
        r.near_boundary = r.near_boundary || near(in);
        r.ledger.push_back(std::move(in));
    }

    r.blowup_applicable = point.p > 1.0 && point.q > 1.0;
    {
        auto b1 = lt("blow-up block 1: N/2 < min{...}", half_n, blowup_block1(point));
        auto b2 = lt("blow-up block 2: N/2 < min{...}", half_n, blowup_block2(point));
        r.blowup_block1 = r.blowup_applicable && b1.satisfied;
        r.blowup_block2 = r.blowup_applicable && b2.satisfied;
        if (r.blowup_applicable)
            r.near_boundary = r.near_boundary || near(b1) || near(b2);
        r.ledger.push_back(std::move(b1));
        r.ledger.push_back(std::move(b2));
    }
    const bool blows = r.blowup_block1 || r.blowup_block2;

    if (r.global_holds && blows) {
        r.inconsistent = true;
        r.classification = Regime::Indeterminate;
    } else if (r.global_holds) {
        r.classification = Regime::GlobalSmallData;
    } else if (blows) {
        r.classification = Regime::BlowUp;
    } else if (r.global_applicable && r.blowup_applicable) {
        r.classification = Regime::Indeterminate;
    } else {
        r.classification = Regime::BothConditionsFail;
    }

    if (norm) {
        try {
            r.derived = derive_exponents(point, delta);
        } catch (const Error& e) {
            if (e.code() == Errc::InvalidDelta)
                throw;
        }
    }
    if (r.derived && r.classification == Regime::GlobalSmallData) {
        const auto& e = *r.derived;
        const double p = e.point.p, q = e.point.q, g1 = e.point.gamma1;
        const double N = e.point.N;
        const double xp = p * N / (2.0 * e.s2);
        const double xq = q * N / (2.0 * e.s1);
        r.flag_linf_case_a = xp < 1.0 && xq < 1.0;
        r.flag_linf_case_b = N > 2 && xp < 1.0 && xq >= 1.0;
        r.flag_linf_case_c = N > 2 && xp >= 1.0 && xq >= 1.0 && q >= p && p > 1.0 &&
                             std::sqrt((p + 1.0) * q * g1 / ((q + 1.0) * p)) < g1;
    }
    if (r.blowup_applicable)
        r.blowup = blowup_proof_exponents(point);
    return r;
}

}  // namespace fracwave
