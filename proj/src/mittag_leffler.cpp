#include "fracwave/mittag_leffler.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <numbers>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

long double rgamma_ld(long double x)
{
    if (x <= 0.0L && x == std::floor(x))
        return 0.0L;
    if (x > 1700.0L)
        return std::exp(-std::lgamma(x));
    return 1.0L / std::tgamma(x);
}

void check_order(double alpha)
{
    if (!(alpha > 0.0) || alpha > 2.0)
        throw Error(Errc::UnsupportedOrder, "alpha must lie in (0, 2], got " + std::to_string(alpha));
}

// Parameters of the parabolic contour for a region bounded by two
// singularities (left strength pj, right strength qj).
struct ContourParams {
    double mu = 0.0;
    double h = 0.0;
    double n = INFINITY;
};

constexpr double log_eps_machine = -36.043653389117154;  // log(2^-52)

ContourParams optimal_bounded(double phi_j, double phi_j1, double pj, double qj, double log_epsilon)
{
    const double fac = 1.01;
    const double f_max = std::exp(log_epsilon - log_eps_machine);
    const double sq_phi_j = std::sqrt(phi_j);
    const double threshold = 2.0 * std::sqrt(log_epsilon - log_eps_machine);
    const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

    double sq_bar_j = sq_phi_j;
    double sq_bar_j1 = sq_phi_j1;
    double f_bar = 1.0;
    bool admissible = true;

    if (pj < 1e-14 && qj < 1e-14) {
        // both ends regular: keep the raw bounds
    } else if (pj < 1e-14) {
        const double f_min = sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj) : fac;
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fq = std::pow(f_bar, -1.0 / qj);
            sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
        } else {
            admissible = false;
        }
    } else if (qj < 1e-14) {
        const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / pj);
            sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
        } else {
            admissible = false;
        }
    } else {
        double f_min = fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
        if (f_min < f_max) {
            f_min = std::max(f_min, 1.5);
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / pj);
            const double fq = std::pow(f_bar, -1.0 / qj);
            const double w = -phi_j1 / log_epsilon;
            const double den = 2.0 + w - (1.0 + w) * fp + fq;
            sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
            sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
        } else {
            admissible = false;
        }
    }
    if (!admissible)
        return {};

    const double log_eps = log_epsilon - std::log(f_bar);
    const double w = -sq_bar_j1 * sq_bar_j1 / log_eps;
    const double sq_mu = ((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w);
    ContourParams out;
    out.mu = sq_mu * sq_mu;
    out.h = -2.0 * pi / log_eps * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
    out.n = std::ceil(std::sqrt(1.0 - log_eps / out.mu) / out.h);
    return out;
}

// Parameters for the unbounded rightmost region.
ContourParams optimal_unbounded(double phi_j, double pj, double log_epsilon)
{
    const double sq_phi_j = std::sqrt(phi_j);
    double phibar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
    double sq_phibar = std::sqrt(phibar);
    const double f_min = 1.0;
    const double f_max = 10.0;
    const double f_tar = 5.0;

    double n = 0.0;
    double a = 0.0;
    double sq_mu = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double log_eps_phi = log_epsilon / phibar;
        n = std::ceil(phibar / pi * (1.0 - 1.5 * log_eps_phi + std::sqrt(1.0 - 2.0 * log_eps_phi)));
        a = pi * n / phibar;
        sq_mu = sq_phibar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
        const double f_bar = std::pow((sq_phibar - sq_phi_j) / sq_mu, -pj);
        if (pj < 1e-14 || (f_min < f_bar && f_bar < f_max))
            break;
        sq_phibar = std::pow(f_tar, -1.0 / pj) * sq_mu + sq_phi_j;
        phibar = sq_phibar * sq_phibar;
    }

    ContourParams out;
    out.mu = sq_mu * sq_mu;
    out.n = n;
    out.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n;

    const double threshold = log_epsilon - log_eps_machine;
    if (out.mu > threshold) {
        const double qq = std::abs(pj) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / pj) * std::sqrt(out.mu);
        const double phib = (qq + sq_phi_j) * (qq + sq_phi_j);
        if (phib < threshold) {
            const double w = std::sqrt(log_eps_machine / (log_eps_machine - log_epsilon));
            const double u = std::sqrt(-phib / log_eps_machine);
            out.mu = threshold;
            out.n = std::ceil(w * log_epsilon / 2.0 / pi / (u * w - 1.0));
            out.h = w / out.n;
        } else {
            out.n = INFINITY;
            out.h = 0.0;
        }
    }
    return out;
}

}  // namespace

double rgamma(double x)
{
    if (is_nonpositive_integer(x))
        return 0.0;
    if (x > 171.0)
        return std::exp(-std::lgamma(x));
    if (x < -170.0) {
        // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
        const double s = std::sin(pi * (x - 2.0 * std::floor(x / 2.0)));
        return s * std::exp(std::lgamma(1.0 - x)) / pi;
    }
    return 1.0 / std::tgamma(x);
}

namespace ml_detail {

SeriesResult series(double alpha, double beta, double z)
{
    const int max_terms = 400;
    const long double lz = std::log(std::fabs(static_cast<long double>(z)));
    const double peak = std::pow(std::fabs(z), 1.0 / alpha);
    long double sum = 0.0L;
    long double abs_sum = 0.0L;
    int small_run = 0;
    for (int k = 0; k < max_terms; ++k) {
        const long double x = static_cast<long double>(alpha) * k + beta;
        long double term;
        if (z == 0.0) {
            term = k == 0 ? rgamma_ld(x) : 0.0L;
        } else if (x > 0.0L) {
            term = std::exp(k * lz - std::lgamma(x));
            if (z < 0.0 && (k & 1))
                term = -term;
        } else {
            term = std::pow(static_cast<long double>(z), k) * rgamma_ld(x);
        }
        sum += term;
        abs_sum += std::fabs(term);
        const bool past_peak = x > peak + 1.0L;
        if (past_peak && std::fabs(term) <= 1e-18L * std::fabs(sum))
            ++small_run;
        else
            small_run = 0;
        if (small_run >= 2 || (z == 0.0 && k > 0)) {
            SeriesResult r;
            r.value = static_cast<double>(sum);
            r.amplification = sum != 0.0L ? static_cast<double>(abs_sum / std::fabs(sum)) : INFINITY;
            r.terms = k + 1;
            return r;
        }
    }
    throw Error(Errc::AccuracyLoss, "Mittag-Leffler series did not converge within 400 terms");
}

double asymptotic(double alpha, double beta, double z)
{
    const double az = std::fabs(z);
    const double y = std::pow(az, 1.0 / alpha);

    double poles = 0.0;
    if (z < 0.0 && alpha > 1.0) {
        // conjugate pair s = y exp(+-i pi/alpha)
        const cplx s = std::polar(y, pi / alpha);
        poles = 2.0 / alpha * std::real(std::pow(s, 1.0 - beta) * std::exp(s));
    } else if (z > 0.0) {
        poles = std::pow(y, 1.0 - beta) * std::exp(y) / alpha;
    }

    double sum = 0.0;
    const double lz = std::log(az);
    double prev_mag = INFINITY;
    const int kmax = static_cast<int>(std::min(400.0, 2.0 * y / alpha + 10.0));
    for (int k = 1; k <= kmax; ++k) {
        const double arg = beta - alpha * k;
        const double w = std::exp(-k * lz) * (z < 0.0 && (k & 1) ? -1.0 : 1.0);
        const double term = -w * rgamma(arg);
        // magnitude envelope without the sine factor of the reflection formula
        const double env = 1.0 - arg > 0.0 ? std::exp(-k * lz + std::lgamma(1.0 - arg)) / pi : std::fabs(term);
        if (env > prev_mag && k > 2)
            break;
        sum += term;
        prev_mag = env;
        const double scale = std::max(std::fabs(sum), std::fabs(poles));
        if (env <= 1e-17 * scale || (scale == 0.0 && env < 1e-300))
            break;
    }
    return sum + poles;
}

double contour(double alpha, double beta, double z)
{
    // singularities: origin and the poles s^alpha = z in the principal sheet
    const double theta = z < 0.0 ? pi : 0.0;
    const double y = std::pow(std::fabs(z), 1.0 / alpha);
    std::vector<cplx> s_star;
    if (z != 0.0) {
        const int kmin = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * pi)));
        const int kmax = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * pi)));
        for (int k = kmin; k <= kmax; ++k) {
            const double ang = (theta + 2.0 * k * pi) / alpha;
            if (ang <= -pi)
                continue;  // same point as angle +pi
            s_star.push_back(std::polar(y, ang));
        }
    }
    std::vector<std::pair<double, cplx>> sing;
    for (const cplx& s : s_star) {
        const double phi = (s.real() + std::abs(s)) / 2.0;
        if (phi > 1e-15)
            sing.emplace_back(phi, s);
    }
    std::sort(sing.begin(), sing.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    sing.insert(sing.begin(), {0.0, cplx(0.0)});

    const std::size_t j1 = sing.size();
    std::vector<double> phi(j1 + 1), p(j1), q(j1);
    for (std::size_t j = 0; j < j1; ++j)
        phi[j] = sing[j].first;
    phi[j1] = INFINITY;
    p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
    for (std::size_t j = 1; j < j1; ++j)
        p[j] = 1.0;
    for (std::size_t j = 0; j + 1 < j1; ++j)
        q[j] = 1.0;
    q[j1 - 1] = INFINITY;

    double log_epsilon = std::log(1e-15);
    std::vector<std::size_t> regions;
    for (std::size_t j = 0; j < j1; ++j)
        if (phi[j] < log_epsilon - log_eps_machine && phi[j] < phi[j + 1])
            regions.push_back(j);

    ContourParams best;
    std::size_t best_region = 0;
    for (int attempt = 0; attempt < 30; ++attempt) {
        best = ContourParams{};
        for (std::size_t j : regions) {
            const ContourParams c = j + 1 < j1 ? optimal_bounded(phi[j], phi[j + 1], p[j], q[j], log_epsilon)
                                               : optimal_unbounded(phi[j], p[j], log_epsilon);
            if (c.n < best.n) {
                best = c;
                best_region = j;
            }
        }
        if (best.n <= 200.0)
            break;
        log_epsilon += std::log(10.0);
    }
    if (!std::isfinite(best.n))
        throw Error(Errc::AccuracyLoss, "no admissible Laplace-inversion contour");

    const int n = static_cast<int>(best.n);
    const double mu = best.mu;
    const double h = best.h;
    // integrand is conjugate-antisymmetric in u, so sum Im over u >= 0
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = h * k;
        const cplx zc = mu * (cplx(1.0, u) * cplx(1.0, u));
        const cplx zd(-2.0 * mu * u, 2.0 * mu);
        const cplx f = std::pow(zc, alpha - beta) / (std::pow(zc, alpha) - z) * zd;
        const double im = std::imag(std::exp(zc) * f);
        acc += k == 0 ? im : 2.0 * im;
    }
    double value = h * acc / (2.0 * pi);

    for (std::size_t j = best_region + 1; j < j1; ++j) {
        const cplx s = sing[j].second;
        value += std::real(std::pow(s, 1.0 - beta) * std::exp(s)) / alpha;
    }
    return value;
}

Branch planned_branch(double alpha, double beta, double z)
{
    (void)beta;
    if (z == 0.0)
        return Branch::Zero;
    const double y = std::pow(std::fabs(z), 1.0 / alpha);
    if (z > 0.0)
        return y / alpha <= 300.0 ? Branch::Series : Branch::Contour;
    if (y <= 25.0)
        return Branch::Series;
    if (y >= 45.0)
        return Branch::Asymptotic;
    return Branch::Contour;
}

}  // namespace ml_detail

double ml_eval(const MLParams& params)
{
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double z = params.z;
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(z))
        throw Error(Errc::NonFiniteInput, "Mittag-Leffler arguments must be finite");
    check_order(alpha);

    using namespace ml_detail;
    if (z == 0.0)
        return rgamma(beta);

    // alpha = 1 with integer beta has an elementary form; on the negative axis
    // the exponential part can be far below the contour's absolute accuracy.
    if (alpha == 1.0 && beta == std::floor(beta) && beta >= 1.0 && beta <= 20.0 && z < -1.0) {
        const int m = static_cast<int>(beta);
        double poly = 0.0;
        double term = 1.0;
        for (int k = 0; k <= m - 2; ++k) {
            poly += term;
            term *= z / (k + 1);
        }
        return (std::exp(z) - poly) * std::pow(z, 1 - m);
    }

    double value = 0.0;
    Branch branch = planned_branch(alpha, beta, z);
    if (branch == Branch::Series) {
        try {
            const SeriesResult r = series(alpha, beta, z);
            if (r.amplification <= 1e6)
                return r.value;
        } catch (const Error&) {
        }
        branch = Branch::Contour;
    }
    if (branch == Branch::Asymptotic)
        value = asymptotic(alpha, beta, z);
    else
        value = contour(alpha, beta, z);
    if (!std::isfinite(value))
        throw Error(Errc::NonFiniteResult, "E_{alpha,beta}(z) overflows double precision");
    return value;
}

double ml_deriv_reduction(double alpha, double beta, double t, double lam, int m)
{
    if (m != 0 && m != 1)
        throw Error(Errc::UnsupportedOrder, "derivative order must be 0 or 1");
    if (!(beta - m > 0.0))
        throw Error(Errc::UnsupportedOrder, "beta - m must be positive");
    if (!(t > 0.0))
        throw Error(Errc::InvalidParams, "t must be positive");
    return std::pow(t, beta - m - 1.0) * ml_eval(alpha, beta - m, lam * std::pow(t, alpha));
}

// ---------------------------------------------------------------------------
// Kernel table

namespace {

constexpr int cheb_degree = 16;
constexpr int cheb_nodes = cheb_degree + 1;

double clenshaw(const double* c, double x)
{
    double b1 = 0.0;
    double b2 = 0.0;
    for (int k = cheb_degree; k >= 1; --k) {
        const double b0 = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + c[0];
}

}  // namespace

MLKernelTable::MLKernelTable(double alpha, double beta)
    : alpha_(alpha), beta_(beta), y_small_(1e-6), y_large_(40.0), pole_decay_(std::cos(pi / alpha))
{
    check_order(alpha);
    for (int k = 0; k < 4; ++k)
        head_coeffs_.push_back(rgamma(beta + alpha * k));
    for (int k = 1; k <= 80; ++k) {
        const double arg = beta - alpha * k;
        tail_coeffs_.push_back(-rgamma(arg));
        tail_env_.push_back(1.0 - arg > 0.0 ? std::exp(std::lgamma(1.0 - arg)) / pi : std::fabs(rgamma(arg)));
    }

    for (double e = y_small_; e < y_large_; e += std::min(0.5 * e, 1.0))
        edges_.push_back(e);
    edges_.push_back(y_large_);

    const std::size_t pieces = edges_.size() - 1;
    coeffs_.assign(pieces * cheb_nodes, 0.0);
    std::vector<double> f(cheb_nodes);
    for (std::size_t i = 0; i < pieces; ++i) {
        const double a = edges_[i];
        const double b = edges_[i + 1];
        for (int j = 0; j < cheb_nodes; ++j) {
            const double x = std::cos(pi * (j + 0.5) / cheb_nodes);
            const double yy = 0.5 * (a + b) + 0.5 * (b - a) * x;
            f[j] = ml_eval(alpha, beta, -std::pow(yy, alpha));
        }
        for (int k = 0; k < cheb_nodes; ++k) {
            double s = 0.0;
            for (int j = 0; j < cheb_nodes; ++j)
                s += f[j] * std::cos(pi * k * (j + 0.5) / cheb_nodes);
            coeffs_[i * cheb_nodes + k] = (k == 0 ? 1.0 : 2.0) * s / cheb_nodes;
        }
    }
}

double MLKernelTable::head(double y) const
{
    const double w = -std::pow(y, alpha_);
    return head_coeffs_[0] + w * (head_coeffs_[1] + w * (head_coeffs_[2] + w * head_coeffs_[3]));
}

double MLKernelTable::tail(double y) const
{
    const double ya = std::pow(y, alpha_);
    const double w = -1.0 / ya;
    double sum = 0.0;
    double wk = 1.0;
    double prev = INFINITY;
    for (std::size_t k = 0; k < tail_coeffs_.size(); ++k) {
        wk *= w;
        const double env = tail_env_[k] * std::fabs(wk);
        if (env > prev && k > 1)
            break;
        sum += tail_coeffs_[k] * wk;
        prev = env;
        if (env <= 1e-17 * std::fabs(sum))
            break;
    }
    if (alpha_ > 1.0 && y * pole_decay_ > -45.0) {
        const cplx s = std::polar(y, pi / alpha_);
        sum += 2.0 / alpha_ * std::real(std::pow(s, 1.0 - beta_) * std::exp(s));
    }
    return sum;
}

double MLKernelTable::operator()(double y) const
{
    if (y < y_small_)
        return head(y);
    if (y >= y_large_)
        return tail(y);
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
    const double a = edges_[i];
    const double b = edges_[i + 1];
    const double x = (2.0 * y - a - b) / (b - a);
    return clenshaw(&coeffs_[i * cheb_nodes], x);
}

}  // namespace fracwave
