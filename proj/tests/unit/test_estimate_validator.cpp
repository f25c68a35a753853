#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fracwave/error.hpp"
#include "fracwave/estimate_validator.hpp"

using namespace fracwave;

namespace {

SlopeFit fit(MultiplierFamily fam, double alpha, BoxGeometry g, double p1, double p2,
             ProbeKind probe = ProbeKind::Gaussian, int samples = 16)
{
    SmoothingRequest r;
    r.family = fam;
    r.alpha = alpha;
    r.geometry = g;
    r.p1 = p1;
    r.p2 = p2;
    r.probe = probe;
    r.samples = samples;
    return validate_smoothing(r);
}

std::vector<double> hypothesis_shape(const std::vector<double>& ts, double c1, double c2, double alpha)
{
    std::vector<double> v;
    for (double t : ts)
        v.push_back(std::min(c1, c2 * std::pow(t, -alpha)));
    return v;
}

}  // namespace

TEST_CASE("predicted slopes")
{
    CHECK(predicted_smoothing_slope(MultiplierFamily::E1, 1.5, 1.0) == doctest::Approx(-0.75));
    CHECK(predicted_smoothing_slope(MultiplierFamily::E2, 1.5, 1.0) == doctest::Approx(0.25));
    CHECK(predicted_smoothing_slope(MultiplierFamily::Ealpha, 1.2, 0.5) == doctest::Approx(-0.3));
}

TEST_CASE("admissibility rules")
{
    CHECK(smoothing_rule(MultiplierFamily::E1, 1.5, 2, 2.0, 2.0) == "bounded");
    CHECK(smoothing_rule(MultiplierFamily::E1, 1.5, 2, 2.0, p_infinity) == "sup");
    CHECK_THROWS_WITH_AS(smoothing_rule(MultiplierFamily::E1, 1.5, 3, 1.2, p_infinity),
                         doctest::Contains("WindowViolation"), Error);
    CHECK(smoothing_rule(MultiplierFamily::Ealpha, 1.5, 3, 2.0, 6.0) == "smoothing");
    // lambda = 1 sits below 2/alpha = 4/3 for the t E_{alpha,2} family
    CHECK_THROWS_AS(smoothing_rule(MultiplierFamily::E2, 1.5, 3, 2.0, 6.0), Error);
    CHECK_THROWS_AS(smoothing_rule(MultiplierFamily::E1, 1.5, 3, 1.0, 2.0), Error);
    CHECK_THROWS_AS(smoothing_rule(MultiplierFamily::E1, 1.5, 1, 3.0, 2.0), Error);
    CHECK_THROWS_AS(smoothing_rule(MultiplierFamily::E1, 2.0, 1, 2.0, 4.0), Error);
}

TEST_CASE("zero-rate case stays bounded")
{
    const auto f = fit(MultiplierFamily::E1, 1.5, {1, 4096, 4096.0}, 2.0, 2.0);
    CHECK(std::fabs(f.fitted_slope) < 0.02);
    CHECK(*std::max_element(f.values.begin(), f.values.end()) <= 1.0 + 1e-12);
}

TEST_CASE("sup-norm rate in two dimensions")
{
    const auto f = fit(MultiplierFamily::E1, 1.5, {2, 512, 512.0}, 2.0, p_infinity);
    CHECK(f.predicted_slope == doctest::Approx(-0.75));
    CHECK(f.decades >= 2.0);
    CHECK(f.relative_error() <= 0.10);
}

TEST_CASE("E_{a,a} smoothing in three dimensions")
{
    const auto f = fit(MultiplierFamily::Ealpha, 1.5, {3, 64, 64.0}, 2.0, 6.0, ProbeKind::Gaussian, 10);
    CHECK(f.predicted_slope == doctest::Approx(-0.75));
    CHECK(f.relative_error() <= 0.10);
}

TEST_CASE("random probes give the same rate")
{
    const auto g = fit(MultiplierFamily::E2, 1.5, {1, 4096, 4096.0}, 2.0, p_infinity, ProbeKind::Gaussian);
    const auto r = fit(MultiplierFamily::E2, 1.5, {1, 4096, 4096.0}, 2.0, p_infinity, ProbeKind::RandomBumps);
    CHECK(g.relative_error() <= 0.10);
    CHECK(r.relative_error() <= 0.10);
}

TEST_CASE("time range and bounded operators")
{
    const auto [lo, hi] = smoothing_time_range({1, 4096, 4096.0}, 1.5, 1.5);
    CHECK(lo == doctest::Approx(std::pow(1.5, 2.0 / 1.5)));
    CHECK(hi == doctest::Approx(std::pow(512.0, 2.0 / 1.5)));
    CHECK_THROWS_WITH_AS(smoothing_time_range({1, 8, 1.0}, 1.5, 1.5), doctest::Contains("WindowTooSmall"), Error);

    const std::vector<double> ts = {0.5, 1, 2, 4, 8};
    for (auto fam : {MultiplierFamily::E1, MultiplierFamily::E2, MultiplierFamily::Ealpha}) {
        const auto r = boundedness_ratios(fam, 1.5, {1, 1024, 512.0}, ts, 2.0);
        for (double x : r)
            CHECK(x <= 1.0 + 1e-9);
    }
}

TEST_CASE("pointwise kernel bounds in one dimension")
{
    const auto rep = validate_pointwise_kernel(1.5, {1, 4096, 400.0}, {0.5, 1, 2, 4, 8, 16});
    CHECK(rep.violations == 0);
    CHECK(rep.peak_slope == doctest::Approx(rep.peak_slope_predicted).epsilon(0.10));
    CHECK(rep.outer_decreasing);
    CHECK(rep.outer_curvature <= 0.0);
    CHECK(rep.outer_c > 0.0);
    CHECK(rep.l1_mass_spread < 1.05);
}

TEST_CASE("pointwise kernel bounds in three dimensions")
{
    const auto rep = validate_pointwise_kernel(1.5, {3, 64, 64.0}, {2, 4, 8, 16});
    CHECK(rep.violations == 0);
    CHECK(rep.inner_constant > 0.0);
    CHECK(rep.outer_decreasing);
    CHECK(rep.outer_curvature <= 0.0);
    // one constant serves every time
    const auto [mn, mx] = std::minmax_element(rep.inner_constant_per_time.begin(), rep.inner_constant_per_time.end());
    CHECK(*mx == doctest::Approx(rep.inner_constant));
    CHECK(*mn > 0.0);
}

TEST_CASE("combined decay bound on the hypothesis shape")
{
    std::vector<double> ts;
    for (int i = 0; i <= 400; ++i)
        ts.push_back(0.05 * i);
    const double c1 = 1.0, c2 = 1.0, alpha = 1.0;
    const auto norms = hypothesis_shape(ts, c1, c2, alpha);

    // with max{C1, C2} the bound dips below min{C1, C2 t^-a} near t = 1
    const auto printed = poldec_combine(c1, c2, alpha, alpha).check(ts, norms);
    CHECK_FALSE(printed.passed);
    REQUIRE(printed.first_violation.has_value());
    CHECK(printed.t_violation > 0.0);
    CHECK(printed.t_violation < 1.0);

    for (double beta : {alpha, 0.5 * alpha})
        CHECK(poldec_combine(c1, c2, alpha, beta, PolDecConstant::Corrected).check(ts, norms).passed);

    auto worse = norms;
    worse[7] = 1.5 * c1;
    const auto bad = poldec_combine(c1, c2, alpha, alpha, PolDecConstant::Corrected).check(ts, worse);
    CHECK_FALSE(bad.passed);
    CHECK(*bad.first_violation == 7);

    CHECK_THROWS_WITH_AS(poldec_combine(1, 1, 1.2, 1.5), doctest::Contains("InvalidBeta"), Error);
    CHECK_THROWS_AS(poldec_combine(1, 1, 1.2, 0.0), Error);
}
