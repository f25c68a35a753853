#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracwave/error.hpp"
#include "fracwave/mittag_leffler.hpp"

using namespace fracwave;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_CASE("series head and exponential collapse")
{
    CHECK(ml_eval(1.5, 1.0, 0.0) == 1.0);
    CHECK(rel(ml_eval(1.0, 1.0, 1.0), 2.718281828459045) < 1e-15);
}

TEST_CASE("half order against the complementary error function")
{
    for (double z : {-1.0, -3.0, -7.5, -20.0, 0.5}) {
        const double expect = std::exp(z * z) * std::erfc(-z);
        CHECK(rel(ml_eval(0.5, 1.0, z), expect) < 1e-12);
    }
    CHECK(rel(ml_eval(0.5, 1.0, -1.0), 0.4275835761558070) < 1e-14);
}

TEST_CASE("elementary closed forms")
{
    for (double x : {0.3, 1.0, 2.5, 6.0, 11.0}) {
        CHECK(std::fabs(ml_eval(2.0, 1.0, -x * x) - std::cos(x)) < 1e-12);
        CHECK(std::fabs(ml_eval(2.0, 2.0, -x * x) - std::sin(x) / x) < 1e-12);
    }
    for (double z : {-30.0, -4.0, -0.1, 0.7, 3.0})
        CHECK(rel(ml_eval(1.0, 2.0, z), std::expm1(z) / z) < 1e-13);
}

TEST_CASE("frozen extended-precision values")
{
    CHECK(rel(ml_eval(1.5, 1.5, -10.0), -0.063386339712500377276) < 1e-12);
    CHECK(rel(ml_eval(1.9, 1.9, -4.0), 0.38214872431627848848) < 1e-12);
    CHECK(rel(ml_eval(1.2, 1.0, -3.0), -0.035645871490878105306) < 1e-12);
    CHECK(rel(ml_eval(1.8, 2.0, -7.0), 0.11677375755932028651) < 1e-12);
}

TEST_CASE("every branch agrees where both apply")
{
    using namespace ml_detail;
    for (double a : {1.1, 1.5, 1.9})
        for (double b : {0.5, 1.0, 2.0})
            for (double z : {-2.0, -6.0}) {
                const double s = series(a, b, z).value;
                CHECK(rel(contour(a, b, z), s) < 1e-11);
            }
    for (double a : {0.6, 1.1})
        CHECK(rel(asymptotic(a, 1.0, -200.0), contour(a, 1.0, -200.0)) < 1e-10);
}

TEST_CASE("recurrence identity E(a,b,z) = 1/Gamma(b) + z E(a,a+b,z)")
{
    for (double a : {0.3, 0.9, 1.5, 1.9})
        for (double b : {0.5, 1.0, 2.0})
            for (double z : {-40.0, -8.0, -1.0, 2.0}) {
                const double lhs = ml_eval(a, b, z);
                const double rhs = rgamma(b) + z * ml_eval(a, a + b, z);
                CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
            }
}

TEST_CASE("derivative reduction")
{
    CHECK(rel(ml_deriv_reduction(1.5, 2.0, 1.0, 0.0, 1), 1.0) < 1e-15);
    CHECK(rel(ml_deriv_reduction(1.5, 2.0, 2.0, -1.0, 0), 0.82993969202459834181) < 1e-12);
    CHECK(rel(ml_deriv_reduction(1.9, 1.9, 1.0, -4.0, 0), 0.38214872431627848848) < 1e-12);

    // m = 1 against a centred difference of the m = 0 expression
    const double a = 1.4, b = 2.0, lam = -1.3, t = 0.8, h = 1e-5;
    const double fd = (ml_deriv_reduction(a, b, t + h, lam, 0) - ml_deriv_reduction(a, b, t - h, lam, 0)) / (2 * h);
    CHECK(std::fabs(ml_deriv_reduction(a, b, t, lam, 1) - fd) < 1e-8);

    CHECK_THROWS_AS(ml_deriv_reduction(1.5, 2.0, 1.0, 0.0, 2), Error);
    CHECK_THROWS_AS(ml_deriv_reduction(1.5, 2.0, 0.0, 0.0, 0), Error);
}

TEST_CASE("kernel table matches direct evaluation")
{
    for (double a : {1.2, 1.5, 1.8})
        for (double b : {1.0, 2.0, a, a + 1.0}) {
            const MLKernelTable table(a, b);
            double worst = 0.0;
            for (int i = 0; i <= 400; ++i) {
                const double y = 0.001 * std::pow(1.04, i);
                worst = std::max(worst, std::fabs(table(y) - ml_eval(a, b, -std::pow(y, a))));
            }
            CHECK(worst < 1e-12);
            CHECK(table(0.0) == doctest::Approx(rgamma(b)).epsilon(1e-14));
        }
}

TEST_CASE("errors")
{
    CHECK_THROWS_WITH_AS(ml_eval(2.5, 1.0, -1.0), doctest::Contains("UnsupportedOrder"), Error);
    CHECK_THROWS_WITH_AS(ml_eval(0.0, 1.0, -1.0), doctest::Contains("UnsupportedOrder"), Error);
    CHECK_THROWS_WITH_AS(ml_eval(1.5, 1.0, NAN), doctest::Contains("NonFiniteInput"), Error);
    CHECK_THROWS_WITH_AS(ml_eval(0.3, 1.0, 800.0), doctest::Contains("NonFiniteResult"), Error);
}

TEST_CASE("reciprocal gamma")
{
    CHECK(rgamma(0.0) == 0.0);
    CHECK(rgamma(-3.0) == 0.0);
    CHECK(rel(rgamma(1.5), 2.0 / std::sqrt(std::numbers::pi)) < 1e-15);
    CHECK(rel(rgamma(-0.5), -0.5 / std::sqrt(std::numbers::pi)) < 1e-14);
}
