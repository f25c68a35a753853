#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracwave/error.hpp"
#include "fracwave/mild_solver.hpp"
#include "fracwave/mittag_leffler.hpp"

using namespace fracwave;
using std::numbers::pi;

namespace {

DataProfile gaussian(double amplitude, double width)
{
    DataProfile d;
    d.kind = DataProfile::Kind::Gaussian;
    d.amplitude = amplitude;
    d.width = width;
    return d;
}

SystemConfig linear_config(double gamma, const BoxGeometry& g)
{
    SystemConfig c;
    c.gamma1 = c.gamma2 = gamma;
    c.f_form = c.g_form = NonlinearForm::Zero;
    c.geometry = g;
    c.u0 = gaussian(1.0, 1.5).realize(g);
    c.u1 = GridFunction::from(g, [&](double x, double, double) { return std::sin(2 * pi * 3 * x / g.L); });
    c.v0 = gaussian(0.5, 3.0).realize(g);
    c.v1 = GridFunction::zeros(g);
    return c;
}

SystemConfig blowup_config(int n)
{
    const BoxGeometry g{1, n, 200.0};
    SystemConfig c;
    c.geometry = g;
    c.u0 = c.u1 = c.v0 = c.v1 = gaussian(1.0, 2.0).realize(g);
    c.data_scale = 0.1;
    return c;
}

SolutionHistory synthetic(const std::function<double(double)>& norm)
{
    SolutionHistory h;
    for (int i = 0; i <= 200; ++i) {
        const double t = 0.25 * i;
        const double v = norm(t);
        h.records.push_back({t, v, v, v, v, v, v});
    }
    h.termination = {Termination::Kind::Completed, 50.0, {}};
    return h;
}

}  // namespace

TEST_CASE("zero coupling reproduces the linear solution at every node")
{
    const BoxGeometry g{1, 128, 20.0};
    for (double gamma : {1.2, 1.8}) {
        auto cfg = linear_config(gamma, g);
        const TimeMesh mesh{4.0, 16, 1.5};
        cfg.snapshot_times = mesh.nodes();
        const auto h = step_mild_system(cfg, mesh);
        CHECK(h.termination.kind == Termination::Kind::Completed);
        REQUIRE(h.snapshots.size() == mesh.nodes().size());
        double worst = 0.0;
        for (const auto& s : h.snapshots) {
            const auto a = apply_multiplier({MultiplierFamily::E1, gamma, s.t}, cfg.u0);
            const auto b = apply_multiplier({MultiplierFamily::E2, gamma, s.t}, cfg.u1);
            const auto c = apply_multiplier({MultiplierFamily::E1, gamma, s.t}, cfg.v0);
            for (std::size_t i = 0; i < a.samples.size(); ++i) {
                worst = std::max(worst, std::fabs(s.u.samples[i] - a.samples[i] - b.samples[i]));
                worst = std::max(worst, std::fabs(s.v.samples[i] - c.samples[i]));
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("single mode follows E_{g,1}(-|xi|^2 t^g)")
{
    const BoxGeometry g{1, 64, 10.0};
    SystemConfig cfg;
    cfg.gamma1 = cfg.gamma2 = 1.4;
    cfg.f_form = cfg.g_form = NonlinearForm::Zero;
    cfg.geometry = g;
    DataProfile m;
    m.kind = DataProfile::Kind::SingleMode;
    m.mode = {2, 0, 0};
    cfg.u0 = m.realize(g);
    cfg.u1 = cfg.v0 = cfg.v1 = GridFunction::zeros(g);
    const TimeMesh mesh{5.0, 10, 1.0};
    cfg.snapshot_times = mesh.nodes();
    const auto h = step_mild_system(cfg, mesh);
    const double mu = std::pow(2 * pi * 2 / g.L, 2);
    for (const auto& s : h.snapshots) {
        const double factor = ml_eval(1.4, 1.0, -mu * std::pow(s.t, 1.4));
        for (std::size_t i = 0; i < cfg.u0.samples.size(); ++i)
            CHECK(std::fabs(s.u.samples[i] - factor * cfg.u0.samples[i]) < 1e-12);
    }
}

TEST_CASE("Picard sweeps are irrelevant for the linear problem")
{
    const auto cfg = linear_config(1.5, {1, 64, 12.0});
    const TimeMesh mesh{3.0, 12, 1.0};
    const auto a = step_mild_system(cfg, mesh);
    const auto b = picard_refine(cfg, mesh, 3);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].u_inf == doctest::Approx(b.records[i].u_inf).epsilon(1e-13));
        CHECK(a.records[i].v_s == doctest::Approx(b.records[i].v_s).epsilon(1e-13));
    }
}

TEST_CASE("sweep difference shrinks with the mesh on a small-data run")
{
    const BoxGeometry g{1, 128, 40.0};
    SystemConfig cfg;
    cfg.geometry = g;
    cfg.p = cfg.q = 3.0;
    cfg.u0 = cfg.v0 = gaussian(1.0, 2.0).realize(g);
    cfg.u1 = cfg.v1 = GridFunction::zeros(g);
    cfg.data_scale = 0.3;
    double diff[3];
    int k = 0;
    for (int steps : {20, 40, 80}) {
        const TimeMesh mesh{4.0, steps, 1.0};
        const auto a = picard_refine(cfg, mesh, 1);
        const auto b = picard_refine(cfg, mesh, 3);
        REQUIRE(a.termination.kind == Termination::Kind::Completed);
        REQUIRE(b.termination.kind == Termination::Kind::Completed);
        double d = 0.0;
        for (std::size_t i = 0; i < a.records.size(); ++i)
            d = std::max(d, std::fabs(a.records[i].u_inf - b.records[i].u_inf));
        diff[k++] = d;
    }
    CHECK(std::log2(diff[0] / diff[1]) >= 1.0);
    CHECK(std::log2(diff[1] / diff[2]) >= 1.0);
}

TEST_CASE("blow-up demo ends in finite time and both schemes agree")
{
    const auto cfg = blowup_config(1024);
    const TimeMesh mesh{50.0, 800, 1.0};
    const auto left = step_mild_system(cfg, mesh);
    REQUIRE(left.termination.kind == Termination::Kind::BlewUp);
    CHECK(std::isfinite(left.termination.t));
    CHECK(left.termination.t <= 50.0);
    CHECK(left.termination.t >= left.records.back().t);

    const auto mid = picard_refine(cfg, mesh, 3);
    CHECK(mid.termination.kind != Termination::Kind::Completed);
    CHECK(std::fabs(mid.termination.t - left.termination.t) <= 0.1 * left.termination.t);
}

TEST_CASE("runs beyond the box window carry a warning")
{
    const BoxGeometry g{1, 64, 16.0};
    auto cfg = linear_config(1.5, g);
    const auto quiet = step_mild_system(cfg, {g.max_time_window(1.5) * 0.9, 8, 1.0});
    CHECK(quiet.warnings.empty());
    const auto loud = step_mild_system(cfg, {g.max_time_window(1.5) * 2.0, 8, 1.0});
    CHECK_FALSE(loud.warnings.empty());
}

TEST_CASE("sequential and parallel runs match bitwise")
{
    auto cfg = blowup_config(256);
    const TimeMesh mesh{3.0, 40, 1.0};
    cfg.policy = ExecPolicy::Sequential;
    const auto a = step_mild_system(cfg, mesh);
    cfg.policy = ExecPolicy::Parallel;
    const auto b = step_mild_system(cfg, mesh);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].u_s == b.records[i].u_s);
        CHECK(a.records[i].v_inf == b.records[i].v_inf);
    }
}

TEST_CASE("decay-rate fits")
{
    const auto power = synthetic([](double t) { return std::pow(1 + t, -2.0); });
    const auto fit = fit_decay_rate(power, 1.0, 50.0, NormSelector::U_s);
    CHECK(std::fabs(fit.slope + 2.0) < 1e-6);
    CHECK(fit.r2 == doctest::Approx(1.0));
    const auto flat = synthetic([](double) { return 3.0; });
    CHECK(std::fabs(fit_decay_rate(flat, 1.0, 50.0, NormSelector::V_inf).slope) < 1e-12);
    CHECK_THROWS_WITH_AS(fit_decay_rate(power, 10.0, 11.0, NormSelector::U_s), doctest::Contains("WindowTooSmall"),
                         Error);
    auto broken = power;
    broken.termination.kind = Termination::Kind::BlewUp;
    CHECK_THROWS_AS(fit_decay_rate(broken, 1.0, 50.0, NormSelector::U_s), Error);
}

TEST_CASE("data profiles")
{
    const BoxGeometry g{2, 32, 16.0};
    const auto gs = gaussian(2.0, 1.0).realize(g);
    CHECK(gs.samples[16 * 32 + 16] == doctest::Approx(2.0));
    DataProfile bump;
    bump.kind = DataProfile::Kind::Bump;
    bump.width = 3.0;
    const auto b = bump.realize(g);
    CHECK(b.samples[16 * 32 + 16] == doctest::Approx(1.0));
    CHECK(b.samples[16 * 32 + 16 + 8] == 0.0);
    CHECK(profile_from_name("single_mode") == DataProfile::Kind::SingleMode);
    CHECK_THROWS_AS(profile_from_name("square"), Error);
    CHECK(std::string(form_name(form_from_name("signed_power"))) == "signed_power");
    CHECK(selector_from_name("norm_v_inf") == NormSelector::V_inf);
}

TEST_CASE("configuration errors")
{
    auto cfg = linear_config(1.5, {1, 64, 12.0});
    cfg.gamma1 = 2.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("InvalidParams"), Error);
    cfg = linear_config(1.5, {1, 64, 12.0});
    cfg.u1 = GridFunction::zeros({1, 32, 12.0});
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("GeometryMismatch"), Error);
    CHECK_THROWS_AS((TimeMesh{0.0, 10, 1.0}.validate()), Error);
    CHECK_THROWS_AS((TimeMesh{1.0, 10, 0.5}.validate()), Error);
    CHECK(TimeMesh::graded(10.0, 5, 1.6, 1.25).chi == doctest::Approx(1.6));
    CHECK_THROWS_AS(picard_refine(linear_config(1.5, {1, 64, 12.0}), {1.0, 4, 1.0}, -1), Error);
}
