#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracwave/spectral_grid.hpp"

namespace fracwave {

enum class NonlinearForm {
    SignedPower,    // sign |w|^(e-1) w
    AbsolutePower,  // sign |w|^e
    Zero,           // decoupled linear problem
};

const char* form_name(NonlinearForm f);
NonlinearForm form_from_name(const std::string& s);

// Named initial-data profiles centred at `center` (per axis).
struct DataProfile {
    enum class Kind { Zero, Gaussian, Bump, SingleMode };
    Kind kind = Kind::Zero;
    double amplitude = 1.0;
    double width = 1.0;                  // Gaussian standard deviation or bump radius
    std::array<double, 3> center{};      // ignored for SingleMode
    std::array<int, 3> mode{1, 0, 0};    // wave numbers for SingleMode, cos(2 pi k.x / L)

    GridFunction realize(const BoxGeometry& g) const;
};

const char* profile_name(DataProfile::Kind k);
DataProfile::Kind profile_from_name(const std::string& s);

// u'' ~ Laplacian u + f(v), v'' ~ Laplacian v + g(u) in the mild (Duhamel) form,
// with Caputo orders gamma1, gamma2 and power nonlinearities of degree p, q.
struct SystemConfig {
    double gamma1 = 1.5;
    double gamma2 = 1.5;
    double p = 2.0;
    double q = 2.0;
    NonlinearForm f_form = NonlinearForm::AbsolutePower;
    NonlinearForm g_form = NonlinearForm::AbsolutePower;
    int sign_f = 1;
    int sign_g = 1;
    BoxGeometry geometry;
    GridFunction u0, u1, v0, v1;
    double data_scale = 1.0;  // multiplies all four initial fields

    double blowup_cap = 1e6;
    double norm_index_u = 2.0;  // exponent of the tracked norm of u
    double norm_index_v = 2.0;
    std::vector<double> snapshot_times;
    ExecPolicy policy = ExecPolicy::Parallel;
    double picard_tol = 1e-2;  // relative sweep-to-sweep change accepted by picard_refine

    void validate() const;  // InvalidParams or GeometryMismatch
};

// t_j = T (j/n)^chi
struct TimeMesh {
    double horizon = 1.0;
    int steps = 100;
    double chi = 1.0;

    void validate() const;
    std::vector<double> nodes() const;
    // Grading 2/min(gamma1, gamma2).
    static TimeMesh graded(double horizon, int steps, double gamma1, double gamma2);
};

struct NormRecord {
    double t = 0.0;
    double u_s = 0.0;  // ||u||_{norm_index_u}
    double v_s = 0.0;  // ||v||_{norm_index_v}
    double u_inf = 0.0;
    double v_inf = 0.0;
    double u_1 = 0.0;
    double v_1 = 0.0;
};

enum class NormSelector { U_s, V_s, U_inf, V_inf, U_1, V_1 };
double select_norm(const NormRecord& r, NormSelector which);
NormSelector selector_from_name(const std::string& s);

struct Snapshot {
    double t = 0.0;
    GridFunction u;
    GridFunction v;
};

struct Termination {
    enum class Kind { Completed, BlewUp, Aborted };
    Kind kind = Kind::Completed;
    double t = 0.0;      // estimated blow-up time, or the time of the failed step
    std::string reason;  // set for Aborted
};

const char* termination_name(Termination::Kind k);

struct SolutionHistory {
    TimeMesh mesh;
    std::vector<NormRecord> records;  // one per computed node, starting at t = 0
    std::vector<Snapshot> snapshots;
    Termination termination;
    std::vector<std::string> warnings;  // e.g. the box-validity window was exceeded
};

// Product integration of the mild system: linear terms exact per mode,
// memory integral with exact per-mode weights against the nonlinearity held
// constant on each history interval (left point). Blow-up is reported in the
// termination, not thrown.
SolutionHistory step_mild_system(const SystemConfig& config, const TimeMesh& mesh);

// Same scheme with the interval value of the nonlinearity taken at the
// midpoint and resolved by `sweeps` fixed-point passes per step. sweeps = 0
// reproduces step_mild_system. A step whose last two sweeps differ by more
// than picard_tol ends the run as Aborted with reason "NoConvergence".
SolutionHistory picard_refine(const SystemConfig& config, const TimeMesh& mesh, int sweeps);

struct DecayFit {
    double slope = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// Least squares of log(norm) on log(1 + t) over t in [t_lo, t_hi].
// Throws WindowTooSmall below 8 nodes.
DecayFit fit_decay_rate(const SolutionHistory& history, double t_lo, double t_hi, NormSelector which);

}  // namespace fracwave
