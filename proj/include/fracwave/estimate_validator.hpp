#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "fracwave/spectral_grid.hpp"

namespace fracwave {

// Probes are dilated with time: at time t the probe has length scale
// t^(alpha/2), the natural scale of the multiplier, so the norm ratio carries
// the operator's homogeneity and nothing from the probe itself.
enum class ProbeKind {
    Gaussian,
    RandomBumps,  // seeded signed sum of Gaussian bumps, in scaled coordinates
};

struct SmoothingRequest {
    double alpha = 1.5;
    double p1 = 2.0;
    double p2 = 2.0;  // p_infinity selects the max norm
    MultiplierFamily family = MultiplierFamily::E1;
    BoxGeometry geometry;
    ProbeKind probe = ProbeKind::Gaussian;
    std::uint64_t seed = 1;
    int samples = 24;
    // Smallest probe width in grid cells; fixes the earliest time.
    double min_width_cells = 1.5;
};

struct SlopeFit {
    std::vector<double> times;
    std::vector<double> values;  // ||K(t) f_t||_{p2} / ||f_t||_{p1}
    double lambda = 0.0;
    double fitted_slope = 0.0;
    double predicted_slope = 0.0;
    double max_ratio_deviation = 0.0;  // max |values / (c t^predicted) - 1| with c the geometric mean
    double decades = 0.0;              // log10(t_max / t_min)
    std::string rule;                  // which admissibility clause applies

    double relative_error() const;
};

// Rate exponent claimed for the family: -(alpha/2) lambda, and 1 - (alpha/2) lambda
// for the t E_{alpha,2} family.
double predicted_smoothing_slope(MultiplierFamily family, double alpha, double lambda);

// Name of the clause admitting (family, alpha, N, p1, p2); throws
// WindowViolation when none does.
std::string smoothing_rule(MultiplierFamily family, double alpha, int dim, double p1, double p2);

// Earliest and latest admissible probe times for the geometry.
std::pair<double, double> smoothing_time_range(const BoxGeometry& g, double alpha, double min_width_cells);

SlopeFit validate_smoothing(const SmoothingRequest& request);

// ||K(t) f_t||_p / ||f_t||_p with the t factor of the E2 family removed, so
// that all three families are plain E_{alpha,beta} operators.
std::vector<double> boundedness_ratios(MultiplierFamily family, double alpha, const BoxGeometry& g,
                                       const std::vector<double>& times, double p);

struct PointwiseKernelReport {
    double alpha = 1.5;
    BoxGeometry geometry;
    std::vector<double> times;

    // Inner zone R = |x|^2 t^-alpha < 1: smallest single constant C with
    // |K| <= C * shape(t, x) over every sample and time.
    double inner_constant = 0.0;
    std::vector<double> inner_constant_per_time;

    // Outer zone R >= 1: |K| <= C |x|^-N exp(-c R^(1/(2-alpha))).
    double outer_C = 0.0;
    double outer_c = 0.0;
    double outer_slope = 0.0;  // regression slope of log|K| + N log|x| on R^(1/(2-alpha))
    double outer_curvature = 0.0;  // quadratic coefficient of the same fit; <= 0 means concave
    bool outer_decreasing = false;
    int outer_samples = 0;

    std::vector<double> peak;  // |K(t, 0)|
    double peak_slope = 0.0;
    double peak_slope_predicted = 0.0;  // -alpha N / 2

    std::vector<double> l1_mass;
    double l1_mass_spread = 0.0;  // max / min over the sweep

    int violations = 0;  // samples above the fitted bounds; zero unless the fit fails
};

// Realizes the E_{alpha,alpha} kernel at each time and fits the constants
// of the pointwise bounds. Times beyond the box-validity window are dropped.
PointwiseKernelReport validate_pointwise_kernel(double alpha, const BoxGeometry& geometry,
                                                const std::vector<double>& times);

enum class PolDecConstant {
    AsPrinted,  // max{C1, C2}
    Corrected,  // 2^beta max{C1, C2}
};

struct PolDecCheck {
    bool passed = true;
    std::optional<std::size_t> first_violation;
    double t_violation = 0.0;
};

class PolDecBound {
public:
    PolDecBound(double c1, double c2, double alpha, double beta, PolDecConstant constant);

    double operator()(double t) const;
    double constant() const { return constant_; }
    PolDecCheck check(const std::vector<double>& times, const std::vector<double>& norms) const;

private:
    double beta_;
    double constant_;
};

// Throws InvalidBeta unless 0 < beta <= alpha.
PolDecBound poldec_combine(double c1, double c2, double alpha, double beta,
                           PolDecConstant constant = PolDecConstant::AsPrinted);

}  // namespace fracwave
