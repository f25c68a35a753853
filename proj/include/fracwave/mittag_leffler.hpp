#pragma once

#include <optional>
#include <vector>

namespace fracwave {

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.
struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
    double z = 0.0;
};

// Accepts 0 < alpha <= 2 and any real beta. Large positive z whose value
// exceeds the double range raises Errc::NonFiniteResult.
double ml_eval(const MLParams& params);
inline double ml_eval(double alpha, double beta, double z) { return ml_eval(MLParams{alpha, beta, z}); }

// t^(beta-m-1) E_{alpha,beta-m}(lam t^alpha), the m-th time derivative of
// t^(beta-1) E_{alpha,beta}(lam t^alpha) for m in {0, 1}.
double ml_deriv_reduction(double alpha, double beta, double t, double lam, int m);

// 1/Gamma(x); exactly zero at non-positive integers.
double rgamma(double x);

namespace ml_detail {

enum class Branch { Zero, Series, Asymptotic, Contour };

struct SeriesResult {
    double value = 0.0;
    double amplification = 0.0;  // sum |terms| / |sum|
    int terms = 0;
};

// Defining series in extended precision. Throws AccuracyLoss when the
// stopping rule is not met within 400 terms.
SeriesResult series(double alpha, double beta, double z);

// Algebraic expansion in 1/z plus the residues of the poles inside the
// principal sheet. Intended for z < 0 with |z|^(1/alpha) large.
double asymptotic(double alpha, double beta, double z);

// Inverse Laplace transform of s^(alpha-beta)/(s^alpha - z) at t = 1 along an
// optimal parabolic contour, plus residues of the poles to its right.
double contour(double alpha, double beta, double z);

// Branch that ml_eval would use (the series branch may still be rejected
// at run time for excessive cancellation, falling back to Contour).
Branch planned_branch(double alpha, double beta, double z);

}  // namespace ml_detail

// E_{alpha,beta}(-y^alpha) for y >= 0, tabulated with piecewise Chebyshev
// interpolation. Built once per (alpha, beta); evaluation is cheap and
// thread-safe. Used by the spectral kernels where y = |xi|^(2/alpha) t.
class MLKernelTable {
public:
    MLKernelTable(double alpha, double beta);

    double operator()(double y) const;

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    double tail(double y) const;
    double head(double y) const;

    double alpha_;
    double beta_;
    double y_small_;
    double y_large_;
    std::vector<double> edges_;   // piece boundaries, size pieces+1
    std::vector<double> coeffs_;  // (degree+1) Chebyshev coefficients per piece
    std::vector<double> head_coeffs_;
    std::vector<double> tail_coeffs_;  // -1/Gamma(beta - alpha k), k = 1..
    std::vector<double> tail_env_;     // magnitude envelope of tail_coeffs_
    double pole_decay_;                // cos(pi/alpha)
};

}  // namespace fracwave
