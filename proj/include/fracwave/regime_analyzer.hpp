#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fracwave {

// Orders gamma1, gamma2 in (1,2), exponents p, q >= 1 with pq > 1, dimension N.
struct ParamPoint {
    double gamma1 = 1.5;
    double gamma2 = 1.5;
    double p = 2.0;
    double q = 2.0;
    int N = 1;

    void validate() const;  // throws InvalidParams
    // (gamma1, p) <-> (gamma2, q)
    ParamPoint swapped() const { return {gamma2, gamma1, q, p, N}; }
};

struct Inequality {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

struct BootstrapResult {
    std::vector<double> s_prime;         // s'_i, i = 1..i0 (may be +inf when 1/s'_i <= 0)
    std::vector<double> s_double_prime;  // s''_i
    std::vector<double> inv_s_prime;     // reciprocals, which is what the recursion updates
    std::vector<double> inv_s_double_prime;
    int i0 = 1;
    bool increasing = true;  // 1/s'_i and 1/s''_i strictly decreasing in i
};

struct DerivedExponents {
    ParamPoint point;  // role-normalized point the exponents refer to
    double delta = 0.0;
    double delta_lo = 0.0;  // open window (delta_lo, delta_hi)
    double delta_hi = 0.0;
    double r1 = 0.0, r2 = 0.0;
    double s1 = 0.0, s2 = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    std::optional<BootstrapResult> bootstrap;
};

// Residuals of the zero-sum identities and the window inequalities.
struct LedgerCheck {
    double identity_sigma = 0.0;    // sigma1 + g1 - (N/2) g1 (p/s2 - 1/s1) - p sigma2
    double identity_chain = 0.0;    // sigma1 + g1 - ... + (g2 - ... - q sigma1) p
    double identity_delta_a = 0.0;  // (N/2)(p/s2 - 1/s1) - delta
    double identity_delta_b = 0.0;  // (N/2)(q/s1 - 1/s2) - delta
    double identity_r1 = 0.0;       // 1/r1 against its expanded form
    double identity_r2 = 0.0;
    std::vector<Inequality> window;  // s1>q, s2>p, p s1>s2, q s2>s1, s1>r1>1, s2>r2>1
    bool all_window_hold() const;
    double max_identity_residual() const;
};

struct BlowupExponents {
    double lambda = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
};

enum class Regime { GlobalSmallData, BlowUp, Indeterminate, BothConditionsFail };
const char* regime_name(Regime r);

struct RegimeReport {
    ParamPoint point;             // as given
    ParamPoint normalized;        // gamma1 <= gamma2 (and p <= q when possible)
    bool swapped = false;         // roles exchanged during normalization
    bool global_applicable = false; // N >= 2 and both orderings achievable
    bool global_holds = false;
    bool blowup_applicable = false;  // p > 1 and q > 1
    bool blowup_block1 = false;
    bool blowup_block2 = false;
    bool inconsistent = false;    // both conditions evaluated true
    bool near_boundary = false;   // some deciding inequality within tolerance
    Regime classification = Regime::Indeterminate;
    std::vector<Inequality> ledger;
    std::optional<DerivedExponents> derived;
    std::vector<BlowupExponents> blowup;  // lambda = g1/2 and g2/2 when p, q > 1
    // Named decay-statement flags decorating GlobalSmallData.
    bool flag_linf_case_a = false;  // pN/(2 s2) < 1 and qN/(2 s1) < 1
    bool flag_linf_case_b = false;  // N > 2, pN/(2 s2) < 1, qN/(2 s1) >= 1
    bool flag_linf_case_c = false;  // N > 2, both >= 1, q >= p > 1, sqrt(...) < g1
};

inline constexpr double boundary_tolerance = 1e-12;

// Point with gamma1 <= gamma2 and p <= q, if a role swap can achieve both.
std::optional<ParamPoint> normalize_roles(const ParamPoint& pt, bool* swapped = nullptr);

RegimeReport classify(const ParamPoint& point, std::optional<double> delta = std::nullopt);

// delta = nullopt selects the window midpoint. Throws EmptyDeltaWindow or
// InvalidDelta.
DerivedExponents derive_exponents(const ParamPoint& point, std::optional<double> delta = std::nullopt);
LedgerCheck check_ledger(const DerivedExponents& e);

// Requires 0 < eta < 2(1-delta)/N. Throws DivergedIteration after 1e4 steps.
BootstrapResult bootstrap_indices(const ParamPoint& point, const DerivedExponents& exps, double eta);

// Test-function exponents for lambda = gamma1/2 and gamma2/2. Requires p, q > 1.
std::vector<BlowupExponents> blowup_proof_exponents(const ParamPoint& point);
// Exponents for a general spatial scaling lambda.
BlowupExponents blowup_exponents_at(const ParamPoint& point, double lambda);

// Smallest admissible temporal power l of the test function:
// max{1, q g1/(q-1) - 1, p g2/(p-1) - 1}.
double test_exponent_floor(const ParamPoint& point);

}  // namespace fracwave
