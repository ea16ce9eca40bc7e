#pragma once

#include <functional>
#include <vector>

#include "mbp/numerics.hpp"
#include "mbp/offspring_law.hpp"
#include "mbp/power_series.hpp"

namespace mbp {

struct ExtinctionData {
    double q;         // extinction probability, smallest root of f in (0,1]
    double beta;      // exp{f'(q)}
    double lambda_S;  // decay parameter |ln beta|
    Criticality cls;
};

/// q by bracketed root finding for supercritical laws; q = 1 exactly otherwise
/// (decided from the sign of f'(1), never from root multiplicity).
ExtinctionData extinction_data(const OffspringLaw& law, double tol = 1e-13);

struct GfValue {
    double t;
    double s;
    double value;      // F(t;s)
    double log_abs_R;  // log|q - F(t;s)|
    int sign_R;        // sign of q - F(t;s); 0 only when s = q
    double R() const { return sign_R * std::exp(log_abs_R); }
};

// Numerical core around the backward equation dF/dt = f(F), F(0;s) = s.
//
// The flow contracts to the fixed point q, so F is carried in log-radial form
// u = log(q - F): du/dt = -f(q - e^u)/e^u stays O(1) for all t and an absolute
// tolerance on u is a relative tolerance on q - F.  The ratio f(q-R)/R is a
// polynomial obtained by synthetic division at the root q (closed form
// c R^nu for the stable family), so no cancellation occurs even at R ~ 1e-300.
// All operations are pure; a GfEngine is safe to share across threads.
class GfEngine {
  public:
    explicit GfEngine(OffspringLaw law, double ode_tol = 1e-10);

    const OffspringLaw& law() const { return law_; }
    const ExtinctionData& extinction() const { return ext_; }

    // F(t;s) with the integral-equation residual check
    // |int_s^F dx/f(x) - t| <= 10 tol (quadrature after the same log-radial
    // substitution, which removes the near-q singularity).
    GfValue solve_F(double t, double s) const { return solve_F(t, s, tol_); }
    GfValue solve_F(double t, double s, double tol) const;

    struct FlowPoint {
        Complex F;
        Complex u;  // log(q - F)
    };
    /// Analytic continuation of the flow to |s| < q (no residual check).
    FlowPoint solve_complex(double t, Complex s, double tol) const;

    /// P_ij(t), j = 0..n, extracted from F(t;s)^i on the circle r = 0.7 q with
    /// M = 8(n+1) samples.  Large beta^{-t} regimes route through the ratio GF.
    PowerSeries transition_probabilities(double t, int i, int n) const;

    /// P_11(t) = f(F(t;0))/a_0, exact at any t.
    double p11(double t) const;
    double log_p11(double t) const;

    /// log f(F) from a solved flow point: f(F) = R * (f(q-R)/R), in logs.
    double log_f_of_F(const GfValue& v) const;

    /// A(s) = (q-s) exp{int_s^q [1/(u-q) - f'(q)/f(u)] du}; the integrand is the
    /// twice-deflated polynomial ratio, smooth across u = q.  Non-critical only.
    double a_function(double s) const;
    Complex a_function(Complex z) const;

    /// M(s) = int_0^s dx/f(x); critical only (checked against the closed form
    /// ((1-s)^-nu - 1)/(c nu) for the stable family).
    double m_script(double s) const;
    Complex m_script(Complex z) const;

    /// Invariant-measure GF: a_0 M(s) when critical, else
    /// (a_0/|f'(q)|)(1 - A(s)/A(0)).  Defined for 0 <= s <= q.
    double invariant_gf_M(double s) const;
    Complex invariant_gf_M(Complex z) const;
    PowerSeries mu_coefficients(int n) const;

    /// mu_j for the stable family by the binomial recursion (stable in n).
    std::vector<double> mu_by_recursion(long long n) const;
    /// sum_{j<=n} mu_j, closed form for the stable family.
    double mu_partial_sum(long long n) const;

    /// Predicted R(t;s): A(s) beta^t off criticality, else
    /// N (nu t)^{-1/nu} (1 + M(s)/t)^{-1/nu} with N = c^{-1/nu}.
    double lemma1_asymptote(double t, double s) const;

    /// dF/ds = f(F(t;s))/f(s); SingularPoint at s = q.
    double lemma2_derivative(double t, double s) const;

    /// Conditioned chain GF V_i(t;s) = [F(t;qs)^i - F(t;0)^i] / [q^i - F(t;0)^i].
    double conditioned_gf(double t, int i, double s) const;
    PowerSeries conditioned_transition(double t, int i, int n) const;

    /// Coefficients of sum_j (P_ij(t)/P_11(t)) s^j; values are O(1) for any t,
    /// so this stays accurate where raw P-series extraction cannot.
    PowerSeries ratio_series(double t, int i, int n) const;

    /// V(s) = M(qs)/M(q) = 1 - A(qs)/A(0); V(1) = 1.  Non-critical only.
    double limit_distribution_V(double s) const;
    double limit_V_mean() const;  // q / A(0)
    PowerSeries nu_coefficients(int n) const;

    /// Ring extraction of an analytic function with real coefficients.
    PowerSeries cauchy_extract(const std::function<Complex(Complex)>& value, double radius,
                               int n, const char* label) const;

    double ode_tol() const { return tol_; }
    /// Ring solves run tighter than the scalar default: per-sample jitter is
    /// amplified by r^-j during extraction.
    double extraction_tol() const { return std::min(tol_, 1e-12); }

  private:
    double flow_ratio(double R) const;  // f(q - R)/R
    Complex flow_ratio(Complex R) const;
    double flow_rhs(double u, int sign) const;
    double a_integrand(double u) const;  // the deflated [1/(u-q) - f'(q)/f(u)]
    Complex a_integrand(Complex u) const;
    double solve_u(double t, double u0, int sign, double tol) const;
    void residual_check(double t, double u0, double u1, int sign, double tol) const;

    OffspringLaw law_;
    ExtinctionData ext_;
    double tol_;
    // Finite kind: phi = f(q-R)/R, p = f(u)/(u-q), p2 = (p(u)-p(q))/(u-q).
    std::vector<double> phi_, p_, p2_;
};

}  // namespace mbp
