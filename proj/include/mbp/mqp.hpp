#pragma once

#include <utility>
#include <vector>

#include "mbp/gf_engine.hpp"
#include "mbp/power_series.hpp"

namespace mbp {

enum class MqpClass { Restrictive, Explosive };

struct QMatrixRow {
    int i;
    double diagonal;  // q_ii = i lambda_1 + (i-1) ln beta
    std::vector<std::pair<long long, double>> off_diagonal;  // (j, q_ij), j != i
    double tail_bound;  // omitted rate mass beyond the window
    long long window;   // largest offspring index k retained

    double row_sum() const {
        double s = diagonal;
        for (const auto& [j, v] : off_diagonal) s += v;
        return s;
    }
};

struct Moments {
    double mean;
    double variance;
};

// The never-extinct companion chain on {1, 2, ...}: transition function
// Q_ij(t) = j q^{j-i} P_ij(t) / (i beta^t), intensities lambda_0 = 0,
// lambda_1 = a_1 - ln beta, lambda_j = j q^{j-1} a_j, infinitesimal GF
// g(s) = s [f'(qs) - f'(q)].  Restrictive when beta < 1, explosive when
// beta = 1 (iff the base law is critical).  Immutable and thread-safe.
class QProcess {
  public:
    explicit QProcess(OffspringLaw law, double ode_tol = 1e-10);

    const OffspringLaw& base() const { return eng_.law(); }
    const GfEngine& engine() const { return eng_; }
    const ExtinctionData& extinction() const { return eng_.extinction(); }
    MqpClass cls() const { return cls_; }

    /// alpha = g'(1) = q f''(q); infinite for stable base laws with nu < 1.
    double alpha() const { return alpha_; }
    bool alpha_finite() const;
    /// gamma = alpha / |ln beta| (restrictive class only).
    double gamma() const;

    double lambda(long long j) const;
    double g(double s) const;

    /// Row i of the q-matrix.  q_ii on the diagonal, q_ij = j lambda_{j-i+1}/(j-i+1)
    /// off it, with lambda_k/k read as q^{k-1} a_k so the j = i-1 entry is
    /// (i-1) a_0 / q.  window < 0 selects the smallest window whose omitted
    /// rate mass is below 1e-8 |q_ii| (RateOverflow if none exists within 2^20).
    QMatrixRow q_matrix_row(int i, long long window = -1) const;

    /// Q_ij(t), j = 0..n (the j = 0 entry is identically zero).
    PowerSeries transition(double t, int i, int n) const;

    /// G_i(t;s) = [F(t;qs)/q]^{i-1} (s/beta^t) dF/dx|_{x=qs}.
    double gf_G(double t, double s, int i) const;

    Moments moments(double t, int i) const;

    /// Invariant distribution GF U(s) = s |ln beta| A(qs)/f(qs); restrictive only.
    double invariant_U(double s) const;
    PowerSeries u_coefficients(int n) const;

    /// pi_j and partial sums of the invariant measure pi(s) = s(1-s)^-(1+nu)/c;
    /// explosive only.
    std::vector<double> pi_coefficients(long long n) const;
    double pi_partial_sum(long long n) const;

    /// Ratio-limit GF W(s) = s exp{int_0^s |h|/f_hat}; finite for all s < 1.
    double ratio_limit_W(double s) const;
    /// omega_j by power-series divide/integrate/exp of the same integrand
    /// (stable out to orders raw extraction cannot reach).
    std::vector<double> omega_coefficients(int n) const;

    /// Effective (nu, c): the stable parameters, or (1, f''(1)/2) for a finite
    /// critical law whose slowly varying factor is asymptotically constant.
    std::pair<double, double> tail_exponent() const;

  private:
    GfEngine eng_;
    MqpClass cls_;
    double alpha_;
    double gamma_;
};

/// Laplace transform of the scaled limit law: (1 + theta^nu)^{-(1+1/nu)}.
double limit_law_laplace(double nu, double theta);

/// Limit CDF: second-order Erlang 1 - e^-x - x e^-x at nu = 1; for nu < 1 a
/// Gaver-Stehfest real inversion cross-checked at two orders.
double limit_law_cdf(double nu, double x);

}  // namespace mbp
