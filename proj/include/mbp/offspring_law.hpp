#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace mbp {

enum class Criticality { Subcritical, Critical, Supercritical };

struct LawReport {
    Criticality criticality;
    double offspring_mean;  // a = f'(1-)
    bool xlogx_finite;
    bool second_moment_finite;
    std::optional<std::pair<double, double>> stable_params;  // (nu, c)
};

// Offspring intensity law {a_j}: a_0 > 0, a_1 < 0, a_j >= 0 otherwise, and
// conservative (sum_j a_j = 0, i.e. f(1) = 0).  Two kinds are supported:
//   Finite   a_0..a_J given explicitly;
//   Stable   f(s) = c (1-s)^(1+nu), nu in (0,1], whose expansion
//            a_j = c (-1)^j binom(1+nu, j) has a regularly varying tail
//            a_j ~ C j^-(2+nu) and infinite second moment for nu < 1.
// Values are immutable after construction and safe to share across threads.
class OffspringLaw {
  public:
    static OffspringLaw finite(std::vector<double> coef);
    static OffspringLaw stable(double nu, double c);

    bool is_stable() const { return kind_ == Kind::Stable; }
    double nu() const { return nu_; }
    double scale_c() const { return c_; }

    /// f(s) = sum a_j s^j on [0, 1]; throws std::domain_error outside.
    double f(double s) const;
    std::complex<double> f(std::complex<double> s) const;
    /// f'(s); at s = 1 the limit (the offspring mean for s = 1).
    double f_prime(double s) const;
    std::complex<double> f_prime(std::complex<double> s) const;
    /// f''(s); +infinity at s = 1 for Stable kind with nu < 1.
    double f_second(double s) const;

    /// Offspring mean a = f'(1-), computed analytically per kind.
    double mean() const;
    Criticality criticality() const;

    double a0() const;
    double a1() const;
    /// Per-individual event rate, -a_1.
    double total_rate() const { return -a1(); }
    /// Largest index of the explicit support (Finite kind); 2 for stable nu = 1,
    /// not meaningful otherwise.
    long long support_order() const;

    /// Exact a_j; O(1) for any j (closed form via lgamma for Stable kind).
    double coefficient(long long j) const;
    /// a_0..a_n, materialized by the stable recursion a_{j+1} = a_j (j-1-nu)/(j+1).
    std::vector<double> coefficients(long long n) const;
    /// |sum_{j>n} a_j|, exact (0 beyond the support for Finite kind).
    double intensity_tail_mass(long long n) const;
    /// |sum_{j>n} j a_j|, exact.
    double rate_tail_mass(long long n) const;

    /// Structural invariants + classification; throws InvalidLaw on violation.
    LawReport validate() const;

  private:
    enum class Kind { Finite, Stable };
    OffspringLaw(Kind kind, std::vector<double> coef, double nu, double c);

    Kind kind_;
    std::vector<double> coef_;  // Finite kind only
    double nu_ = 0.0, c_ = 0.0;
};

}  // namespace mbp
