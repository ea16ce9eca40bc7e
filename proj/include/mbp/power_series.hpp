#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mbp {

// Truncated coefficient sequence over states; the common carrier for
// transition rows P_i.(t), invariant measures and limit distributions.
struct PowerSeries {
    std::vector<double> coef;  // coef[j], j = 0..order
    std::string label;

    // Extraction diagnostics, recorded by the producer.
    double extract_residual = 0.0;  // largest imaginary / analyticity residue seen
    double tail_estimate = 0.0;     // estimated mass beyond `order`

    int order() const { return static_cast<int>(coef.size()) - 1; }
    double operator[](int j) const {
        return (j >= 0 && j < static_cast<int>(coef.size())) ? coef[j] : 0.0;
    }

    double sum() const;
    double sum_from(int j0) const;
    double evaluate(double s) const;
    void evaluate_many(std::span<const double> xs, std::span<double> out) const;

    /// CSV rows "j,value".
    void write_csv(std::ostream& os) const;
};

/// Documented extraction tolerance for probability-labeled series.
inline constexpr double kExtractTolerance = 1e-8;

/// True if coef_j >= -eps for all j and sum <= 1 + eps.
bool is_probability_series(const PowerSeries& ps, double eps = kExtractTolerance);

/// Total variation distance between two coefficient sequences (treated as
/// sub-probability vectors; unmatched tails count at half weight).
double tv_distance(std::span<const double> a, std::span<const double> b);

// Series algebra on raw coefficient vectors, all truncated at `order`.
std::vector<double> series_mul(std::span<const double> a, std::span<const double> b, int order);
std::vector<double> series_pow(std::span<const double> base, long long k, int order);
std::vector<double> series_inv(std::span<const double> a, int order);   // requires a[0] != 0
std::vector<double> series_div(std::span<const double> num, std::span<const double> den,
                               int order);
std::vector<double> series_integrate(std::span<const double> a, int order);  // antiderivative, 0 at 0
std::vector<double> series_exp(std::span<const double> a, int order);  // requires a[0] == 0

}  // namespace mbp
