#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mbp/mqp.hpp"
#include "mbp/simulate.hpp"

namespace mbp {

// One theorem-level check: a finite-t / finite-n statistic against its limit
// target, with the truncation budget that went into it.  A check may not pass
// while its reported tail bound exceeds half its tolerance.
struct CheckResult {
    std::string theorem_id;
    std::string law_label;
    double statistic = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    long long reps = 0;        // 0 for deterministic checks
    double tail_bound = 0.0;   // truncation / extraction tails used
    std::string notes;
    std::string curve_file;    // diagnostic curve CSV, relative to the report
    double runtime_ms = 0.0;   // console summary only; never written to the CSV

    void finalize() {
        passed = std::abs(statistic - target) <= tolerance && tail_bound <= 0.5 * tolerance;
    }
};

/// One-sample Kolmogorov-Smirnov statistic against a cdf (ties handled).
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

std::string law_label(const OffspringLaw& law);

class VerifySuite {
  public:
    VerifySuite(std::string out_dir, std::uint64_t master_seed, int jobs = 1);

    CheckResult check_local_limit(const OffspringLaw& law, std::span<const double> t_grid) const;
    CheckResult check_theorem4(const OffspringLaw& law, double t, int i, int j) const;
    CheckResult check_tauberian(const OffspringLaw& law, long long n_max) const;
    CheckResult check_tauberian_pi(const OffspringLaw& law, long long n_max) const;
    CheckResult check_monotone_ratio(const OffspringLaw& law, std::span<const double> t_grid,
                                     int j_max) const;
    CheckResult check_conditioned_limits(const OffspringLaw& law, double t) const;
    CheckResult check_mqp_ergodics(const OffspringLaw& law, double t) const;
    CheckResult check_theorem21(const OffspringLaw& law, double t, long long reps) const;

    /// The default battery for a law, dispatched on criticality class.
    std::vector<CheckResult> run_default(const OffspringLaw& law) const;

    static void write_report(const std::vector<CheckResult>& results, std::ostream& os);

    std::uint64_t seed() const { return seed_; }

  private:
    std::string write_curve(const std::string& stem, const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) const;
    std::uint64_t check_seed(const char* check_id) const;

    std::string out_dir_;
    std::uint64_t seed_;
    int jobs_;
};

}  // namespace mbp
