#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "mbp/mqp.hpp"
#include "mbp/offspring_law.hpp"
#include "mbp/rng.hpp"

namespace mbp {

inline constexpr long long kDefaultCap = 1'000'000;

struct Trajectory {
    struct Event {
        double time;
        long long population;
    };
    enum class Terminal { Extinct, Alive, Capped };

    std::vector<Event> events;  // starts with (0, initial state)
    Terminal terminal = Terminal::Alive;
    double extinct_time = 0.0;  // meaningful when terminal == Extinct

    long long final_population() const { return events.back().population; }
    void write_csv(std::ostream& os) const;
};

/// Walker/Vose alias table; construction and draws are deterministic.
class AliasTable {
  public:
    AliasTable() = default;
    explicit AliasTable(std::span<const double> weights);
    std::size_t sample(RngStream& rng) const;
    std::size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Exact event-driven sampler for the branching process: per-individual
// exponential clocks (aggregate rate n|a_1|), offspring j != 1 drawn with
// probability a_j/|a_1|.  Heavy-tailed laws are truncated where the intensity
// tail mass drops below 1e-10, with the deficit folded into the largest
// retained j and reported.
class MbpSampler {
  public:
    explicit MbpSampler(const OffspringLaw& law);
    Trajectory run(long long z0, double horizon, RngStream& rng,
                   long long cap = kDefaultCap) const;

    long long truncated_at() const { return truncated_at_; }
    double truncation_deficit() const { return deficit_; }

  private:
    double total_rate_;
    std::vector<long long> offspring_;  // j values, aligned with the table
    AliasTable table_;
    long long truncated_at_ = 0;
    double deficit_ = 0.0;
};

/// Per-state jump tables for the q-matrix simulator; grows lazily, one cache
/// per worker thread keeps runs deterministic and lock-free.
class MqpRowCache {
  public:
    struct Row {
        double exit_rate;
        std::vector<long long> delta;  // population change per move
        AliasTable table;
    };
    const Row& row_for(const QProcess& qp, long long state);

  private:
    std::unordered_map<long long, Row> rows_;
};

Trajectory simulate_mbp(const OffspringLaw& law, long long z0, double horizon, RngStream& rng,
                        long long cap = kDefaultCap);
Trajectory simulate_mqp(const QProcess& qp, long long w0, double horizon, RngStream& rng,
                        long long cap = kDefaultCap);
Trajectory simulate_mqp(const QProcess& qp, MqpRowCache& cache, long long w0, double horizon,
                        RngStream& rng, long long cap = kDefaultCap);

struct SurvivalEstimate {
    double p_hat;
    double lo;  // 95% Wilson interval
    double hi;
    long long reps;
    long long survived;
    bool covers(double p) const { return p >= lo && p <= hi; }
};

/// P{Z(t) > 0} from z0 = 1 by Monte Carlo; reps >= 100.
SurvivalEstimate estimate_survival(const OffspringLaw& law, double t, long long reps,
                                   std::uint64_t seed, int jobs = 1);

struct EmpiricalDistribution {
    std::vector<long long> support;
    std::vector<double> mass;
    std::vector<double> half_width;  // 95% per-state half-widths
    long long replications = 0;      // included replications
    long long capped = 0;            // excluded (capped) replications
    std::uint64_t seed = 0;

    double mass_at(long long state) const;
    /// TV distance to a pmf indexed by state (index j = state j).
    double tv_to(std::span<const double> pmf) const;
    void write_csv(std::ostream& os) const;
};

enum class ProcessKind { Mbp, Mqp };

/// Empirical pmf of Z(t) (or W(t)) started from i; reps >= 1000.
EmpiricalDistribution empirical_transition(ProcessKind kind, const OffspringLaw& law, double t,
                                           int i, long long reps, std::uint64_t seed,
                                           int jobs = 1, long long cap = kDefaultCap);

/// The same target measure by reweighting branching-process paths with the
/// h-transform factor j q^{j-i} / (i beta^t) at the horizon.
EmpiricalDistribution reweighted_mqp_from_mbp(const QProcess& qp, double t, int i,
                                              long long reps, std::uint64_t seed, int jobs = 1,
                                              long long cap = kDefaultCap);

/// W(t) over replications, in replication order (deterministic given seed).
/// Capped replications are recorded as -1.
std::vector<long long> sample_mqp_states(const QProcess& qp, double t, int i, long long reps,
                                         std::uint64_t seed, int jobs = 1,
                                         long long cap = kDefaultCap);

/// Chunked deterministic parallel-for: chunk c covers replications
/// [c*4096, min((c+1)*4096, n)); worker threads race over chunks but results
/// must be written by replication index so merges are order-independent.
void parallel_chunks(long long n, int jobs,
                     const std::function<void(long long begin, long long end)>& work);

}  // namespace mbp
