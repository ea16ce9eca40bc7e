#include "mbp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

#include "mbp/errors.hpp"
#include "mbp/numerics.hpp"

namespace mbp {

namespace {

constexpr long long kChunk = 4096;
constexpr double kTruncationTail = 1e-10;

}  // namespace

void Trajectory::write_csv(std::ostream& os) const {
    os << "time,population\n";
    char buf[80];
    for (const Event& e : events) {
        std::snprintf(buf, sizeof buf, "%.17g,%lld\n", e.time, e.population);
        os << buf;
    }
}

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("alias table weight < 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("alias table needs positive total weight");
    std::vector<double> scaled(n);
    for (std::size_t k = 0; k < n; ++k) scaled[k] = weights[k] * static_cast<double>(n) / total;
    std::vector<std::uint32_t> small, large;
    for (std::size_t k = n; k-- > 0;)
        (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        const std::uint32_t l = large.back();
        small.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t k : large) prob_[k] = 1.0;
    for (std::uint32_t k : small) prob_[k] = 1.0;  // round-off leftovers
}

std::size_t AliasTable::sample(RngStream& rng) const {
    const std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(prob_.size()));
    const std::size_t idx = std::min(k, prob_.size() - 1);
    return rng.uniform() < prob_[idx] ? idx : alias_[idx];
}

MbpSampler::MbpSampler(const OffspringLaw& law) : total_rate_(law.total_rate()) {
    long long n = law.is_stable() && law.nu() < 1.0 ? 64 : law.support_order();
    if (law.is_stable() && law.nu() < 1.0) {
        while (law.intensity_tail_mass(n) > kTruncationTail) {
            n *= 2;
            if (n > (8LL << 20)) break;  // deficit folded below either way
        }
    }
    truncated_at_ = n;
    deficit_ = law.intensity_tail_mass(n);
    const auto a = law.coefficients(n);
    std::vector<double> weights;
    for (long long j = 0; j <= n; ++j) {
        if (j == 1) continue;
        double w = a[static_cast<std::size_t>(j)];
        if (j == n) w += deficit_;
        if (w > 0.0) {
            offspring_.push_back(j);
            weights.push_back(w);
        }
    }
    table_ = AliasTable(weights);
}

Trajectory MbpSampler::run(long long z0, double horizon, RngStream& rng, long long cap) const {
    if (z0 < 1) throw std::domain_error("initial population must be >= 1");
    if (!(horizon >= 0.0)) throw std::domain_error("horizon must be >= 0");
    if (cap < z0) throw std::domain_error("cap must be >= initial population");
    Trajectory traj;
    traj.events.push_back({0.0, z0});
    long long state = z0;
    double t = 0.0;
    while (state > 0) {
        const double rate = static_cast<double>(state) * total_rate_;
        const double dt = rng.exponential(rate);
        if (t + dt > horizon) break;
        t += dt;
        const long long j = offspring_[table_.sample(rng)];
        state += j - 1;
        traj.events.push_back({t, state});
        if (state == 0) {
            traj.terminal = Trajectory::Terminal::Extinct;
            traj.extinct_time = t;
            return traj;
        }
        if (state > cap) {
            traj.terminal = Trajectory::Terminal::Capped;
            return traj;
        }
    }
    traj.terminal = Trajectory::Terminal::Alive;
    return traj;
}

const MqpRowCache::Row& MqpRowCache::row_for(const QProcess& qp, long long state) {
    auto it = rows_.find(state);
    if (it != rows_.end()) return it->second;
    const QMatrixRow qrow = qp.q_matrix_row(static_cast<int>(state));
    Row row{-qrow.diagonal, {}, AliasTable()};
    std::vector<double> weights;
    row.delta.reserve(qrow.off_diagonal.size());
    weights.reserve(qrow.off_diagonal.size());
    for (const auto& [j, rate] : qrow.off_diagonal) {
        row.delta.push_back(j - state);
        weights.push_back(rate);
    }
    row.table = AliasTable(weights);
    return rows_.emplace(state, std::move(row)).first->second;
}

Trajectory simulate_mqp(const QProcess& qp, MqpRowCache& cache, long long w0, double horizon,
                        RngStream& rng, long long cap) {
    if (w0 < 1) throw std::domain_error("initial state must be >= 1");
    if (!(horizon >= 0.0)) throw std::domain_error("horizon must be >= 0");
    if (cap < w0) throw std::domain_error("cap must be >= initial state");
    Trajectory traj;
    traj.events.push_back({0.0, w0});
    long long state = w0;
    double t = 0.0;
    while (true) {
        const MqpRowCache::Row& row = cache.row_for(qp, state);
        if (!(row.exit_rate > 0.0)) break;  // degenerate absorbing state
        const double dt = rng.exponential(row.exit_rate);
        if (t + dt > horizon) break;
        t += dt;
        state += row.delta[row.table.sample(rng)];
        traj.events.push_back({t, state});
        if (state > cap) {
            traj.terminal = Trajectory::Terminal::Capped;
            return traj;
        }
    }
    traj.terminal = Trajectory::Terminal::Alive;
    return traj;
}

Trajectory simulate_mqp(const QProcess& qp, long long w0, double horizon, RngStream& rng,
                        long long cap) {
    MqpRowCache cache;
    return simulate_mqp(qp, cache, w0, horizon, rng, cap);
}

Trajectory simulate_mbp(const OffspringLaw& law, long long z0, double horizon, RngStream& rng,
                        long long cap) {
    return MbpSampler(law).run(z0, horizon, rng, cap);
}

void parallel_chunks(long long n, int jobs,
                     const std::function<void(long long, long long)>& work) {
    const long long n_chunks = (n + kChunk - 1) / kChunk;
    if (jobs <= 1 || n_chunks <= 1) {
        for (long long c = 0; c < n_chunks; ++c)
            work(c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&] {
        for (;;) {
            const long long c = next.fetch_add(1);
            if (c >= n_chunks) return;
            work(c * kChunk, std::min(n, (c + 1) * kChunk));
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<long long>(jobs, n_chunks));
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

SurvivalEstimate estimate_survival(const OffspringLaw& law, double t, long long reps,
                                   std::uint64_t seed, int jobs) {
    if (reps < 100) throw std::domain_error("survival estimate needs reps >= 100");
    const MbpSampler sampler(law);
    std::vector<std::uint8_t> alive(reps, 0);
    parallel_chunks(reps, jobs, [&](long long begin, long long end) {
        for (long long rep = begin; rep < end; ++rep) {
            RngStream rng(seed, static_cast<std::uint64_t>(rep));
            const Trajectory traj = sampler.run(1, t, rng);
            alive[rep] = traj.final_population() > 0 ? 1 : 0;
        }
    });
    long long survived = 0;
    for (auto b : alive) survived += b;
    const WilsonInterval ci = wilson_interval(survived, reps);
    return {ci.p_hat, ci.lo, ci.hi, reps, survived};
}

namespace {

EmpiricalDistribution from_weighted_counts(const std::map<long long, double>& mass_by_state,
                                           double total_weight, long long included,
                                           long long capped, std::uint64_t seed) {
    EmpiricalDistribution dist;
    dist.replications = included;
    dist.capped = capped;
    dist.seed = seed;
    for (const auto& [state, w] : mass_by_state) {
        const double p = w / total_weight;
        dist.support.push_back(state);
        dist.mass.push_back(p);
        dist.half_width.push_back(
            1.959963984540054 *
            std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(included)));
    }
    return dist;
}

}  // namespace

double EmpiricalDistribution::mass_at(long long state) const {
    for (std::size_t k = 0; k < support.size(); ++k)
        if (support[k] == state) return mass[k];
    return 0.0;
}

double EmpiricalDistribution::tv_to(std::span<const double> pmf) const {
    double d = 0.0;
    std::vector<char> seen(pmf.size(), 0);
    for (std::size_t k = 0; k < support.size(); ++k) {
        const long long j = support[k];
        const double pj = (j >= 0 && j < static_cast<long long>(pmf.size()))
                              ? pmf[static_cast<std::size_t>(j)]
                              : 0.0;
        if (j >= 0 && j < static_cast<long long>(pmf.size()))
            seen[static_cast<std::size_t>(j)] = 1;
        d += std::abs(mass[k] - pj);
    }
    for (std::size_t j = 0; j < pmf.size(); ++j)
        if (!seen[j]) d += std::abs(pmf[j]);
    return 0.5 * d;
}

void EmpiricalDistribution::write_csv(std::ostream& os) const {
    os << "state,mass,ci_halfwidth\n";
    char buf[96];
    for (std::size_t k = 0; k < support.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", support[k], mass[k], half_width[k]);
        os << buf;
    }
}

EmpiricalDistribution empirical_transition(ProcessKind kind, const OffspringLaw& law, double t,
                                           int i, long long reps, std::uint64_t seed, int jobs,
                                           long long cap) {
    if (reps < 1000) throw std::domain_error("empirical transition needs reps >= 1000");
    std::vector<long long> states(reps, -1);
    if (kind == ProcessKind::Mbp) {
        const MbpSampler sampler(law);
        parallel_chunks(reps, jobs, [&](long long begin, long long end) {
            for (long long rep = begin; rep < end; ++rep) {
                RngStream rng(seed, static_cast<std::uint64_t>(rep));
                const Trajectory traj = sampler.run(i, t, rng, cap);
                states[rep] = traj.terminal == Trajectory::Terminal::Capped
                                  ? -1
                                  : traj.final_population();
            }
        });
    } else {
        const QProcess qp(law);
        parallel_chunks(reps, jobs, [&](long long begin, long long end) {
            MqpRowCache cache;
            for (long long rep = begin; rep < end; ++rep) {
                RngStream rng(seed, static_cast<std::uint64_t>(rep));
                const Trajectory traj = simulate_mqp(qp, cache, i, t, rng, cap);
                states[rep] = traj.terminal == Trajectory::Terminal::Capped
                                  ? -1
                                  : traj.final_population();
            }
        });
    }
    std::map<long long, double> counts;
    long long included = 0, capped = 0;
    for (long long s : states) {
        if (s < 0) {
            ++capped;
            continue;
        }
        counts[s] += 1.0;
        ++included;
    }
    if (included == 0) throw DegenerateCondition("all replications capped");
    return from_weighted_counts(counts, static_cast<double>(included), included, capped, seed);
}

EmpiricalDistribution reweighted_mqp_from_mbp(const QProcess& qp, double t, int i,
                                              long long reps, std::uint64_t seed, int jobs,
                                              long long cap) {
    if (reps < 1000) throw std::domain_error("reweighted estimate needs reps >= 1000");
    const auto& ext = qp.extinction();
    const MbpSampler sampler(qp.base());
    std::vector<long long> states(reps, -1);
    parallel_chunks(reps, jobs, [&](long long begin, long long end) {
        for (long long rep = begin; rep < end; ++rep) {
            RngStream rng(seed, static_cast<std::uint64_t>(rep));
            const Trajectory traj = sampler.run(i, t, rng, cap);
            states[rep] =
                traj.terminal == Trajectory::Terminal::Capped ? -1 : traj.final_population();
        }
    });
    const double log_q = std::log(ext.q);
    const double log_beta_t = t * std::log(ext.beta);
    std::map<long long, double> mass;
    double total = 0.0;
    long long included = 0, capped = 0;
    for (long long s : states) {
        if (s < 0) {
            ++capped;
            continue;
        }
        ++included;
        if (s == 0) continue;  // weight j q^{j-i}/(i beta^t) vanishes at j = 0
        const double w = static_cast<double>(s) / static_cast<double>(i) *
                         std::exp((s - i) * log_q - log_beta_t);
        mass[s] += w;
        total += w;
    }
    if (!(total > 0.0)) throw DegenerateCondition("all paths extinct before the horizon");
    return from_weighted_counts(mass, total, included, capped, seed);
}

std::vector<long long> sample_mqp_states(const QProcess& qp, double t, int i, long long reps,
                                         std::uint64_t seed, int jobs, long long cap) {
    std::vector<long long> states(reps, -1);
    parallel_chunks(reps, jobs, [&](long long begin, long long end) {
        MqpRowCache cache;
        for (long long rep = begin; rep < end; ++rep) {
            RngStream rng(seed, static_cast<std::uint64_t>(rep));
            const Trajectory traj = simulate_mqp(qp, cache, i, t, rng, cap);
            states[rep] =
                traj.terminal == Trajectory::Terminal::Capped ? -1 : traj.final_population();
        }
    });
    return states;
}

}  // namespace mbp
