#include "mbp/verify.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbp/errors.hpp"

namespace mbp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

std::string file_stem(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    return s;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::domain_error("ks_statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    std::size_t k = 0;
    while (k < samples.size()) {
        std::size_t run = k;
        while (run < samples.size() && samples[run] == samples[k]) ++run;
        const double F = cdf(samples[k]);
        d = std::max(d, std::abs(static_cast<double>(k) / n - F));
        d = std::max(d, std::abs(static_cast<double>(run) / n - F));
        k = run;
    }
    return d;
}

std::string law_label(const OffspringLaw& law) {
    std::ostringstream os;
    if (law.is_stable()) {
        os << "stable(nu=" << law.nu() << ";c=" << law.scale_c() << ")";
    } else {
        os << "finite(";
        const auto a = law.coefficients(law.support_order());
        for (std::size_t j = 0; j < a.size(); ++j) os << (j ? ";" : "") << a[j];
        os << ")";
    }
    return os.str();
}

VerifySuite::VerifySuite(std::string out_dir, std::uint64_t master_seed, int jobs)
    : out_dir_(std::move(out_dir)), seed_(master_seed), jobs_(jobs) {}

std::uint64_t VerifySuite::check_seed(const char* check_id) const {
    return seed_ ^ stream_offset(check_id);
}

std::string VerifySuite::write_curve(const std::string& stem,
                                     const std::vector<std::string>& columns,
                                     const std::vector<std::vector<double>>& rows) const {
    if (out_dir_.empty()) return {};
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir_) / "curves");
    const std::string rel = "curves/" + stem + ".csv";
    std::ofstream os(fs::path(out_dir_) / rel, std::ios::binary);
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt(row[c]);
        os << "\n";
    }
    return rel;
}

CheckResult VerifySuite::check_local_limit(const OffspringLaw& law,
                                           std::span<const double> t_grid) const {
    if (t_grid.empty()) throw std::domain_error("t grid must be nonempty");
    Stopwatch watch;
    GfEngine eng(law);
    const bool critical = eng.extinction().cls == Criticality::Critical;
    CheckResult res;
    res.law_label = law_label(law);
    res.target = 1.0;
    res.tolerance = 0.05;

    double scale_num = 0.0, nu = 0.0;
    if (critical) {
        const QProcess qp(law);
        const auto [nu_eff, c_eff] = qp.tail_exponent();
        nu = nu_eff;
        scale_num = law.a0() * std::pow(c_eff, 1.0 / nu_eff);  // a_0 / N(t)
        res.theorem_id = "thm2_local_limit";
    } else {
        scale_num = law.a0() / (eng.extinction().lambda_S * eng.a_function(0.0));
        res.theorem_id = "thm1_local_limit";
    }

    std::vector<std::vector<double>> rows;
    double stat = 0.0, tail = 0.0;
    for (double t : t_grid) {
        const PowerSeries p = eng.transition_probabilities(t, 1, 2);
        const double p11 = p[1];
        double ratio;
        if (critical) {
            ratio = std::pow(nu * t, 1.0 + 1.0 / nu) * p11 * scale_num;
        } else {
            ratio = std::exp(std::log(p11) + t * eng.extinction().lambda_S) * scale_num;
        }
        rows.push_back({t, ratio});
        stat = ratio;
        tail = std::max(tail, p.extract_residual);
    }
    res.statistic = stat;
    res.tail_bound = tail;
    res.notes = "ratio at t=" + fmt(t_grid.back());
    res.curve_file = write_curve(file_stem("local_limit_" + res.law_label), {"t", "ratio"}, rows);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_theorem4(const OffspringLaw& law, double t, int i, int j) const {
    Stopwatch watch;
    GfEngine eng(law);
    if (eng.extinction().cls != Criticality::Critical)
        throw NotApplicable("elementwise local limit needs a critical law");
    const QProcess qp(law);
    const auto [nu, c] = qp.tail_exponent();
    const double mu_j =
        law.is_stable() ? eng.mu_by_recursion(j)[static_cast<std::size_t>(j)]
                        : eng.mu_coefficients(j)[j];
    const PowerSeries p = eng.transition_probabilities(t, i, j);
    CheckResult res;
    res.theorem_id = "thm4_elementwise_limit";
    res.law_label = law_label(law);
    res.statistic = std::pow(nu * t, 1.0 + 1.0 / nu) * p[j] * law.a0() * std::pow(c, 1.0 / nu) /
                    (static_cast<double>(i) * mu_j);
    res.target = 1.0;
    res.tolerance = 0.1;
    res.tail_bound = p.extract_residual;
    res.notes = "i=" + std::to_string(i) + ";j=" + std::to_string(j) + ";t=" + fmt(t);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_tauberian(const OffspringLaw& law, long long n_max) const {
    Stopwatch watch;
    GfEngine eng(law);
    if (eng.extinction().cls != Criticality::Critical)
        throw NotApplicable("the Tauberian sum law needs a critical law");
    if (!law.is_stable()) throw NotApplicable("partial-sum recursion needs the stable family");
    const double nu = law.nu(), c = law.scale_c();
    CheckResult res;
    res.theorem_id = "thm8_tauberian_mu";
    res.law_label = law_label(law);
    // sum_{j<=n} mu_j ~ a_0 n^nu L_mu(n) / (nu^2 Gamma(nu)), L_mu = 1/c.
    const double target_sum =
        law.a0() * std::pow(static_cast<double>(n_max), nu) / (nu * nu * std::tgamma(nu) * c);
    res.statistic = eng.mu_partial_sum(n_max) / target_sum;
    res.target = 1.0;
    res.tolerance = nu == 1.0 ? 0.05 : 0.1;
    res.notes = "n=" + std::to_string(n_max);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_tauberian_pi(const OffspringLaw& law, long long n_max) const {
    Stopwatch watch;
    const QProcess qp(law);
    if (qp.cls() != MqpClass::Explosive)
        throw NotApplicable("pi is the explosive-class invariant measure");
    const auto [nu, c] = qp.tail_exponent();
    CheckResult res;
    res.theorem_id = "eq4.19_tauberian_pi";
    res.law_label = law_label(law);
    const double target_sum =
        std::pow(static_cast<double>(n_max), 1.0 + nu) / (std::tgamma(2.0 + nu) * c);
    res.statistic = qp.pi_partial_sum(n_max) / target_sum;
    res.target = 1.0;
    res.tolerance = nu == 1.0 ? 0.02 : 0.1;
    res.notes = "n=" + std::to_string(n_max);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_monotone_ratio(const OffspringLaw& law,
                                              std::span<const double> t_grid, int j_max) const {
    if (t_grid.size() < 2) throw std::domain_error("monotone-ratio check needs a t grid");
    Stopwatch watch;
    GfEngine eng(law);
    CheckResult res;
    res.theorem_id = "lem3_monotone_ratio";
    res.law_label = law_label(law);
    res.target = 0.0;
    res.tolerance = 1e-7;

    std::vector<std::vector<double>> ratios;  // per t: [t, r_1..r_jmax]
    double tail = 0.0;
    for (double t : t_grid) {
        const PowerSeries r = eng.ratio_series(t, 1, j_max);
        std::vector<double> row{t};
        for (int j = 1; j <= j_max; ++j) row.push_back(r[j]);
        ratios.push_back(std::move(row));
        tail = std::max(tail, r.extract_residual);
    }
    double worst_decrease = 0.0;
    for (std::size_t k = 1; k < ratios.size(); ++k)
        for (int j = 1; j <= j_max; ++j)
            worst_decrease =
                std::max(worst_decrease, ratios[k - 1][static_cast<std::size_t>(j)] -
                                             ratios[k][static_cast<std::size_t>(j)]);
    res.statistic = worst_decrease;
    res.tail_bound = tail;

    // Convergence gap to the invariant measure at the largest t.
    double gap = 0.0;
    if (law.is_stable() && eng.extinction().cls == Criticality::Critical) {
        const auto mu = eng.mu_by_recursion(j_max);
        for (int j = 1; j <= j_max; ++j)
            gap = std::max(gap, std::abs(ratios.back()[static_cast<std::size_t>(j)] -
                                         mu[static_cast<std::size_t>(j)]));
    } else {
        const PowerSeries mu = eng.mu_coefficients(j_max);
        for (int j = 1; j <= j_max; ++j)
            gap = std::max(gap, std::abs(ratios.back()[static_cast<std::size_t>(j)] - mu[j]));
    }
    res.notes = "gap_to_mu_at_tmax=" + fmt(gap);

    std::vector<std::string> cols{"t"};
    for (int j = 1; j <= j_max; ++j) cols.push_back("ratio_j" + std::to_string(j));
    res.curve_file = write_curve(file_stem("monotone_ratio_" + res.law_label), cols, ratios);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_conditioned_limits(const OffspringLaw& law, double t) const {
    Stopwatch watch;
    GfEngine eng(law);
    CheckResult res;
    res.law_label = law_label(law);
    if (eng.extinction().cls == Criticality::Critical) {
        res.theorem_id = "thm11_conditioned_critical";
        const QProcess qp(law);
        const auto [nu, c] = qp.tail_exponent();
        const double m09 = eng.m_script(0.9);
        double sup = 0.0;
        std::vector<std::vector<double>> rows;
        for (double s = 0.0; s <= 0.901; s += 0.05) {
            const double lhs = nu * t * eng.conditioned_gf(t, 1, s);
            const double rhs = eng.m_script(s);
            sup = std::max(sup, std::abs(lhs - rhs));
            rows.push_back({s, lhs, rhs});
        }
        res.statistic = sup;
        res.target = 0.0;
        res.tolerance = 0.05 * m09;
        res.curve_file =
            write_curve(file_stem("conditioned_critical_" + res.law_label), {"s", "nu_t_V", "M"}, rows);
    } else {
        res.theorem_id = "thm10_conditioned_limit";
        const int n = 60;
        const PowerSeries cond = eng.conditioned_transition(t, 1, n);
        const PowerSeries nu_series = eng.nu_coefficients(n);
        res.statistic = tv_distance(cond.coef, nu_series.coef);
        res.target = 0.0;
        res.tolerance = 0.02;
        res.tail_bound = std::max({cond.extract_residual, nu_series.extract_residual,
                                   cond.tail_estimate, nu_series.tail_estimate});
        std::vector<std::vector<double>> rows;
        for (int j = 1; j <= n; ++j)
            rows.push_back({static_cast<double>(j), cond[j], nu_series[j]});
        res.curve_file =
            write_curve(file_stem("conditioned_limit_" + res.law_label), {"j", "conditioned_t", "limit"},
                        rows);
    }
    res.notes = "t=" + fmt(t);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_mqp_ergodics(const OffspringLaw& law, double t) const {
    Stopwatch watch;
    const QProcess qp(law);
    const GfEngine& eng = qp.engine();
    CheckResult res;
    res.law_label = law_label(law);
    if (qp.cls() == MqpClass::Restrictive) {
        res.theorem_id = "thm15_18_mqp_ergodics";
        const double limit = qp.extinction().lambda_S * eng.a_function(0.0) / law.a0();
        const int n = 48;
        double worst = 0.0;
        for (int i = 1; i <= 3; ++i) {
            const PowerSeries q = qp.transition(t, i, std::max(n, i + 1));
            worst = std::max(worst, std::abs(q[1] - limit));
        }
        res.statistic = limit + worst;  // worst-case Q_i1(t) deviation, centred on the limit
        res.target = limit;
        res.tolerance = 0.05;

        const PowerSeries q1 = qp.transition(t, 1, n);
        const PowerSeries u = qp.u_coefficients(n);
        const double tv = tv_distance(q1.coef, u.coef);
        const double u_sum_err = std::abs(u.sum() - 1.0);
        const auto omega = qp.omega_coefficients(8);
        const double observed_const = omega[1] / u[1];
        res.tail_bound = std::max({q1.extract_residual, u.extract_residual, q1.tail_estimate});
        res.notes = "tv_to_u=" + fmt(tv) + ";u_sum_err=" + fmt(u_sum_err) +
                    ";omega_over_u=" + fmt(observed_const);
        res.finalize();
        res.passed = res.passed && tv <= 0.02 && u_sum_err <= 1e-6;
        std::vector<std::vector<double>> rows;
        for (int j = 1; j <= n; ++j) rows.push_back({static_cast<double>(j), q1[j], u[j]});
        res.curve_file = write_curve(file_stem("mqp_ergodics_" + res.law_label), {"j", "Q_1j", "u_j"}, rows);
    } else {
        res.theorem_id = "thm17_19_mqp_ergodics";
        const auto [nu, c] = qp.tail_exponent();
        double worst = 0.0;
        double tail = 0.0;
        for (int i = 1; i <= 2; ++i) {
            const PowerSeries q = qp.transition(t, i, i + 1);
            const double ratio = std::pow(nu * t, 1.0 + 1.0 / nu) * q[1] * law.a0() *
                                 std::pow(c, 1.0 / nu);
            worst = std::max(worst, std::abs(ratio - 1.0));
            tail = std::max(tail, q.extract_residual);
        }
        res.statistic = 1.0 + worst;
        res.target = 1.0;
        res.tolerance = 0.1;
        res.tail_bound = tail;
        res.notes = "t=" + fmt(t);
        res.finalize();
    }
    res.runtime_ms = watch.ms();
    return res;
}

CheckResult VerifySuite::check_theorem21(const OffspringLaw& law, double t, long long reps) const {
    Stopwatch watch;
    const QProcess qp(law);
    if (qp.cls() != MqpClass::Explosive) throw NotApplicable("scaling limit needs the explosive class");
    if (reps < 10'000) throw std::domain_error("scaling-limit check needs reps >= 1e4");
    const auto [nu, c] = qp.tail_exponent();
    const GfEngine& eng = qp.engine();
    const double q_t = eng.solve_F(t, 0.0).R();

    const auto states = sample_mqp_states(qp, t, 1, reps, check_seed("thm21"), jobs_);
    std::vector<double> scaled;
    scaled.reserve(states.size());
    long long capped = 0;
    for (long long w : states) {
        if (w < 0) {
            ++capped;
            continue;
        }
        scaled.push_back(q_t * static_cast<double>(w));
    }
    auto cdf = [nu](double x) { return limit_law_cdf(nu, x); };
    const double ks = ks_statistic(scaled, cdf);

    // Deterministic finite-t bias: KS between the exact law of q(t) W(t) and
    // the limit CDF, from the transition series.
    int n_exact = static_cast<int>(std::ceil(8.0 / q_t));
    const PowerSeries qser = qp.transition(t, 1, n_exact);
    double bias = 0.0, cum = 0.0;
    for (int j = 1; j <= n_exact; ++j) {
        const double F = cdf(q_t * j);
        bias = std::max(bias, std::abs(cum - F));
        cum += qser[j];
        bias = std::max(bias, std::abs(cum - F));
    }

    CheckResult res;
    res.theorem_id = "thm21_scaling_limit";
    res.law_label = law_label(law);
    res.statistic = ks;
    res.target = 0.0;
    res.tolerance = std::max(0.02, 1.36 / std::sqrt(static_cast<double>(scaled.size())) + bias);
    res.reps = reps;
    res.tail_bound = qser.extract_residual;

    double laplace_mean = 0.0;
    for (double x : scaled) laplace_mean += std::exp(-x);
    laplace_mean /= static_cast<double>(scaled.size());
    res.notes = "bias=" + fmt(bias) + ";capped=" + std::to_string(capped) +
                ";laplace_at_1=" + fmt(laplace_mean) +
                ";laplace_target=" + fmt(limit_law_laplace(nu, 1.0));

    std::vector<std::vector<double>> rows;
    std::sort(scaled.begin(), scaled.end());
    const std::size_t step = std::max<std::size_t>(1, scaled.size() / 512);
    for (std::size_t k = 0; k < scaled.size(); k += step)
        rows.push_back({scaled[k], static_cast<double>(k + 1) / static_cast<double>(scaled.size()),
                        cdf(scaled[k])});
    res.curve_file =
        write_curve(file_stem("scaling_limit_" + res.law_label), {"x", "ecdf", "limit_cdf"}, rows);
    res.finalize();
    res.runtime_ms = watch.ms();
    return res;
}

std::vector<CheckResult> VerifySuite::run_default(const OffspringLaw& law) const {
    std::vector<CheckResult> out;
    GfEngine eng(law);
    if (eng.extinction().cls == Criticality::Critical) {
        const double nu = law.is_stable() ? law.nu() : 1.0;
        const double t_max = nu == 1.0 ? 100.0 : 200.0;
        const std::vector<double> grid{5.0, 10.0, 20.0, 50.0, t_max};
        out.push_back(check_local_limit(law, grid));
        out.push_back(check_theorem4(law, t_max, 2, 3));
        if (law.is_stable()) out.push_back(check_tauberian(law, 10'000));
        out.push_back(check_tauberian_pi(law, nu == 1.0 ? 1000 : 10'000));
        out.push_back(check_monotone_ratio(law, std::vector<double>{1, 2, 4, 8, 16, 32, 64, 100},
                                           5));
        out.push_back(check_conditioned_limits(law, 250.0));
        out.push_back(check_mqp_ergodics(law, t_max));
        // The q-matrix simulator cannot bound row tails for nu < 1 (RateOverflow).
        if (!law.is_stable() || law.nu() == 1.0)
            out.push_back(check_theorem21(law, 50.0, 10'000));
    } else {
        const std::vector<double> grid{1, 2, 4, 8, 15};
        out.push_back(check_local_limit(law, grid));
        out.push_back(check_monotone_ratio(law, std::vector<double>{1, 2, 4, 8, 16, 32, 50}, 5));
        out.push_back(check_conditioned_limits(law, 30.0));
        out.push_back(check_mqp_ergodics(law, 15.0));
    }
    return out;
}

void VerifySuite::write_report(const std::vector<CheckResult>& results, std::ostream& os) {
    os << "theorem_id,law,statistic,target,tolerance,passed,reps,tail_bound,notes,curve\n";
    for (const CheckResult& r : results) {
        os << r.theorem_id << ',' << sanitize(r.law_label) << ',' << fmt(r.statistic) << ','
           << fmt(r.target) << ',' << fmt(r.tolerance) << ',' << (r.passed ? 1 : 0) << ','
           << r.reps << ',' << fmt(r.tail_bound) << ',' << sanitize(r.notes) << ','
           << sanitize(r.curve_file) << "\n";
    }
}

}  // namespace mbp
