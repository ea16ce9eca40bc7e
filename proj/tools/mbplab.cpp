// mbplab: batch front door for the branching-process laboratory.
//
//   mbplab solve    --config cfg   solve the backward equation, export P-series
//   mbplab simulate --config cfg   Monte Carlo runs + empirical distributions
//   mbplab qprocess --config cfg   q-matrix rows and the scaled limit CDF
//   mbplab verify   --config cfg   theorem-by-theorem checks, CSV report
//   mbplab plot     report.csv     SVG diagnostics from a verify report
//
// Exit codes: 0 success, 1 check failure, 2 config error, 3 numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mbp/config.hpp"
#include "mbp/errors.hpp"
#include "mbp/simulate.hpp"
#include "mbp/svg.hpp"
#include "mbp/verify.hpp"

namespace fs = std::filesystem;
using namespace mbp;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int jobs = 0;
};

ExperimentConfig load_config(const CliOverrides& cli) {
    ExperimentConfig cfg = ExperimentConfig::from_ini(IniConfig::load(cli.config_path));
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    if (cli.seed >= 0) cfg.seed = static_cast<std::uint64_t>(cli.seed);
    if (cli.jobs > 0) cfg.jobs = cli.jobs;
    return cfg;
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_solve(const ExperimentConfig& cfg) {
    GfEngine eng(cfg.law, cfg.tol);
    for (double t : cfg.t_grid) {
        const PowerSeries p =
            eng.transition_probabilities(t, cfg.initial_state, cfg.series_order);
        std::ostringstream name;
        name << "P_i" << cfg.initial_state << "_t" << t << ".csv";
        auto os = open_out(fs::path(cfg.out_dir) / name.str());
        p.write_csv(os);
        std::cout << "wrote " << (fs::path(cfg.out_dir) / name.str()).string()
                  << " (sum=" << num17(p.sum()) << ")\n";
    }
    return 0;
}

int run_simulate(const ExperimentConfig& cfg) {
    const std::uint64_t seed = *cfg.seed;
    const bool mqp = cfg.process == "mqp";
    EmpiricalDistribution dist;
    if (mqp) {
        dist = empirical_transition(ProcessKind::Mqp, cfg.law, cfg.horizon, cfg.initial_state,
                                    cfg.reps, seed, cfg.jobs, cfg.cap);
    } else {
        dist = empirical_transition(ProcessKind::Mbp, cfg.law, cfg.horizon, cfg.initial_state,
                                    cfg.reps, seed, cfg.jobs, cfg.cap);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "empirical.csv");
        dist.write_csv(os);
    }
    {
        RngStream rng(seed, 0);
        Trajectory traj;
        if (mqp) {
            QProcess qp(cfg.law);
            traj = simulate_mqp(qp, cfg.initial_state, cfg.horizon, rng, cfg.cap);
        } else {
            traj = simulate_mbp(cfg.law, cfg.initial_state, cfg.horizon, rng, cfg.cap);
        }
        auto os = open_out(fs::path(cfg.out_dir) / "trajectory.csv");
        traj.write_csv(os);
    }
    std::cout << "replications=" << dist.replications << " capped=" << dist.capped
              << " states=" << dist.support.size() << "\n";
    return 0;
}

int run_qprocess(const ExperimentConfig& cfg) {
    const QProcess qp(cfg.law);
    {
        auto os = open_out(fs::path(cfg.out_dir) / "qmatrix.csv");
        os << "i,j,q_ij\n";
        const int imax = std::max(20, cfg.initial_state);
        for (int i = 1; i <= imax; ++i) {
            const QMatrixRow row = qp.q_matrix_row(i);
            os << i << ',' << i << ',' << num17(row.diagonal) << "\n";
            for (const auto& [j, v] : row.off_diagonal)
                os << i << ',' << j << ',' << num17(v) << "\n";
        }
    }
    if (qp.cls() == MqpClass::Explosive) {
        const auto [nu, c] = qp.tail_exponent();
        auto os = open_out(fs::path(cfg.out_dir) / "limit_cdf.csv");
        os << "x,G\n";
        for (int k = 1; k <= 512; ++k) {
            const double x = k * (8.0 / 512);
            os << num17(x) << ',' << num17(limit_law_cdf(nu, x)) << "\n";
        }
    }
    std::cout << "wrote q-matrix rows"
              << (qp.cls() == MqpClass::Explosive ? " and limit CDF" : "") << "\n";
    return 0;
}

int run_verify(const ExperimentConfig& cfg) {
    const VerifySuite suite(cfg.out_dir, *cfg.seed, cfg.jobs);
    std::vector<CheckResult> results;
    if (cfg.checks.empty()) {
        results = suite.run_default(cfg.law);
    } else {
        const GfEngine eng(cfg.law);
        const bool critical = eng.extinction().cls == Criticality::Critical;
        const double nu = cfg.law.is_stable() ? cfg.law.nu() : 1.0;
        const double t_max = critical ? (nu == 1.0 ? 100.0 : 200.0) : 15.0;
        for (const std::string& name : cfg.checks) {
            if (name == "local_limit") {
                const std::vector<double> grid =
                    critical ? std::vector<double>{5, 10, 20, 50, t_max}
                             : std::vector<double>{1, 2, 4, 8, 15};
                results.push_back(suite.check_local_limit(cfg.law, grid));
            } else if (name == "theorem4") {
                results.push_back(suite.check_theorem4(cfg.law, t_max, 2, 3));
            } else if (name == "tauberian") {
                results.push_back(suite.check_tauberian(cfg.law, 10'000));
            } else if (name == "tauberian_pi") {
                results.push_back(suite.check_tauberian_pi(cfg.law, nu == 1.0 ? 1000 : 10'000));
            } else if (name == "monotone_ratio") {
                results.push_back(suite.check_monotone_ratio(
                    cfg.law, std::vector<double>{1, 2, 4, 8, 16, 32, 50}, 5));
            } else if (name == "conditioned") {
                results.push_back(suite.check_conditioned_limits(cfg.law, critical ? 250.0 : 30.0));
            } else if (name == "mqp_ergodics") {
                results.push_back(suite.check_mqp_ergodics(cfg.law, critical ? t_max : 15.0));
            } else if (name == "theorem21") {
                results.push_back(suite.check_theorem21(cfg.law, 50.0, cfg.reps));
            } else {
                throw ConfigError("unknown check: " + name);
            }
        }
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "report.csv");
        VerifySuite::write_report(results, os);
    }
    bool all_passed = true;
    for (const CheckResult& r : results) {
        all_passed = all_passed && r.passed;
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.theorem_id << " stat="
                  << num17(r.statistic) << " target=" << num17(r.target)
                  << " tol=" << num17(r.tolerance) << " (" << r.runtime_ms << " ms)\n";
    }
    std::cout << "report: " << (fs::path(cfg.out_dir) / "report.csv").string() << "\n";
    return all_passed ? 0 : 1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    if (!is) return {};
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

int run_plot(const std::string& report_path, std::string out_dir) {
    const fs::path report(report_path);
    if (out_dir.empty()) out_dir = report.parent_path().string();
    const auto rows = read_csv(report);
    if (rows.size() <= 1) {
        std::cerr << "warning: report has no diagnostics, nothing to plot\n";
        return 0;
    }
    const auto& header = rows[0];
    int curve_col = -1, id_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "curve") curve_col = static_cast<int>(c);
        if (header[c] == "theorem_id") id_col = static_cast<int>(c);
    }
    if (curve_col < 0) {
        std::cerr << "warning: report has no curve column\n";
        return 0;
    }
    int plotted = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) <= curve_col) continue;
        const std::string rel = rows[r][static_cast<std::size_t>(curve_col)];
        if (rel.empty()) continue;
        const fs::path curve = report.parent_path() / rel;
        const auto data = read_csv(curve);
        if (data.size() <= 1 || data[0].size() < 2) {
            std::cerr << "warning: missing or empty series '" << rel << "', skipped\n";
            continue;
        }
        std::vector<SvgSeries> series(data[0].size() - 1);
        for (std::size_t c = 1; c < data[0].size(); ++c) series[c - 1].name = data[0][c];
        bool ok = true;
        for (std::size_t k = 1; k < data.size() && ok; ++k) {
            if (data[k].size() != data[0].size()) {
                ok = false;
                break;
            }
            const double x = std::stod(data[k][0]);
            for (std::size_t c = 1; c < data[k].size(); ++c) {
                series[c - 1].xs.push_back(x);
                series[c - 1].ys.push_back(std::stod(data[k][c]));
            }
        }
        if (!ok) {
            std::cerr << "warning: ragged series '" << rel << "', skipped\n";
            continue;
        }
        const std::string id =
            id_col >= 0 && static_cast<int>(rows[r].size()) > id_col
                ? rows[r][static_cast<std::size_t>(id_col)]
                : "check";
        const fs::path svg =
            fs::path(out_dir) / (curve.stem().string() + ".svg");
        fs::create_directories(svg.parent_path());
        write_svg_plot(svg.string(), id, data[0][0], "value", series);
        std::cout << "wrote " << svg.string() << "\n";
        ++plotted;
    }
    if (plotted == 0) std::cerr << "warning: no curves plotted\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for branching processes and their q-process companions"};
    app.require_subcommand(1);

    CliOverrides cli;
    std::string report_path;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        if (need_config)
            sub->add_option("--config", cli.config_path, "experiment config file")->required();
        sub->add_option("--seed", cli.seed, "override run.seed");
        sub->add_option("--out-dir", cli.out_dir, "override run.out_dir");
        sub->add_option("--jobs", cli.jobs, "worker threads for replications");
    };

    auto* solve = app.add_subcommand("solve", "solve F(t;s), export transition series");
    add_common(solve, true);
    auto* simulate = app.add_subcommand("simulate", "exact Monte Carlo runs");
    add_common(simulate, true);
    auto* qprocess = app.add_subcommand("qprocess", "q-matrix and limit-law exports");
    add_common(qprocess, true);
    auto* verify = app.add_subcommand("verify", "run limit-theorem checks");
    add_common(verify, true);
    auto* plot = app.add_subcommand("plot", "render SVG diagnostics from a report");
    plot->add_option("report", report_path, "report.csv from a verify run")->required();
    plot->add_option("--out-dir", cli.out_dir, "directory for SVG files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) return run_plot(report_path, cli.out_dir);
        const ExperimentConfig cfg = load_config(cli);
        if (solve->parsed()) return run_solve(cfg);
        if (simulate->parsed()) return run_simulate(cfg);
        if (qprocess->parsed()) return run_qprocess(cfg);
        if (verify->parsed()) return run_verify(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
