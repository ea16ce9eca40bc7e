#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbp/offspring_law.hpp"

namespace mbp {

/// Flat INI-style config: [section] headers, key = value lines, '#'/';' comments.
class IniConfig {
  public:
    static IniConfig load(const std::string& path);
    static IniConfig parse(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class RunMode { Solve, Simulate, QProcess, Verify };

struct ExperimentConfig {
    OffspringLaw law = OffspringLaw::stable(1.0, 1.0);
    RunMode mode = RunMode::Verify;
    std::string out_dir = "out";

    std::optional<std::uint64_t> seed;  // mandatory for stochastic modes
    int jobs = 1;

    // solve
    std::vector<double> t_grid{1.0};
    int initial_state = 1;
    int series_order = 40;
    double tol = 1e-10;

    // simulate
    std::string process = "mbp";  // mbp | mqp
    long long reps = 10'000;
    long long cap = 1'000'000;
    double horizon = 1.0;

    // verify
    std::vector<std::string> checks;  // empty = default battery

    static ExperimentConfig from_ini(const IniConfig& ini);
};

}  // namespace mbp
