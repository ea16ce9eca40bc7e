#include "mbp/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mbp/errors.hpp"

namespace mbp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

IniConfig IniConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

IniConfig IniConfig::parse(const std::string& text) {
    IniConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string IniConfig::get(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key))
        throw ConfigError("missing config key [" + section + "] " + key);
    return it->second.at(key);
}

std::string IniConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double IniConfig::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key + " is not a number: " + v);
    }
}

long long IniConfig::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key + " is not an integer: " + v);
    }
}

std::vector<double> IniConfig::get_list(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    std::vector<double> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key + " has a bad entry: " + item);
        }
    }
    if (out.empty()) throw ConfigError("config key [" + section + "] " + key + " is empty");
    return out;
}

ExperimentConfig ExperimentConfig::from_ini(const IniConfig& ini) {
    ExperimentConfig cfg;

    const std::string kind = ini.get("law", "kind");
    if (kind == "stable") {
        const double nu = ini.get_double("law", "nu");
        const double c = ini.get_double("law", "c");
        if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("law.nu must lie in (0,1]");
        if (!(c > 0.0)) throw ConfigError("law.c must be positive");
        cfg.law = OffspringLaw::stable(nu, c);
    } else if (kind == "finite") {
        const auto coef = ini.get_list("law", "coefficients");
        try {
            cfg.law = OffspringLaw::finite(coef);
        } catch (const InvalidLaw& e) {
            throw ConfigError(std::string("law.coefficients invalid: ") + e.what());
        }
    } else {
        throw ConfigError("law.kind must be 'finite' or 'stable'");
    }

    const std::string mode = ini.get("run", "mode");
    if (mode == "solve")
        cfg.mode = RunMode::Solve;
    else if (mode == "simulate")
        cfg.mode = RunMode::Simulate;
    else if (mode == "qprocess")
        cfg.mode = RunMode::QProcess;
    else if (mode == "verify")
        cfg.mode = RunMode::Verify;
    else
        throw ConfigError("run.mode must be one of solve|simulate|qprocess|verify");

    cfg.out_dir = ini.get_or("run", "out_dir", "out");
    if (ini.has("run", "seed"))
        cfg.seed = static_cast<std::uint64_t>(ini.get_int("run", "seed"));
    if (ini.has("run", "jobs")) {
        cfg.jobs = static_cast<int>(ini.get_int("run", "jobs"));
        if (cfg.jobs < 1) throw ConfigError("run.jobs must be >= 1");
    }

    if (ini.has("solve", "t_grid")) cfg.t_grid = ini.get_list("solve", "t_grid");
    for (double t : cfg.t_grid)
        if (!(t >= 0.0)) throw ConfigError("solve.t_grid entries must be >= 0");
    if (ini.has("solve", "i")) cfg.initial_state = static_cast<int>(ini.get_int("solve", "i"));
    if (cfg.initial_state < 1) throw ConfigError("solve.i must be >= 1");
    if (ini.has("solve", "N")) cfg.series_order = static_cast<int>(ini.get_int("solve", "N"));
    if (cfg.series_order < 1 || cfg.series_order > 100'000)
        throw ConfigError("solve.N must lie in [1, 1e5]");
    if (ini.has("solve", "tol")) cfg.tol = ini.get_double("solve", "tol");
    if (!(cfg.tol > 0.0 && cfg.tol <= 1e-4)) throw ConfigError("solve.tol must lie in (0, 1e-4]");

    if (ini.has("simulate", "process")) cfg.process = ini.get("simulate", "process");
    if (cfg.process != "mbp" && cfg.process != "mqp")
        throw ConfigError("simulate.process must be mbp or mqp");
    if (ini.has("simulate", "reps")) cfg.reps = ini.get_int("simulate", "reps");
    if (cfg.reps < 1 || cfg.reps > 100'000'000) throw ConfigError("simulate.reps out of range");
    if (ini.has("simulate", "cap")) cfg.cap = ini.get_int("simulate", "cap");
    if (cfg.cap < 1) throw ConfigError("simulate.cap must be >= 1");
    if (ini.has("simulate", "t")) cfg.horizon = ini.get_double("simulate", "t");
    if (!(cfg.horizon >= 0.0)) throw ConfigError("simulate.t must be >= 0");

    if (ini.has("verify", "checks")) {
        std::istringstream is(ini.get("verify", "checks"));
        std::string item;
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (!item.empty()) cfg.checks.push_back(item);
        }
    }

    if ((cfg.mode == RunMode::Simulate || cfg.mode == RunMode::Verify) && !cfg.seed)
        throw ConfigError("run.seed is mandatory for stochastic modes");
    return cfg;
}

}  // namespace mbp
