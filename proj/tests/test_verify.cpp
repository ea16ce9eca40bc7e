#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mbp/errors.hpp"
#include "mbp/verify.hpp"
#include "oracles.hpp"

using namespace mbp;

namespace {
const OffspringLaw kStable1 = OffspringLaw::stable(1.0, 1.0);
const OffspringLaw kStableHalf = OffspringLaw::stable(0.5, 1.0);
const OffspringLaw kSuper = OffspringLaw::finite({1.0, -3.0, 2.0});
const OffspringLaw kSub = OffspringLaw::finite({2.0, -3.0, 1.0});

std::string tmp_dir(const char* name) {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "mbplab_tests" / name;
    fs::create_directories(p);
    return p.string();
}
}  // namespace

TEST_CASE("ks statistic basics") {
    // empirical {0.5} vs U(0,1): sup gap is max(F(0.5), 1 - F(0.5)) = 0.5
    CHECK(ks_statistic({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));
    // perfect quantile comb has gap 1/(2n)
    std::vector<double> comb;
    const int n = 10;
    for (int k = 0; k < n; ++k) comb.push_back((k + 0.5) / n);
    CHECK(ks_statistic(comb, [](double x) { return x; }) == doctest::Approx(0.05));
    // ties are handled through the cumulative jump
    CHECK(ks_statistic({0.2, 0.2, 0.2, 0.9}, [](double x) { return x; }) ==
          doctest::Approx(0.55));
}

TEST_CASE("local limit check passes on all four laws") {
    const VerifySuite suite("", 1234);
    const std::vector<double> crit_grid{5, 10, 20, 50, 100};
    auto r1 = suite.check_local_limit(kStable1, crit_grid);
    CHECK(r1.passed);
    CHECK(r1.statistic == doctest::Approx(std::pow(100.0 / 101.0, 2.0)).epsilon(1e-6));
    CHECK(r1.theorem_id == "thm2_local_limit");

    const std::vector<double> half_grid{20, 50, 100, 200};
    auto rh = suite.check_local_limit(kStableHalf, half_grid);
    CHECK(rh.passed);
    CHECK(rh.statistic == doctest::Approx(std::pow(100.0 / 101.0, 3.0)).epsilon(1e-6));

    const std::vector<double> grid{1, 2, 4, 8, 15};
    auto rs = suite.check_local_limit(kSuper, grid);
    CHECK(rs.passed);
    CHECK(rs.theorem_id == "thm1_local_limit");
    CHECK(rs.statistic == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(suite.check_local_limit(kSub, grid).passed);
}

TEST_CASE("theorem 4 elementwise limit") {
    const VerifySuite suite("", 1234);
    auto r = suite.check_theorem4(kStable1, 100.0, 2, 3);
    CHECK(r.passed);
    auto rh = suite.check_theorem4(kStableHalf, 200.0, 1, 2);
    CHECK(rh.passed);
    CHECK_THROWS_AS(suite.check_theorem4(kSuper, 100.0, 2, 3), NotApplicable);
}

TEST_CASE("tauberian checks") {
    const VerifySuite suite("", 1234);
    auto mu1 = suite.check_tauberian(kStable1, 10'000);
    CHECK(mu1.passed);
    CHECK(mu1.statistic == doctest::Approx(1.0).epsilon(1e-10));
    auto muh = suite.check_tauberian(kStableHalf, 10'000);
    CHECK(muh.passed);

    auto pi1 = suite.check_tauberian_pi(kStable1, 1000);
    CHECK(pi1.passed);
    CHECK(pi1.statistic == doctest::Approx(1.001).epsilon(1e-10));
    auto pih = suite.check_tauberian_pi(kStableHalf, 10'000);
    CHECK(pih.passed);
    CHECK_THROWS_AS(suite.check_tauberian_pi(kSuper, 1000), NotApplicable);
}

TEST_CASE("monotone ratio check") {
    const VerifySuite suite("", 1234);
    const std::vector<double> grid{1, 2, 4, 8, 16, 32, 50};
    for (const auto* law : {&kStable1, &kSub, &kSuper}) {
        auto r = suite.check_monotone_ratio(*law, grid, 5);
        CHECK(r.passed);
        CHECK(r.statistic <= 1e-7);
    }
}

TEST_CASE("conditioned-limit checks") {
    const VerifySuite suite("", 1234);
    auto sub = suite.check_conditioned_limits(kSub, 30.0);
    CHECK(sub.passed);
    CHECK(sub.statistic <= 0.02);

    auto crit = suite.check_conditioned_limits(kStable1, 250.0);
    CHECK(crit.passed);
    auto crit_h = suite.check_conditioned_limits(kStableHalf, 250.0);
    CHECK(crit_h.passed);
}

TEST_CASE("mqp ergodics checks") {
    const VerifySuite suite("", 1234);
    auto restrictive = suite.check_mqp_ergodics(kSuper, 15.0);
    CHECK(restrictive.passed);
    CHECK(restrictive.target == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(restrictive.notes.find("omega_over_u=4") != std::string::npos);

    auto explosive = suite.check_mqp_ergodics(kStable1, 100.0);
    CHECK(explosive.passed);
    CHECK(std::abs(explosive.statistic - 1.0) <= 0.05);
}

TEST_CASE("theorem 21 check") {
    const VerifySuite suite("", 991);
    auto r = suite.check_theorem21(kStable1, 50.0, 10'000);
    CHECK(r.passed);
    CHECK(r.reps == 10'000);
    CHECK(r.notes.find("bias=") != std::string::npos);
    CHECK_THROWS_AS(suite.check_theorem21(kSuper, 50.0, 10'000), NotApplicable);
}

TEST_CASE("tail gate: a check cannot pass with an oversized tail bound") {
    CheckResult r;
    r.statistic = 1.0;
    r.target = 1.0;
    r.tolerance = 0.05;
    r.tail_bound = 0.04;  // > tolerance/2
    r.finalize();
    CHECK_FALSE(r.passed);
    r.tail_bound = 0.01;
    r.finalize();
    CHECK(r.passed);
}

TEST_CASE("report writing and determinism of the default suite") {
    const std::string dir = tmp_dir("verify_report");
    auto run_once = [&]() {
        const VerifySuite suite(dir, 20240809, 2);
        const auto results = suite.run_default(kSuper);
        std::ostringstream os;
        VerifySuite::write_report(results, os);
        return os.str();
    };
    const std::string a = run_once();
    const std::string b = run_once();
    CHECK(a == b);
    CHECK(a.find("thm1_local_limit") != std::string::npos);
    CHECK(a.find("thm15_18_mqp_ergodics") != std::string::npos);
    // header + one row per check
    int lines = 0;
    for (char c : a)
        if (c == '\n') ++lines;
    CHECK(lines == 5);
    // curve files referenced by the report exist
    std::istringstream is(a);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        const auto pos = line.rfind(',');
        const std::string curve = line.substr(pos + 1);
        if (!curve.empty())
            CHECK(std::filesystem::exists(std::filesystem::path(dir) / curve));
    }
}

TEST_CASE("default critical battery passes") {
    const std::string dir = tmp_dir("verify_critical");
    const VerifySuite suite(dir, 20240809, 2);
    const auto results = suite.run_default(kStable1);
    CHECK(results.size() == 8);
    for (const auto& r : results) {
        INFO(r.theorem_id, " stat=", r.statistic, " target=", r.target, " tol=", r.tolerance);
        CHECK(r.passed);
    }
}
