#include <cmath>

#include "doctest.h"
#include "mbp/errors.hpp"
#include "mbp/offspring_law.hpp"
#include "mbp/rng.hpp"

using namespace mbp;

TEST_CASE("stable expansion coefficients") {
    const auto nu1 = OffspringLaw::stable(1.0, 1.0);
    const auto c1 = nu1.coefficients(3);
    CHECK(c1[0] == doctest::Approx(1.0));
    CHECK(c1[1] == doctest::Approx(-2.0));
    CHECK(c1[2] == doctest::Approx(1.0));
    CHECK(c1[3] == doctest::Approx(0.0));

    const auto nu_half = OffspringLaw::stable(0.5, 1.0);
    const auto ch = nu_half.coefficients(2);
    CHECK(ch[0] == doctest::Approx(1.0));
    CHECK(ch[1] == doctest::Approx(-1.5));
    CHECK(ch[2] == doctest::Approx(0.375));

    const auto fin = OffspringLaw::finite({1.0, -3.0, 2.0});
    const auto cf = fin.coefficients(5);
    CHECK(cf == std::vector<double>{1.0, -3.0, 2.0, 0.0, 0.0, 0.0});
}

TEST_CASE("recursion matches the closed form for point queries") {
    const auto law = OffspringLaw::stable(0.37, 1.8);
    const auto a = law.coefficients(400);
    for (long long j : {0LL, 1LL, 2LL, 7LL, 100LL, 400LL})
        CHECK(law.coefficient(j) ==
              doctest::Approx(a[static_cast<std::size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("generating function values") {
    const auto s1 = OffspringLaw::stable(1.0, 1.0);
    CHECK(s1.f(0.0) == doctest::Approx(1.0));
    const auto sh = OffspringLaw::stable(0.5, 1.0);
    CHECK(sh.f(1.0) == doctest::Approx(0.0));
    const auto fin = OffspringLaw::finite({1.0, -3.0, 2.0});
    CHECK(fin.f(0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fin.f(1.5), std::domain_error);
    CHECK_THROWS_AS(fin.f(-0.1), std::domain_error);
}

TEST_CASE("derivative values and means") {
    const auto s1 = OffspringLaw::stable(1.0, 1.0);
    CHECK(s1.f_prime(1.0) == doctest::Approx(0.0));
    const auto fin = OffspringLaw::finite({1.0, -3.0, 2.0});
    CHECK(fin.f_prime(0.5) == doctest::Approx(-1.0));
    CHECK(fin.f_prime(1.0) == doctest::Approx(1.0));
    CHECK(fin.mean() == doctest::Approx(1.0));
}

TEST_CASE("validation and classification") {
    const auto sh = OffspringLaw::stable(0.5, 1.0).validate();
    CHECK(sh.criticality == Criticality::Critical);
    CHECK(sh.offspring_mean == doctest::Approx(0.0));
    CHECK(sh.xlogx_finite);
    CHECK_FALSE(sh.second_moment_finite);
    REQUIRE(sh.stable_params.has_value());
    CHECK(sh.stable_params->first == doctest::Approx(0.5));

    const auto sup = OffspringLaw::finite({1.0, -3.0, 2.0}).validate();
    CHECK(sup.criticality == Criticality::Supercritical);
    CHECK(sup.offspring_mean == doctest::Approx(1.0));
    CHECK(sup.second_moment_finite);

    const auto sub = OffspringLaw::finite({2.0, -3.0, 1.0}).validate();
    CHECK(sub.criticality == Criticality::Subcritical);
    CHECK(sub.offspring_mean == doctest::Approx(-1.0));
}

TEST_CASE("invalid laws are rejected") {
    CHECK_THROWS_AS(OffspringLaw::finite({-1.0, -1.0, 2.0}), InvalidLaw);       // a_0 <= 0
    CHECK_THROWS_AS(OffspringLaw::finite({1.0, 2.0}), InvalidLaw);              // a_1 >= 0
    CHECK_THROWS_AS(OffspringLaw::finite({1.0, -3.0, -1.0, 3.0}), InvalidLaw);  // a_2 < 0
    CHECK_THROWS_AS(OffspringLaw::finite({1.0, -3.0, 2.5}), InvalidLaw);        // f(1) != 0
    CHECK_THROWS_AS(OffspringLaw::stable(0.0, 1.0), InvalidLaw);
    CHECK_THROWS_AS(OffspringLaw::stable(1.5, 1.0), InvalidLaw);
    CHECK_THROWS_AS(OffspringLaw::stable(0.5, -1.0), InvalidLaw);
}

TEST_CASE("stable(nu=1) coincides with its finite counterpart") {
    const double c = 2.75;
    const auto st = OffspringLaw::stable(1.0, c);
    const auto fin = OffspringLaw::finite({c, -2.0 * c, c});
    const auto a = st.coefficients(6);
    const auto b = fin.coefficients(6);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]));
    for (double s : {0.0, 0.3, 0.9, 1.0}) CHECK(st.f(s) == doctest::Approx(fin.f(s)));
}

TEST_CASE("property: stable coefficients are nonnegative off a_1 and sum to zero") {
    RngStream rng(20240811, 7);
    for (int trial = 0; trial < 40; ++trial) {
        const double nu = 0.999 * rng.uniform() + 0.001;
        const double c = 0.1 + 3.0 * rng.uniform();
        const auto law = OffspringLaw::stable(nu, c);
        const long long n = 300;
        const auto a = law.coefficients(n);
        CHECK(a[0] > 0.0);
        CHECK(a[1] < 0.0);
        double partial = 0.0;
        for (long long j = 0; j <= n; ++j) {
            partial += a[static_cast<std::size_t>(j)];
            if (j >= 2) CHECK(a[static_cast<std::size_t>(j)] >= 0.0);
        }
        // |sum_{j<=N} a_j| equals the closed-form tail bound, which vanishes.
        CHECK(std::abs(partial) <= law.intensity_tail_mass(n) * (1.0 + 1e-10) + 1e-15);
        CHECK(law.intensity_tail_mass(4 * n) < law.intensity_tail_mass(n));
    }
}

TEST_CASE("evaluation agrees with Horner on materialized coefficients") {
    for (const auto& law : {OffspringLaw::stable(0.5, 1.0), OffspringLaw::stable(0.8, 2.0)}) {
        long long n = 64;
        while (law.intensity_tail_mass(n) > 1e-10) n *= 2;
        const auto a = law.coefficients(n);
        double horner = 0.0;
        const double s = 0.5;
        for (std::size_t m = a.size(); m-- > 0;) horner = horner * s + a[m];
        CHECK(law.f(s) == doctest::Approx(horner).epsilon(1e-9));
    }
}

TEST_CASE("tail masses are exact for the finite kind") {
    const auto law = OffspringLaw::finite({1.0, -4.0, 2.0, 1.0});
    CHECK(law.intensity_tail_mass(1) == doctest::Approx(3.0));
    CHECK(law.intensity_tail_mass(2) == doctest::Approx(1.0));
    CHECK(law.intensity_tail_mass(3) == doctest::Approx(0.0));
    CHECK(law.rate_tail_mass(1) == doctest::Approx(7.0));
    CHECK(law.rate_tail_mass(2) == doctest::Approx(3.0));
}
