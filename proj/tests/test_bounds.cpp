#include <doctest.h>

#include <cmath>

#include "qmet/bounds.hpp"
#include "qmet/oracle.hpp"

using namespace qmet;

namespace {
const SingleBodySpectrum kQubit = spectrum_stats({-0.5, 0.5});
}

TEST_CASE("extremes: cases 1-3 are all-alike strings") {
    // positive spectrum, k odd
    const auto pos = spectrum_stats({0.25, 1.0});
    const auto r = extreme_eigenvalues(pos, CouplingSpec(3, 10));
    CHECK(r.lambda_cap_max == doctest::Approx(std::pow(10.0, 3)));
    CHECK(r.lambda_cap_min == doctest::Approx(std::pow(2.5, 3)));
    CHECK(r.exact);
    // k odd with mixed signs still closed-form
    const auto m = extreme_eigenvalues(kQubit, CouplingSpec(3, 10));
    CHECK(m.lambda_cap_max == doctest::Approx(125.0));
    CHECK(m.lambda_cap_min == doctest::Approx(-125.0));
}

TEST_CASE("extremes: case 4 even n reaches zero, odd n reaches (h/2)^k") {
    const auto even = extreme_eigenvalues(kQubit, CouplingSpec(2, 12));
    CHECK(even.lambda_cap_max == doctest::Approx(36.0));
    CHECK(even.lambda_cap_min == 0.0);
    const auto odd = extreme_eigenvalues(kQubit, CouplingSpec(2, 13));
    CHECK(odd.lambda_cap_min == doctest::Approx(0.25));
    CHECK(odd.exact);
}

TEST_CASE("extremes agree with exhaustive enumeration") {
    const auto tri = spectrum_stats({-0.4, 0.1, 0.6});
    for (int k : {1, 2, 3}) {
        for (long long n : {3LL, 5LL, 8LL}) {
            for (bool self : {true, false}) {
                if (!self && n < k) continue;
                const CouplingSpec c(k, n, self);
                const auto a = extreme_eigenvalues(tri, c);
                const auto b = oracle::string_extremes(tri, c);
                CHECK(a.lambda_cap_max ==
                      doctest::Approx(b.value_max).epsilon(1e-12));
                CHECK(a.lambda_cap_min ==
                      doctest::Approx(b.value_min).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("entangled QCRB") {
    const auto r = extreme_eigenvalues(kQubit, CouplingSpec(2, 1000));
    const auto b = qcrb_entangled(r, ExperimentClock(0.0, 1.0, 1));
    REQUIRE(b.has_value());
    CHECK(*b == doctest::Approx(4e-6).epsilon(1e-12));
}

TEST_CASE("product variance: optimum and stationarity") {
    const CouplingSpec c(2, 4);
    const auto opt = optimal_product_state(kQubit, c);
    CHECK(opt.x_plus == doctest::Approx(std::sqrt(2.0) / 4));
    CHECK(opt.x_minus == doctest::Approx(-std::sqrt(2.0) / 4));
    CHECK(opt.p_plus == doctest::Approx(0.5 + std::sqrt(2.0) / 4));
    CHECK(opt.beta_opt == doctest::Approx(0.25 * pi).epsilon(1e-12));
    CHECK(opt.variance == doctest::Approx(4.0).epsilon(1e-12));
    // grid scan cannot beat the stationary point
    double best = 0.0;
    for (int i = 1; i < 1000; ++i) {
        const double x = -0.5 + i / 1000.0;
        best = std::max(best, product_variance_leading(kQubit, c, x));
    }
    CHECK(best <= opt.variance * (1.0 + 1e-9));
    CHECK_THROWS_AS(product_variance_leading(kQubit, c, 0.6),
                    std::invalid_argument);
}

TEST_CASE("product optimum: asymmetric spectrum branch selection") {
    const auto s = spectrum_stats({0.0, 1.0});
    const auto opt = optimal_product_state(s, CouplingSpec(2, 10));
    CHECK(opt.x_plus == doctest::Approx(0.75));
    CHECK(opt.x_minus == doctest::Approx(0.0));
    CHECK(opt.global_branch == Branch::Plus);
}

TEST_CASE("symmetric closed forms match the generic path") {
    for (int k : {1, 2, 3, 4}) {
        const long long n = 50;
        const auto opt = optimal_product_state(kQubit, CouplingSpec(k, n));
        CHECK(symmetric_variance_closed_form(1.0, k, n) ==
              doctest::Approx(opt.variance).epsilon(1e-10));
        CHECK(symmetric_qcrb_closed_form(1.0, k, n) ==
              doctest::Approx(opt.qcrb).epsilon(1e-10));
    }
    // k = 1 is the standard quantum limit 1/sqrt(n)
    CHECK(symmetric_qcrb_closed_form(1.0, 1, 100) == doctest::Approx(0.1));
}

TEST_CASE("exact product variance approaches leading order") {
    const double p = 0.5 + std::sqrt(2.0) / 4;  // optimal qubit excitation
    const double lead100 = symmetric_variance_closed_form(1.0, 2, 100);
    const double lead1000 = symmetric_variance_closed_form(1.0, 2, 1000);
    const double r100 = oracle::product_variance_exact(p, 100, 2, true) / lead100;
    const double r1000 =
        oracle::product_variance_exact(p, 1000, 2, true) / lead1000;
    CHECK(std::fabs(r100 - 1.0) < 0.016);
    CHECK(std::fabs(r1000 - 1.0) < 0.0016);
    CHECK(std::fabs(r1000 - 1.0) < std::fabs(r100 - 1.0));
}

TEST_CASE("short-time sensitivity") {
    const auto r = short_time_sensitivity(100, 2, 0.25 * pi, 1);
    // slope k (n/2)^k sb cb^{k-1} = 2 * 2500 * 0.5 = 2500
    CHECK(r.point.slope == doctest::Approx(2500.0));
    CHECK(r.point.noise == doctest::Approx(5.0));
    CHECK(r.beta_opt == doctest::Approx(std::asin(std::sqrt(0.5))));
    const auto r3 = short_time_sensitivity(100, 3, 0.5, 1);
    CHECK(r3.beta_opt == doctest::Approx(std::asin(std::sqrt(1.0 / 3))));
}
