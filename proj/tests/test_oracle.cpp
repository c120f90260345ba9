#include <doctest.h>

#include <cmath>
#include <random>

#include "qmet/exact_moments.hpp"
#include "qmet/oracle.hpp"
#include "qmet/selfcheck.hpp"

using namespace qmet;

TEST_CASE("ladder coefficients") {
    const oracle::LadderCoefficients lad(2);  // J = 1
    CHECK(lad.gamma_plus[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(lad.gamma_plus[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(lad.gamma_plus[2] == doctest::Approx(0.0));
    CHECK(lad.gamma_minus[0] == doctest::Approx(0.0));
}

TEST_CASE("k = 1 evolution is a rotation about z") {
    const int two_j = 31;
    const double beta = 0.9, phi = 0.37;
    const CoherentPreparation prep(two_j, beta);
    const MomentSet m = oracle::collective_moments(oracle::evolve(prep, phi, 1));
    const double j = 0.5 * two_j;
    CHECK(m.jx == doctest::Approx(j * std::sin(beta) * std::cos(phi))
                      .epsilon(1e-12));
    CHECK(m.jy == doctest::Approx(j * std::sin(beta) * std::sin(phi))
                      .epsilon(1e-12));
    CHECK(m.jz == doctest::Approx(j * std::cos(beta)).epsilon(1e-12));
}

TEST_CASE("analytic derivative equals finite difference") {
    const CoherentPreparation prep(24, 0.7);
    for (int k : {1, 2, 3}) {
        const auto dd = oracle::evolved_moment_derivatives(prep, 0.11, k);
        const double fd =
            oracle::finite_difference_slope(prep, 0.11, k, Axis::Y);
        CHECK(dd.djy == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("wigner d-matrix: orthogonality and small-J values") {
    const double beta = 1.1;
    // 2J = 1 closed form
    const auto d1 = oracle::wigner_d_matrix(1, beta);
    CHECK(d1[1][1] == doctest::Approx(std::cos(0.5 * beta)).epsilon(1e-12));
    CHECK(d1[0][1] == doctest::Approx(std::sin(0.5 * beta)).epsilon(1e-12));
    CHECK(d1[1][0] == doctest::Approx(-std::sin(0.5 * beta)).epsilon(1e-12));
    CHECK(d1[0][0] == doctest::Approx(std::cos(0.5 * beta)).epsilon(1e-12));
    // columns orthonormal at 2J = 40
    const int two_j = 40;
    const auto d = oracle::wigner_d_matrix(two_j, beta);
    for (int a = 0; a <= two_j; a += 7) {
        for (int b = 0; b <= two_j; b += 7) {
            double dot = 0.0;
            for (int i = 0; i <= two_j; ++i) dot += d[i][a] * d[i][b];
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(2e-5));
        }
    }
}

TEST_CASE("measurement distribution reproduces the moments") {
    const int two_j = 64;
    const double beta = 0.8, phi = 0.02;
    const CoherentPreparation prep(two_j, beta);
    const auto st = oracle::evolve(prep, phi, 2);
    const MomentSet m = oracle::collective_moments(st);
    const double j = 0.5 * two_j;
    for (auto [axis, mean, second] :
         {std::tuple{oracle::MeasureAxis::X, m.jx, m.jx2},
          std::tuple{oracle::MeasureAxis::Y, m.jy, m.jy2},
          std::tuple{oracle::MeasureAxis::Z, m.jz, m.jz2}}) {
        const auto p = oracle::measurement_distribution(st, axis);
        double tot = 0, mu = 0, mu2 = 0;
        for (int i = 0; i <= two_j; ++i) {
            const double mv = -j + i;
            tot += p[i];
            mu += mv * p[i];
            mu2 += mv * mv * p[i];
        }
        CHECK(tot == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(mu == doctest::Approx(mean).epsilon(1e-8));
        CHECK(mu2 == doctest::Approx(second).epsilon(1e-8));
    }
}

TEST_CASE("measurement distribution stays stable at the rotation budget") {
    const int two_j = oracle::kRotationBudgetTwoJ;
    const CoherentPreparation prep(two_j, 0.25 * pi);
    const auto st = oracle::evolve(prep, 1e-4, 2);
    const auto p = oracle::measurement_distribution(st, oracle::MeasureAxis::Y);
    double tot = 0, mu = 0;
    const double j = 0.5 * two_j;
    for (int i = 0; i <= two_j; ++i) {
        CHECK(p[i] >= 0.0);
        tot += p[i];
        mu += (-j + i) * p[i];
    }
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mu == doctest::Approx(oracle::collective_moments(st).jy)
                    .epsilon(1e-6));
}

TEST_CASE("string extremes: qubit spot checks") {
    const auto qubit = spectrum_stats({-0.5, 0.5});
    const auto r = oracle::string_extremes(qubit, CouplingSpec(2, 5));
    CHECK(r.value_max == doctest::Approx(6.25));   // (5/2)^2
    CHECK(r.value_min == doctest::Approx(0.25));   // (1/2)^2, odd n
    const auto ns = oracle::string_extremes(qubit, CouplingSpec(2, 4, false));
    // 2! e_2 extremes for {+-1/2}^4: max 2*C(4,2)/4... enumerated directly
    double lo = 1e300, hi = -1e300;
    for (int a = 0; a <= 4; ++a) {
        // a up-spins: e_2 = C(a,2)/4 - a(4-a)/4 + C(4-a,2)/4
        const double e2 =
            (a * (a - 1) / 2.0 - a * (4.0 - a) + (4 - a) * (3 - a) / 2.0) / 4.0;
        lo = std::min(lo, 2.0 * e2);
        hi = std::max(hi, 2.0 * e2);
    }
    CHECK(ns.value_max == doctest::Approx(hi));
    CHECK(ns.value_min == doctest::Approx(lo));
}

TEST_CASE("exact product variance: qubit binomial oracle") {
    // beta = pi/4 coherent qubits, k = 2
    const double p = std::cos(0.125 * pi) * std::cos(0.125 * pi);
    CHECK(oracle::product_variance_exact(p, 4, 2, true) ==
          doctest::Approx(2.625).epsilon(1e-12));
    CHECK(oracle::product_variance_exact(p, 100, 2, true) ==
          doctest::Approx(61565.625).epsilon(1e-10));
    CHECK_THROWS_AS(oracle::product_variance_exact(1.5, 4, 2, true),
                    std::invalid_argument);
}

TEST_CASE("binomial identity residuals") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int two_j = 1 + int(rng() % 60);
        const auto r = oracle::identity_residuals(two_j, u(rng), u(rng));
        CHECK(r.first <= 1e-10);
        CHECK(r.second <= 1e-10);
        CHECK(r.third <= 1e-10);
    }
    CHECK_THROWS_AS(oracle::identity_residuals(10, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("closed forms match the dense oracle on a quick grid") {
    const auto rep = oracle_check(12, 6);
    CHECK(rep.max_rel() <= 1e-10);
}
