// Acceptance gate: one line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "qmet/bounds.hpp"
#include "qmet/exact_moments.hpp"
#include "qmet/oracle.hpp"
#include "qmet/protocol_sim.hpp"
#include "qmet/selfcheck.hpp"

using namespace qmet;

namespace {

int failures = 0;

void report(int idx, bool pass, const char* what) {
    std::printf("criterion %02d: %s - %s\n", idx, pass ? "PASS" : "FAIL",
                what);
    if (!pass) ++failures;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

// 1: closed forms vs dense oracle, 2J in 1..50, 16x16 grid, 1e-10, < 30 s
static void criterion_1() {
    const double t0 = now_seconds();
    const auto rep = oracle_check(50, 16);
    const double elapsed = now_seconds() - t0;
    const bool pass = rep.max_rel() <= 1e-10 && elapsed < 30.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "oracle equivalence (max rel %.3e, %.1f s)", rep.max_rel(),
                  elapsed);
    report(1, pass, buf);
}

// 2: J = 200, beta = pi/4 sensitivity floor
static void criterion_2() {
    const int two_j = 400;
    const double beta = 0.25 * pi;
    const double j = 200.0;
    const double floor_v = 1.0 / (std::sqrt(2.0) * std::pow(j, 1.5));
    const auto y0 = sensitivity_exact(two_j, beta, 0.0, Axis::Y);
    bool pass = y0.informative() && rel(*y0.delta_phi, 2.5063e-4) < 1e-4 &&
                rel(*y0.delta_phi, floor_v) < 0.005;
    const double trough_x = pi / (4.0 * j * std::cos(beta));
    const auto x1 = sensitivity_exact(two_j, beta, trough_x, Axis::X);
    pass = pass && x1.informative() && rel(*x1.delta_phi, floor_v) < 0.02;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "J = 200 sensitivity floor: dphi_y(0) %.4e vs %.4e, "
                  "dphi_x(trough)/floor %.4f (need < 1.02)",
                  y0.informative() ? *y0.delta_phi : -1.0, floor_v,
                  x1.informative() ? *x1.delta_phi / floor_v : -1.0);
    report(2, pass, buf);
}

// 3: J = 2500 trough positions and values, s in -3..3
static void criterion_3() {
    const int two_j = 5000;
    const double beta = 0.25 * pi;
    const double j = 2500.0;
    const double spacing = pi / (2.0 * j * std::cos(beta));
    const double floor_v = 1.0 / (std::sqrt(2.0) * std::pow(j, 1.5));
    bool pass = true;
    double worst_off = 0.0, worst_ratio = 1.0;
    for (int s = -3; s <= 3; ++s) {
        const double target = s * spacing;
        double best_phi = target, best = 1e300;
        for (int i = -562; i <= 562; ++i) {
            const double phi = target + i * spacing / 1250.0;  // +-45% window
            const auto p = sensitivity_exact(two_j, beta, phi, Axis::Y);
            if (p.informative() && *p.delta_phi < best) {
                best = *p.delta_phi;
                best_phi = phi;
            }
        }
        const double off = std::fabs(best_phi - target) / spacing;
        worst_off = std::max(worst_off, off);
        worst_ratio = std::max(worst_ratio, best / floor_v);
        pass = pass && off <= 0.02 && rel(best, floor_v) <= 0.03;
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "J = 2500 troughs: worst position offset %.2f of spacing "
                  "(need <= 0.02), worst value/floor %.3f (need <= 1.03)",
                  worst_off, worst_ratio);
    report(3, pass, buf);
}

// 4: scaling exponents from closed forms, < 1 s
static void criterion_4() {
    const double t0 = now_seconds();
    const auto y = scaling_exponent(0.25 * pi, Axis::Y, 1e5, 1e7,
                                    OperatingRule::PhiZero);
    const auto x = scaling_exponent(0.5 * pi, Axis::X, 1e5, 1e7,
                                    OperatingRule::CompromiseInvSqrt2J);
    const double elapsed = now_seconds() - t0;
    const bool pass = std::fabs(y.xi - 1.5) <= 0.02 &&
                      std::fabs(x.xi - 1.0) <= 0.05 && elapsed < 1.0;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "scaling exponents (xi_y %.4f, xi_x %.4f)",
                  y.xi, x.xi);
    report(4, pass, buf);
}

// 5: short-time slopes vs the oracle derivative
static void criterion_5() {
    const double beta = 0.7;
    const double sb = std::sin(beta), cb = std::cos(beta);
    bool pass = true;
    for (int n = 2; n <= 40; ++n) {
        const double j = 0.5 * n;
        const auto dd =
            oracle::evolved_moment_derivatives(CoherentPreparation(n, beta),
                                               0.0, 2);
        pass = pass && rel(dd.djy, j * (n - 1.0) * sb * cb) <= 1e-9;
    }
    for (int k : {1, 3}) {
        auto dev = [&](int n) {
            const auto dd = oracle::evolved_moment_derivatives(
                CoherentPreparation(n, beta), 0.0, k);
            return rel(dd.djy,
                       k * std::pow(0.5 * n, k) * sb * std::pow(cb, k - 1));
        };
        const double d8 = dev(8), d16 = dev(16);
        pass = pass && d16 <= 2.0 * k / 16.0 && d16 <= d8 + 1e-12;
    }
    report(5, pass, "short-time slope k (n/2)^k sin b cos^{k-1} b");
}

// 6: extremes equal exhaustive enumeration for qubits, n <= 16, k <= 4
static void criterion_6() {
    const auto qubit = spectrum_stats({-0.5, 0.5});
    bool pass = true;
    for (int k = 1; k <= 4; ++k) {
        for (long long n = k; n <= 16; ++n) {
            for (bool self : {true, false}) {
                const CouplingSpec c(k, n, self);
                const auto a = extreme_eigenvalues(qubit, c);
                const auto b = oracle::string_extremes(qubit, c);
                pass = pass && a.lambda_cap_max == b.value_max &&
                       a.lambda_cap_min == b.value_min;
            }
        }
    }
    // Case 4, odd n: Lambda_min = (||h||/2)^k
    for (int k : {2, 4}) {
        for (long long n : {5LL, 9LL, 15LL}) {
            const auto r = extreme_eigenvalues(qubit, CouplingSpec(k, n));
            pass = pass && r.lambda_cap_min == std::pow(0.5, k);
        }
    }
    report(6, pass, "extreme eigenvalues vs exhaustive enumeration");
}

// 7: exact product variance and its leading-order limit
static void criterion_7() {
    const double p = std::cos(0.125 * pi) * std::cos(0.125 * pi);
    bool pass = rel(oracle::product_variance_exact(p, 4, 2, true), 2.625) < 1e-12;
    pass = pass &&
           rel(oracle::product_variance_exact(p, 100, 2, true), 61565.625) <
               1e-10;
    const double r100 = oracle::product_variance_exact(p, 100, 2, true) /
                        symmetric_variance_closed_form(1.0, 2, 100);
    const double r1000 = oracle::product_variance_exact(p, 1000, 2, true) /
                         symmetric_variance_closed_form(1.0, 2, 1000);
    pass = pass && std::fabs(r100 - 1.0) <= 0.016 &&
           std::fabs(r1000 - 1.0) <= 0.0016;
    report(7, pass, "product-state variance: exact vs leading order");
}

// 8: Monte Carlo estimator RMS at the closed-form sensitivity, < 60 s
static void criterion_8() {
    const double t0 = now_seconds();
    sim::TrialConfig cfg;
    cfg.two_j = 400;
    cfg.beta = 0.25 * pi;
    cfg.phi_true = 1e-4;
    cfg.axis = Axis::Y;
    cfg.nu = 10000;
    cfg.seed = 2026;
    const double rms = sim::empirical_rms_error(cfg, 100);
    const double expect = 2.5063e-4 / std::sqrt(double(cfg.nu));
    const double elapsed = now_seconds() - t0;
    const bool pass = rel(rms, expect) <= 0.10 && elapsed < 60.0;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "estimator RMS %.4e vs %.4e (%.1f s)", rms, expect, elapsed);
    report(8, pass, buf);
}

// 9: cat-state baseline at the entangled bound
static void criterion_9() {
    const double rms = sim::cat_rms_error(4.0, 0.1, 1.0, 10000, 100, 2026);
    const bool pass = rel(rms, 2.5e-3) <= 0.10;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "cat baseline RMS %.4e vs 2.5e-3", rms);
    report(9, pass, buf);
}

// 10: adaptive feedback over 100 seeds
static void criterion_10() {
    sim::FeedbackConfig cfg;
    cfg.f = 8.0;
    cfg.nu = 100;
    cfg.bits = 10;
    cfg.phi_true = 0.005;
    int hits = 0;
    double total_n = 0.0;
    double last_share = 0.0;
    for (int seed = 1; seed <= 100; ++seed) {
        cfg.seed = seed;
        const auto rec = sim::adaptive_feedback(cfg);
        if (rec.final_error <= rec.target_precision) ++hits;
        total_n = rec.total_constituents;
        last_share = cfg.nu * 2.0 * rec.steps.back().j_l / total_n;
    }
    const double closed = sim::feedback_resources_closed_form(8.0, 100, 10);
    double slack = 0.0;
    for (int l = 1; l <= 10; ++l) {
        const double raw = sim::feedback_spin_raw(8.0, 100, l);
        const double j_l = std::max(0.5, sim::round_half_integer(raw));
        slack += 100.0 * 2.0 * std::fabs(j_l - raw);
    }
    const bool n_ok = std::fabs(total_n - closed) <= slack + 1e-6;
    const bool share_ok = last_share > 0.5;
    const bool pass = hits >= 95 && n_ok && share_ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "feedback: %d/100 on target, N %.0f vs %.0f (slack %.0f), "
                  "last-step share %.3f",
                  hits, total_n, closed, slack, last_share);
    report(10, pass, buf);
}

// 11: dephasing optimum and Monte Carlo variance
static void criterion_11() {
    const int two_j = 20000;
    const double beta = 0.25 * pi;
    const double tau2 = 1.0, total_time = 100.0;
    double best_t = 0, best = 1e300;
    const double base = 1.0 / (std::sqrt(2.0) * std::pow(1e4, 1.5));
    for (double t = 0.05; t <= 2.0 + 1e-9; t += 0.05) {
        const double dg = std::exp(t / tau2) * base / std::sqrt(t * total_time);
        if (dg < best) {
            best = dg;
            best_t = t;
        }
    }
    const double closed =
        std::sqrt(std::exp(1.0) / (total_time * tau2)) / std::pow(1e4, 1.5);
    bool pass = std::fabs(best_t - 0.5 * tau2) <= 0.05 + 1e-9 &&
                rel(best, closed) <= 0.01;

    sim::TrialConfig cfg;
    cfg.two_j = 400;
    cfg.beta = beta;
    cfg.nu = 40000;
    cfg.seed = 31;
    cfg.gamma_t_dephasing = 0.4;
    const auto out = sim::run_estimation(cfg);
    const double var0 = moments_exact(cfg.two_j, beta, 0.0).var_y();
    const double decay = std::exp(-0.8);
    const double expected = decay * var0 + 100.0 * (1.0 - decay);
    pass = pass && rel(out.sample_variance, expected) <=
                       5.0 * std::sqrt(2.0 / double(cfg.nu));
    report(11, pass, "dephasing: optimal t = tau2/2 and adjoint-map variance");
}

// 12: binomial identity residuals, 2J <= 60, 100 random (a, b)
static void criterion_12() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    bool pass = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int two_j = 1 + int(rng() % 60);
        const auto r = oracle::identity_residuals(two_j, u(rng), u(rng));
        pass = pass && r.first <= 1e-10 && r.second <= 1e-10 &&
               r.third <= 1e-10;
    }
    report(12, pass, "binomial identity residuals <= 1e-10");
}

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
