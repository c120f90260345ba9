// Monte Carlo simulation of the estimation protocols: sampled equatorial
// measurements with the scaled-mean estimator, the entangled cat-state
// baseline, the adaptive bit-by-bit feedback loop, and moment-level
// dephasing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "qmet/exact_moments.hpp"
#include "qmet/moments.hpp"
#include "qmet/oracle.hpp"
#include "qmet/spin_model.hpp"

namespace qmet::sim {

// Counter-based substreams: every (seed, index) pair deterministically
// derives an independent generator, so parallel trial order cannot change
// results.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

enum class SamplingMode { Exact, Gaussian, Auto };

struct TrialConfig {
    int two_j = 400;
    double beta = 0.25 * pi;
    double phi_true = 0.0;
    double phi_operating = 0.0;
    Axis axis = Axis::Y;
    long long nu = 1;
    std::uint64_t seed = 0;
    double gamma_t_dephasing = 0.0;  // Gamma * t
    SamplingMode sampling_mode = SamplingMode::Auto;

    void validate() const {
        if (nu < 1) throw std::invalid_argument("TrialConfig: nu >= 1");
        if (gamma_t_dephasing < 0.0)
            throw std::invalid_argument("TrialConfig: Gamma t >= 0");
    }
};

struct TrialOutcome {
    double phi_est = 0.0;
    double empirical_delta_phi = 0.0;  // standard error of phi_est
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    double slope_used = 0.0;
    bool fringe_warning = false;  // phi_true strayed from the central fringe
};

namespace detail {

// Dephased sampling moments via the adjoint map: mean scales by e^{-Gt},
// variance relaxes toward the J/2 coherent-state floor.
inline void apply_dephasing(double j, double gamma_t, double& mean,
                            double& var) {
    if (gamma_t == 0.0) return;
    const double decay = std::exp(-gamma_t);
    mean *= decay;
    var = decay * decay * var + 0.5 * j * (1.0 - decay * decay);
}

inline double round_to_valid_m(double x, double j) {
    const long long idx = std::llround(x + j);
    const long long clamped =
        std::max<long long>(0, std::min<long long>(idx, std::llround(2 * j)));
    return -j + double(clamped);
}

}  // namespace detail

// One measurement outcome m of J_axis on the evolved (k = 2) probe.  Exact
// mode samples the Wigner-rotated distribution; gaussian mode samples a
// normal with the closed-form moments, rounded to the nearest valid m.
class MeasurementSampler {
  public:
    MeasurementSampler(int two_j, double beta, double phi, Axis axis,
                       SamplingMode mode, double gamma_t = 0.0)
        : two_j_(two_j), j_(0.5 * two_j) {
        const bool exact_ok =
            two_j <= oracle::kRotationBudgetTwoJ && gamma_t == 0.0;
        if (mode == SamplingMode::Exact && !exact_ok)
            throw std::invalid_argument(
                "MeasurementSampler: exact mode unavailable (budget or "
                "dephasing)");
        exact_ = (mode == SamplingMode::Exact) ||
                 (mode == SamplingMode::Auto && exact_ok);
        if (exact_) {
            const auto st =
                oracle::evolve(CoherentPreparation(two_j, beta), phi, 2);
            const auto p = oracle::measurement_distribution(
                st, axis == Axis::X ? oracle::MeasureAxis::X
                                    : oracle::MeasureAxis::Y);
            cdf_.resize(p.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                acc += p[i];
                cdf_[i] = acc;
            }
            cdf_.back() = 1.0;
        } else {
            const MomentSet m = moments_exact(two_j, beta, phi);
            mean_ = m.mean(axis);
            var_ = m.var(axis);
            detail::apply_dephasing(j_, gamma_t, mean_, var_);
            // clamping bias is negligible >= 5 sigma inside the boundary
            boundary_warning_ =
                (j_ - std::fabs(mean_)) < 5.0 * std::sqrt(var_);
        }
    }

    double sample(std::mt19937_64& rng) const {
        if (exact_) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double x = u(rng);
            const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), x);
            const auto i = std::distance(cdf_.begin(), it);
            return -j_ + double(i);
        }
        std::normal_distribution<double> g(mean_, std::sqrt(var_));
        return detail::round_to_valid_m(g(rng), j_);
    }

    bool exact_mode() const { return exact_; }
    bool boundary_warning() const { return boundary_warning_; }

  private:
    int two_j_;
    double j_;
    bool exact_ = true;
    bool boundary_warning_ = false;
    std::vector<double> cdf_;
    double mean_ = 0.0, var_ = 0.0;
};

// Scaled-mean estimator: phi_est = phi_op + (mean(m) - <J_axis>(phi_op)) /
// slope(phi_op), with slope and moments dephased when Gamma t > 0.
inline TrialOutcome run_estimation(const TrialConfig& cfg) {
    cfg.validate();
    const double j = 0.5 * cfg.two_j;
    const double gt = cfg.gamma_t_dephasing;

    const SensitivityPoint sp =
        sensitivity_exact(cfg.two_j, cfg.beta, cfg.phi_operating, cfg.axis);
    if (!sp.informative())
        throw std::domain_error("run_estimation: zero slope at operating point");
    const MomentSet m_op =
        moments_exact(cfg.two_j, cfg.beta, cfg.phi_operating);
    double mean_op = m_op.mean(cfg.axis);
    double var_op = m_op.var(cfg.axis);
    detail::apply_dephasing(j, gt, mean_op, var_op);
    const double slope = sp.slope * std::exp(-gt);

    SamplingMode mode = cfg.sampling_mode;
    if (gt > 0.0 && mode == SamplingMode::Auto) mode = SamplingMode::Gaussian;
    const MeasurementSampler sampler(cfg.two_j, cfg.beta, cfg.phi_true,
                                     cfg.axis, mode, gt);

    auto rng = substream(cfg.seed, 0);
    double sum = 0.0, sum2 = 0.0;
    for (long long i = 0; i < cfg.nu; ++i) {
        const double m = sampler.sample(rng);
        sum += m;
        sum2 += m * m;
    }
    const double mean = sum / cfg.nu;
    const double var =
        std::max(0.0, sum2 / cfg.nu - mean * mean) * cfg.nu / std::max<long long>(1, cfg.nu - 1);

    TrialOutcome out;
    out.sample_mean = mean;
    out.sample_variance = var;
    out.slope_used = slope;
    out.phi_est = cfg.phi_operating + (mean - mean_op) / slope;
    out.empirical_delta_phi =
        std::sqrt(var / cfg.nu) / std::fabs(slope);
    const double cb = snapped_cos(cfg.beta);
    if (cb != 0.0) {
        const double half_fringe = pi / (4.0 * j * std::fabs(cb));
        out.fringe_warning =
            std::fabs(cfg.phi_true - cfg.phi_operating) > half_fringe;
    }
    return out;
}

// RMS error of phi_est over repeated batches, each with an independent
// substream.
inline double empirical_rms_error(const TrialConfig& cfg, int batches) {
    double acc = 0.0;
    for (int b = 0; b < batches; ++b) {
        TrialConfig c = cfg;
        c.seed = splitmix64(cfg.seed) + std::uint64_t(b) + 1;
        const TrialOutcome out = run_estimation(c);
        const double e = out.phi_est - cfg.phi_true;
        acc += e * e;
    }
    return std::sqrt(acc / batches);
}

// Optimal entangled baseline: +-1 outcomes with p_+ = cos^2(||H|| gamma t/2),
// estimator from the arccos of the outcome mean.
struct CatOutcome {
    double gamma_est = 0.0;
    double empirical_delta_gamma = 0.0;
    bool validity_warning = false;  // nu not >> tan^2(||H|| gamma t)
};

inline CatOutcome cat_protocol(double seminorm_h, double gamma, double t,
                               long long nu, std::mt19937_64& rng) {
    const double x = seminorm_h * gamma * t;
    const double p_plus = std::cos(0.5 * x) * std::cos(0.5 * x);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sum = 0.0;
    for (long long i = 0; i < nu; ++i) sum += (u(rng) < p_plus) ? 1.0 : -1.0;
    double mean = sum / nu;
    mean = std::clamp(mean, -1.0, 1.0);

    CatOutcome out;
    out.gamma_est = std::acos(mean) / (seminorm_h * t);
    const double var = std::max(0.0, 1.0 - mean * mean);
    const double sin_term = std::fabs(std::sin(std::acos(mean)));
    if (sin_term > 1e-12)
        out.empirical_delta_gamma = std::sqrt(var / nu) /
                                    (seminorm_h * t * sin_term);
    const double tan2 = std::tan(x) * std::tan(x);
    out.validity_warning = tan2 * 10.0 > double(nu);
    return out;
}

// RMS of gamma_est - gamma over batches.
inline double cat_rms_error(double seminorm_h, double gamma, double t,
                            long long nu, int batches, std::uint64_t seed) {
    double acc = 0.0;
    for (int b = 0; b < batches; ++b) {
        auto rng = substream(seed, std::uint64_t(b));
        const CatOutcome out = cat_protocol(seminorm_h, gamma, t, nu, rng);
        const double e = out.gamma_est - gamma;
        acc += e * e;
    }
    return std::sqrt(acc / batches);
}

// Adaptive bit-by-bit feedback: at step l the probe size is chosen so the
// step precision resolves the l-th bit of phi/2pi with safety factor f.
struct FeedbackConfig {
    double f = 8.0;  // safety factor, typically 3-10
    long long nu = 100;
    int bits = 10;  // L
    double phi_true = 0.0;
    double beta = 0.25 * pi;
    std::uint64_t seed = 0;

    void validate() const {
        if (f < 2.0) throw std::invalid_argument("FeedbackConfig: f >= 2");
        if (bits < 1) throw std::invalid_argument("FeedbackConfig: L >= 1");
        if (nu < 1) throw std::invalid_argument("FeedbackConfig: nu >= 1");
    }
};

struct FeedbackStep {
    int l = 0;
    double j_l = 0.5;       // chosen half-integer spin
    double delta_phi_l = 0; // theoretical step precision
    double estimate = 0.0;  // cumulative phi estimate after the step
    double residual = 0.0;  // true phi - estimate entering the step
    bool clamped = false;   // raw J_l fell below 1/2
    bool zero_slope = false;  // J = 1/2 carries no k = 2 signal
    bool fringe_flag = false;  // residual exceeded half the fringe width
};

struct FeedbackRecord {
    std::vector<FeedbackStep> steps;
    double phi_est = 0.0;
    double final_error = 0.0;
    double total_constituents = 0.0;  // N = nu * sum 2 J_l
    double target_precision = 0.0;    // 2 pi 2^{-L}
};

inline double feedback_spin_raw(double f, long long nu, int l) {
    return 0.5 * std::pow(double(nu), -1.0 / 3.0) *
           std::pow(f * std::pow(2.0, l) / pi, 2.0 / 3.0);
}

inline double round_half_integer(double x) {
    return 0.5 * std::llround(2.0 * x);
}

// Closed-form resource count N = (2 nu f / pi)^{2/3} (2^{2L/3}-1)/(2^{2/3}-1).
inline double feedback_resources_closed_form(double f, long long nu, int bits) {
    return std::pow(2.0 * nu * f / pi, 2.0 / 3.0) *
           (std::pow(2.0, 2.0 * bits / 3.0) - 1.0) /
           (std::pow(2.0, 2.0 / 3.0) - 1.0);
}

inline FeedbackRecord adaptive_feedback(const FeedbackConfig& cfg) {
    cfg.validate();
    FeedbackRecord rec;
    rec.target_precision = 2.0 * pi * std::pow(2.0, -cfg.bits);
    double phi_est = 0.0;
    double total_two_j = 0.0;

    for (int l = 1; l <= cfg.bits; ++l) {
        FeedbackStep step;
        step.l = l;
        const double raw = feedback_spin_raw(cfg.f, cfg.nu, l);
        double j_l = round_half_integer(raw);
        if (j_l < 0.5) {
            j_l = 0.5;
            step.clamped = true;
        }
        step.j_l = j_l;
        const int two_j = int(std::llround(2.0 * j_l));
        step.residual = cfg.phi_true - phi_est;
        step.delta_phi_l = 1.0 / (std::sqrt(double(cfg.nu)) * std::sqrt(2.0) *
                                  std::pow(j_l, 1.5));
        total_two_j += 2.0 * j_l;

        const double cb = snapped_cos(cfg.beta);
        const double half_fringe =
            cb != 0.0 ? pi / (4.0 * j_l * std::fabs(cb))
                      : std::numeric_limits<double>::infinity();
        step.fringe_flag = std::fabs(step.residual) > half_fringe;

        if (two_j < 2) {
            // k = 2 phases are m-independent for a single qubit: no signal
            step.zero_slope = true;
            step.estimate = phi_est;
            rec.steps.push_back(step);
            continue;
        }

        TrialConfig trial;
        trial.two_j = two_j;
        trial.beta = cfg.beta;
        trial.phi_true = step.residual;
        trial.phi_operating = 0.0;
        trial.axis = Axis::Y;
        trial.nu = cfg.nu;
        trial.seed = splitmix64(cfg.seed) ^ std::uint64_t(l);
        trial.sampling_mode = SamplingMode::Auto;
        const TrialOutcome out = run_estimation(trial);
        phi_est += out.phi_est;
        step.estimate = phi_est;
        rec.steps.push_back(step);
    }

    rec.phi_est = phi_est;
    rec.final_error = std::fabs(cfg.phi_true - phi_est);
    rec.total_constituents = double(cfg.nu) * total_two_j;
    return rec;
}

}  // namespace qmet::sim
