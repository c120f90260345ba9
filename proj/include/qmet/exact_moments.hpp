// Closed-form moments and sensitivities for evolution under gamma * Jz^2,
// the uniform-fringe and Gaussian-envelope approximations, the equatorial
// branch, dephasing, scaling exponents, and the general-k coherent-state
// model.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qmet/moments.hpp"
#include "qmet/spin_model.hpp"

namespace qmet {

// Modulus/phase of (cos(phi) + i sin(phi) cos(beta)) and the corresponding
// double-angle factor, with analytic phi-derivatives.
struct PolarFactors {
    double r = 1.0, theta = 0.0;
    double big_r = 1.0, big_theta = 0.0;
    double dr = 0.0, dtheta = 0.0;
    double dbig_r = 0.0, dbig_theta = 0.0;
};

inline PolarFactors polar_factors(double beta, double phi) {
    PolarFactors f;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    const double s1 = std::sin(phi), c1 = std::cos(phi);
    const double s2 = std::sin(2 * phi), c2 = std::cos(2 * phi);
    f.r = std::sqrt(std::max(0.0, 1.0 - s1 * s1 * sb * sb));
    f.theta = std::atan2(s1 * cb, c1);
    f.big_r = std::sqrt(std::max(0.0, 1.0 - s2 * s2 * sb * sb));
    f.big_theta = std::atan2(s2 * cb, c2);
    if (f.r > 0.0) {
        f.dr = -sb * sb * s1 * c1 / f.r;
        f.dtheta = cb / (f.r * f.r);
    }
    if (f.big_r > 0.0) {
        f.dbig_r = -2.0 * sb * sb * s2 * c2 / f.big_r;
        f.dbig_theta = 2.0 * cb / (f.big_r * f.big_r);
    }
    return f;
}

namespace detail {

// n * theta reduced mod 2*pi with the product error compensated via fma, so
// the phase stays accurate for n up to ~2e7.
inline double phase_mod_2pi(double n, double theta) {
    const double p = n * theta;
    const double err = std::fma(n, theta, -p);
    return std::remainder(p, 2.0 * pi) + err;
}

// magnitude^n * e^{i n theta} for large n, in log-polar form.
inline complexd polar_power(double magnitude, double theta, double n) {
    if (magnitude <= 0.0) return (n == 0.0) ? complexd{1.0, 0.0} : complexd{0.0, 0.0};
    const double logmag = n * std::log(magnitude);
    const double ph = phase_mod_2pi(n, theta);
    return std::exp(logmag) * complexd{std::cos(ph), std::sin(ph)};
}

struct RaisingMoments {
    complexd jplus;        // <J+>
    complexd jplus_sq;     // <J+^2>
    complexd jz_jplus;     // <Jz J+ + J+ Jz>/2
    double jpjm_sym = 0.0; // <J+J- + J-J+>/2
};

inline MomentSet assemble(int two_j, double beta, const RaisingMoments& rm,
                          Provenance prov) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    MomentSet m;
    m.provenance = prov;
    m.jx = rm.jplus.real();
    m.jy = rm.jplus.imag();
    m.jz = j * cb;
    m.jz2 = j * j * cb * cb + 0.5 * j * sb * sb;
    m.jx2 = 0.5 * rm.jpjm_sym + 0.5 * rm.jplus_sq.real();
    m.jy2 = 0.5 * rm.jpjm_sym - 0.5 * rm.jplus_sq.real();
    m.jxjy_sym = 0.5 * rm.jplus_sq.imag();
    m.jzjx_sym = rm.jz_jplus.real();
    m.jzjy_sym = rm.jz_jplus.imag();
    return m;
}

inline RaisingMoments raising_moments_exact(int two_j, double beta,
                                            double phi) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    const PolarFactors f = polar_factors(beta, phi);
    RaisingMoments rm;
    rm.jplus = j * sb * polar_power(f.r, f.theta, two_j - 1);
    rm.jplus_sq = 0.5 * j * (two_j - 1) * sb * sb *
                  polar_power(f.big_r, f.big_theta, two_j - 2);
    rm.jpjm_sym = j + 0.5 * j * (two_j - 1) * sb * sb;
    rm.jz_jplus = 0.5 * j * (two_j - 1) * sb *
                  complexd{std::cos(phi) * cb, std::sin(phi)} *
                  polar_power(f.r, f.theta, two_j - 2);
    return rm;
}

// Variance of J_x or J_y at cos(beta) = 0.  The generic assembly subtracts
// J^2-sized terms that agree to O(J) here, so it is rewritten with
// expm1/log1p (using J/2 + J(2J-1)/2 - J^2 = 0 exactly) to stay accurate for
// J up to ~1e7.
inline double equator_variance(int two_j, double phi, Axis axis) {
    const double j = 0.5 * two_j;
    const double q = 0.5 * j * (two_j - 1.0);
    const double s1 = std::sin(phi), s2 = std::sin(2.0 * phi);
    const double au = (two_j - 1.0) * std::log1p(-s1 * s1);        // ln r^{2(2J-1)}
    const double bv = 0.5 * (two_j - 2.0) * std::log1p(-s2 * s2);  // ln R^{2J-2}
    // Theta is exactly 0 or pi, so cos((2J-2) Theta) = +-1 and
    // cos^2((2J-1) theta) = 1.
    const bool theta_pi = std::cos(2.0 * phi) < 0.0;
    const double c_psi = (theta_pi && ((two_j - 2) & 1)) ? -1.0 : 1.0;
    if (axis == Axis::Y)
        return c_psi > 0.0 ? 0.5 * j - 0.5 * q * std::expm1(bv)
                           : 0.5 * j + 0.5 * q * (1.0 + std::exp(bv));
    if (c_psi > 0.0)
        return 0.5 * q * std::expm1(bv) - j * j * std::expm1(au);
    return 0.5 * j + 0.5 * q * (1.0 - std::exp(bv)) - j * j * std::exp(au);
}

}  // namespace detail

// Exact moments of the state e^{-i phi Jz^2} |J, beta>.
inline MomentSet moments_exact(int two_j, double beta, double phi) {
    if (two_j < 1) throw std::invalid_argument("moments_exact: 2J >= 1");
    return detail::assemble(two_j, beta,
                            detail::raising_moments_exact(two_j, beta, phi),
                            Provenance::Exact);
}

// Exact sensitivity delta_phi = Delta J_axis / |d<J_axis>/dphi| with the
// derivative computed analytically from the polar-factor chain rule.
inline SensitivityPoint sensitivity_exact(int two_j, double beta, double phi,
                                          Axis axis) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta);
    const double cb = snapped_cos(beta);
    const PolarFactors f = polar_factors(beta, phi);

    // d/dphi of A r^M trig(M theta), M = 2J-1
    const double big_m = two_j - 1.0;
    double slope = 0.0;
    if (f.r > 0.0) {
        const double mag = std::exp(big_m * std::log(f.r));
        const double ph = detail::phase_mod_2pi(big_m, f.theta);
        const double c = std::cos(ph), s = std::sin(ph);
        const double amp = j * sb * big_m * mag;
        if (axis == Axis::X)
            slope = amp * ((f.dr / f.r) * c - f.dtheta * s);
        else if (cb == 0.0)
            slope = 0.0;  // <Jy> vanishes identically at the equator
        else
            slope = amp * ((f.dr / f.r) * s + f.dtheta * c);
    }

    const double var = cb == 0.0
                           ? detail::equator_variance(two_j, phi, axis)
                           : moments_exact(two_j, beta, phi).var(axis);

    SensitivityPoint p;
    p.phi = phi;
    p.axis = axis;
    p.slope = slope;
    p.noise = std::sqrt(std::max(0.0, var));
    p.model = SensitivityModel::Exact;
    if (std::fabs(slope) > 1e-300) p.delta_phi = p.noise / std::fabs(slope);
    return p;
}

// Uniform-fringe approximation: the evolved state is treated as a coherent
// state at angle beta precessing at rate 2 J cos(beta).  Valid while
// sqrt(J) |phi sin(beta)| is somewhat below 1.
struct FringeResult {
    MomentSet moments;
    std::optional<double> delta_phi_x;
    std::optional<double> delta_phi_y;
    bool valid = true;  // sqrt(J) |phi| |sin b| < 1
};

inline FringeResult fringe_model(int two_j, double beta, double phi) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    const double a = 2.0 * j * phi * cb;
    const double ca = std::cos(a), sa = std::sin(a);
    FringeResult res;
    res.valid = std::sqrt(j) * std::fabs(phi) * std::fabs(sb) < 1.0;

    MomentSet& m = res.moments;
    m.provenance = Provenance::Fringe;
    const double q = 0.5 * j * (two_j - 1);  // J(2J-1)/2
    m.jx = j * sb * ca;
    m.jy = j * sb * sa;
    m.jz = j * cb;
    m.jx2 = 0.5 * j + q * sb * sb * ca * ca;
    m.jy2 = 0.5 * j + q * sb * sb * sa * sa;
    m.jz2 = j * j * cb * cb + 0.5 * j * sb * sb;
    m.jxjy_sym = q * sb * sb * sa * ca;
    m.jzjx_sym = q * sb * cb * ca;
    m.jzjy_sym = q * sb * cb * sa;

    const double s2b = 2.0 * sb * cb;
    const double j3 = 2.0 * j * j * j;
    const double denom_x = s2b * s2b * sa * sa;
    const double denom_y = s2b * s2b * ca * ca;
    if (denom_x > 0.0)
        res.delta_phi_x =
            std::sqrt((1.0 - sb * sb * ca * ca) / (j3 * denom_x));
    if (denom_y > 0.0)
        res.delta_phi_y =
            std::sqrt((1.0 - sb * sb * sa * sa) / (j3 * denom_y));
    return res;
}

// Gaussian-envelope approximation: the exact power factors are replaced by
//   e^{2iJ phi cb} e^{-J phi^2 sb^2}   and   e^{4iJ phi cb} e^{-4J phi^2 sb^2},
// with phi measured from the nearest multiple of pi.
inline MomentSet gaussian_envelope_moments(int two_j, double beta,
                                           double phi) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    const double q = std::round(phi / pi);
    const double ph = phi - q * pi;
    const double g = j * ph * ph * sb * sb;
    const complexd f1 =
        std::exp(-g) * complexd{std::cos(2.0 * j * ph * cb),
                                std::sin(2.0 * j * ph * cb)};
    const complexd f2 =
        std::exp(-4.0 * g) * complexd{std::cos(4.0 * j * ph * cb),
                                      std::sin(4.0 * j * ph * cb)};
    detail::RaisingMoments rm;
    rm.jplus = j * sb * f1;
    rm.jplus_sq = 0.5 * j * (two_j - 1) * sb * sb * f2;
    rm.jpjm_sym = j + 0.5 * j * (two_j - 1) * sb * sb;
    rm.jz_jplus = 0.5 * j * (two_j - 1) * sb *
                  complexd{std::cos(phi) * cb, std::sin(phi)} * f1;
    return detail::assemble(two_j, beta, rm, Provenance::Gaussian);
}

// Sensitivity in the Gaussian-envelope model, from the analytic derivative of
// <J_axis> = J sb e^{-g phi^2} trig(c phi), c = 2J cb, g = J sb^2.
inline SensitivityPoint sensitivity_gaussian(int two_j, double beta,
                                             double phi, Axis axis) {
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    const double q = std::round(phi / pi);
    const double ph = phi - q * pi;
    const double g = j * sb * sb;
    const double c = 2.0 * j * cb;
    const double env = std::exp(-g * ph * ph);
    const MomentSet m = gaussian_envelope_moments(two_j, beta, phi);
    double slope;
    if (axis == Axis::X)
        slope = j * sb * env *
                (-2.0 * g * ph * std::cos(c * ph) - c * std::sin(c * ph));
    else
        slope = j * sb * env *
                (-2.0 * g * ph * std::sin(c * ph) + c * std::cos(c * ph));
    SensitivityPoint p;
    p.phi = phi;
    p.axis = axis;
    p.slope = slope;
    p.noise = std::sqrt(std::max(0.0, m.var(axis)));
    p.model = SensitivityModel::Gaussian;
    if (std::fabs(slope) > 1e-300) p.delta_phi = p.noise / std::fabs(slope);
    return p;
}

// Fringe-trough operating points: phi = q pi + (s+1/2) pi / (2J cb) for J_x,
// phi = q pi + s pi / (2J cb) for J_y.  Empty when cos(beta) = 0 (equatorial
// branch applies instead).
struct OperatingPoint {
    double phi = 0.0;
    std::optional<double> delta_phi;  // fringe-model value
};

inline std::vector<OperatingPoint> operating_points(int two_j, double beta,
                                                    Axis axis, int q_lo,
                                                    int q_hi, int s_lo,
                                                    int s_hi) {
    const double cb = snapped_cos(beta);
    std::vector<OperatingPoint> pts;
    if (cb == 0.0) return pts;  // no fringes at the equator
    const double j = 0.5 * two_j;
    for (int q = q_lo; q <= q_hi; ++q) {
        for (int s = s_lo; s <= s_hi; ++s) {
            const double off = (axis == Axis::X) ? (s + 0.5) : double(s);
            OperatingPoint pt;
            pt.phi = q * pi + off * pi / (2.0 * j * cb);
            const FringeResult fr = fringe_model(two_j, beta, pt.phi);
            pt.delta_phi =
                axis == Axis::X ? fr.delta_phi_x : fr.delta_phi_y;
            pts.push_back(pt);
        }
    }
    std::sort(pts.begin(), pts.end(),
              [](const OperatingPoint& a, const OperatingPoint& b) {
                  return a.phi < b.phi;
              });
    return pts;
}

// beta = pi/2 branch: J_x measurements near phi = 0, where
//   <Jx> ~ J - J(2J-1) phi^2 / 2,  (Delta Jx)^2 ~ J(2J-1) phi^2,
// so delta_phi ~ 1/sqrt(J(2J-1)).  Valid for |phi| << 1/sqrt(J).
struct EquatorResult {
    SensitivityPoint point;
    double jx_mean = 0.0;
    bool valid = true;
};

inline EquatorResult equator_sensitivity(int two_j, double phi) {
    const double j = 0.5 * two_j;
    const double jj = j * (two_j - 1.0);  // J(2J-1)
    EquatorResult r;
    r.valid = std::fabs(phi) * std::sqrt(j) < 1.0;
    r.jx_mean = j - 0.5 * jj * phi * phi;
    r.point.phi = phi;
    r.point.axis = Axis::X;
    r.point.slope = -jj * phi;
    r.point.noise = std::sqrt(jj) * std::fabs(phi);
    r.point.model = SensitivityModel::Equator;
    if (jj > 0.0) r.point.delta_phi = 1.0 / std::sqrt(jj);
    return r;
}

// Independent qubit dephasing at rate Gamma (tau2 = 1/Gamma), applied through
// the adjoint map to the sampling moments.
struct DecoherenceSpec {
    double gamma_rate = 0.0;  // Gamma
    double total_time = 0.0;  // T = nu * t when optimizing t

    DecoherenceSpec(double rate, double total) : gamma_rate(rate), total_time(total) {
        if (rate < 0.0) throw std::invalid_argument("DecoherenceSpec: Gamma >= 0");
    }
    double tau2() const {
        return gamma_rate > 0.0 ? 1.0 / gamma_rate
                                : std::numeric_limits<double>::infinity();
    }
};

// Ratio delta_gamma_Gamma / delta_gamma for a measurement with unperturbed
// variance var0 on a spin-J probe.
inline double dephasing_inflation(double j, double gamma_t, double var0) {
    return std::sqrt(1.0 + j * (std::exp(2.0 * gamma_t) - 1.0) / (2.0 * var0));
}

struct DecoheredSensitivity {
    double delta_gamma = 0.0;       // at the requested t, nu
    double optimal_t = 0.0;         // tau2 / 2 under the T = nu t constraint
    double delta_gamma_optimal = 0.0;
};

// Closed form at the phi = 0, J_y operating point:
//   delta_gamma_Gamma = e^{Gamma t} / (t sqrt(nu) sqrt(2) J^{3/2} |sin 2b|),
// minimized over t (with nu = T/t) at t = tau2/2.
inline DecoheredSensitivity decohered_sensitivity(int two_j, double beta,
                                                  const DecoherenceSpec& spec,
                                                  double t, long long nu) {
    const double j = 0.5 * two_j;
    const double s2b = std::fabs(2.0 * std::sin(beta) * snapped_cos(beta));
    if (s2b == 0.0)
        throw std::invalid_argument("decohered_sensitivity: sin(2 beta) = 0");
    const double base = 1.0 / (std::sqrt(2.0) * std::pow(j, 1.5) * s2b);
    DecoheredSensitivity r;
    r.delta_gamma = std::exp(spec.gamma_rate * t) /
                    (t * std::sqrt(double(nu))) * base;
    if (spec.gamma_rate > 0.0) {
        r.optimal_t = 0.5 * spec.tau2();
        r.delta_gamma_optimal =
            std::sqrt(std::exp(1.0) / (spec.total_time * spec.tau2())) /
            (std::pow(j, 1.5) * s2b);
    } else {
        r.optimal_t = t;
        r.delta_gamma_optimal = r.delta_gamma;
    }
    return r;
}

enum class OperatingRule {
    PhiZero,              // J_y: optimal operating point phi = 0
    CompromiseInvSqrt2J,  // J_x: phi = 1/(sqrt(2) J)
};

struct ScalingResult {
    double xi = 0.0;
    double j_lo = 0.0, j_hi = 0.0;
    OperatingRule rule = OperatingRule::PhiZero;
};

// Two-point log-slope of the exact sensitivity between J_lo and J_hi.
inline ScalingResult scaling_exponent(double beta, Axis axis, double j_lo,
                                      double j_hi, OperatingRule rule) {
    if (j_hi <= j_lo) throw std::invalid_argument("scaling_exponent: J_hi > J_lo");
    auto eval = [&](double j) {
        const int two_j = static_cast<int>(std::llround(2.0 * j));
        const double phi =
            rule == OperatingRule::PhiZero ? 0.0 : 1.0 / (std::sqrt(2.0) * j);
        const SensitivityPoint p = sensitivity_exact(two_j, beta, phi, axis);
        if (!p.informative())
            throw std::domain_error(
                "scaling_exponent: no-information configuration at J = " +
                std::to_string(j) + ", beta = " + std::to_string(beta));
        return *p.delta_phi;
    };
    ScalingResult r;
    r.j_lo = j_lo;
    r.j_hi = j_hi;
    r.rule = rule;
    r.xi = std::log(eval(j_lo) / eval(j_hi)) / std::log(j_hi / j_lo);
    return r;
}

// Coherent-state model for general k: the probe precesses about z at rate
// gamma k (J cos b)^{k-1}; fringes have width pi / (k (J cos b)^{k-1}).
struct GeneralKModel {
    double rotation_rate_multiplier = 0.0;  // angular velocity / gamma
    double fringe_width = 0.0;
    bool valid = true;      // (J cb)^{k-2} phi sqrt(J) |sb| < 1
    bool degenerate = false;  // cos b = 0 with k >= 2: zero rotation rate
    MomentSet moments;
};

inline GeneralKModel general_k_model(int two_j, double beta, int k,
                                     double phi) {
    if (k < 1) throw std::invalid_argument("general_k_model: k >= 1");
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = snapped_cos(beta);
    GeneralKModel r;
    const double jz = j * cb;
    r.rotation_rate_multiplier = k * std::pow(jz, k - 1);
    if (r.rotation_rate_multiplier == 0.0 && k >= 2) {
        r.degenerate = true;
        r.fringe_width = std::numeric_limits<double>::infinity();
    } else {
        r.fringe_width = pi / std::fabs(r.rotation_rate_multiplier);
    }
    r.valid = std::pow(std::fabs(jz), k - 2) * std::fabs(phi) * std::sqrt(j) *
                  std::fabs(sb) <
              1.0;

    // Moments of a coherent state at polar angle beta, azimuth
    // phi * multiplier.
    const double a = phi * r.rotation_rate_multiplier;
    const double ca = std::cos(a), sa = std::sin(a);
    const double q = 0.5 * j * (two_j - 1);
    MomentSet& m = r.moments;
    m.provenance = Provenance::CoherentModel;
    m.jx = j * sb * ca;
    m.jy = j * sb * sa;
    m.jz = jz;
    m.jx2 = 0.5 * j + q * sb * sb * ca * ca;
    m.jy2 = 0.5 * j + q * sb * sb * sa * sa;
    m.jz2 = j * j * cb * cb + 0.5 * j * sb * sb;
    m.jxjy_sym = q * sb * sb * sa * ca;
    m.jzjx_sym = q * sb * cb * ca;
    m.jzjy_sym = q * sb * cb * sa;
    return r;
}

}  // namespace qmet
