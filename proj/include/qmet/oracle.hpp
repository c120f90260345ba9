// Independent brute-force checks: dense Dicke-basis evolution for arbitrary
// k, exact measurement distributions via a Wigner d-matrix recursion,
// exhaustive eigenvalue/variance enumeration, and the binomial-identity
// residuals behind the closed-form moments.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmet/moments.hpp"
#include "qmet/spin_model.hpp"

namespace qmet::oracle {

inline constexpr int kDenseBudgetTwoJ = 20000;
inline constexpr int kRotationBudgetTwoJ = 512;

// Ladder matrix elements Gamma^pm_m = sqrt((J -+ m)(J pm m + 1)), indexed so
// gamma_plus[i] multiplies |m+1> in J+|m>, with m = -J + i.
struct LadderCoefficients {
    std::vector<double> gamma_plus;
    std::vector<double> gamma_minus;

    explicit LadderCoefficients(int two_j) {
        const double j = 0.5 * two_j;
        gamma_plus.resize(two_j + 1);
        gamma_minus.resize(two_j + 1);
        for (int i = 0; i <= two_j; ++i) {
            const double m = -j + i;
            gamma_plus[i] = std::sqrt(std::max(0.0, (j - m) * (j + m + 1)));
            gamma_minus[i] = std::sqrt(std::max(0.0, (j + m) * (j - m + 1)));
        }
    }
};

// Dense evolution: c_m = d_m e^{-i phi m^k}.
inline DickeState evolve(const CoherentPreparation& prep, double phi, int k) {
    if (prep.two_j > kDenseBudgetTwoJ)
        throw std::invalid_argument("oracle::evolve: dense budget exceeded");
    const auto d = coherent_amplitudes(prep.two_j, prep.beta);
    DickeState st;
    st.two_j = prep.two_j;
    st.amplitudes.resize(prep.two_j + 1);
    const double j = 0.5 * prep.two_j;
    for (int i = 0; i <= prep.two_j; ++i) {
        const double m = -j + i;
        const double ph = -phi * std::pow(m, k);
        st.amplitudes[i] = d[i] * complexd{std::cos(ph), std::sin(ph)};
    }
    return st;
}

// Moments from direct ladder application on a normalized Dicke state.
inline MomentSet collective_moments(const DickeState& st) {
    const int two_j = st.two_j;
    const double j = 0.5 * two_j;
    const LadderCoefficients lad(two_j);
    const auto& c = st.amplitudes;

    complexd jplus{0, 0}, jplus_sq{0, 0}, jz_jplus{0, 0};
    double jz = 0.0, jz2 = 0.0;
    for (int i = 0; i <= two_j; ++i) {
        const double m = -j + i;
        const double pop = std::norm(c[i]);
        jz += m * pop;
        jz2 += m * m * pop;
        if (i + 1 <= two_j) {
            const complexd term = std::conj(c[i + 1]) * lad.gamma_plus[i] * c[i];
            jplus += term;
            jz_jplus += (m + 0.5) * term;
        }
        if (i + 2 <= two_j)
            jplus_sq += std::conj(c[i + 2]) * lad.gamma_plus[i + 1] *
                        lad.gamma_plus[i] * c[i];
    }
    // <J+J- + J-J+>/2 = J(J+1) - <Jz^2>
    const double jpjm_sym = j * (j + 1.0) - jz2;

    MomentSet m;
    m.provenance = Provenance::Oracle;
    m.jx = jplus.real();
    m.jy = jplus.imag();
    m.jz = jz;
    m.jz2 = jz2;
    m.jx2 = 0.5 * jpjm_sym + 0.5 * jplus_sq.real();
    m.jy2 = 0.5 * jpjm_sym - 0.5 * jplus_sq.real();
    m.jxjy_sym = 0.5 * jplus_sq.imag();
    m.jzjx_sym = jz_jplus.real();
    m.jzjy_sym = jz_jplus.imag();
    return m;
}

// Analytic phi-derivatives of <Jx> and <Jy> for the evolved state, from
// differentiating the dense sums term by term (no finite differences).
struct MomentDerivatives {
    double djx = 0.0, djy = 0.0;
};

inline MomentDerivatives evolved_moment_derivatives(
    const CoherentPreparation& prep, double phi, int k) {
    const auto d = coherent_amplitudes(prep.two_j, prep.beta);
    const LadderCoefficients lad(prep.two_j);
    const double j = 0.5 * prep.two_j;
    complexd djplus{0, 0};
    for (int i = 0; i + 1 <= prep.two_j; ++i) {
        const double m = -j + i;
        const double freq = std::pow(m + 1.0, k) - std::pow(m, k);
        const double ph = phi * freq;
        // term = d_{m+1} d_m Gamma+ e^{i phi freq}; derivative brings i*freq
        const complexd term = d[i + 1] * d[i] * lad.gamma_plus[i] *
                              complexd{std::cos(ph), std::sin(ph)} *
                              complexd{0.0, freq};
        djplus += term;
    }
    return {djplus.real(), djplus.imag()};
}

// Sensitivity with variance from the dense moments and the analytic slope.
inline SensitivityPoint sensitivity(const CoherentPreparation& prep,
                                    double phi, int k, Axis axis) {
    const MomentSet m = collective_moments(evolve(prep, phi, k));
    const MomentDerivatives dd = evolved_moment_derivatives(prep, phi, k);
    SensitivityPoint p;
    p.phi = phi;
    p.axis = axis;
    p.slope = axis == Axis::X ? dd.djx : dd.djy;
    p.noise = std::sqrt(std::max(0.0, m.var(axis)));
    p.model = SensitivityModel::Exact;
    if (std::fabs(p.slope) > 1e-300) p.delta_phi = p.noise / std::fabs(p.slope);
    return p;
}

// Central finite difference of <J_axis> with step scaled by the local fringe
// frequency.
inline double finite_difference_slope(const CoherentPreparation& prep,
                                      double phi, int k, Axis axis,
                                      double base_step = 1e-8) {
    const double scale =
        std::max(1.0, prep.two_j * std::fabs(std::cos(prep.beta)));
    const double h = base_step / scale;
    auto mean = [&](double p) {
        const MomentSet m = collective_moments(evolve(prep, p, k));
        return m.mean(axis);
    };
    return (mean(phi + h) - mean(phi - h)) / (2.0 * h);
}

// Full reduced Wigner d-matrix d^J_{m'm}(beta), built column by column from
// the closed-form m = J column via the three-term recursion
//   Gamma-_m d_{m', m-1} = -2 (m' - m cos b)/sin b * d_{m'm}
//                          - Gamma+_m d_{m', m+1},
// with per-column renormalization.  Row index i' has m' = -J + i', column
// index i has m = -J + i.
inline std::vector<std::vector<double>> wigner_d_matrix(int two_j,
                                                        double beta) {
    if (two_j > kRotationBudgetTwoJ)
        throw std::invalid_argument("wigner_d_matrix: rotation budget exceeded");
    const int dim = two_j + 1;
    const double j = 0.5 * two_j;
    const double sb = std::sin(beta), cb = std::cos(beta);
    if (sb == 0.0) throw std::invalid_argument("wigner_d_matrix: sin(beta) = 0");
    const LadderCoefficients lad(two_j);
    std::vector<std::vector<double>> d(dim, std::vector<double>(dim, 0.0));

    const auto top = coherent_amplitudes(two_j, beta);
    for (int ip = 0; ip < dim; ++ip) d[ip][two_j] = top[ip];

    for (int col = two_j; col >= 1; --col) {
        const double m = -j + col;
        double norm2 = 0.0;
        for (int ip = 0; ip < dim; ++ip) {
            const double mp = -j + ip;
            double v = -2.0 * (mp - m * cb) / sb * d[ip][col];
            if (col + 1 < dim) v -= lad.gamma_plus[col] * d[ip][col + 1];
            v /= lad.gamma_minus[col];
            d[ip][col - 1] = v;
            norm2 += v * v;
        }
        // each true column is a unit vector
        const double inv = 1.0 / std::sqrt(norm2);
        for (int ip = 0; ip < dim; ++ip) d[ip][col - 1] *= inv;
    }
    return d;
}

// Probability distribution of a J_axis measurement over outcomes m = -J..J.
enum class MeasureAxis { X, Y, Z };

inline std::vector<double> measurement_distribution(const DickeState& st,
                                                    MeasureAxis axis) {
    const int two_j = st.two_j;
    const int dim = two_j + 1;
    std::vector<double> p(dim, 0.0);
    if (axis == MeasureAxis::Z) {
        for (int i = 0; i < dim; ++i) p[i] = std::norm(st.amplitudes[i]);
        return p;
    }
    if (two_j > kRotationBudgetTwoJ)
        throw std::invalid_argument(
            "measurement_distribution: rotation budget exceeded");
    // |x,m'> = e^{-i(pi/2)Jy}|z,m'>, so <x,m'|psi> = sum_m d^J_{m m'}(pi/2) c_m.
    // For J_y, first rotate by e^{i(pi/2)Jz}: c_m -> e^{i pi m/2} c_m.
    std::vector<complexd> c = st.amplitudes;
    if (axis == MeasureAxis::Y) {
        const double j = 0.5 * two_j;
        for (int i = 0; i < dim; ++i) {
            const double ph = 0.5 * pi * (-j + i);
            c[i] *= complexd{std::cos(ph), std::sin(ph)};
        }
    }
    const auto d = wigner_d_matrix(two_j, 0.5 * pi);
    for (int ip = 0; ip < dim; ++ip) {
        complexd amp{0, 0};
        for (int i = 0; i < dim; ++i) amp += d[i][ip] * c[i];
        p[ip] = std::norm(amp);
    }
    return p;
}

// Exact extremes by occupation-class enumeration (strings collapse to
// eigenvalue multiplicities).  Written independently of module bounds.
struct StringExtremes {
    double value_max = 0.0;
    double value_min = 0.0;
    std::vector<long long> counts_max;
    std::vector<long long> counts_min;
};

inline StringExtremes string_extremes(const SingleBodySpectrum& spectrum,
                                      const CouplingSpec& coupling) {
    const auto& lam = spectrum.eigenvalues;
    const std::size_t L = lam.size();
    const long long n = coupling.n;
    const int k = coupling.k;
    if (std::exp(log_binomial(n + (long long)L - 1, (long long)L - 1)) > 1e6)
        throw std::invalid_argument("string_extremes: enumeration budget exceeded");

    StringExtremes res;
    bool first = true;
    std::vector<long long> counts(L, 0);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t lvl,
                                                          long long left) {
        if (lvl + 1 == L) {
            counts[lvl] = left;
            double v;
            if (coupling.self_interactions) {
                double sum = 0.0;
                for (std::size_t i = 0; i < L; ++i) sum += counts[i] * lam[i];
                v = std::pow(sum, k);
            } else {
                // k! e_k from the generating polynomial prod (1 + lam x)^n_i
                std::vector<double> coef(k + 1, 0.0);
                coef[0] = 1.0;
                for (std::size_t i = 0; i < L; ++i) {
                    for (long long rep = 0; rep < counts[i]; ++rep) {
                        for (int deg = k; deg >= 1; --deg)
                            coef[deg] += lam[i] * coef[deg - 1];
                    }
                }
                double kfact = 1.0;
                for (int f = 2; f <= k; ++f) kfact *= f;
                v = kfact * coef[k];
            }
            if (first || v > res.value_max) {
                res.value_max = v;
                res.counts_max = counts;
            }
            if (first || v < res.value_min) {
                res.value_min = v;
                res.counts_min = counts;
            }
            first = false;
            return;
        }
        for (long long cc = 0; cc <= left; ++cc) {
            counts[lvl] = cc;
            rec(lvl + 1, left - cc);
        }
    };
    rec(0, n);
    return res;
}

// Exact (Delta H)^2 for qubit constituents (h = Z/2) in a product state with
// excitation probability p, via binomial moments.  self=false uses k! e_k of
// the occupation multiset.
inline double product_variance_exact(double p, long long n, int k,
                                     bool self_interactions) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("product_variance_exact: p in [0,1]");
    const double lp = p > 0 ? std::log(p) : -1e300;
    const double lq = p < 1 ? std::log1p(-p) : -1e300;
    double e_v = 0.0, e_v2 = 0.0;
    double kfact = 1.0;
    for (int f = 2; f <= k; ++f) kfact *= f;
    for (long long a = 0; a <= n; ++a) {
        double logw = log_binomial(n, a);
        if (a > 0) logw += a * lp;
        if (a < n) logw += (n - a) * lq;
        const double w = std::exp(logw);
        if (w == 0.0) continue;
        double v;
        if (self_interactions) {
            v = std::pow(a - 0.5 * n, k);
        } else {
            // e_k of {+1/2 x a, -1/2 x (n-a)}
            double ek = 0.0;
            for (int jj = std::max(0, k - int(std::min<long long>(n - a, k)));
                 jj <= std::min<long long>(a, k); ++jj) {
                const double term =
                    std::exp(log_binomial(a, jj) +
                             log_binomial(n - a, k - jj) - k * std::log(2.0));
                ek += ((k - jj) % 2 ? -term : term);
            }
            v = kfact * ek;
        }
        e_v += w * v;
        e_v2 += w * v * v;
    }
    return e_v2 - e_v * e_v;
}

// Residuals (relative) of the three binomial identities behind the
// closed-form moments:
//   sum (J-m)        C(2J,J-m) a^{J+m} b^{J-m} = 2J b (a+b)^{2J-1}
//   sum (J^2-m^2)    C(2J,J-m) a^{J+m} b^{J-m} = 2J(2J-1) a b (a+b)^{2J-2}
//   sum (J-m)(J-m-1) C(2J,J-m) a^{J+m} b^{J-m} = 2J(2J-1) b^2 (a+b)^{2J-2}
struct IdentityResiduals {
    double first = 0.0, second = 0.0, third = 0.0;
};

inline IdentityResiduals identity_residuals(int two_j, double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("identity_residuals: a, b > 0");
    if (two_j > 60)
        throw std::invalid_argument("identity_residuals: 2J <= 60");
    const double j = 0.5 * two_j;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int i = 0; i <= two_j; ++i) {
        const double m = -j + i;
        const double w = binomial(two_j, two_j - i) * std::pow(a, i) *
                         std::pow(b, two_j - i);
        s1 += (j - m) * w;
        s2 += (j * j - m * m) * w;
        s3 += (j - m) * (j - m - 1.0) * w;
    }
    const double ab = a + b;
    const double r1 = two_j * b * std::pow(ab, two_j - 1);
    const double r2 = two_j * (two_j - 1.0) * a * b * std::pow(ab, two_j - 2);
    const double r3 = two_j * (two_j - 1.0) * b * b * std::pow(ab, two_j - 2);
    auto rel = [](double lhs, double rhs) {
        const double scale = std::max(std::fabs(rhs), 1e-300);
        return (rhs == 0.0 && lhs == 0.0) ? 0.0 : std::fabs(lhs - rhs) / scale;
    };
    return {rel(s1, r1), rel(s2, r2), rel(s3, r3)};
}

}  // namespace qmet::oracle
