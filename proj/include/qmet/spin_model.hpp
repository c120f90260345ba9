// Core domain types for collective-spin probes: single-body spectra,
// coherent-state preparations, Dicke-basis states, and numerically stable
// top-row Wigner coefficients.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qmet {

using complexd = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// log of binomial coefficient C(n, k) via lgamma; exact enough for n ~ 1e7.
inline double log_binomial(long long n, long long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

inline double binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0.0;
    return std::round(std::exp(log_binomial(n, k)));
}

// cos/sin with results within 1e-15 of zero snapped to exactly zero, so the
// symmetry points (beta = pi/2, phi = q pi, ...) take their degenerate
// branches instead of leaking O(1e-16) residues into slopes and rates.
inline double snapped_cos(double x) {
    const double c = std::cos(x);
    return std::fabs(c) < 1e-15 ? 0.0 : c;
}

inline double snapped_sin(double x) {
    const double s = std::sin(x);
    return std::fabs(s) < 1e-15 ? 0.0 : s;
}

// Eigenvalues of the dimensionless one-body operator h, with the derived
// extremes, semi-norm and midpoint.  Stored sorted with exact duplicates
// removed (multiplicities do not affect any derived quantity).
struct SingleBodySpectrum {
    std::vector<double> eigenvalues;  // sorted, distinct
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double seminorm = 0.0;    // lambda_max - lambda_min
    double lambda_bar = 0.0;  // (lambda_max + lambda_min) / 2
};

inline SingleBodySpectrum spectrum_stats(std::vector<double> eigenvalues) {
    std::sort(eigenvalues.begin(), eigenvalues.end());
    eigenvalues.erase(std::unique(eigenvalues.begin(), eigenvalues.end()),
                      eigenvalues.end());
    if (eigenvalues.size() < 2)
        throw std::invalid_argument(
            "spectrum_stats: need at least 2 distinct eigenvalues");
    SingleBodySpectrum s;
    s.eigenvalues = std::move(eigenvalues);
    s.lambda_min = s.eigenvalues.front();
    s.lambda_max = s.eigenvalues.back();
    s.seminorm = s.lambda_max - s.lambda_min;
    s.lambda_bar = 0.5 * (s.lambda_max + s.lambda_min);
    return s;
}

// k-body coupling degree and constituent count.  self_interactions selects
// between H = (sum_j h_j)^k and the variant with duplicate indices removed.
struct CouplingSpec {
    int k = 1;
    long long n = 1;
    bool self_interactions = true;

    CouplingSpec(int k_, long long n_, bool self = true)
        : k(k_), n(n_), self_interactions(self) {
        if (k < 1 || n < k)
            throw std::invalid_argument("CouplingSpec: require n >= k >= 1");
    }
};

// Spin coherent state |J, beta>: rotation of |J,J> through beta about y.
// J is stored doubled to keep half-integers exact.
struct CoherentPreparation {
    int two_j = 1;
    double beta = 0.0;
    std::vector<double> phases;  // per-constituent relative phases, unused
                                 // beyond zero in this artifact

    CoherentPreparation(int two_j_, double beta_)
        : two_j(two_j_), beta(beta_) {
        if (two_j < 1) throw std::invalid_argument("CoherentPreparation: 2J >= 1");
        if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
    }
};

// Pure state in the Dicke basis |J,m>, m = -J..J.  amplitudes[i] is the
// coefficient of m = -J + i.
struct DickeState {
    int two_j = 1;
    std::vector<complexd> amplitudes;

    int dim() const { return two_j + 1; }
    // m value for index i, as a double (half-integer when 2J is odd)
    double m_of(int i) const { return 0.5 * (-two_j + 2 * i); }

    double norm2() const {
        double s = 0.0;
        for (auto& c : amplitudes) s += std::norm(c);
        return s;
    }
};

// Time/trial bookkeeping for one experimental configuration.
struct ExperimentClock {
    double gamma = 0.0;
    double t = 1.0;
    long long nu = 1;

    ExperimentClock(double gamma_, double t_, long long nu_)
        : gamma(gamma_), t(t_), nu(nu_) {
        if (t <= 0.0) throw std::invalid_argument("ExperimentClock: t > 0");
        if (nu < 1) throw std::invalid_argument("ExperimentClock: nu >= 1");
    }
    double phi() const { return gamma * t; }
};

// Top row of the reduced Wigner rotation matrix,
//   d_m = sqrt(C(2J, J-m)) cos(b/2)^{J+m} sin(b/2)^{J-m},
// assembled in log space so J ~ 1e4 does not overflow.  Signs are carried
// separately so any finite beta is accepted.  Index i maps to m = -J + i.
inline std::vector<double> coherent_amplitudes(int two_j, double beta) {
    if (two_j < 1) throw std::invalid_argument("coherent_amplitudes: 2J >= 1");
    const int dim = two_j + 1;
    std::vector<double> d(dim, 0.0);
    // beta = 0 and beta = pi are delta functions at m = +-J; handle exactly
    // to avoid log(0).
    const double c = std::cos(0.5 * beta);
    const double s = std::sin(0.5 * beta);
    if (s == 0.0) {
        // d_J = cos(b/2)^{2J}
        d[two_j] = (c > 0 || two_j % 2 == 0) ? 1.0 : -1.0;
        return d;
    }
    if (c == 0.0 || beta == pi) {
        // sin(pi/2) = 1 exactly; cos(pi/2) rounds to 6e-17, treat as exact
        d[0] = 1.0;
        return d;
    }
    const double lc = std::log(std::fabs(c));
    const double ls = std::log(std::fabs(s));
    for (int i = 0; i < dim; ++i) {
        const int j_plus_m = i;           // index i has m = -J + i
        const int j_minus_m = two_j - i;
        double mag = std::exp(0.5 * log_binomial(two_j, j_minus_m) +
                              j_plus_m * lc + j_minus_m * ls);
        double sign = 1.0;
        if (c < 0 && (j_plus_m % 2)) sign = -sign;
        if (s < 0 && (j_minus_m % 2)) sign = -sign;
        d[i] = sign * mag;
    }
    return d;
}

}  // namespace qmet
