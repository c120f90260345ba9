// Theoretical precision bounds: extreme eigenvalues of the k-body coupling,
// the entangled-input QCRB, product-state variance and its optimization, and
// the short-time separable-measurement sensitivity.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qmet/moments.hpp"
#include "qmet/spin_model.hpp"

namespace qmet {

// Extreme eigenvalues of the coupling Hamiltonian.  achieving_counts_* give
// the occupation of each spectrum eigenvalue in an extremal configuration.
// exact=false marks the two-extreme fallback bound for Lambda_min, in which
// case epsilon is unknown.
struct ExtremeResult {
    double lambda_cap_max = 0.0;
    double lambda_cap_min = 0.0;
    std::vector<long long> achieving_counts_max;
    std::vector<long long> achieving_counts_min;
    double delta = 0.0;
    std::optional<double> epsilon;
    bool exact = true;
};

namespace detail {

// Nearest integer, ties rounded half away from zero.
inline long long round_half_away(double x) {
    return static_cast<long long>(x >= 0 ? std::floor(x + 0.5)
                                         : std::ceil(x - 0.5));
}

// Number of occupation-count compositions of n over levels slots.
inline double composition_count(long long n, std::size_t levels) {
    return std::exp(log_binomial(n + static_cast<long long>(levels) - 1,
                                 static_cast<long long>(levels) - 1));
}

// k! * e_k of the multiset {lambda_i with multiplicity counts_i}, read off
// the x^k coefficient of prod_i (1 + lambda_i x)^{counts_i}.
inline double sym_poly_value(const std::vector<double>& lambdas,
                             const std::vector<long long>& counts, int k) {
    std::vector<double> coef(k + 1, 0.0);
    coef[0] = 1.0;
    for (std::size_t lvl = 0; lvl < lambdas.size(); ++lvl) {
        const long long c = counts[lvl];
        if (c == 0) continue;
        // multiply by (1 + lambda x)^c, truncated at degree k
        std::vector<double> binco(k + 1, 0.0);
        for (int j = 0; j <= k && j <= c; ++j)
            binco[j] = binomial(c, j) * std::pow(lambdas[lvl], j);
        std::vector<double> next(k + 1, 0.0);
        for (int a = 0; a <= k; ++a) {
            if (coef[a] == 0.0) continue;
            for (int b = 0; a + b <= k; ++b) next[a + b] += coef[a] * binco[b];
        }
        coef.swap(next);
    }
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    return kfact * coef[k];
}

// Visit all compositions of n over the given number of slots.
inline void for_each_composition(
    long long n, std::size_t slots,
    const std::function<void(const std::vector<long long>&)>& visit) {
    std::vector<long long> counts(slots, 0);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t lvl,
                                                          long long left) {
        if (lvl + 1 == slots) {
            counts[lvl] = left;
            visit(counts);
            return;
        }
        for (long long c = 0; c <= left; ++c) {
            counts[lvl] = c;
            rec(lvl + 1, left - c);
        }
    };
    rec(0, n);
}

}  // namespace detail

// Largest search size for the exact occupation-count scan; beyond this the
// Case-4 result falls back to the two-extreme construction.
inline constexpr double kExtremeSearchBudget = 1e6;

inline ExtremeResult extreme_eigenvalues(const SingleBodySpectrum& spectrum,
                                         const CouplingSpec& coupling) {
    const auto& lam = spectrum.eigenvalues;
    const std::size_t L = lam.size();
    const long long n = coupling.n;
    const int k = coupling.k;
    const double lmax = spectrum.lambda_max, lmin = spectrum.lambda_min;
    ExtremeResult res;
    res.achieving_counts_max.assign(L, 0);
    res.achieving_counts_min.assign(L, 0);

    auto all_in = [&](std::size_t lvl) {
        std::vector<long long> c(L, 0);
        c[lvl] = n;
        return c;
    };

    const bool searchable =
        detail::composition_count(n, L) <= kExtremeSearchBudget;

    if (!coupling.self_interactions) {
        // No closed case table; exact search over occupation counts of the
        // elementary-symmetric-polynomial values.
        if (!searchable)
            throw std::invalid_argument(
                "extreme_eigenvalues: no-self-interaction search budget "
                "exceeded");
        bool first = true;
        detail::for_each_composition(
            n, L, [&](const std::vector<long long>& counts) {
                const double v = detail::sym_poly_value(lam, counts, k);
                if (first || v > res.lambda_cap_max) {
                    res.lambda_cap_max = v;
                    res.achieving_counts_max = counts;
                }
                if (first || v < res.lambda_cap_min) {
                    res.lambda_cap_min = v;
                    res.achieving_counts_min = counts;
                }
                first = false;
            });
        res.exact = true;
        return res;
    }

    const bool case4 = (k % 2 == 0) && lmin < 0.0 && 0.0 < lmax;
    if (!case4) {
        // Cases 1-3: extremes sit at all-constituents-alike strings.
        const double vmax = std::pow(n * lmax, k);
        const double vmin = std::pow(n * lmin, k);
        if (vmax >= vmin) {
            res.lambda_cap_max = vmax;
            res.lambda_cap_min = vmin;
            res.achieving_counts_max = all_in(L - 1);
            res.achieving_counts_min = all_in(0);
        } else {
            res.lambda_cap_max = vmin;
            res.lambda_cap_min = vmax;
            res.achieving_counts_max = all_in(0);
            res.achieving_counts_min = all_in(L - 1);
        }
        res.exact = true;
        return res;
    }

    // Case 4: k even, lmin < 0 < lmax.  Lambda_max is (n |lambda|_max)^k.
    const double abs_lmax = std::max(std::fabs(lmax), std::fabs(lmin));
    res.lambda_cap_max = std::pow(n * abs_lmax, k);
    res.achieving_counts_max =
        all_in(std::fabs(lmax) >= std::fabs(lmin) ? L - 1 : 0);

    const double ratio = n * std::fabs(lmin) / spectrum.seminorm;
    const long long np0 = detail::round_half_away(ratio);
    res.delta = std::fabs(ratio - double(np0));

    if (searchable) {
        bool first = true;
        detail::for_each_composition(
            n, L, [&](const std::vector<long long>& counts) {
                double sum = 0.0;
                for (std::size_t i = 0; i < L; ++i) sum += counts[i] * lam[i];
                const double v = std::pow(sum, k);
                if (first || v < res.lambda_cap_min) {
                    res.lambda_cap_min = v;
                    res.achieving_counts_min = counts;
                }
                first = false;
            });
        res.exact = true;
        res.epsilon =
            res.delta - std::pow(res.lambda_cap_min, 1.0 / k) / spectrum.seminorm;
        return res;
    }

    // Fallback: two-extreme bound.  Both rounding neighbors are evaluated so
    // the tie rule never affects the result.
    double best = std::numeric_limits<double>::infinity();
    long long best_np = 0;
    for (long long np : {np0 - 1, np0, np0 + 1}) {
        if (np < 0 || np > n) continue;
        const double v = std::pow(np * lmax + (n - np) * lmin, k);
        if (std::fabs(v) < std::fabs(best)) {
            best = v;
            best_np = np;
        }
    }
    res.lambda_cap_min = best;
    res.achieving_counts_min.assign(L, 0);
    res.achieving_counts_min[L - 1] = best_np;
    res.achieving_counts_min[0] += n - best_np;
    res.exact = false;
    res.epsilon.reset();  // unknown for multi-level spectra
    if (L == 2) {
        res.exact = true;  // qubits: epsilon = 0
        res.epsilon = 0.0;
    }
    return res;
}

// State-independent QCRB 1/(sqrt(nu) t ||H||).  Empty when the coupling
// carries no information (||H|| = 0).
inline std::optional<double> qcrb_entangled(const ExtremeResult& extremes,
                                            const ExperimentClock& clock) {
    const double seminorm_cap = extremes.lambda_cap_max - extremes.lambda_cap_min;
    if (seminorm_cap <= 0.0) return std::nullopt;
    return 1.0 / (std::sqrt(double(clock.nu)) * clock.t * seminorm_cap);
}

// Leading-order variance of H for identical constituents with mean <h> = x:
//   (Delta H)^2 = k^2 n^{2k-1} x^{2(k-1)} (lmax - x)(x - lmin).
inline double product_variance_leading(const SingleBodySpectrum& spectrum,
                                       const CouplingSpec& coupling, double x) {
    if (x < spectrum.lambda_min || x > spectrum.lambda_max)
        throw std::invalid_argument(
            "product_variance_leading: x outside [lambda_min, lambda_max]");
    const int k = coupling.k;
    const double n = double(coupling.n);
    return double(k) * k * std::pow(n, 2 * k - 1) * std::pow(x, 2 * (k - 1)) *
           (spectrum.lambda_max - x) * (x - spectrum.lambda_min);
}

enum class Branch { Plus, Minus, Tie };

struct OptimalProductResult {
    double x_plus = 0.0, x_minus = 0.0;
    double p_plus = 0.0, p_minus = 0.0;
    double beta_opt = 0.0;
    double variance = 0.0;  // (Delta H)^2, leading order, at the global branch
    double qcrb = 0.0;      // delta-gamma bound per unit t, nu = 1
    Branch global_branch = Branch::Plus;
};

// Stationary means x_pm of f(x) = x^{2(k-1)} (lmax-x)(x-lmin) and the
// resulting product-state bound.  k = 1 has the single maximum x = lambda_bar.
inline OptimalProductResult optimal_product_state(
    const SingleBodySpectrum& spectrum, const CouplingSpec& coupling) {
    const int k = coupling.k;
    const double lbar = spectrum.lambda_bar;
    const double h = spectrum.seminorm;
    OptimalProductResult r;
    auto prob_of = [&](double x) { return 0.5 + (x - lbar) / h; };
    auto finish = [&](double x_branch) {
        r.variance = product_variance_leading(spectrum, coupling, x_branch);
        r.qcrb = 1.0 / (2.0 * std::sqrt(r.variance));
        r.beta_opt = 2.0 * std::acos(std::sqrt(prob_of(x_branch)));
    };

    if (k == 1) {
        r.x_plus = r.x_minus = lbar;
        r.p_plus = r.p_minus = 0.5;
        r.global_branch = Branch::Tie;
        finish(lbar);
        return r;
    }

    const double root =
        0.5 * std::sqrt(lbar * lbar / (double(k) * k) + (1.0 - 1.0 / k) * h * h);
    r.x_plus = (1.0 - 0.5 / k) * lbar + root;
    r.x_minus = (1.0 - 0.5 / k) * lbar - root;
    r.p_plus = prob_of(r.x_plus);
    r.p_minus = prob_of(r.x_minus);

    const double lmax = spectrum.lambda_max, lmin = spectrum.lambda_min;
    if (lmin >= 0.0) {
        r.global_branch = Branch::Plus;  // only x_+ lies in-domain
    } else if (lmax <= 0.0) {
        r.global_branch = Branch::Minus;
    } else {
        const double fplus = std::pow(r.x_plus, 2 * (k - 1)) *
                             (lmax - r.x_plus) * (r.x_plus - lmin);
        const double fminus = std::pow(r.x_minus, 2 * (k - 1)) *
                              (lmax - r.x_minus) * (r.x_minus - lmin);
        if (fplus > fminus)
            r.global_branch = Branch::Plus;
        else if (fminus > fplus)
            r.global_branch = Branch::Minus;
        else
            r.global_branch = Branch::Tie;
    }
    finish(r.global_branch == Branch::Minus ? r.x_minus : r.x_plus);
    return r;
}

// Closed-form symmetric-spectrum results (lambda_min = -lambda_max).
inline double symmetric_variance_closed_form(double seminorm, int k,
                                             long long n) {
    if (k == 1) return n * seminorm * seminorm / 4.0;
    return k * std::pow(1.0 - 1.0 / k, k - 1) * std::pow(double(n), 2 * k - 1) *
           std::pow(0.5 * seminorm, 2 * k);
}

inline double symmetric_qcrb_closed_form(double seminorm, int k, long long n,
                                         double t = 1.0) {
    if (k == 1) return 1.0 / (t * std::sqrt(double(n)) * seminorm);
    return std::pow(2.0, k - 1) /
           (std::sqrt(double(k)) * std::pow(1.0 - 1.0 / k, 0.5 * (k - 1)) * t *
            std::pow(double(n), k - 0.5) * std::pow(seminorm, k));
}

// Short-time J_y sensitivity for qubit constituents (h = Z/2):
//   slope d<J_y>/dphi = k (n/2)^k sin(b) cos^{k-1}(b), noise sqrt(n)/2.
// Valid for n >> k; the optimizing angle satisfies sin(b) = sqrt(1/k).
struct ShortTimeResult {
    SensitivityPoint point;
    double beta_opt = 0.0;
};

inline ShortTimeResult short_time_sensitivity(long long n, int k, double beta,
                                              long long nu) {
    const double sb = std::sin(beta), cb = std::cos(beta);
    const double slope =
        k * std::pow(0.5 * n, k) * sb * std::pow(cb, k - 1);
    const double noise = 0.5 * std::sqrt(double(n));
    ShortTimeResult r;
    r.point.phi = 0.0;
    r.point.axis = Axis::Y;
    r.point.slope = slope;
    r.point.noise = noise;
    r.point.model = SensitivityModel::ShortTime;
    if (std::fabs(slope) > 1e-300)
        r.point.delta_phi = noise / std::fabs(slope) / std::sqrt(double(nu));
    r.beta_opt = std::asin(std::sqrt(1.0 / k));
    return r;
}

}  // namespace qmet
