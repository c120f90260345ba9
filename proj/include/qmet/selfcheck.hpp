// Cross-validation grid: closed-form moments and sensitivities against the
// dense Dicke-basis oracle.
#pragma once

#include <cmath>
#include <string>

#include "qmet/exact_moments.hpp"
#include "qmet/oracle.hpp"

namespace qmet {

struct OracleCheckReport {
    double max_rel_moments = 0.0;
    double max_rel_sensitivity = 0.0;
    int worst_two_j = 0;
    double worst_beta = 0.0, worst_phi = 0.0;
    long long points = 0;

    double max_rel() const {
        return std::max(max_rel_moments, max_rel_sensitivity);
    }
};

namespace detail {

inline double rel_err(double a, double b, double floor_scale) {
    const double scale = std::max({std::fabs(a), std::fabs(b), floor_scale});
    return std::fabs(a - b) / scale;
}

}  // namespace detail

// Sweeps 2J = 1..max_two_j over a grid x grid (beta, phi) lattice chosen to
// avoid the exact symmetry points beta in {0, pi/2, pi} and phi = 0.
inline OracleCheckReport oracle_check(int max_two_j, int grid) {
    OracleCheckReport rep;
    for (int two_j = 1; two_j <= max_two_j; ++two_j) {
        const double j = 0.5 * two_j;
        // first-moment magnitudes are O(J), second O(J^2): relative errors
        // are measured against that scale so exact zeros do not divide out
        const double floor1 = 1e-3 * j;
        const double floor2 = 1e-3 * j * j;
        for (int bi = 0; bi < grid; ++bi) {
            const double beta = (bi + 0.5) * pi / grid;
            const CoherentPreparation prep(two_j, beta);
            for (int pi_idx = 0; pi_idx < grid; ++pi_idx) {
                const double phi = -0.075 + 0.01 * pi_idx;
                const MomentSet a = moments_exact(two_j, beta, phi);
                const MomentSet b =
                    oracle::collective_moments(oracle::evolve(prep, phi, 2));
                double e = 0.0;
                e = std::max(e, detail::rel_err(a.jx, b.jx, floor1));
                e = std::max(e, detail::rel_err(a.jy, b.jy, floor1));
                e = std::max(e, detail::rel_err(a.jz, b.jz, floor1));
                e = std::max(e, detail::rel_err(a.jx2, b.jx2, floor2));
                e = std::max(e, detail::rel_err(a.jy2, b.jy2, floor2));
                e = std::max(e, detail::rel_err(a.jz2, b.jz2, floor2));
                e = std::max(e,
                             detail::rel_err(a.jxjy_sym, b.jxjy_sym, floor2));
                e = std::max(e,
                             detail::rel_err(a.jzjx_sym, b.jzjx_sym, floor2));
                e = std::max(e,
                             detail::rel_err(a.jzjy_sym, b.jzjy_sym, floor2));

                double es = 0.0;
                for (Axis ax : {Axis::X, Axis::Y}) {
                    const SensitivityPoint sa =
                        sensitivity_exact(two_j, beta, phi, ax);
                    const SensitivityPoint sb =
                        oracle::sensitivity(prep, phi, 2, ax);
                    es = std::max(es,
                                  detail::rel_err(sa.slope, sb.slope, floor2));
                    es = std::max(es,
                                  detail::rel_err(sa.noise, sb.noise, floor1));
                    if (sa.informative() && sb.informative())
                        es = std::max(
                            es, detail::rel_err(*sa.delta_phi, *sb.delta_phi,
                                                1e-300));
                }

                ++rep.points;
                if (std::max(e, es) >
                    std::max(rep.max_rel_moments, rep.max_rel_sensitivity)) {
                    rep.worst_two_j = two_j;
                    rep.worst_beta = beta;
                    rep.worst_phi = phi;
                }
                rep.max_rel_moments = std::max(rep.max_rel_moments, e);
                rep.max_rel_sensitivity = std::max(rep.max_rel_sensitivity, es);
            }
        }
    }
    return rep;
}

}  // namespace qmet
