// Shared result types: angular-momentum moment sets and sensitivity points.
#pragma once

#include <optional>
#include <string_view>

namespace qmet {

enum class Axis { X, Y };

enum class Provenance { Exact, Fringe, Gaussian, Oracle, CoherentModel };

// First and second moments of the collective angular momentum for a probe
// state at phase phi.  Cross moments are the symmetrized halves,
// e.g. jxjy_sym = <JxJy + JyJx>/2.
struct MomentSet {
    double jx = 0, jy = 0, jz = 0;
    double jx2 = 0, jy2 = 0, jz2 = 0;
    double jxjy_sym = 0, jzjx_sym = 0, jzjy_sym = 0;
    Provenance provenance = Provenance::Exact;

    double var_x() const { return jx2 - jx * jx; }
    double var_y() const { return jy2 - jy * jy; }
    double var_z() const { return jz2 - jz * jz; }
    double var(Axis a) const { return a == Axis::X ? var_x() : var_y(); }
    double mean(Axis a) const { return a == Axis::X ? jx : jy; }
};

enum class SensitivityModel { Exact, Fringe, Gaussian, ShortTime, Equator };

// delta_phi = noise/|slope| at an operating phase; empty delta_phi means the
// configuration carries no information (zero slope), which is reported as a
// distinct state rather than an infinity.
struct SensitivityPoint {
    double phi = 0.0;
    Axis axis = Axis::Y;
    std::optional<double> delta_phi;
    double slope = 0.0;  // d<J_axis>/dphi
    double noise = 0.0;  // Delta J_axis
    SensitivityModel model = SensitivityModel::Exact;

    bool informative() const { return delta_phi.has_value(); }
};

inline std::string_view to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

inline std::string_view to_string(SensitivityModel m) {
    switch (m) {
        case SensitivityModel::Exact: return "exact";
        case SensitivityModel::Fringe: return "fringe";
        case SensitivityModel::Gaussian: return "gaussian";
        case SensitivityModel::ShortTime: return "short_time";
        case SensitivityModel::Equator: return "equator";
    }
    return "?";
}

}  // namespace qmet
