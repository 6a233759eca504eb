#pragma once

// Cantilever modal analysis: Euler-Bernoulli beam with Hermite-cubic finite
// elements, a rigid end body at the tip, and optical-readout projection of
// the mass-normalized mode shapes.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "errors.hpp"

namespace subsql {

enum class ModeLabel { fundamental, pitch, higher };

inline const char* to_string(ModeLabel l) {
    switch (l) {
        case ModeLabel::fundamental: return "fundamental";
        case ModeLabel::pitch: return "pitch";
        default: return "higher";
    }
}

// Rigid body attached at the beam tip, coupling deflection and rotation
// through the offset of its center of mass.
struct EndBody {
    double mass_kg = 0.0;
    double rotary_inertia_kgm2 = 0.0;
    double center_offset_m = 0.0;

    void validate() const {
        if (mass_kg < 0.0) throw arg_error("end body: mass must be >= 0");
        if (rotary_inertia_kgm2 < 0.0)
            throw arg_error("end body: rotary inertia must be >= 0");
        if (center_offset_m < 0.0)
            throw arg_error("end body: center offset must be >= 0");
    }
};

struct BeamModel {
    double length_m = 0.0;
    double flexural_rigidity = 0.0;  // EI, N m^2
    double mass_per_length = 0.0;    // rho*A, kg/m
    EndBody end_body;                // all-zero body reduces to a bare beam
    int n_elements = 100;

    void validate() const {
        if (length_m <= 0.0) throw arg_error("beam: length must be > 0");
        if (flexural_rigidity <= 0.0) throw arg_error("beam: EI must be > 0");
        if (mass_per_length <= 0.0) throw arg_error("beam: rho*A must be > 0");
        if (n_elements < 4) throw arg_error("beam: n_elements must be >= 4");
        end_body.validate();
    }
};

struct SectionProperties {
    double flexural_rigidity = 0.0;  // N m^2
    double mass_per_length = 0.0;    // kg/m
};

// Transformed-section properties of a layered rectangular cross-section:
// bending stiffness about the modulus-weighted neutral axis plus the summed
// line density.
inline SectionProperties composite_section(const std::vector<Layer>& layers, double width_um) {
    if (layers.empty()) throw arg_error("composite_section: no layers");
    if (width_um <= 0.0) throw arg_error("composite_section: width must be > 0");
    const double w = width_um * 1e-6;

    double ea = 0.0, ea_z = 0.0, z = 0.0;
    for (const Layer& l : layers) {
        const double t = l.thickness_nm * 1e-9;
        if (t <= 0.0) throw arg_error("composite_section: layer thickness must be > 0");
        const double e = l.material.youngs_modulus;
        ea += e * t;
        ea_z += e * t * (z + 0.5 * t);
        z += t;
    }
    const double z_na = ea_z / ea;

    SectionProperties s;
    z = 0.0;
    for (const Layer& l : layers) {
        const double t = l.thickness_nm * 1e-9;
        const double e = l.material.youngs_modulus;
        const double zc = z + 0.5 * t;
        s.flexural_rigidity += e * (w * t * t * t / 12.0 + w * t * (zc - z_na) * (zc - z_na));
        s.mass_per_length += l.material.density * w * t;
        z += t;
    }
    return s;
}

// The cantilever carries only the trailing support pair; the rest of the
// stack rides on the pad, whose disc inertia enters through the end body.
inline BeamModel beam_from_point(const DesignPoint& dp, int n_elements = 100) {
    dp.validate();
    if (dp.stack.layers.size() < 2)
        throw stack_error("beam_from_point: stack needs at least 2 layers");

    const std::vector<Layer> pair(dp.stack.layers.end() - 2, dp.stack.layers.end());
    const SectionProperties sec = composite_section(pair, dp.geometry.w_um);

    BeamModel bm;
    bm.length_m = dp.geometry.l_um * 1e-6;
    bm.flexural_rigidity = sec.flexural_rigidity;
    bm.mass_per_length = sec.mass_per_length;
    bm.n_elements = n_elements;

    const double r_m = dp.geometry.r_um * 1e-6;
    const double m = pad_mass(dp.stack, dp.geometry.r_um);
    bm.end_body.mass_kg = m;
    bm.end_body.center_offset_m = r_m;
    bm.end_body.rotary_inertia_kgm2 = m * (r_m * r_m / 4.0 + r_m * r_m);
    bm.validate();
    return bm;
}

struct Mode {
    int index = 0;              // 1-based, ascending frequency
    double frequency_hz = 0.0;
    double tip_deflection = 0.0;  // mass-normalized shape at the tip node
    double tip_slope = 0.0;       // 1/m scale times deflection units
    ModeLabel label = ModeLabel::higher;
};

namespace detail {

// Global K and M for the free-free mesh (node DOFs: deflection, slope),
// end-body inertia added at the tip node.
inline void assemble(const BeamModel& bm, Eigen::MatrixXd& K, Eigen::MatrixXd& M) {
    const int ne = bm.n_elements;
    const int n = 2 * (ne + 1);
    const double le = bm.length_m / ne;
    const double kf = bm.flexural_rigidity / (le * le * le);
    const double mf = bm.mass_per_length * le / 420.0;

    Eigen::Matrix4d ke, me;
    ke << 12, 6 * le, -12, 6 * le,
          6 * le, 4 * le * le, -6 * le, 2 * le * le,
          -12, -6 * le, 12, -6 * le,
          6 * le, 2 * le * le, -6 * le, 4 * le * le;
    ke *= kf;
    me << 156, 22 * le, 54, -13 * le,
          22 * le, 4 * le * le, 13 * le, -3 * le * le,
          54, 13 * le, 156, -22 * le,
          -13 * le, -3 * le * le, -22 * le, 4 * le * le;
    me *= mf;

    K = Eigen::MatrixXd::Zero(n, n);
    M = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < ne; ++e) {
        const int b = 2 * e;
        K.block<4, 4>(b, b) += ke;
        M.block<4, 4>(b, b) += me;
    }

    const double mb = bm.end_body.mass_kg;
    const double c = bm.end_body.center_offset_m;
    M(n - 2, n - 2) += mb;
    M(n - 2, n - 1) += mb * c;
    M(n - 1, n - 2) += mb * c;
    M(n - 1, n - 1) += bm.end_body.rotary_inertia_kgm2;
}

} // namespace detail

// Root-clamped system matrices (DOF order: node deflection, node slope from
// the first free node to the tip).
struct ModalSystem {
    Eigen::MatrixXd K;
    Eigen::MatrixXd M;
};

inline ModalSystem assemble_clamped(const BeamModel& bm) {
    bm.validate();
    const int n_dof = 2 * bm.n_elements;
    Eigen::MatrixXd K, M;
    detail::assemble(bm, K, M);
    ModalSystem sys;
    sys.K = K.bottomRightCorner(n_dof, n_dof);
    sys.M = M.bottomRightCorner(n_dof, n_dof);
    return sys;
}

struct ModalSolution {
    std::vector<Mode> modes;
    Eigen::MatrixXd shapes;  // column k: mass-normalized shape of modes[k]
};

// All eigenpairs of the root-clamped model, mass-normalized (V^T M V = I),
// sign-fixed so the tip deflection (or, failing that, the tip slope) is
// positive. Returns the lowest n_modes; 2*n_elements is the full spectrum.
inline ModalSolution solve_modal_system(const BeamModel& bm, int n_modes) {
    bm.validate();
    const int n_dof = 2 * bm.n_elements;  // after clamping the root node
    if (n_modes < 1) throw arg_error("solve_modes: n_modes must be >= 1");
    if (n_modes > n_dof)
        throw arg_error("solve_modes: mesh supports at most 2*n_elements modes");

    const ModalSystem sys = assemble_clamped(bm);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        sys.K, sys.M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw numeric_error("modal eigensolve failed (n_elements=" +
                            std::to_string(bm.n_elements) + ")");

    const double c = bm.end_body.center_offset_m;
    ModalSolution sol;
    sol.modes.reserve(static_cast<std::size_t>(n_modes));
    sol.shapes.resize(n_dof, n_modes);
    for (int k = 0; k < n_modes; ++k) {
        const double lambda = es.eigenvalues()(k);
        if (!(lambda > 0.0))
            throw numeric_error("modal eigensolve: non-positive eigenvalue at mode " +
                                std::to_string(k + 1));
        Mode m;
        m.index = k + 1;
        m.frequency_hz = std::sqrt(lambda) / (2.0 * std::numbers::pi);
        m.tip_deflection = es.eigenvectors()(n_dof - 2, k);
        m.tip_slope = es.eigenvectors()(n_dof - 1, k);
        const bool flip =
            m.tip_deflection < 0.0 || (m.tip_deflection == 0.0 && m.tip_slope < 0.0);
        if (flip) {
            m.tip_deflection = -m.tip_deflection;
            m.tip_slope = -m.tip_slope;
        }
        sol.shapes.col(k) = (flip ? -1.0 : 1.0) * es.eigenvectors().col(k);
        sol.modes.push_back(m);
    }

    // Rotation-dominated readout at the pad center marks the pitch mode: the
    // offset-times-slope term outweighs the net center motion d + c*s. The
    // lowest such mode above the fundamental gets the label.
    if (!sol.modes.empty()) sol.modes[0].label = ModeLabel::fundamental;
    bool pitch_found = false;
    for (std::size_t k = 1; k < sol.modes.size(); ++k) {
        const double d = sol.modes[k].tip_deflection;
        const double s = sol.modes[k].tip_slope;
        if (!pitch_found && std::abs(c * s) > std::abs(d + c * s)) {
            sol.modes[k].label = ModeLabel::pitch;
            pitch_found = true;
        } else {
            sol.modes[k].label = ModeLabel::higher;
        }
    }
    return sol;
}

inline std::vector<Mode> solve_modes(const BeamModel& bm, int n_modes) {
    return solve_modal_system(bm, n_modes).modes;
}

struct ModeReadout {
    double coupling = 0.0;  // mass-normalized modal gain at the laser spot
    double m_eff_kg = 0.0;  // 1/coupling^2; 0 when decoupled
    bool coupled = false;
};

// Projects each mode onto the optical readout a_k = d_k + (c + y) * s_k.
// Modes whose |a_k| fall a factor 1e6 below the strongest one are treated as
// decoupled and carry no effective mass.
inline std::vector<ModeReadout> readout_coupling(const std::vector<Mode>& modes,
                                                 double center_offset_m,
                                                 double spot_offset_m) {
    if (center_offset_m < 0.0 || spot_offset_m < 0.0)
        throw arg_error("readout_coupling: offsets must be >= 0");
    const double lever = center_offset_m + spot_offset_m;

    std::vector<ModeReadout> out(modes.size());
    double a_max = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        out[k].coupling = modes[k].tip_deflection + lever * modes[k].tip_slope;
        a_max = std::max(a_max, std::abs(out[k].coupling));
    }
    const double floor = 1e-6 * a_max;
    for (auto& r : out) {
        r.coupled = a_max > 0.0 && std::abs(r.coupling) >= floor;
        r.m_eff_kg = r.coupled ? 1.0 / (r.coupling * r.coupling) : 0.0;
    }
    return out;
}

} // namespace subsql
