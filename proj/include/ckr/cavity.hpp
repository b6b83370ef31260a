#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ckr/constants.hpp"
#include "ckr/errors.hpp"
#include "ckr/params.hpp"

namespace ckr {

// Intracavity intensity of a symmetric Fabry-Perot at round-trip phase phi.
inline double airy_intensity(double phi, double F, double Tmirror, double I0) {
    const double s = std::sin(phi);
    return I0 * (1.0 / Tmirror) / (1.0 + F * F * s * s);
}

// Transmitted fraction S/I0 at round-trip phase phi; equals Tmirror*I_c/I0.
inline double transmitted_fraction(double phi, double F) {
    const double s = std::sin(phi);
    return 1.0 / (1.0 + F * F * s * s);
}

// Squared Rabi frequency at reduced position X, with Omega0^2 = (Gamma^2/2)(I_c/I_s)
// and the standing-wave factor cos^2(k_L x) = cos^2(X/2) under 2 k_L x -> X.
inline double rabi_squared(double I_c, double X, double Gamma, double I_s) {
    const double c = std::cos(0.5 * X);
    return 0.5 * Gamma * Gamma * (I_c / I_s) * c * c;
}

// Atom-induced optical-length correction k_L * DeltaL. Sign follows Delta.
inline double kerr_dephasing(double Omega2, const NormalizedParams& np) {
    const double d = np.delta_over_gamma;
    const double denom = d * d + Omega2 / (2.0 * np.gamma * np.gamma) + 0.25;
    return np.kerr_scale * d / denom;
}

// Kerr shift with the atom parked at a node (Omega^2 = 0): the largest |k_L DeltaL|.
inline double vacuum_kerr_dephasing(const NormalizedParams& np) {
    return kerr_dephasing(0.0, np);
}

struct CavityOperatingPoint {
    double I_c = 0.0;        // intracavity intensity (W/m^2)
    double S_over_I0 = 0.0;  // transmitted fraction
    double klDeltaL = 0.0;   // Kerr phase correction (rad)
    double Omega2 = 0.0;     // squared Rabi frequency at the atom (rad^2/s^2)
    double K_eff = 0.0;      // effective kick strength
    int iterations = 0;
};

// Self-consistent cavity field at reduced atom position X: the atom's local
// intensity sets the Kerr shift, which moves the Airy phase, which resets the
// intensity. Plain Picard iteration; the loop gain is ~1e-4 at the default
// operating point, so convergence is fast.
inline CavityOperatingPoint solve_cavity_field(double X, const NormalizedParams& np, double I0,
                                               double tol = 1e-12, int max_iter = 50,
                                               std::optional<double> initial_guess = std::nullopt) {
    if (!(tol > 0.0)) throw ParamError("solve_cavity_field: tol must be positive");
    if (max_iter < 1) throw ParamError("solve_cavity_field: max_iter must be >= 1");

    double I_c = initial_guess.value_or(airy_intensity(np.phi0, np.F, np.tmirror, I0));
    double klDL = 0.0;
    double Omega2 = 0.0;
    double residual = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Omega2 = rabi_squared(I_c, X, np.gamma, np.I_sat);
        klDL = kerr_dephasing(Omega2, np);
        const double I_next = airy_intensity(np.phi0 + 0.5 * klDL, np.F, np.tmirror, I0);
        residual = std::abs(I_next - I_c) / std::max(std::abs(I_next), 1e-300);
        I_c = I_next;
        if (residual < tol) {
            CavityOperatingPoint op;
            op.I_c = I_c;
            op.Omega2 = rabi_squared(I_c, X, np.gamma, np.I_sat);
            op.klDeltaL = kerr_dephasing(op.Omega2, np);
            op.S_over_I0 = transmitted_fraction(np.phi0 + 0.5 * op.klDeltaL, np.F);
            op.K_eff = np.kick_calibration * I_c;
            op.iterations = it;
            return op;
        }
    }
    throw SolverError("solve_cavity_field: no convergence (non-contracting Kerr regime?)",
                      residual, max_iter);
}

// Bounds of the Kerr phase shift over one spatial period: the extremes sit at
// the node (Omega^2 = 0) and at the antinode of the converged field.
struct KerrRange {
    double klDL_lo = 0.0;
    double klDL_hi = 0.0;
};

inline KerrRange kerr_range(const NormalizedParams& np, double I0, double tol = 1e-12,
                            int max_iter = 50) {
    const double at_node = vacuum_kerr_dephasing(np);
    const double at_antinode = solve_cavity_field(0.0, np, I0, tol, max_iter).klDeltaL;
    KerrRange r;
    r.klDL_lo = std::min(at_node, at_antinode);
    r.klDL_hi = std::max(at_node, at_antinode);
    return r;
}

// The reconstruction needs X -> S strictly monotone in cos^2(X/2), which holds
// only while every reachable phase phi0 + klDeltaL/2 stays inside one monotone
// flank of sin^2, i.e. within (0, pi/2). Checked analytically on the bounds and
// numerically on a grid.
inline void validate_flank(const NormalizedParams& np, double I0, int grid = 64,
                           double tol = 1e-12, int max_iter = 50) {
    if (np.delta_over_gamma == 0.0)
        throw ParamError("validate_flank: Delta = 0 gives no Kerr shift, position is unobservable");
    const KerrRange kr = kerr_range(np, I0, tol, max_iter);
    const double lo = std::min(np.phi0, np.phi0 + 0.5 * kr.klDL_lo);
    const double hi = std::max(np.phi0, np.phi0 + 0.5 * kr.klDL_hi);
    if (!(lo > 0.0) || !(hi < 0.5 * pi))
        throw ParamError("validate_flank: reachable phase interval leaves the monotone flank (0, pi/2)");

    double prev = -1.0;
    for (int i = 0; i <= grid; ++i) {
        // sweep X from pi (node) to 0 (antinode): cos^2 increases
        const double X = pi * (1.0 - static_cast<double>(i) / grid);
        const double S = solve_cavity_field(X, np, I0, tol, max_iter).S_over_I0;
        if (i > 0 && np.delta_over_gamma > 0.0 && !(S > prev))
            throw ParamError("validate_flank: S not strictly increasing in cos^2(X/2)");
        if (i > 0 && np.delta_over_gamma < 0.0 && !(S < prev))
            throw ParamError("validate_flank: S not strictly decreasing in cos^2(X/2)");
        prev = S;
    }
}

// Converts laboratory parameters to reduced units and calibrates the kick
// strength so that the self-consistent K at X_ref = 0 equals K_target.
inline NormalizedParams normalize(const PhysicalParams& p, double K_target, double phi0,
                                  double F = 1e6, double tol = 1e-12, int max_iter = 50) {
    p.validate();
    NormalizedParams np;
    np.kbar = 8.0 * p.omega_r() * p.T;
    np.F = F;
    np.phi0 = phi0;
    const double kl_Lat = p.k_L() * p.L_at;
    np.kerr_scale = 1.5 * pi / (kl_Lat * kl_Lat);
    np.delta_over_gamma = p.Delta / p.Gamma;
    np.g_scale = 0.5 * p.Gamma * p.tau;
    np.K_nominal = K_target;
    np.tmirror = p.Tmirror;
    np.I_sat = p.I_s;
    np.gamma = p.Gamma;
    np.tau = p.tau;
    np.I0 = p.I0;

    np.kick_calibration = 0.0;
    if (K_target != 0.0) {
        const double I_ref = solve_cavity_field(0.0, np, p.I0, tol, max_iter).I_c;
        np.kick_calibration = K_target / I_ref;
    }

    auto fin = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw ParamError(std::string("normalize: non-finite ") + name + " (extreme inputs?)");
    };
    fin(np.kbar, "kbar");
    fin(np.kerr_scale, "kerr_scale");
    fin(np.delta_over_gamma, "delta_over_gamma");
    fin(np.g_scale, "g_scale");
    fin(np.kick_calibration, "kick_calibration");
    np.validate();
    return np;
}

struct SensitivityReport {
    double max_abs_klDeltaL = 0.0; // over X in [0, 2pi)
    double dS_over_I0 = 0.0;       // (F/2) max|k_L DeltaL|
    double K_rel_variation = 0.0;  // (Kmax - Kmin)/Kmid over one spatial period
    bool K_variation_ok = true;    // false above 5%: kick modulation disturbs the KR
};

inline SensitivityReport sensitivity_report(const NormalizedParams& np, int grid = 128,
                                            double tol = 1e-12, int max_iter = 50) {
    SensitivityReport r;
    double kmin = 0.0, kmax = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double X = two_pi * static_cast<double>(i) / grid;
        const CavityOperatingPoint op = solve_cavity_field(X, np, np.I0, tol, max_iter);
        r.max_abs_klDeltaL = std::max(r.max_abs_klDeltaL, std::abs(op.klDeltaL));
        if (i == 0) {
            kmin = kmax = op.I_c;
        } else {
            kmin = std::min(kmin, op.I_c);
            kmax = std::max(kmax, op.I_c);
        }
    }
    r.dS_over_I0 = 0.5 * np.F * r.max_abs_klDeltaL;
    const double kmid = 0.5 * (kmin + kmax);
    r.K_rel_variation = kmid > 0.0 ? (kmax - kmin) / kmid : 0.0;
    r.K_variation_ok = !(r.K_rel_variation > 0.05);
    return r;
}

}  // namespace ckr
