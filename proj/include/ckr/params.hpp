#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ckr/constants.hpp"
#include "ckr/errors.hpp"

namespace ckr {

// Laboratory-frame parameters, SI units throughout.
struct PhysicalParams {
    double lambda_L = 852e-9;   // laser wavelength (m)
    double M = 2.20695e-25;     // atom mass (kg)
    double Gamma = 1.0 / 30e-9; // natural linewidth (rad/s)
    double Delta = 1e3 / 30e-9; // laser-atom detuning (rad/s), sign = side of resonance
    double T = 20e-6;           // kick period (s)
    double tau = 1.2e-6;        // pulse duration (s)
    double I0 = 48.0;           // injected intensity (W/m^2)
    double I_s = 20.0;          // saturation intensity (W/m^2)
    double Tmirror = 1e-6;      // mirror intensity transmission
    double L = 1e-4;            // cavity physical length (m)
    double L_at = 1e-4;         // effective atomic volume linear size (m)
    int n_kicks = 150;          // planned kick count

    double k_L() const { return two_pi / lambda_L; }
    double omega_r() const { return hbar * k_L() * k_L() / (2.0 * M); }

    void validate() const {
        auto pos = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ParamError(std::string("PhysicalParams: ") + name + " must be positive and finite");
        };
        pos(lambda_L, "lambda_L");
        pos(M, "M");
        pos(Gamma, "Gamma");
        pos(T, "T");
        pos(tau, "tau");
        pos(I_s, "I_s");
        pos(Tmirror, "Tmirror");
        pos(L, "L");
        pos(L_at, "L_at");
        if (!(I0 >= 0.0) || !std::isfinite(I0))
            throw ParamError("PhysicalParams: I0 must be non-negative and finite");
        if (!std::isfinite(Delta))
            throw ParamError("PhysicalParams: Delta must be finite");
        if (!(Tmirror < 1.0))
            throw ParamError("PhysicalParams: Tmirror must be < 1");
        if (n_kicks < 1)
            throw ParamError("PhysicalParams: n_kicks must be >= 1");
    }
};

// Named presets loadable through the config layer.
inline PhysicalParams cesium_default() {
    return PhysicalParams{};  // the defaulted fields above are the cesium preset
}

// Reduced-unit parameter bundle. The trailing block carries the few physical
// scalars that the cavity and SE formulas still need (the transmission series
// snapshot must be self-sufficient for inversion).
struct NormalizedParams {
    double K_nominal = 0.0;        // calibrated kick strength target
    double kbar = 0.0;             // effective Planck constant, 8 omega_r T
    double F = 1e6;                // finesse parameter 2 sqrt(R)/Tmirror
    double phi0 = 0.0;             // bare-cavity phase, reduced to the Airy period [0, pi)
    double kerr_scale = 0.0;       // 3 pi / (2 (k_L L_at)^2)
    double delta_over_gamma = 0.0; // Delta / Gamma
    double g_scale = 0.0;          // Gamma tau / 2
    double kick_calibration = 0.0; // C with K_eff = C * I_c  (m^2/W)

    double tmirror = 1e-6;
    double I_sat = 20.0;
    double gamma = 1.0 / 30e-9;
    double tau = 1.2e-6;
    double I0 = 48.0;

    void validate() const {
        auto fin = [](double v, const char* name) {
            if (!std::isfinite(v))
                throw ParamError(std::string("NormalizedParams: non-finite ") + name);
        };
        fin(K_nominal, "K_nominal");
        fin(kbar, "kbar");
        fin(F, "F");
        fin(phi0, "phi0");
        fin(kerr_scale, "kerr_scale");
        fin(delta_over_gamma, "delta_over_gamma");
        fin(g_scale, "g_scale");
        fin(kick_calibration, "kick_calibration");
        if (!(F > 1.0)) throw ParamError("NormalizedParams: F must exceed 1");
        if (!(phi0 >= 0.0 && phi0 < pi)) throw ParamError("NormalizedParams: phi0 outside [0, pi)");
        if (!(kerr_scale > 0.0)) throw ParamError("NormalizedParams: kerr_scale must be positive");
    }
};

// Delta-kick validity and cavity-timescale diagnostics.
struct ValidityReport {
    double N_max = 0.0;          // [lambda^2 M c Tmirror / (2 h L)]^2
    double validity_ratio = 0.0; // lhs/rhs of the delta-kick condition at n_kicks
    bool kick_count_ok = true;   // false when n_kicks > N_max / 10
    double tau_c = 0.0;          // photon lifetime L / (c Tmirror)
    bool tau_ok = true;          // false when tau < 3 tau_c
    double F_expected = 0.0;     // 2 sqrt(1 - Tmirror) / Tmirror
    double F_mismatch = 0.0;     // |F - F_expected| / F
    bool F_consistent = true;    // false when mismatch > 1%
    // The paper's three inequivalent K formulas evaluated at the calibrated
    // operating point (they disagree by constant factors and tau vs T).
    double K_eq3 = 0.0;          // omega_r T tau Omega0^2 / Delta
    double K_half_T2 = 0.0;      // (1/2) omega_r T^2 Omega0^2 / Delta
    double K_airy_product = 0.0; // (omega_r T)(Gamma T)(Gamma/Delta)(I_c/I_s)
    std::vector<std::string> warnings;

    bool all_ok() const { return kick_count_ok && tau_ok && F_consistent && warnings.empty(); }
};

inline ValidityReport check_delta_kick_validity(const PhysicalParams& p, double F = 1e6,
                                                double I_c_operating = 0.0) {
    ValidityReport r;
    const double kL = p.k_L();
    const double root = p.lambda_L * p.lambda_L * p.M * c_light * p.Tmirror / (2.0 * planck_h * p.L);
    r.N_max = root * root;

    // <p^2>^(1/2) ~ 2 hbar k_L sqrt(N) after N kicks (diffusive estimate)
    const double p_rms = 2.0 * hbar * kL * std::sqrt(static_cast<double>(p.n_kicks));
    r.validity_ratio = p_rms * p.tau / (p.M * p.lambda_L);
    r.kick_count_ok = !(static_cast<double>(p.n_kicks) > r.N_max / 10.0);
    if (!r.kick_count_ok)
        r.warnings.push_back("n_kicks exceeds N_max/10; delta-kick approximation degrades");

    r.tau_c = p.L / (c_light * p.Tmirror);
    r.tau_ok = !(p.tau < 3.0 * r.tau_c);
    if (!r.tau_ok)
        r.warnings.push_back("pulse shorter than 3 photon lifetimes; cavity cannot follow the modulation");

    r.F_expected = 2.0 * std::sqrt(1.0 - p.Tmirror) / p.Tmirror;
    r.F_mismatch = std::abs(F - r.F_expected) / F;
    r.F_consistent = !(r.F_mismatch > 0.01);
    if (!r.F_consistent)
        r.warnings.push_back("F inconsistent with 2 sqrt(1-Tmirror)/Tmirror by more than 1%");

    if (std::abs(p.Delta) < 10.0 * p.Gamma)
        r.warnings.push_back("|Delta| below 10 Gamma; far-detuned treatment questionable");
    if (p.tau > p.T)
        r.warnings.push_back("pulse duration exceeds the kick period");

    if (I_c_operating > 0.0 && p.Delta != 0.0) {
        const double omega0_sq = (p.Gamma * p.Gamma / 2.0) * (I_c_operating / p.I_s);
        r.K_eq3 = p.omega_r() * p.T * p.tau * omega0_sq / p.Delta;
        r.K_half_T2 = 0.5 * p.omega_r() * p.T * p.T * omega0_sq / p.Delta;
        r.K_airy_product = (p.omega_r() * p.T) * (p.Gamma * p.T) * (p.Gamma / p.Delta) *
                           (I_c_operating / p.I_s);
    }
    return r;
}

struct Timescales {
    double t_E_kicks = 0.0;
    double t_L_kicks = 0.0;
    double t_E_seconds = 0.0;
    double t_L_seconds = 0.0;
    bool deep_quantum = false;  // kbar > 1: Ehrenfest time shorter than one kick
};

inline Timescales timescales(const NormalizedParams& np, double T) {
    if (!(np.kbar > 0.0)) throw ParamError("timescales: kbar must be positive");
    if (!(np.K_nominal > 0.0)) throw ParamError("timescales: K_nominal must be positive");
    Timescales t;
    const double te = std::log(1.0 / np.kbar);
    t.deep_quantum = te < 0.0;
    t.t_E_kicks = t.deep_quantum ? 0.0 : te;
    const double ratio = np.K_nominal / np.kbar;
    t.t_L_kicks = ratio * ratio;
    t.t_E_seconds = t.t_E_kicks * T;
    t.t_L_seconds = t.t_L_kicks * T;
    return t;
}

}  // namespace ckr
