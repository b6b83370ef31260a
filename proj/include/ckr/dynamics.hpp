#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ckr/cavity.hpp"
#include "ckr/errors.hpp"
#include "ckr/params.hpp"
#include "ckr/rng.hpp"

namespace ckr {

struct State {
    double X = 0.0;  // reduced position, unbounded
    double P = 0.0;  // reduced momentum, unbounded
};

struct KickRecord {
    int n = 0;
    double X = 0.0;          // position the kick is applied at (post-drift)
    double P = 0.0;          // momentum after kick and recoil
    double K_eff = 0.0;
    double S_over_I0 = 0.0;  // transmitted fraction read at the kicked position
    double se_dp = 0.0;      // realized recoil, in {-kbar, 0, +kbar}
    double g_a = 0.0;        // fluorescence probability at this kick
};

struct TrajectoryRecord {
    NormalizedParams params;
    std::uint64_t seed = 0;
    std::vector<KickRecord> kicks;
};

// Per-pulse probability of one absorption-emission cycle.
inline double fluorescence_probability(double Omega2, double Delta, double Gamma, double tau) {
    if (!(Omega2 >= 0.0)) throw ParamError("fluorescence_probability: Omega2 must be >= 0");
    const double g = 0.5 * Gamma * (0.5 * Omega2) /
                     (Delta * Delta + 0.5 * Omega2 + 0.25 * Gamma * Gamma) * tau;
    if (g >= 1.0)
        throw ParamError("fluorescence_probability: g_a = " + std::to_string(g) +
                         " >= 1; more than one fluorescence cycle per pulse");
    return g;
}

struct RecoilDraw {
    double dp = 0.0;
    bool fluoresced = false;
};

// Absorption recoil +-kbar/2 and emission recoil +-kbar/2, independent signs:
// conditional outcomes {-kbar, 0, +kbar} with probabilities {1/4, 1/2, 1/4}.
// Always consumes one uniform for the cycle decision so streams stay aligned
// across g values.
inline RecoilDraw sample_spontaneous_recoil(double g_a, double kbar, SplitMix64& rng) {
    if (!(g_a >= 0.0 && g_a < 1.0))
        throw ParamError("sample_spontaneous_recoil: g_a outside [0, 1)");
    RecoilDraw d;
    const double alpha = rng.next_double();
    if (alpha < g_a) {
        d.fluoresced = true;
        const double eta_a = rng.next_double() < 0.5 ? -0.5 * kbar : 0.5 * kbar;
        const double eta_sp = rng.next_double() < 0.5 ? -0.5 * kbar : 0.5 * kbar;
        d.dp = eta_a + eta_sp;
    }
    return d;
}

struct KickOptions {
    std::optional<double> g_override;  // constant SE probability; nullopt = physical g_a
    double solver_tol = 1e-12;
    int solver_max_iter = 50;
};

// Deterministic part of one kick: drift, cavity solve at the new position,
// momentum kick. Eq ordering: free flight first, kick applied at the arrival
// position (that is the intensity the cavity sees during the pulse).
struct DriftKick {
    State state;
    CavityOperatingPoint op;
    double g_a = 0.0;
};

inline DriftKick drift_kick(const State& s, const NormalizedParams& np,
                            const KickOptions& opts = {}) {
    DriftKick r;
    const double X1 = s.X + s.P;
    r.op = solve_cavity_field(X1, np, np.I0, opts.solver_tol, opts.solver_max_iter);
    r.state.X = X1;
    r.state.P = s.P - r.op.K_eff * std::sin(X1);
    if (opts.g_override)
        r.g_a = *opts.g_override;
    else
        r.g_a = fluorescence_probability(r.op.Omega2, np.delta_over_gamma * np.gamma, np.gamma,
                                         np.tau);
    return r;
}

inline std::pair<State, KickRecord> kick_step(const State& s, const NormalizedParams& np,
                                              SplitMix64& rng, const KickOptions& opts = {},
                                              int n = 0) {
    DriftKick dk = drift_kick(s, np, opts);
    const RecoilDraw recoil = sample_spontaneous_recoil(dk.g_a, np.kbar, rng);
    dk.state.P += recoil.dp;

    KickRecord rec;
    rec.n = n;
    rec.X = dk.state.X;
    rec.P = dk.state.P;
    rec.K_eff = dk.op.K_eff;
    rec.S_over_I0 = dk.op.S_over_I0;
    rec.se_dp = recoil.dp;
    rec.g_a = dk.g_a;
    return {dk.state, rec};
}

inline TrajectoryRecord simulate_trajectory(State initial, int N, const NormalizedParams& np,
                                            std::uint64_t seed, const KickOptions& opts = {}) {
    if (N < 1) throw ParamError("simulate_trajectory: N must be >= 1");
    TrajectoryRecord rec;
    rec.params = np;
    rec.seed = seed;
    rec.kicks.reserve(static_cast<std::size_t>(N));
    SplitMix64 rng = derive_stream(seed, 0);
    State s = initial;
    for (int n = 0; n < N; ++n) {
        try {
            auto [next, kr] = kick_step(s, np, rng, opts, n);
            s = next;
            rec.kicks.push_back(kr);
        } catch (const Error& e) {
            throw Error("kick " + std::to_string(n) + ": " + e.what());
        }
    }
    return rec;
}

struct EnsembleResult {
    std::vector<TrajectoryRecord> records;               // in input order; failed entries empty
    std::vector<std::pair<std::size_t, std::string>> errors;  // (trajectory index, message)
};

// Trajectory i uses the RNG stream derived from (seed, i); stream 0 coincides
// with simulate_trajectory's, so a singleton ensemble reproduces it exactly.
inline EnsembleResult simulate_ensemble(const std::vector<State>& initials, int N,
                                        const NormalizedParams& np, std::uint64_t seed,
                                        const KickOptions& opts = {}) {
    EnsembleResult out;
    out.records.resize(initials.size());
    for (std::size_t i = 0; i < initials.size(); ++i) {
        try {
            TrajectoryRecord rec;
            rec.params = np;
            rec.seed = seed;
            rec.kicks.reserve(static_cast<std::size_t>(N));
            SplitMix64 rng = derive_stream(seed, i);
            State s = initials[i];
            for (int n = 0; n < N; ++n) {
                auto [next, kr] = kick_step(s, np, rng, opts, n);
                s = next;
                rec.kicks.push_back(kr);
            }
            out.records[i] = std::move(rec);
        } catch (const Error& e) {
            out.errors.emplace_back(i, e.what());
        }
    }
    return out;
}

}  // namespace ckr
