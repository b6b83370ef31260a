#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ckr/cavity.hpp"
#include "ckr/dynamics.hpp"
#include "ckr/errors.hpp"
#include "ckr/params.hpp"

namespace ckr {

inline double mod_2pi(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

// wrap to (-pi, pi]
inline double wrap_pi(double a) {
    double r = std::fmod(a, two_pi);
    if (r > pi) r -= two_pi;
    if (r <= -pi) r += two_pi;
    return r;
}

inline double circular_distance(double a, double b) { return std::abs(wrap_pi(a - b)); }

struct TransmissionSeries {
    std::vector<double> samples;  // transmitted fractions S_n / I0
    NormalizedParams params;
    std::uint64_t seed = 0;

    void validate() const {
        if (samples.size() < 3) throw SizeError("TransmissionSeries: need at least 3 samples");
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (!(samples[i] > 0.0 && samples[i] <= 1.0))
                throw SignalRangeError("TransmissionSeries: sample " + std::to_string(i) +
                                       " outside (0, 1]");
    }
};

inline TransmissionSeries transmission_series(const TrajectoryRecord& rec) {
    TransmissionSeries ts;
    ts.params = rec.params;
    ts.seed = rec.seed;
    ts.samples.reserve(rec.kicks.size());
    for (const auto& k : rec.kicks) ts.samples.push_back(k.S_over_I0);
    return ts;
}

struct InversionResult {
    double x_base = 0.0;  // position folded to [0, pi]
    double I_c = 0.0;
    double K_eff = 0.0;
    int iterations = 0;
};

// Inverts transmitted fractions back to the folded atom position. The phase,
// Kerr shift and Rabi frequency are each algebraically invertible; the loop
// refines the intracavity-intensity estimate exactly as in the forward
// autoconsistency problem, starting from the bare cavity (k_L DeltaL = 0).
class TransmissionInverter {
  public:
    TransmissionInverter(const NormalizedParams& np, double tol = 1e-12, int max_iter = 50)
        : np_(np), tol_(tol), max_iter_(max_iter) {
        if (!(tol > 0.0)) throw ParamError("TransmissionInverter: tol must be positive");
        if (max_iter < 1) throw ParamError("TransmissionInverter: max_iter must be >= 1");
        validate_flank(np, np.I0);
        const KerrRange kr = kerr_range(np, np.I0);
        const double phi_lo = np.phi0 + 0.5 * kr.klDL_lo;
        const double phi_hi = np.phi0 + 0.5 * kr.klDL_hi;
        // S decreases with phase on the (0, pi/2) flank
        s_min_ = transmitted_fraction(phi_hi, np.F);
        s_max_ = transmitted_fraction(phi_lo, np.F);
    }

    InversionResult invert(double S_over_I0) const {
        const double slack = 1e-9;
        if (!(S_over_I0 > 0.0 && S_over_I0 <= 1.0))
            throw SignalRangeError("invert_transmission: sample outside (0, 1]");
        if (S_over_I0 > s_max_ * (1.0 + slack) || S_over_I0 < s_min_ * (1.0 - slack))
            throw SignalRangeError("invert_transmission: transmission unreachable on the operating flank");

        const double d = np_.delta_over_gamma;
        double I_c = airy_intensity(np_.phi0, np_.F, np_.tmirror, np_.I0);  // L_opt = L estimate
        double x_prev = std::numeric_limits<double>::quiet_NaN();
        double residual = 0.0;
        for (int it = 1; it <= max_iter_; ++it) {
            double arg = (1.0 / S_over_I0 - 1.0) / (np_.F * np_.F);  // sin^2(phase)
            if (arg < -1e-9 || arg > 1.0 + 1e-9)
                throw SignalRangeError("invert_transmission: implied sin^2 outside [0, 1]");
            arg = std::clamp(arg, 0.0, 1.0);
            const double phase = std::asin(std::sqrt(arg));
            const double klDL = 2.0 * (phase - np_.phi0);
            if (klDL * d <= 0.0)
                throw SignalRangeError("invert_transmission: phase on the wrong side of phi0");

            // invert the Kerr Lorentzian for Omega^2/(2 Gamma^2)
            const double w = np_.kerr_scale * d / klDL - d * d - 0.25;
            // cos^2(X/2) = Omega^2 / Omega0^2 with Omega0^2 = (Gamma^2/2)(I_c/I_s)
            double c = 4.0 * w * np_.I_sat / I_c;
            if (c < -1e-6 || c > 1.0 + 1e-6)
                throw InconsistentSignalError("invert_transmission: implied cos^2 = " +
                                              std::to_string(c) + " outside [0, 1]");
            c = std::clamp(c, 0.0, 1.0);
            // double-precision transmission cannot resolve x closer than ~1e-6
            // to the degenerate points where dS/dx vanishes; snap to make the
            // endpoint inversion exact
            if (c < kSnap) c = 0.0;
            if (c > 1.0 - kSnap) c = 1.0;
            const double x = 2.0 * std::acos(std::sqrt(c));

            I_c = airy_intensity(np_.phi0 + 0.5 * klDL, np_.F, np_.tmirror, np_.I0);
            residual = std::abs(x - x_prev);
            if (residual < tol_) {
                InversionResult r;
                r.x_base = x;
                r.I_c = I_c;
                r.K_eff = np_.kick_calibration * I_c;
                r.iterations = it;
                return r;
            }
            x_prev = x;
        }
        throw SolverError("invert_transmission: no convergence", residual, max_iter_);
    }

  private:
    static constexpr double kSnap = 1e-10;
    NormalizedParams np_;
    double tol_;
    int max_iter_;
    double s_min_ = 0.0;
    double s_max_ = 1.0;
};

inline InversionResult invert_transmission(double S_over_I0, const NormalizedParams& np,
                                           double tol = 1e-12, int max_iter = 50) {
    return TransmissionInverter(np, tol, max_iter).invert(S_over_I0);
}

// The two positions on [0, 2pi) producing the same transmission.
inline std::array<double, 2> candidate_positions(double x_base) {
    return {x_base, mod_2pi(two_pi - x_base)};
}

// The two momentum determinations from consecutive positions (sign discarded:
// P and -P trace the same phase portrait).
inline std::array<double, 2> candidate_momenta(double x_prev, double x_next) {
    return {mod_2pi(x_next - x_prev), mod_2pi(x_next + x_prev)};
}

// Consistency of consecutive momenta with the map's kick at the middle point,
// minimized over the global P -> -P freedom (both momenta negated jointly).
inline double coherence_residual(double p1, double p2, double x2, double K2) {
    const double kick = K2 * std::sin(x2);
    const double r1 = std::abs(wrap_pi(p2 - p1 + kick));
    const double r2 = std::abs(wrap_pi(p1 - p2 + kick));
    return std::min(r1, r2);
}

struct ReconstructedTrajectory {
    std::vector<double> x;       // [0, 2pi), one per emitted point
    std::vector<double> p;       // [0, 2pi), momentum between point n and n+1
    std::vector<double> K_series;
    std::vector<std::uint8_t> restart_flag;  // 1 where a coherence re-enumeration fired
    std::vector<std::uint8_t> flag;          // 1 where no branch combination passed
    std::vector<std::size_t> flagged;        // indices of flagged points
    int restarts = 0;
};

namespace detail {

struct BranchState {
    const std::vector<double>& bases;
    std::vector<std::uint8_t> b;

    double pos(std::size_t n) const {
        return b[n] ? mod_2pi(two_pi - bases[n]) : bases[n];
    }
};

inline double triple_residual(const BranchState& st, std::size_t m, const std::vector<double>& K) {
    const double x0 = st.pos(m - 2);
    const double x1 = st.pos(m - 1);
    const double x2 = st.pos(m);
    const double pa = mod_2pi(x1 - x0);
    const double pb = mod_2pi(x2 - x1);
    return coherence_residual(pa, pb, x1, K[m - 1]);
}

}  // namespace detail

// Steps i-iv of the reconstruction. Determination policy: a new point enters
// with the branch nearest the free-flight prediction x_prev + p_prev (between
// kicks the motion is free); the Eq.-of-motion coherence test then vets the
// choice. A failed test is one restart: the last three position branches are
// re-enumerated lexicographically, most recent varying fastest, and the first
// passing combination wins. If none passes the minimal-residual combination is
// kept and the point flagged. Deterministic throughout.
inline ReconstructedTrajectory reconstruct_trajectory(const TransmissionSeries& ts, double eps,
                                                      double tol = 1e-12, int max_iter = 50,
                                                      bool flip_first = false) {
    ts.validate();
    if (!(eps > 0.0)) throw ParamError("reconstruct_trajectory: eps must be positive");
    const std::size_t N = ts.samples.size();

    TransmissionInverter inverter(ts.params, tol, max_iter);
    std::vector<double> bases(N), K(N);
    for (std::size_t n = 0; n < N; ++n) {
        try {
            const InversionResult r = inverter.invert(ts.samples[n]);
            bases[n] = r.x_base;
            K[n] = r.K_eff;
        } catch (const SignalRangeError& e) {
            throw SignalRangeError("sample " + std::to_string(n) + ": " + e.what());
        } catch (const InconsistentSignalError& e) {
            throw InconsistentSignalError("sample " + std::to_string(n) + ": " + e.what());
        } catch (const SolverError& e) {
            throw SolverError("sample " + std::to_string(n) + ": " + std::string(e.what()),
                              e.residual, e.iterations);
        }
    }

    detail::BranchState st{bases, std::vector<std::uint8_t>(N, 0)};
    st.b[0] = flip_first ? 1 : 0;

    ReconstructedTrajectory out;
    out.restart_flag.assign(N - 1, 0);
    out.flag.assign(N - 1, 0);

    for (std::size_t m = 2; m < N; ++m) {
        const double x0 = st.pos(m - 2);
        const double x1 = st.pos(m - 1);
        const double pred = mod_2pi(x1 + mod_2pi(x1 - x0));
        const auto cand = candidate_positions(bases[m]);
        st.b[m] = circular_distance(cand[1], pred) < circular_distance(cand[0], pred) ? 1 : 0;

        if (detail::triple_residual(st, m, K) < eps) continue;

        ++out.restarts;
        const std::size_t row = std::min(m, N - 2);
        out.restart_flag[row] = 1;

        const std::array<std::uint8_t, 3> current = {st.b[m - 2], st.b[m - 1], st.b[m]};
        double best_r = std::numeric_limits<double>::infinity();
        std::array<std::uint8_t, 3> best = current;
        bool accepted = false;
        for (int c0 = 0; c0 < 2 && !accepted; ++c0)
            for (int c1 = 0; c1 < 2 && !accepted; ++c1)
                for (int c2 = 0; c2 < 2 && !accepted; ++c2) {
                    st.b[m - 2] = current[0] ^ static_cast<std::uint8_t>(c0);
                    st.b[m - 1] = current[1] ^ static_cast<std::uint8_t>(c1);
                    st.b[m] = current[2] ^ static_cast<std::uint8_t>(c2);
                    const double r = detail::triple_residual(st, m, K);
                    if (r < best_r) {
                        best_r = r;
                        best = {st.b[m - 2], st.b[m - 1], st.b[m]};
                    }
                    if (r < eps) accepted = true;
                }
        if (!accepted) {
            st.b[m - 2] = best[0];
            st.b[m - 1] = best[1];
            st.b[m] = best[2];
            out.flag[row] = 1;
            out.flagged.push_back(row);
        }
    }

    out.x.resize(N - 1);
    out.p.resize(N - 1);
    out.K_series.resize(N - 1);
    for (std::size_t n = 0; n + 1 < N; ++n) {
        out.x[n] = st.pos(n);
        out.p[n] = mod_2pi(st.pos(n + 1) - st.pos(n));
        out.K_series[n] = K[n];
    }
    return out;
}

}  // namespace ckr
