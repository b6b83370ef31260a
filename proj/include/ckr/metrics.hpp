#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ckr/dynamics.hpp"
#include "ckr/errors.hpp"
#include "ckr/reconstruct.hpp"

namespace ckr {

struct PhasePoint {
    double x = 0.0;
    double p = 0.0;
};

// Wrapped Euclidean distance on the 2-torus, minimized over the phase map's
// reflection symmetry (x, p) -> (2pi - x, 2pi - p).
inline double torus_distance(const PhasePoint& a, const PhasePoint& b) {
    const double d_id = std::hypot(wrap_pi(a.x - b.x), wrap_pi(a.p - b.p));
    const double d_fl = std::hypot(wrap_pi(a.x + b.x), wrap_pi(a.p + b.p));
    return std::min(d_id, d_fl);
}

struct FidelityReport {
    double matched_fraction = 0.0;
    double mean_distance = 0.0;
    double restart_fraction = 0.0;
    double flagged_fraction = 0.0;
    std::size_t n_points = 0;
};

// Scores a reconstruction against ground truth. The symmetry-group element is
// picked once per trajectory by majority vote, so a reconstruction that mixes
// both images point-by-point cannot inflate its score.
inline FidelityReport trajectory_fidelity(const TrajectoryRecord& truth,
                                          const ReconstructedTrajectory& recon, double delta) {
    const std::size_t nt = truth.kicks.size();
    const std::size_t nr = recon.x.size();
    // the reconstruction loses the trailing point that has no successor to
    // derive a momentum from
    if (nt < nr || nt - nr > 2)
        throw AlignmentError("trajectory_fidelity: length mismatch beyond the seeding offset");
    const std::size_t n = nr;
    if (n == 0) throw SizeError("trajectory_fidelity: empty reconstruction");

    std::vector<double> d_id(n), d_fl(n);
    std::size_t flip_votes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const PhasePoint t{mod_2pi(truth.kicks[i].X), mod_2pi(truth.kicks[i].P)};
        const PhasePoint r{recon.x[i], recon.p[i]};
        d_id[i] = std::hypot(wrap_pi(t.x - r.x), wrap_pi(t.p - r.p));
        d_fl[i] = std::hypot(wrap_pi(t.x + r.x), wrap_pi(t.p + r.p));
        if (d_fl[i] < d_id[i]) ++flip_votes;
    }
    const bool use_flip = 2 * flip_votes > n;

    FidelityReport rep;
    rep.n_points = n;
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = use_flip ? d_fl[i] : d_id[i];
        sum += d;
        if (d < delta) ++matched;
    }
    rep.matched_fraction = static_cast<double>(matched) / static_cast<double>(n);
    rep.mean_distance = sum / static_cast<double>(n);
    rep.restart_fraction = static_cast<double>(recon.restarts) / static_cast<double>(n);
    rep.flagged_fraction = static_cast<double>(recon.flagged.size()) / static_cast<double>(n);
    return rep;
}

struct EnsembleFidelity {
    FidelityReport total;                    // aggregated over counts, not averaged fractions
    std::vector<FidelityReport> breakdown;
};

inline EnsembleFidelity ensemble_summary(
    const std::vector<std::pair<const TrajectoryRecord*, const ReconstructedTrajectory*>>& pairs,
    double delta) {
    if (pairs.empty()) throw SizeError("ensemble_summary: empty input");
    EnsembleFidelity out;
    out.breakdown.reserve(pairs.size());
    std::size_t n_total = 0, matched_total = 0, flagged_total = 0;
    long restarts_total = 0;
    double dist_sum = 0.0;
    for (const auto& [truth, recon] : pairs) {
        const FidelityReport r = trajectory_fidelity(*truth, *recon, delta);
        out.breakdown.push_back(r);
        n_total += r.n_points;
        matched_total += static_cast<std::size_t>(std::llround(r.matched_fraction * r.n_points));
        flagged_total += recon->flagged.size();
        restarts_total += recon->restarts;
        dist_sum += r.mean_distance * static_cast<double>(r.n_points);
    }
    out.total.n_points = n_total;
    out.total.matched_fraction = static_cast<double>(matched_total) / static_cast<double>(n_total);
    out.total.mean_distance = dist_sum / static_cast<double>(n_total);
    out.total.restart_fraction = static_cast<double>(restarts_total) / static_cast<double>(n_total);
    out.total.flagged_fraction = static_cast<double>(flagged_total) / static_cast<double>(n_total);
    return out;
}

}  // namespace ckr
