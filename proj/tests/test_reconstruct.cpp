#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "ckr/cavity.hpp"
#include "ckr/dynamics.hpp"
#include "ckr/metrics.hpp"
#include "ckr/reconstruct.hpp"

using namespace ckr;

namespace {

NormalizedParams default_np() {
    return normalize(cesium_default(), 0.8, std::asin(1e-6));
}

KickOptions noiseless() {
    KickOptions o;
    o.g_override = 0.0;
    return o;
}

constexpr double kEps = 1e-3 * two_pi;

}  // namespace

TEST_CASE("candidate positions") {
    const auto a = candidate_positions(0.0);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    const auto b = candidate_positions(pi);
    CHECK(b[0] == Catch::Approx(pi));
    CHECK(b[1] == Catch::Approx(pi));
    const auto c = candidate_positions(1.0);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == Catch::Approx(two_pi - 1.0));
}

TEST_CASE("candidate momenta") {
    const auto a = candidate_momenta(0.0, 0.0);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    const auto b = candidate_momenta(1.0, 4.0);
    CHECK(b[0] == Catch::Approx(3.0));
    CHECK(b[1] == Catch::Approx(5.0));
}

TEST_CASE("momentum determinations exhaust the 2pi q ambiguity table") {
    // brute force over lattice offsets and both mirror classes of each point
    const double x1 = 1.1, x2 = 2.3;
    const auto mom = candidate_momenta(x1, x2);
    for (int q1 = -2; q1 <= 2; ++q1) {
        for (int q2 = -2; q2 <= 2; ++q2) {
            for (int m1 = 0; m1 < 2; ++m1) {
                for (int m2 = 0; m2 < 2; ++m2) {
                    const double X1 = m1 ? two_pi * q1 - x1 : x1 + two_pi * q1;
                    const double X2 = m2 ? two_pi * q2 - x2 : x2 + two_pi * q2;
                    const double p = mod_2pi(X2 - X1);
                    const bool hit = circular_distance(p, mom[0]) < 1e-12 ||
                                     circular_distance(p, mom[1]) < 1e-12 ||
                                     circular_distance(p, mod_2pi(-mom[0])) < 1e-12 ||
                                     circular_distance(p, mod_2pi(-mom[1])) < 1e-12;
                    CHECK(hit);
                }
            }
        }
    }
}

TEST_CASE("coherence residual") {
    // a triple satisfying the map identically
    const double p1 = 2.0, x2 = 0.7, K2 = 0.8;
    const double p2 = mod_2pi(p1 - K2 * std::sin(x2));
    CHECK(coherence_residual(p1, p2, x2, K2) < 1e-12);
    CHECK(coherence_residual(1.3, 1.3, 2.2, 0.0) == 0.0);
    CHECK(coherence_residual(0.0, pi, 0.0, 0.8) == Catch::Approx(pi));
}

TEST_CASE("inversion round trip at the degenerate points is exact") {
    const NormalizedParams np = default_np();
    const TransmissionInverter inv(np);
    const double s0 = solve_cavity_field(0.0, np, np.I0).S_over_I0;
    CHECK(inv.invert(s0).x_base == 0.0);
    const double spi = solve_cavity_field(pi, np, np.I0).S_over_I0;
    CHECK(inv.invert(spi).x_base == Catch::Approx(pi).margin(1e-15));
}

TEST_CASE("inversion round trip at generic positions") {
    const NormalizedParams np = default_np();
    const TransmissionInverter inv(np);
    for (double X : {0.4, 1.0, 2.0, 2.9}) {
        const auto op = solve_cavity_field(X, np, np.I0);
        const InversionResult r = inv.invert(op.S_over_I0);
        CHECK(r.x_base == Catch::Approx(X).margin(1e-8));
        CHECK(r.K_eff == Catch::Approx(op.K_eff).epsilon(1e-9));
        CHECK(r.iterations <= 10);
    }
    // the mirror image inverts to the same folded base
    const auto op = solve_cavity_field(two_pi - 1.0, np, np.I0);
    CHECK(inv.invert(op.S_over_I0).x_base == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("unreachable transmissions are rejected") {
    const NormalizedParams np = default_np();
    const TransmissionInverter inv(np);
    CHECK_THROWS_AS(inv.invert(1.0), SignalRangeError);   // resonance is off-flank
    CHECK_THROWS_AS(inv.invert(1e-9), SignalRangeError);  // deep off-resonant tail
}

TEST_CASE("series shorter than 3 samples is rejected") {
    TransmissionSeries ts;
    ts.params = default_np();
    ts.samples = {0.5, 0.5};
    CHECK_THROWS_AS(reconstruct_trajectory(ts, kEps), SizeError);
}

TEST_CASE("constant transmission series reconstructs as a parked (pi, 0) trajectory") {
    const NormalizedParams np = default_np();
    TransmissionSeries ts;
    ts.params = np;
    ts.samples.assign(50, solve_cavity_field(pi, np, np.I0).S_over_I0);
    const ReconstructedTrajectory rt = reconstruct_trajectory(ts, kEps);
    CHECK(rt.restarts == 0);
    for (std::size_t i = 0; i < rt.x.size(); ++i) {
        CHECK(rt.x[i] == Catch::Approx(pi).margin(1e-12));
        CHECK(rt.p[i] == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("atom started on the unstable fixed point stays put over short runs") {
    // (pi, 0) is hyperbolic: the 1e-16 rounding seed of sin(pi) grows by
    // roughly x2 per kick, so only short runs remain parked in floating point
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({pi, 0.0}, 20, np, 9, noiseless());
    const ReconstructedTrajectory rt = reconstruct_trajectory(transmission_series(rec), kEps);
    CHECK(rt.restarts == 0);
    for (std::size_t i = 0; i < rt.x.size(); ++i) {
        CHECK(circular_distance(rt.x[i], pi) < 1e-6);
        CHECK(circular_distance(rt.p[i], 0.0) < 1e-6);
    }
}

TEST_CASE("noiseless single-trajectory round trip") {
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({2.0, 1.3}, 150, np, 21, noiseless());
    const ReconstructedTrajectory rt = reconstruct_trajectory(transmission_series(rec), kEps);
    const FidelityReport rep = trajectory_fidelity(rec, rt, 1e-3);
    CHECK(rep.matched_fraction >= 0.95);
    CHECK(rep.mean_distance < 0.05);
}

TEST_CASE("emitted coordinates live on [0, 2pi)") {
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({0.7, 2.9}, 120, np, 33, noiseless());
    const ReconstructedTrajectory rt = reconstruct_trajectory(transmission_series(rec), kEps);
    for (double v : rt.x) {
        CHECK(v >= 0.0);
        CHECK(v < two_pi);
    }
    for (double v : rt.p) {
        CHECK(v >= 0.0);
        CHECK(v < two_pi);
    }
    CHECK(rt.x.size() == rec.kicks.size() - 1);
}

TEST_CASE("widening the coherence tolerance never adds restarts") {
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({1.1, 0.9}, 150, np, 55, noiseless());
    const TransmissionSeries ts = transmission_series(rec);
    int prev = std::numeric_limits<int>::max();
    for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const int r = reconstruct_trajectory(ts, kEps * scale).restarts;
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("global flip of the first point is physically irrelevant") {
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({2.4, 1.7}, 120, np, 61, noiseless());
    const TransmissionSeries ts = transmission_series(rec);
    const ReconstructedTrajectory plain = reconstruct_trajectory(ts, kEps);
    const ReconstructedTrajectory flipped = reconstruct_trajectory(ts, kEps, 1e-12, 50, true);
    const FidelityReport a = trajectory_fidelity(rec, plain, 1e-3);
    const FidelityReport b = trajectory_fidelity(rec, flipped, 1e-3);
    CHECK(a.matched_fraction == Catch::Approx(b.matched_fraction).margin(0.02));
    CHECK(a.matched_fraction >= 0.95);
    // the two runs are symmetry images of each other pointwise
    std::size_t agree = 0;
    for (std::size_t i = 0; i < plain.x.size(); ++i) {
        const PhasePoint u{plain.x[i], plain.p[i]};
        const PhasePoint v{flipped.x[i], flipped.p[i]};
        if (torus_distance(u, v) < 1e-6) ++agree;
    }
    CHECK(static_cast<double>(agree) / plain.x.size() > 0.95);
}

TEST_CASE("inversion failures carry the sample index") {
    const NormalizedParams np = default_np();
    const TrajectoryRecord rec = simulate_trajectory({1.0, 1.0}, 10, np, 1, noiseless());
    TransmissionSeries ts = transmission_series(rec);
    ts.samples[4] = 0.9;  // far outside the reachable flank band
    CHECK_THROWS_WITH(reconstruct_trajectory(ts, kEps),
                      Catch::Matchers::ContainsSubstring("sample 4"));
}
