#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ckr/metrics.hpp"
#include "ckr/rng.hpp"

using namespace ckr;

namespace {

PhasePoint rand_point(SplitMix64& rng) {
    return {two_pi * rng.next_double(), two_pi * rng.next_double()};
}

TrajectoryRecord fake_truth(const std::vector<PhasePoint>& pts) {
    TrajectoryRecord rec;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        KickRecord k;
        k.n = static_cast<int>(i);
        k.X = pts[i].x;
        k.P = pts[i].p;
        rec.kicks.push_back(k);
    }
    return rec;
}

ReconstructedTrajectory fake_recon(const std::vector<PhasePoint>& pts, int restarts = 0) {
    ReconstructedTrajectory rt;
    for (const auto& q : pts) {
        rt.x.push_back(mod_2pi(q.x));
        rt.p.push_back(mod_2pi(q.p));
        rt.K_series.push_back(0.8);
        rt.restart_flag.push_back(0);
        rt.flag.push_back(0);
    }
    rt.restarts = restarts;
    return rt;
}

}  // namespace

TEST_CASE("torus distance basics") {
    CHECK(torus_distance({0.1, 0.1}, {0.1, 0.1}) == 0.0);
    CHECK(torus_distance({0.1, 0.1}, {two_pi - 0.1, two_pi - 0.1}) < 1e-15);
    CHECK(torus_distance({0.0, 0.0}, {pi, 0.0}) == Catch::Approx(pi));
    // wrap-around is shorter than the naive difference (p = 1 keeps the pair
    // off the symmetry orbit)
    CHECK(torus_distance({0.05, 1.0}, {two_pi - 0.05, 1.0}) == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("torus distance is a pseudometric on random triples") {
    SplitMix64 rng(314);
    for (int i = 0; i < 1000; ++i) {
        const PhasePoint a = rand_point(rng), b = rand_point(rng), c = rand_point(rng);
        CHECK(torus_distance(a, b) == torus_distance(b, a));
        CHECK(torus_distance(a, a) == 0.0);
        CHECK(torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-12);
        CHECK(torus_distance(a, b) <= pi * std::numbers::sqrt2 + 1e-12);
        // zero on the symmetry orbit
        const PhasePoint img{mod_2pi(two_pi - b.x), mod_2pi(two_pi - b.p)};
        CHECK(torus_distance(b, img) < 1e-12);
    }
}

TEST_CASE("identical reconstruction scores perfectly") {
    SplitMix64 rng(8);
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(rand_point(rng));
    const auto truth = fake_truth(pts);
    const auto recon = fake_recon(pts);
    const FidelityReport r = trajectory_fidelity(truth, recon, 1e-3);
    CHECK(r.matched_fraction == 1.0);
    CHECK(r.mean_distance < 1e-12);
    CHECK(r.n_points == 100);
}

TEST_CASE("the global symmetry image scores perfectly too") {
    SplitMix64 rng(9);
    std::vector<PhasePoint> pts, image;
    for (int i = 0; i < 80; ++i) {
        const PhasePoint q = rand_point(rng);
        pts.push_back(q);
        image.push_back({mod_2pi(two_pi - q.x), mod_2pi(two_pi - q.p)});
    }
    const FidelityReport r = trajectory_fidelity(fake_truth(pts), fake_recon(image), 1e-3);
    CHECK(r.matched_fraction == 1.0);
}

TEST_CASE("per-point symmetry flips cannot inflate the score") {
    // half the points on each image: the majority element leaves the other
    // half unmatched
    SplitMix64 rng(10);
    std::vector<PhasePoint> pts, mixed;
    for (int i = 0; i < 100; ++i) {
        PhasePoint q = rand_point(rng);
        // keep points away from the self-symmetric set so the flip moves them
        q.x = 0.5 + q.x * 0.3;
        q.p = 0.5 + q.p * 0.3;
        pts.push_back(q);
        if (i % 2)
            mixed.push_back({mod_2pi(two_pi - q.x), mod_2pi(two_pi - q.p)});
        else
            mixed.push_back(q);
    }
    const FidelityReport r = trajectory_fidelity(fake_truth(pts), fake_recon(mixed), 1e-3);
    CHECK(r.matched_fraction <= 0.6);
}

TEST_CASE("matched fraction is monotone in delta") {
    SplitMix64 rng(11);
    std::vector<PhasePoint> pts, noisy;
    for (int i = 0; i < 200; ++i) {
        const PhasePoint q = rand_point(rng);
        pts.push_back(q);
        noisy.push_back({mod_2pi(q.x + 0.01 * (rng.next_double() - 0.5)),
                         mod_2pi(q.p + 0.01 * (rng.next_double() - 0.5))});
    }
    const auto truth = fake_truth(pts);
    const auto recon = fake_recon(noisy);
    double prev = -1.0;
    for (double delta : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double m = trajectory_fidelity(truth, recon, delta).matched_fraction;
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("alignment tolerates the seeding offset and rejects more") {
    SplitMix64 rng(12);
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(rand_point(rng));
    const auto truth = fake_truth(pts);
    auto short_pts = pts;
    short_pts.pop_back();
    CHECK_NOTHROW(trajectory_fidelity(truth, fake_recon(short_pts), 1e-3));
    short_pts.resize(45);
    CHECK_THROWS_AS(trajectory_fidelity(truth, fake_recon(short_pts), 1e-3), AlignmentError);
}

TEST_CASE("ensemble summary aggregates counts") {
    SplitMix64 rng(13);
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(rand_point(rng));
    const auto truth = fake_truth(pts);
    const auto recon = fake_recon(pts, 6);

    const FidelityReport single = trajectory_fidelity(truth, recon, 1e-3);
    const EnsembleFidelity one = ensemble_summary({{&truth, &recon}}, 1e-3);
    CHECK(one.total.matched_fraction == single.matched_fraction);
    CHECK(one.total.restart_fraction == single.restart_fraction);
    REQUIRE(one.breakdown.size() == 1);

    const EnsembleFidelity two = ensemble_summary({{&truth, &recon}, {&truth, &recon}}, 1e-3);
    CHECK(two.total.matched_fraction == single.matched_fraction);
    CHECK(two.total.restart_fraction == single.restart_fraction);
    CHECK(two.total.n_points == 2 * single.n_points);

    CHECK_THROWS_AS(ensemble_summary({}, 1e-3), SizeError);
}
