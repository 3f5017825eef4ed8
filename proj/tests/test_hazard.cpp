#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crossguard/hazard.hpp"

using namespace crossguard::core;
using namespace crossguard::hazard;

namespace {

// Brute-force oracle: sample the trajectory and test containment directly.
// Returns the first and last sampled time inside the zone, if any.
struct SampledWindow {
    bool hit{false};
    double first{0.0};
    double last{0.0};
};

SampledWindow sample_membership(const Zod& zod, const KinematicState& state, double t0, double t1, double step) {
    SampledWindow w;
    for (double t = t0; t <= t1; t += step) {
        if (contains(zod, predict_position(state, t))) {
            if (!w.hit) {
                w.hit = true;
                w.first = t;
            }
            w.last = t;
        }
    }
    return w;
}

Zod poc_zod() {
    return Zod(Point(0, 0), 30, 30, 0, 30);
}

}  // namespace

TEST_CASE("contains is boundary inclusive") {
    const Zod zod = poc_zod();
    CHECK(contains(zod, Point(0, -15)));
    CHECK_FALSE(contains(zod, Point(31, -15)));
    CHECK(contains(zod, Point(30, 0)));  // boundary point
    CHECK(contains(zod, Point(-30, -30)));
    CHECK_FALSE(contains(zod, Point(0, 0.001)));
    CHECK_FALSE(contains(zod, Point(0, -30.001)));
}

TEST_CASE("zod construction rejects bad extents") {
    CHECK_THROWS_AS(Zod(Point(0, 0), -1, 30, 0, 30), std::invalid_argument);
    CHECK_THROWS_AS(Zod(Point(0, 0), 0, 0, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(Zod(Point(0, 0), 10, 10, 0, 0), std::invalid_argument);
}

TEST_CASE("incursion interval on the crossing scenario geometry") {
    const Zod zod = poc_zod();

    SUBCASE("approaching vehicle enters at 4 s, exits at 16 s") {
        const KinematicState state(Point(-50, -15), 5.0, 0.0);
        const TimeInterval itv = incursion_interval(zod, state);
        REQUIRE(itv.is_bounded());
        CHECK(itv.entry() == doctest::Approx(4.0));
        CHECK(itv.exit() == doctest::Approx(16.0));
        // Brute-force confirmation.
        const SampledWindow w = sample_membership(zod, state, 0.0, 60.0, 0.1);
        REQUIRE(w.hit);
        CHECK(w.first == doctest::Approx(4.0).epsilon(0.11));
        CHECK(w.last == doctest::Approx(16.0).epsilon(0.11));
    }

    SUBCASE("heading away never enters") {
        const KinematicState state(Point(-50, -15), 5.0, M_PI);
        CHECK(incursion_interval(zod, state).is_empty());
        CHECK_FALSE(sample_membership(zod, state, 0.0, 60.0, 0.1).hit);
    }

    SUBCASE("already inside reports a negative entry") {
        const KinematicState state(Point(0, -15), 5.0, 0.0);
        const TimeInterval itv = incursion_interval(zod, state);
        REQUIRE(itv.is_bounded());
        CHECK(itv.entry() == doctest::Approx(-6.0));
        CHECK(itv.exit() == doctest::Approx(6.0));
        CHECK(sample_membership(zod, state, 0.0, 60.0, 0.1).first == doctest::Approx(0.0));
    }

    SUBCASE("stationary inside is always inside") {
        CHECK(incursion_interval(zod, KinematicState(Point(0, -15), 0.0, 0.0)).is_always_inside());
    }

    SUBCASE("stationary outside is empty") {
        CHECK(incursion_interval(zod, KinematicState(Point(100, 100), 0.0, 0.0)).is_empty());
    }

    SUBCASE("vehicle that already left collapses to empty") {
        const KinematicState state(Point(50, -15), 5.0, 0.0);  // east of the zone, heading east
        CHECK(incursion_interval(zod, state).is_empty());
    }
}

TEST_CASE("classify applies the threshold rule") {
    const double threshold = 5.0;
    CHECK(classify(TimeInterval::bounded(4, 16), threshold).tag == HazardTag::Imminent);
    CHECK(classify(TimeInterval::bounded(-6, 6), threshold).tag == HazardTag::Active);
    CHECK(classify(TimeInterval::empty(), threshold).tag == HazardTag::Safe);
    CHECK(classify(TimeInterval::bounded(12, 20), threshold).tag == HazardTag::Safe);
    CHECK(classify(TimeInterval::always_inside(), threshold).tag == HazardTag::Active);
    // Entry exactly at the threshold is safe ("less than a threshold").
    CHECK(classify(TimeInterval::bounded(5, 20), threshold).tag == HazardTag::Safe);
    CHECK(classify(TimeInterval::bounded(0, 3), threshold).tag == HazardTag::Active);
    CHECK_THROWS_AS(classify(TimeInterval::empty(), 0.0), std::invalid_argument);
}

TEST_CASE("classify threshold monotonicity") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> entry_d(0.01, 20.0);
    std::uniform_real_distribution<double> len_d(0.0, 30.0);
    std::uniform_real_distribution<double> th_d(0.1, 25.0);
    for (int i = 0; i < 2000; ++i) {
        const double entry = entry_d(rng);
        const TimeInterval itv = TimeInterval::bounded(entry, entry + len_d(rng));
        double th1 = th_d(rng);
        double th2 = th_d(rng);
        if (th1 > th2) std::swap(th1, th2);
        if (classify(itv, th1).tag == HazardTag::Imminent) {
            CHECK(classify(itv, th2).tag == HazardTag::Imminent);
        }
    }
}

TEST_CASE("interval agrees with the sampling oracle on random cases") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> anchor_d(-50.0, 50.0);
    std::uniform_real_distribution<double> extent_d(0.5, 40.0);
    std::uniform_real_distribution<double> pos_d(-120.0, 120.0);
    std::uniform_real_distribution<double> speed_d(0.0, 15.0);
    std::uniform_real_distribution<double> heading_d(0.0, kTwoPi);
    std::bernoulli_distribution axis_aligned(0.2);
    std::uniform_int_distribution<int> axis_pick(0, 3);

    const double t0 = -30.0, t1 = 60.0, step = 0.05, tolerance = 0.1;

    for (int i = 0; i < 1000; ++i) {
        const Zod zod(Point(anchor_d(rng), anchor_d(rng)), extent_d(rng), extent_d(rng), extent_d(rng),
                      extent_d(rng));
        double heading = heading_d(rng);
        if (axis_aligned(rng)) {
            heading = axis_pick(rng) * (M_PI / 2);  // exercise zero velocity components
        }
        const KinematicState state(Point(pos_d(rng), pos_d(rng)), speed_d(rng), heading);
        const TimeInterval itv = incursion_interval(zod, state);

        for (double t = t0; t <= t1; t += step) {
            const bool sampled = contains(zod, predict_position(state, t));
            bool predicted = false;
            switch (itv.kind()) {
                case TimeInterval::Kind::Empty:
                    predicted = false;
                    break;
                case TimeInterval::Kind::AlwaysInside:
                    predicted = true;
                    break;
                case TimeInterval::Kind::Bounded:
                    predicted = t >= itv.entry() && t <= itv.exit();
                    break;
            }
            if (sampled == predicted) {
                continue;
            }
            // Disagreement is only tolerated hard against an interval endpoint,
            // or in the already-past region an Empty-collapsed window dropped.
            bool near_boundary = false;
            if (itv.is_bounded()) {
                near_boundary = std::abs(t - itv.entry()) <= tolerance || std::abs(t - itv.exit()) <= tolerance;
            } else if (itv.is_empty()) {
                near_boundary = t < 0.0;  // pre-clip membership that the clip rule discards
            }
            if (!near_boundary) {
                CAPTURE(i);
                CAPTURE(t);
                REQUIRE(near_boundary);
            }
        }
    }
}

TEST_CASE("interval is symmetric under reflection across the x axis") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> anchor_d(-50.0, 50.0);
    std::uniform_real_distribution<double> extent_d(0.5, 40.0);
    std::uniform_real_distribution<double> pos_d(-120.0, 120.0);
    std::uniform_real_distribution<double> speed_d(0.0, 15.0);
    std::uniform_real_distribution<double> heading_d(0.0, kTwoPi);

    for (int i = 0; i < 500; ++i) {
        const Zod zod(Point(anchor_d(rng), anchor_d(rng)), extent_d(rng), extent_d(rng), extent_d(rng),
                      extent_d(rng));
        const KinematicState state(Point(pos_d(rng), pos_d(rng)), speed_d(rng), heading_d(rng));

        const Zod mirrored(Point(zod.anchor.x, -zod.anchor.y), zod.ll, zod.rl, zod.lw, zod.uw);  // uw <-> lw
        const KinematicState mirrored_state(Point(state.pos.x, -state.pos.y), state.speed, -state.heading);

        const TimeInterval a = incursion_interval(zod, state);
        const TimeInterval b = incursion_interval(mirrored, mirrored_state);
        REQUIRE(a.kind() == b.kind());
        if (a.is_bounded()) {
            CHECK(a.entry() == doctest::Approx(b.entry()).epsilon(1e-9));
            CHECK(a.exit() == doctest::Approx(b.exit()).epsilon(1e-9));
        }
    }
}

TEST_CASE("classify never reports Active for an empty interval") {
    for (double th : {0.5, 1.0, 5.0, 100.0}) {
        CHECK(classify(TimeInterval::empty(), th).tag == HazardTag::Safe);
    }
}
