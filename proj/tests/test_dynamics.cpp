#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "billiard/core.hpp"
#include "billiard/dynamics.hpp"
#include "billiard/error.hpp"
#include "billiard/precise.hpp"
#include "support.hpp"

using namespace billiard;
using billiard::testing::params_2d;

namespace {

PhasePoint two_balls(Vec q1, Vec q2, Vec v1, Vec v2) {
  PhasePoint x;
  x.q.resize(2, q1.size());
  x.v.resize(2, q1.size());
  x.q.row(0) = q1.transpose();
  x.q.row(1) = q2.transpose();
  x.v.row(0) = v1.transpose();
  x.v.row(1) = v2.transpose();
  return x;
}

// State at time t reconstructed from the event snapshots.
PhasePoint state_at(const TrajectorySegment& seg, double t) {
  const PhasePoint* base = &seg.initial;
  double t0 = 0.0;
  for (std::size_t k = 0; k < seg.events.size(); ++k) {
    if (seg.events[k].time > t) break;
    base = &seg.after_event[k];
    t0 = seg.events[k].time;
  }
  return free_flight(*base, t - t0);
}

void expect_identical(const TrajectorySegment& a, const TrajectorySegment& b) {
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    EXPECT_EQ(a.events[k].time, b.events[k].time);
    EXPECT_EQ(a.events[k].pair, b.events[k].pair);
    EXPECT_EQ(a.events[k].normal, b.events[k].normal);
    EXPECT_EQ(a.events[k].v_rel_pre, b.events[k].v_rel_pre);
    EXPECT_EQ(a.events[k].v_rel_post, b.events[k].v_rel_post);
  }
  EXPECT_EQ(a.final.q, b.final.q);
  EXPECT_EQ(a.final.v, b.final.v);
  EXPECT_EQ(a.horizon, b.horizon);
}

double torus_gap(const PhasePoint& a, const PhasePoint& b) {
  double worst = 0.0;
  for (int i = 0; i < a.n_balls(); ++i) {
    worst = std::max(worst, minimal_image(a.q.row(i).transpose(), b.q.row(i).transpose()).norm());
  }
  return worst;
}

}  // namespace

TEST(TimeOfImpact, ClosingAlongX) {
  SystemParams p = params_2d(2, 0.05);
  const double c = std::sqrt(0.5);
  const PhasePoint x = two_balls(Vec{{0.3, 0.5}}, Vec{{0.7, 0.5}}, Vec{{c, 0.0}}, Vec{{-c, 0.0}});
  const auto hit = time_of_impact(p, x, Pair{0, 1});
  ASSERT_TRUE(hit);
  // |dq + t dv| = 2r with dq = -0.4, dv = 2c along x.
  EXPECT_NEAR(hit->t, 0.3 / (2.0 * c), 1e-14);
  EXPECT_NEAR(hit->normal[0], -1.0, 1e-14);
  EXPECT_NEAR(hit->normal[1], 0.0, 1e-14);
  const PhasePoint at = free_flight(x, hit->t);
  EXPECT_NEAR(torus_distance(at, 0, 1), 0.1, 1e-13);
}

TEST(TimeOfImpact, ZeroRelativeVelocityNeverMeets) {
  SystemParams p = params_2d(2, 0.05);
  const PhasePoint x = two_balls(Vec{{0.3, 0.5}}, Vec{{0.7, 0.5}}, Vec{{0.0, 0.0}}, Vec{{0.0, 0.0}});
  EXPECT_FALSE(time_of_impact(p, x, Pair{0, 1}));
}

TEST(TimeOfImpact, ContactThroughWrapImage) {
  SystemParams p = params_2d(2, 0.02);
  const double c = std::sqrt(0.5);
  const PhasePoint x = two_balls(Vec{{0.05, 0.5}}, Vec{{0.95, 0.5}}, Vec{{-c, 0.0}}, Vec{{c, 0.0}});
  const auto hit = time_of_impact(p, x, Pair{0, 1});
  ASSERT_TRUE(hit);
  // Oracle on the explicitly shifted image q2 - (1, 0) = (-0.05, 0.5).
  const Vec dq = x.q.row(0).transpose() - (x.q.row(1).transpose() - Vec{{1.0, 0.0}});
  const Vec dv = x.v.row(0).transpose() - x.v.row(1).transpose();
  const double a = dv.squaredNorm(), b = dq.dot(dv), cc = dq.squaredNorm() - 0.04 * 0.04;
  const double t_oracle = (-b - std::sqrt(b * b - a * cc)) / a;
  EXPECT_NEAR(hit->t, t_oracle, 1e-14);
  EXPECT_NEAR(hit->normal[0], 1.0, 1e-14);
}

TEST(ApplyCollision, HeadOnSwapsVelocities) {
  SystemParams p = params_2d(2, 0.05);
  const PhasePoint x = two_balls(Vec{{0.55, 0.5}}, Vec{{0.45, 0.5}}, Vec{{-0.5, 0.0}}, Vec{{0.5, 0.0}});
  const PhasePoint y = apply_collision(p, x, Pair{0, 1}, Vec{{1.0, 0.0}});
  EXPECT_NEAR(y.v(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(y.v(1, 0), -0.5, 1e-15);
}

TEST(ApplyCollision, TangentialLeavesStateUnchanged) {
  SystemParams p = params_2d(2, 0.05);
  const PhasePoint x = two_balls(Vec{{0.55, 0.5}}, Vec{{0.45, 0.5}}, Vec{{0.0, 0.3}}, Vec{{0.0, -0.3}});
  const PhasePoint y = apply_collision(p, x, Pair{0, 1}, Vec{{1.0, 0.0}});
  EXPECT_EQ(y.v, x.v);
  EXPECT_EQ(y.q, x.q);
}

TEST(ApplyCollision, ExchangesNormalComponents) {
  SystemParams p = params_2d(2, 0.05);
  const PhasePoint x = two_balls(Vec{{0.55, 0.5}}, Vec{{0.45, 0.5}}, Vec{{0.3, 0.4}}, Vec{{-0.3, -0.4}});
  const PhasePoint y = apply_collision(p, x, Pair{0, 1}, Vec{{1.0, 0.0}});
  EXPECT_NEAR(y.v(0, 0), -0.3, 1e-15);
  EXPECT_NEAR(y.v(0, 1), 0.4, 1e-15);
  EXPECT_NEAR(y.v(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(y.v(1, 1), -0.4, 1e-15);
}

TEST(ApplyCollision, IsAnInvolution) {
  SystemParams p = params_2d(2, 0.05);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const double angle = 2.0 * M_PI * (trial / 100.0);
    const Vec n{{std::cos(angle), std::sin(angle)}};
    const Vec q2{{0.5, 0.5}};
    const PhasePoint x = two_balls(q2 + 0.1 * n, q2, Vec{{g(rng), g(rng)}}, Vec{{g(rng), g(rng)}});
    const PhasePoint y = apply_collision(p, apply_collision(p, x, Pair{0, 1}, n), Pair{0, 1}, n);
    EXPECT_LT((y.v - x.v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyCollision, RejectsSeparatedBalls) {
  SystemParams p = params_2d(2, 0.05);
  const PhasePoint x = two_balls(Vec{{0.7, 0.5}}, Vec{{0.45, 0.5}}, Vec{{-0.5, 0.0}}, Vec{{0.5, 0.0}});
  EXPECT_THROW(apply_collision(p, x, Pair{0, 1}, Vec{{1.0, 0.0}}), NotAtContact);
}

TEST(AdvanceFlow, FreeFlightWithoutCollisions) {
  SystemParams p = params_2d(2, 0.1);
  const double c = std::sqrt(0.5);
  const PhasePoint x = two_balls(Vec{{0.25, 0.25}}, Vec{{0.75, 0.75}}, Vec{{c, 0.0}}, Vec{{-c, 0.0}});
  const TrajectorySegment seg = advance_flow(p, x, StopRule::at_time(3.0));
  EXPECT_TRUE(seg.events.empty());
  EXPECT_DOUBLE_EQ(seg.horizon, 3.0);
  for (int i = 0; i < 2; ++i) {
    for (int c2 = 0; c2 < 2; ++c2) {
      const double expect = wrap_unit(x.q(i, c2) + 3.0 * x.v(i, c2));
      EXPECT_NEAR(seg.final.q(i, c2), expect, 1e-12);
    }
  }
}

TEST(AdvanceFlow, HeadOnPairBouncesWithClosedFormPeriod) {
  SystemParams p = params_2d(2, 0.1);
  const PhasePoint x = billiard::testing::head_on_pair(p.radius, 0.2);
  const TrajectorySegment seg = advance_flow(p, x, StopRule::after_events(6));
  ASSERT_EQ(seg.events.size(), 6u);
  const double closing = 2.0 * std::sqrt(0.5);
  EXPECT_NEAR(seg.events[0].time, 0.2 / closing, 1e-12);
  // Relative coordinate travels from +2r to 1 - 2r between contacts.
  const double period = (1.0 - 4.0 * p.radius) / closing;
  for (std::size_t k = 1; k < seg.events.size(); ++k) {
    EXPECT_NEAR(seg.events[k].time - seg.events[k - 1].time, period, 1e-12);
    EXPECT_EQ(seg.events[k].pair, (Pair{0, 1}));
  }
}

TEST(AdvanceFlow, ConservesMomentumAndEnergy) {
  SystemParams p = params_2d(3, 0.1);
  p.time_cap = 1e5;
  const PhasePoint x = sample_phase_point(p, 12);
  const TrajectorySegment seg = advance_flow(p, x, StopRule::after_events(2000));
  ASSERT_EQ(seg.events.size(), 2000u);
  PhasePoint prev = x;
  for (const PhasePoint& s : seg.after_event) {
    EXPECT_LT((s.total_momentum() - prev.total_momentum()).norm(), 1e-12);
    EXPECT_LT(std::abs(s.kinetic() - prev.kinetic()), 1e-12);
    prev = s;
  }
  EXPECT_LT(seg.final.total_momentum().norm(), 1e-9);
  EXPECT_LT(std::abs(seg.final.kinetic() - 1.0), 1e-9);
}

TEST(AdvanceFlow, EventsSatisfyReflectionInvariants) {
  SystemParams p = params_2d(3, 0.1);
  const TrajectorySegment seg = advance_flow(p, sample_phase_point(p, 8), StopRule::after_events(200));
  for (std::size_t k = 0; k < seg.events.size(); ++k) {
    const CollisionEvent& e = seg.events[k];
    EXPECT_NEAR(e.normal.norm(), 1.0, 1e-12);
    const Vec reflected = e.v_rel_pre - 2.0 * e.v_rel_pre.dot(e.normal) * e.normal;
    EXPECT_LT((reflected - e.v_rel_post).norm(), 1e-12);
    EXPECT_EQ(e.kind, EventKind::regular);
    EXPECT_LT(e.normal_speed(), 0.0);
    if (k > 0) {
      EXPECT_GT(e.time, seg.events[k - 1].time);
    }
  }
}

TEST(AdvanceFlow, ReplayReproducesFinalState) {
  SystemParams p = params_2d(3, 0.1);
  const PhasePoint x = sample_phase_point(p, 21);
  const TrajectorySegment seg = advance_flow(p, x, StopRule::at_time(15.0));
  ASSERT_FALSE(seg.events.empty());
  PhasePoint s = x;
  double t = 0.0;
  for (const CollisionEvent& e : seg.events) {
    s = free_flight(s, e.time - t);
    t = e.time;
    const auto [i, j] = e.pair;
    const double vn = (s.v.row(i) - s.v.row(j)).dot(e.normal.transpose());
    s.v.row(i) -= vn * e.normal.transpose();
    s.v.row(j) += vn * e.normal.transpose();
  }
  s = free_flight(s, seg.horizon - t);
  EXPECT_LT(torus_gap(s, seg.final), 1e-9);
  EXPECT_LT((s.v - seg.final.v).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(satisfies_invariants(seg.final, p, 1e-12, 1e-12));
}

// Roundoff grows by a factor of several per collision, so the double engine
// only round-trips short runs.
TEST(AdvanceFlow, TimeReversalRecoversInitialPoint) {
  SystemParams p = params_2d(3, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PhasePoint x = sample_phase_point(p, 100 + seed);
    const TrajectorySegment fwd = advance_flow(p, x, StopRule::after_events(8));
    PhasePoint back = fwd.final;
    back.v = -back.v;
    const TrajectorySegment rev = advance_flow(p, back, StopRule::at_time(fwd.horizon));
    EXPECT_LT(torus_gap(rev.final, x), 1e-6) << "seed " << seed;
    EXPECT_LT((rev.final.v + x.v).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
  }
}

TEST(PreciseFlow, LongRoundTripRecoversInitialPoint) {
  SystemParams p = params_2d(3, 0.1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const precise::RoundTrip r = precise::reversal_round_trip(p, sample_phase_point(p, 100 + seed), 100);
    EXPECT_EQ(r.events, 100u);
    EXPECT_LT(r.position_error, 1e-6) << "seed " << seed;
    EXPECT_LT(r.velocity_error, 1e-6) << "seed " << seed;
  }
}

TEST(PreciseFlow, AgreesWithDoubleEngineOnEarlyEvents) {
  SystemParams p = params_2d(3, 0.1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PhasePoint x = sample_phase_point(p, 200 + seed);
    const TrajectorySegment a = advance_flow(p, x, StopRule::after_events(6));
    const TrajectorySegment b = precise::advance_flow(p, x, StopRule::after_events(6));
    ASSERT_EQ(a.pairs(), b.pairs()) << "seed " << seed;
    for (std::size_t k = 0; k < a.events.size(); ++k) {
      EXPECT_NEAR(a.events[k].time, b.events[k].time, 1e-9);
      EXPECT_LT((a.events[k].normal - b.events[k].normal).norm(), 1e-8);
    }
  }
}

TEST(AdvanceFlow, DeterministicEventSequence) {
  SystemParams p = params_2d(4, 0.08);
  const PhasePoint x = sample_phase_point(p, 77);
  expect_identical(advance_flow(p, x, StopRule::after_events(300)), advance_flow(p, x, StopRule::after_events(300)));
}

TEST(AdvanceFlow, NoInterpenetrationAtSampledTimes) {
  SystemParams p = params_2d(3, 0.1);
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrajectorySegment seg = advance_flow(p, sample_phase_point(p, seed), StopRule::at_time(20.0));
    std::uniform_real_distribution<double> when(0.0, seg.horizon);
    for (int k = 0; k < 1000; ++k) EXPECT_GE(min_pair_distance(state_at(seg, when(rng))), 2.0 * p.radius - 1e-9);
  }
}

TEST(AdvanceFlow, ThreeDimensionalRun) {
  SystemParams p;
  p.n_balls = 4;
  p.nu = 3;
  p.radius = 0.15;
  const PhasePoint x = sample_phase_point(p, 5);
  const TrajectorySegment seg = advance_flow(p, x, StopRule::after_events(50));
  EXPECT_EQ(seg.events.size(), 50u);
  EXPECT_TRUE(satisfies_invariants(seg.final, p, 1e-12, 1e-12));
}

TEST(AdvanceFlow, TangentialEarliestEventIsRefused) {
  SystemParams p = params_2d(2, 0.1);
  // Impact parameter exactly 2r: the pair grazes.
  const double c = std::sqrt(0.5);
  const PhasePoint x = two_balls(Vec{{0.3, 0.6}}, Vec{{0.7, 0.4}}, Vec{{c, 0.0}}, Vec{{-c, 0.0}});
  try {
    advance_flow(p, x, StopRule::after_events(1));
    FAIL() << "expected SingularEvent";
  } catch (const SingularEvent& e) {
    EXPECT_EQ(e.kind(), EventKind::tangential);
    ASSERT_EQ(e.events().size(), 1u);
    EXPECT_LT(std::abs(e.events()[0].normal_speed()), p.tol.tangency_eps);
  }
}

TEST(AdvanceFlow, CoincidentEventsAreRefused) {
  SystemParams p = params_2d(3, 0.05);
  const double c = 1.0 / std::sqrt(6.0);
  // Ball 2 is hit from both sides at the same instant.
  PhasePoint x;
  x.q.resize(3, 2);
  x.v.resize(3, 2);
  x.q << 0.2, 0.5, 0.5, 0.5, 0.8, 0.5;
  x.v << 2 * c, 0.0, 0.0, 0.0, -2 * c, 0.0;
  x.v /= x.v.norm();
  try {
    advance_flow(p, x, StopRule::after_events(1));
    FAIL() << "expected SingularEvent";
  } catch (const SingularEvent& e) {
    EXPECT_EQ(e.kind(), EventKind::multiple);
    EXPECT_EQ(e.events().size(), 2u);
  }
}

TEST(BackwardReflection, RoundTripsForwardEvents) {
  SystemParams p = params_2d(3, 0.1);
  const TrajectorySegment seg = advance_flow(p, sample_phase_point(p, 31), StopRule::after_events(40));
  for (std::size_t k = 0; k + 1 < seg.events.size(); ++k) {
    const double s = 0.5 * (seg.events[k + 1].time - seg.events[k].time);
    const PhasePoint x = free_flight(seg.after_event[k], s);
    const PastReflection past = backward_first_reflection(p, x);
    EXPECT_NEAR(past.tau, -s, 1e-12);
    EXPECT_EQ(past.event.pair, seg.events[k].pair);
    EXPECT_EQ(past.event.kind, EventKind::regular);
    EXPECT_LT((past.event.v_rel_pre - seg.events[k].v_rel_pre).norm(), 1e-12);
    EXPECT_LT((past.event.normal - seg.events[k].normal).norm(), 1e-12);
  }
}

TEST(BackwardReflection, NoDynamicsMeansNoPastReflection) {
  SystemParams p = params_2d(2, 0.1);
  p.time_cap = 50.0;
  const PhasePoint x = two_balls(Vec{{0.2, 0.5}}, Vec{{0.7, 0.5}}, Vec{{0.0, 0.0}}, Vec{{0.0, 0.0}});
  EXPECT_THROW(backward_first_reflection(p, x), NoPastReflection);
}

TEST(PhantomFlow, TruePrescriptionReproducesSegmentBitwise) {
  SystemParams p = params_2d(3, 0.1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PhasePoint x = sample_phase_point(p, 500 + seed);
    const TrajectorySegment seg = advance_flow(p, x, StopRule::after_events(12));
    const std::vector<Pair> pairs = seg.pairs();
    expect_identical(phantom_flow(p, x, pairs), seg);
  }
}

TEST(PhantomFlow, OmittedPairPassesThrough) {
  SystemParams p = params_2d(3, 0.1);
  int witnessed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PhasePoint x = sample_phase_point(p, 900 + seed);
    const TrajectorySegment seg = advance_flow(p, x, StopRule::after_events(6));
    const Pair skipped = seg.events.front().pair;
    std::vector<Pair> prescription;
    for (const Pair& q : seg.pairs()) {
      if (q != skipped) prescription.push_back(q);
    }
    if (prescription.empty()) continue;
    TrajectorySegment ph;
    try {
      ph = phantom_flow(p, x, prescription);
    } catch (const PrescriptionStalled&) {
      continue;
    }
    EXPECT_EQ(ph.pairs(), prescription);
    // The skipped pair overlaps right after its deleted collision time.
    const PhasePoint probe = free_flight(x, seg.events.front().time + 1e-3);
    if (ph.events.front().time > seg.events.front().time + 1e-3) {
      EXPECT_LT(torus_distance(probe, skipped.first, skipped.second), 2.0 * p.radius);
      ++witnessed;
    }
  }
  EXPECT_GT(witnessed, 0);
}

TEST(PhantomFlow, EmptyPrescriptionIsFreeFlightToCap) {
  SystemParams p = params_2d(3, 0.1);
  p.time_cap = 7.5;
  const PhasePoint x = sample_phase_point(p, 2);
  const TrajectorySegment seg = phantom_flow(p, x, {});
  EXPECT_TRUE(seg.events.empty());
  EXPECT_DOUBLE_EQ(seg.horizon, 7.5);
  EXPECT_LT(torus_gap(seg.final, free_flight(x, 7.5)), 1e-9);
}

TEST(PhantomFlow, StallsWhenPrescribedPairNeverMeets) {
  SystemParams p = params_2d(2, 0.1);
  p.time_cap = 20.0;
  const double c = std::sqrt(0.5);
  // Relative motion along x with a y offset of 0.5: never within 2r.
  const PhasePoint x = two_balls(Vec{{0.25, 0.25}}, Vec{{0.75, 0.75}}, Vec{{c, 0.0}}, Vec{{-c, 0.0}});
  const std::vector<Pair> prescription{Pair{0, 1}};
  EXPECT_THROW(phantom_flow(p, x, prescription), PrescriptionStalled);
}
