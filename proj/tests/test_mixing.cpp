#include <doctest.h>

#include <cmath>
#include <set>

#include "latticeperm/mixing.hpp"

using namespace latticeperm;

namespace {

std::uint64_t first_safe(const WalkSpace& space) {
  for (std::uint64_t s = 0; s < space.num_states(); ++s) {
    if (space.region(s, 0) == RegionLabel::Safe) return s;
  }
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("exact TV trajectory at s=2 k=2") {
  const WalkSpace space(LatticeShape::make(2, 2, 2));
  const std::uint64_t safe = first_safe(space);
  const TvTrajectory trajectory = exact_tv_trajectory(space, safe, 12);

  // Census arithmetic oracle for t=0 from the safe class:
  // (1/2) * (144 * (1/144 - 1/240) + 96 / 240) = 0.4.
  const double t0 = 0.5 * (144.0 * (1.0 / 144.0 - 1.0 / 240.0) + 96.0 / 240.0);
  CHECK(t0 == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(trajectory.points[0].tv == doctest::Approx(t0).epsilon(1e-12));

  CHECK(trajectory.nonincreasing());
  CHECK(trajectory.points[3].tv < trajectory.points[1].tv);

  // Frozen regression constants: threshold step and per-step contraction
  // (checked while TV is far above double-precision noise).
  CHECK(trajectory.first_below(1e-6) == 8);
  for (std::size_t i = 1; i < trajectory.points.size() && trajectory.points[i].tv > 1e-6; ++i) {
    CHECK(trajectory.points[i].tv / trajectory.points[i - 1].tv ==
          doctest::Approx(16.0 / 81.0).epsilon(1e-9));
  }
}

TEST_CASE("exact TV trajectory is zero for k=1") {
  const WalkSpace space(LatticeShape::make(2, 2, 1));
  const TvTrajectory trajectory = exact_tv_trajectory(space, 5, 4);
  for (const auto& point : trajectory.points) CHECK(point.tv <= 1e-14);
}

TEST_CASE("TV to uniform never increases along mixed operator prefixes") {
  const WalkSpace space(LatticeShape::make(2, 2, 2));
  const WalkVector uniform = space.uniform_on_distinct();
  const std::vector<OperatorKind> steps = {
      OperatorKind::axis_walk(0), OperatorKind::axis_walk(1), OperatorKind::axis_walk(0),
      OperatorKind::axis_walk(1), OperatorKind::axis_walk(0)};
  for (std::uint64_t x = 0; x < space.num_states(); x += 37) {
    if (!space.in_distinct_region(x)) continue;
    WalkVector d = space.basis(x);
    double prev = 2.0;
    for (const auto& op : steps) {
      d = space.apply(op, d);
      double l1 = 0.0;
      for (std::uint64_t s = 0; s < space.num_states(); ++s) {
        l1 += std::abs(d.values[s] - uniform.values[s]);
      }
      const double tv = 0.5 * l1;
      CHECK(tv <= prev + 1e-12);
      prev = tv;
    }
  }
}

TEST_CASE("per-target envelope at s=2 k=2") {
  const WalkSpace space(LatticeShape::make(2, 2, 2));
  const std::uint64_t safe = first_safe(space);

  SUBCASE("t=0 closed forms") {
    // Y in the safe class; X inside vs outside B(Y).
    const PerTargetBound inside = per_target_bound(space, safe, safe, 0);
    CHECK(inside.lhs == doctest::Approx(1.0 / 144.0 - 1.0 / 240.0).epsilon(1e-12));
    CHECK(inside.pass);

    std::uint64_t outside = 0;
    bool found = false;
    for (std::uint64_t x = 0; x < space.num_states() && !found; ++x) {
      if (space.in_distinct_region(x) &&
          space.transition_probability(OperatorKind::axis_walk(0), x, safe) == 0.0) {
        outside = x;
        found = true;
      }
    }
    REQUIRE(found);
    const PerTargetBound apart = per_target_bound(space, outside, safe, 0);
    CHECK(apart.lhs == doctest::Approx(1.0 / 240.0).epsilon(1e-12));
    CHECK(apart.pass);
  }
  SUBCASE("k=1 LHS vanishes") {
    const WalkSpace tiny(LatticeShape::make(2, 2, 1));
    for (int t = 0; t <= 2; ++t) {
      CHECK(per_target_bound(tiny, 3, 9, t).lhs <= 1e-14);
    }
  }
  SUBCASE("sweep holds for all pairs up to t=4 and decays monotonically") {
    const PerTargetSweep sweep = per_target_bound_sweep(space, 4);
    CHECK(sweep.envelope_holds);
    for (std::size_t t = 1; t < sweep.max_lhs.size(); ++t) {
      CHECK(sweep.max_lhs[t] <= sweep.max_lhs[t - 1] + 1e-15);
    }
  }
}

TEST_CASE("idealized sampler agrees with the exact distribution") {
  const LatticeShape shape = LatticeShape::make(2, 2, 2);
  const WalkSpace space(shape);
  const std::uint64_t safe = first_safe(space);

  SUBCASE("trajectories never cross between distinct and repeated regions") {
    auto sampler = make_idealized_sampler(shape, safe, alternation_walk(1));
    StreamRng rng(5);
    auto worker = sampler->clone();
    for (int i = 0; i < 500; ++i) {
      CHECK(space.in_distinct_region(worker->sample(rng)));
    }
  }
  SUBCASE("chi-square fit against push-forward at t=1, 10^6 samples") {
    auto sampler = make_idealized_sampler(shape, safe, alternation_walk(1));
    const WalkVector exact = space.push_forward(safe, alternation_walk(1));
    const ChiSquareResult fit =
        chi_square_vs_distribution(shape, *sampler, exact, 1000000, 99, 0);
    CHECK(fit.p_value > 0.001);
  }
  SUBCASE("estimate tracks the exact TV within bias + 3 sigma at 10^6 samples") {
    auto sampler = make_idealized_sampler(shape, safe, alternation_walk(2));
    const McTvResult mc = mc_tv_estimate(shape, *sampler, 1000000, 4242, 0);
    const TvTrajectory trajectory = exact_tv_trajectory(space, safe, 2);
    CHECK(std::abs(mc.tv - trajectory.points[2].tv) <= mc.bias_bound + 3.0 * mc.sigma_bound);
    CHECK_FALSE(mc.low_sample_warning);
  }
  SUBCASE("sampling the target against itself stays near zero") {
    auto sampler = make_idealized_sampler(shape, safe, {OperatorKind::global()});
    const McTvResult mc = mc_tv_estimate(shape, *sampler, 200000, 7, 0);
    CHECK(mc.tv <= mc.bias_bound + 3.0 * mc.sigma_bound);
  }
}

TEST_CASE("monte carlo estimates are thread-count independent") {
  const LatticeShape shape = LatticeShape::make(2, 2, 2);
  const WalkSpace space(shape);
  const std::uint64_t safe = first_safe(space);
  auto sampler = make_idealized_sampler(shape, safe,
                                        {OperatorKind::axis_walk(0), OperatorKind::axis_walk(1)});
  const McCollisionResult one = mc_collision_rate(shape, *sampler, 50000, 31337, 1);
  const McCollisionResult two = mc_collision_rate(shape, *sampler, 50000, 31337, 2);
  CHECK(one.collisions == two.collisions);
  const McTvResult tv_one = mc_tv_estimate(shape, *sampler, 50000, 31337, 1);
  const McTvResult tv_two = mc_tv_estimate(shape, *sampler, 50000, 31337, 2);
  CHECK(tv_one.tv == tv_two.tv);
  CHECK(tv_one.distinct_seen == tv_two.distinct_seen);
}

TEST_CASE("doubling samples shrinks the seed-to-seed spread") {
  const LatticeShape shape = LatticeShape::make(2, 2, 2);
  const WalkSpace space(shape);
  const std::uint64_t safe = first_safe(space);
  auto sampler = make_idealized_sampler(shape, safe, alternation_walk(1));
  const TvTrajectory trajectory = exact_tv_trajectory(space, safe, 1);
  const double exact = trajectory.points[1].tv;

  auto spread = [&](std::uint64_t samples) {
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const McTvResult mc = mc_tv_estimate(shape, *sampler, samples, seed, 0);
      acc += (mc.tv - exact) * (mc.tv - exact);
    }
    return std::sqrt(acc / 20.0);
  };
  CHECK(spread(32000) < spread(8000));
}

TEST_CASE("collision rate sampling") {
  SUBCASE("k=1 collides never") {
    const LatticeShape shape = LatticeShape::make(2, 2, 1);
    auto sampler = make_idealized_sampler(shape, 3,
                                          {OperatorKind::axis_walk(0), OperatorKind::axis_walk(1)});
    const McCollisionResult mc = mc_collision_rate(shape, *sampler, 2000, 1, 0);
    CHECK(mc.collisions == 0);
  }
  SUBCASE("interval brackets the exact value at s=2 k=2") {
    const LatticeShape shape = LatticeShape::make(2, 2, 2);
    const WalkSpace space(shape);
    const std::uint64_t safe = first_safe(space);
    auto sampler = make_idealized_sampler(shape, safe,
                                          {OperatorKind::axis_walk(0), OperatorKind::axis_walk(1)});
    const McCollisionResult mc = mc_collision_rate(shape, *sampler, 200000, 2024, 0);
    const double exact = space.collision_probability_exact(safe).probability;
    CHECK(mc.interval.lo <= exact);
    CHECK(exact <= mc.interval.hi);
  }
  SUBCASE("real row-column circuits at s=4 stay plausible and in-region") {
    const LatticeShape shape = LatticeShape::make(2, 4, 2);
    const PackedOps ops(shape);
    std::uint64_t start = 0;
    start = ops.with_member(start, 0, 0x0123);
    start = ops.with_member(start, 1, 0x4567);
    auto sampler = make_row_column_circuit_sampler(shape, start, 2);
    auto worker = sampler->clone();
    StreamRng rng(77);
    for (int i = 0; i < 200; ++i) {
      CHECK(ops.in_distinct_region(worker->sample(rng)));
    }
    const McCollisionResult mc = mc_collision_rate(shape, *sampler, 20000, 99, 0);
    CHECK(mc.rate >= 0.0);
    CHECK(mc.rate <= 1.0);
  }
}

TEST_CASE("hamming tail stays under the exponential envelope") {
  for (int length : {16, 32}) {
    const HammingTailResult tail = hamming_tail_check(length, 200000, 8, 0);
    INFO("length ", length, " p_hat ", tail.p_hat, " bound ", tail.bound);
    CHECK(tail.pass);
  }
}

TEST_CASE("repeated-member tuples reduce to their distinct projection") {
  SUBCASE("k=2 with equal members behaves like a single grid") {
    const WalkSpace space(LatticeShape::make(2, 2, 2));
    const PackedOps& ops = space.ops();
    std::uint64_t x = 0;
    x = ops.with_member(x, 0, 0b1010);
    x = ops.with_member(x, 1, 0b1010);
    for (int t = 0; t <= 2; ++t) {
      const KTauReport report = k_to_tau_check(space, x, t);
      CHECK(report.tau == 1);
      CHECK(report.pass);
      CHECK(report.tv_full <= 1e-12);  // a single grid mixes in one row layer
    }
  }
  SUBCASE("k=3 with two distinct members matches the k=2 trajectory") {
    const WalkSpace space(LatticeShape::make(2, 2, 3));
    const PackedOps& ops = space.ops();
    std::uint64_t x = 0;
    x = ops.with_member(x, 0, 0b0101);
    x = ops.with_member(x, 1, 0b0101);
    x = ops.with_member(x, 2, 0b0011);

    const WalkSpace pair_space(LatticeShape::make(2, 2, 2));
    const ProjectedTuple projected = project_first_occurrences(ops, x);
    REQUIRE(projected.shape.k == 2);
    const TvTrajectory pair = exact_tv_trajectory(pair_space, projected.state, 2);
    for (int t = 0; t <= 2; ++t) {
      const KTauReport report = k_to_tau_check(space, x, t);
      CHECK(report.tau == 2);
      CHECK(report.pass);
      CHECK(report.tv_full ==
            doctest::Approx(pair.points[static_cast<std::size_t>(t)].tv).epsilon(1e-12));
    }
  }
  SUBCASE("distinct tuples are rejected") {
    const WalkSpace space(LatticeShape::make(2, 2, 2));
    CHECK_THROWS_AS(k_to_tau_check(space, first_safe(space), 1), DomainError);
  }
}

TEST_CASE("projection round-trips over a whole coloring class") {
  const LatticeShape shape = LatticeShape::make(2, 2, 3);
  const PackedOps ops(shape);
  std::uint64_t x = 0;
  x = ops.with_member(x, 0, 0b0101);
  x = ops.with_member(x, 1, 0b0101);
  x = ops.with_member(x, 2, 0b0011);
  const SetPartition pattern = ops.grid_partition(x);

  // Lift every distinct pair and verify the projection inverts the lift.
  const LatticeShape pair_shape = shape.with_arity(2);
  const PackedOps pair_ops(pair_shape);
  std::set<std::uint64_t> lifted;
  for (std::uint64_t y = 0; y < (1ull << pair_shape.sites()); ++y) {
    if (!pair_ops.in_distinct_region(y)) continue;
    const std::uint64_t up = lift_by_pattern(ops, pattern, y);
    CHECK(ops.grid_partition(up) == pattern);
    const ProjectedTuple back = project_first_occurrences(ops, up);
    CHECK(back.state == y);
    lifted.insert(up);
  }
  CHECK(lifted.size() == 240);  // the class is in bijection with distinct pairs
}
