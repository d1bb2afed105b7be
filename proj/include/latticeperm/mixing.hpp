#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "latticeperm/circuit.hpp"
#include "latticeperm/stats.hpp"
#include "latticeperm/walk.hpp"

namespace latticeperm {

struct TvPoint {
  int t = 0;
  double tv = 0.0;
};

struct TvTrajectory {
  LatticeShape shape;
  std::uint64_t start_state = 0;
  std::vector<TvPoint> points;

  // First t whose TV falls below the threshold, or -1.
  int first_below(double threshold) const;
  bool nonincreasing(double slack = 1e-12) const;
};

// Exact distribution of the alternating idealized walk after t rounds,
// measured against uniform on the distinct region; requires an enumerable
// shape and a start state in the distinct region.
TvTrajectory exact_tv_trajectory(const WalkSpace& space, std::uint64_t state, int t_max);

// A deterministic start state with all slices pairwise distinct: member m
// carries slice value m along axis 0. Needs k <= 2^{n/side}.
std::uint64_t canonical_safe_state(const LatticeShape& shape);

struct PerTargetBound {
  double lhs = 0.0;       // |<e_X, (T_walk^t - T_global) e_Y>|
  double envelope = 0.0;  // (t+1) / |B(Y)|
  bool pass = false;
};

PerTargetBound per_target_bound(const WalkSpace& space, std::uint64_t x, std::uint64_t y, int t);

struct PerTargetSweep {
  std::vector<double> max_lhs;  // worst |lhs| per t, over all X,Y in D
  bool envelope_holds = true;
  std::uint64_t witness_x = 0;
  std::uint64_t witness_y = 0;
};

PerTargetSweep per_target_bound_sweep(const WalkSpace& space, int t_max);

// --- Monte Carlo trajectory sources ---------------------------------------

// One random trajectory endpoint per call. Workers clone the sampler, so a
// sampler may keep mutable scratch.
class TrajectorySampler {
 public:
  virtual ~TrajectorySampler() = default;
  virtual std::unique_ptr<TrajectorySampler> clone() const = 0;
  virtual std::uint64_t sample(StreamRng& rng) = 0;
};

// Resamples color classes directly: each axis step draws fresh distinct
// slice values per block, the global step does the same on whole members.
std::unique_ptr<TrajectorySampler> make_idealized_sampler(const LatticeShape& shape,
                                                          std::uint64_t start,
                                                          std::vector<OperatorKind> steps);

// Fresh uniformly random gates on the brickwork architecture per call,
// applied to every tuple member.
std::unique_ptr<TrajectorySampler> make_circuit_sampler(const LatticeShape& shape,
                                                        std::uint64_t start, int rounds,
                                                        int base_layers);

// Row layer followed by column layer, real gates; for collision sampling.
std::unique_ptr<TrajectorySampler> make_row_column_circuit_sampler(const LatticeShape& shape,
                                                                   std::uint64_t start,
                                                                   int base_layers);

std::uint64_t idealized_axis_step(const PackedOps& ops, std::uint64_t state, int axis,
                                  StreamRng& rng);
std::uint64_t idealized_global_step(const PackedOps& ops, std::uint64_t state, StreamRng& rng);

// --- Monte Carlo estimators ------------------------------------------------

struct McTvResult {
  double tv = 0.0;
  double bias_bound = 0.0;   // sqrt(|D| / (4 m)), the plug-in estimator's bias
  double sigma_bound = 0.0;  // 1 / (2 sqrt(m)), bounded-differences deviation
  std::uint64_t samples = 0;
  std::uint64_t distinct_seen = 0;
  bool low_sample_warning = false;  // samples < 50 |D|
  std::uint64_t seed = 0;
};

McTvResult mc_tv_estimate(const LatticeShape& shape, const TrajectorySampler& sampler,
                          std::uint64_t samples, std::uint64_t seed, int threads = 0);

struct McCollisionResult {
  double rate = 0.0;
  WilsonInterval interval;
  std::uint64_t collisions = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// Fraction of trajectories landing in the axis-0 collision region.
McCollisionResult mc_collision_rate(const LatticeShape& shape, const TrajectorySampler& sampler,
                                    std::uint64_t samples, std::uint64_t seed, int threads = 0);

struct HammingTailResult {
  double p_hat = 0.0;
  double bound = 0.0;  // exp(-length / 16)
  double sigma = 0.0;
  std::uint64_t samples = 0;
  bool pass = false;
};

// Pr[d(x, y) <= length/4] for uniform distinct bit vectors of the given
// length, against the Hoeffding envelope.
HammingTailResult hamming_tail_check(int length, std::uint64_t samples, std::uint64_t seed,
                                     int threads = 0);

// Chi-square fit of sampled endpoints against an exact distribution over the
// enumerable state space.
ChiSquareResult chi_square_vs_distribution(const LatticeShape& shape,
                                           const TrajectorySampler& sampler,
                                           const WalkVector& exact, std::uint64_t samples,
                                           std::uint64_t seed, int threads = 0);

// --- Repeated-member reduction ---------------------------------------------

// First-occurrence members of each equality block, packed as a tau-tuple.
struct ProjectedTuple {
  LatticeShape shape;
  std::uint64_t state = 0;
  SetPartition pattern;
};

ProjectedTuple project_first_occurrences(const PackedOps& ops, std::uint64_t state);

// Rebuilds the k-tuple from a tau-tuple and an equality pattern.
std::uint64_t lift_by_pattern(const PackedOps& ops, const SetPartition& pattern,
                              std::uint64_t tau_state);

struct KTauReport {
  int tau = 0;
  double tv_full = 0.0;       // walk image of X vs uniform on its grid class
  double tv_projected = 0.0;  // projected tuple vs uniform on distinct tau-tuples
  double delta = 0.0;
  bool pass = false;
};

// Requires a start state with repeated members (outside the distinct region).
KTauReport k_to_tau_check(const WalkSpace& space, std::uint64_t state, int t);

}  // namespace latticeperm
