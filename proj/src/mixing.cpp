#include "latticeperm/mixing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "latticeperm/parallel.hpp"

namespace latticeperm {

namespace {
constexpr int kMcChunks = 64;
}

int TvTrajectory::first_below(double threshold) const {
  for (const TvPoint& p : points) {
    if (p.tv < threshold) return p.t;
  }
  return -1;
}

bool TvTrajectory::nonincreasing(double slack) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].tv > points[i - 1].tv + slack) return false;
  }
  return true;
}

TvTrajectory exact_tv_trajectory(const WalkSpace& space, std::uint64_t state, int t_max) {
  if (t_max < 0) throw DomainError("t_max must be >= 0");
  if (!space.in_distinct_region(state)) {
    throw DomainError("trajectory start must lie in the distinct region");
  }
  const WalkVector uniform = space.uniform_on_distinct();
  TvTrajectory trajectory{space.shape(), state, {}};
  trajectory.points.reserve(static_cast<std::size_t>(t_max) + 1);

  WalkVector d = space.apply(OperatorKind::axis_walk(0), space.basis(state));
  for (int t = 0; t <= t_max; ++t) {
    double l1 = 0.0;
    for (std::uint64_t s = 0; s < space.num_states(); ++s) {
      l1 += std::abs(d.values[s] - uniform.values[s]);
    }
    trajectory.points.push_back({t, 0.5 * l1});
    if (t < t_max) {
      d = space.apply(OperatorKind::axis_walk(0), space.apply(OperatorKind::axis_walk(1), d));
    }
  }
  return trajectory;
}

std::uint64_t canonical_safe_state(const LatticeShape& shape) {
  if (shape.slice_sites() < 63 && static_cast<std::uint64_t>(shape.k) > (1ull << shape.slice_sites())) {
    throw DomainError("arity exceeds the slice alphabet; no all-distinct state exists");
  }
  const PackedOps ops(shape);
  std::uint64_t state = 0;
  for (int m = 0; m < shape.k; ++m) {
    for (int i = 0; i < shape.side; ++i) {
      state = ops.with_slice(state, 0, i, m, static_cast<std::uint64_t>(m));
    }
  }
  return state;
}

PerTargetBound per_target_bound(const WalkSpace& space, std::uint64_t x, std::uint64_t y, int t) {
  if (!space.in_distinct_region(x) || !space.in_distinct_region(y)) {
    throw DomainError("per-target bound is stated for states in the distinct region");
  }
  const auto steps = alternation_walk(t);
  const WalkVector d = space.push_forward(x, steps);
  PerTargetBound out;
  out.lhs = std::abs(d.values[y] - 1.0 / static_cast<double>(space.d_size()));
  out.envelope = static_cast<double>(t + 1) / static_cast<double>(space.class_size(y, 0));
  out.pass = out.lhs <= out.envelope + 1e-15;
  return out;
}

PerTargetSweep per_target_bound_sweep(const WalkSpace& space, int t_max) {
  if (t_max < 0) throw DomainError("t_max must be >= 0");
  PerTargetSweep sweep;
  sweep.max_lhs.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
  const double uniform_mass = 1.0 / static_cast<double>(space.d_size());
  const std::uint64_t n = space.num_states();

  for (std::uint64_t x = 0; x < n; ++x) {
    if (!space.in_distinct_region(x)) continue;
    WalkVector d = space.apply(OperatorKind::axis_walk(0), space.basis(x));
    for (int t = 0; t <= t_max; ++t) {
      double worst = 0.0;
      for (std::uint64_t y = 0; y < n; ++y) {
        if (!space.in_distinct_region(y)) continue;
        const double lhs = std::abs(d.values[y] - uniform_mass);
        worst = std::max(worst, lhs);
        const double envelope =
            static_cast<double>(t + 1) / static_cast<double>(space.class_size(y, 0));
        if (lhs > envelope + 1e-15 && sweep.envelope_holds) {
          sweep.envelope_holds = false;
          sweep.witness_x = x;
          sweep.witness_y = y;
        }
      }
      auto& slot = sweep.max_lhs[static_cast<std::size_t>(t)];
      slot = std::max(slot, worst);
      if (t < t_max) {
        d = space.apply(OperatorKind::axis_walk(0), space.apply(OperatorKind::axis_walk(1), d));
      }
    }
  }
  return sweep;
}

// --- samplers ---------------------------------------------------------------

namespace {

std::uint64_t sample_distinct_values(std::span<std::uint64_t> out, int bits, StreamRng& rng) {
  // Sequential rejection; block counts are tiny relative to the alphabet.
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (;;) {
      const std::uint64_t v = (bits >= 64) ? rng.next() : (rng.next() >> (64 - bits));
      bool fresh = true;
      for (std::size_t j = 0; j < i; ++j) {
        if (out[j] == v) {
          fresh = false;
          break;
        }
      }
      if (fresh) {
        out[i] = v;
        break;
      }
    }
  }
  return out.empty() ? 0 : out[0];
}

}  // namespace

std::uint64_t idealized_axis_step(const PackedOps& ops, std::uint64_t state, int axis,
                                  StreamRng& rng) {
  const LatticeShape& shape = ops.shape();
  const int bits = static_cast<int>(shape.slice_sites());
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(shape.k));
  std::vector<std::uint64_t> fresh(static_cast<std::size_t>(shape.k));
  for (int i = 0; i < shape.side; ++i) {
    for (int m = 0; m < shape.k; ++m) keys[static_cast<std::size_t>(m)] = ops.slice_key(state, axis, i, m);
    const SetPartition blocks = SetPartition::from_values(keys);
    const int block_count = blocks.block_count();
    sample_distinct_values(std::span<std::uint64_t>(fresh.data(), static_cast<std::size_t>(block_count)),
                           bits, rng);
    for (int m = 0; m < shape.k; ++m) {
      state = ops.with_slice(state, axis, i, m,
                             fresh[blocks.labels()[static_cast<std::size_t>(m)]]);
    }
  }
  return state;
}

std::uint64_t idealized_global_step(const PackedOps& ops, std::uint64_t state, StreamRng& rng) {
  const LatticeShape& shape = ops.shape();
  const int bits = static_cast<int>(shape.n);
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(shape.k));
  std::vector<std::uint64_t> fresh(static_cast<std::size_t>(shape.k));
  for (int m = 0; m < shape.k; ++m) keys[static_cast<std::size_t>(m)] = ops.member_key(state, m);
  const SetPartition blocks = SetPartition::from_values(keys);
  sample_distinct_values(
      std::span<std::uint64_t>(fresh.data(), static_cast<std::size_t>(blocks.block_count())), bits,
      rng);
  for (int m = 0; m < shape.k; ++m) {
    state = ops.with_member(state, m, fresh[blocks.labels()[static_cast<std::size_t>(m)]]);
  }
  return state;
}

namespace {

class IdealizedSampler final : public TrajectorySampler {
 public:
  IdealizedSampler(const LatticeShape& shape, std::uint64_t start, std::vector<OperatorKind> steps)
      : ops_(shape), start_(start), steps_(std::move(steps)) {
    for (const OperatorKind& op : steps_) {
      if (op.tag == OperatorKind::Tag::Composition) {
        throw DomainError("idealized sampling takes a flat step list");
      }
    }
  }

  std::unique_ptr<TrajectorySampler> clone() const override {
    return std::make_unique<IdealizedSampler>(ops_.shape(), start_, steps_);
  }

  std::uint64_t sample(StreamRng& rng) override {
    std::uint64_t state = start_;
    for (const OperatorKind& op : steps_) {
      state = (op.tag == OperatorKind::Tag::Axis) ? idealized_axis_step(ops_, state, op.axis, rng)
                                                  : idealized_global_step(ops_, state, rng);
    }
    return state;
  }

 private:
  PackedOps ops_;
  std::uint64_t start_;
  std::vector<OperatorKind> steps_;
};

class CircuitSampler final : public TrajectorySampler {
 public:
  CircuitSampler(const LatticeShape& shape, std::uint64_t start, CompiledCircuit layout)
      : shape_(shape), start_(start), layout_(std::move(layout)) {
    if (shape.sites() > 63) throw CapacityError("circuit sampling needs sites() <= 63");
  }

  std::unique_ptr<TrajectorySampler> clone() const override {
    return std::make_unique<CircuitSampler>(shape_, start_, layout_);
  }

  std::uint64_t sample(StreamRng& rng) override {
    layout_.resample_tables(rng);
    std::uint64_t state = start_;
    for (int m = 0; m < shape_.k; ++m) state = layout_.apply_packed(state, shape_.k, m);
    return state;
  }

 private:
  LatticeShape shape_;
  std::uint64_t start_;
  CompiledCircuit layout_;
};

CompiledCircuit row_column_layout(const LatticeShape& shape, int base_layers) {
  if (shape.dims != 2) throw DomainError("row/column layer sampling is two-dimensional");
  StreamRng scaffold(0);
  CircuitSpec seq;
  seq.kind = CircuitSpec::Kind::Sequence;
  for (int axis = 0; axis < 2; ++axis) {
    CircuitSpec parallel;
    parallel.kind = CircuitSpec::Kind::AxisParallel;
    parallel.axis = axis;
    for (int i = 0; i < shape.side; ++i) {
      parallel.children.push_back(build_brickwork_1d(shape.side, base_layers, scaffold.split(
          static_cast<std::uint64_t>(axis * shape.side + i))));
    }
    seq.children.push_back(std::move(parallel));
  }
  return compile(seq, shape.dims, shape.side);
}

}  // namespace

std::unique_ptr<TrajectorySampler> make_idealized_sampler(const LatticeShape& shape,
                                                          std::uint64_t start,
                                                          std::vector<OperatorKind> steps) {
  return std::make_unique<IdealizedSampler>(shape, start, std::move(steps));
}

std::unique_ptr<TrajectorySampler> make_circuit_sampler(const LatticeShape& shape,
                                                        std::uint64_t start, int rounds,
                                                        int base_layers) {
  StreamRng scaffold(0);
  const CircuitSpec spec = build_lattice_circuit(shape.dims, shape.side, rounds, base_layers, scaffold);
  return std::make_unique<CircuitSampler>(shape, start, compile(spec, shape.dims, shape.side));
}

std::unique_ptr<TrajectorySampler> make_row_column_circuit_sampler(const LatticeShape& shape,
                                                                   std::uint64_t start,
                                                                   int base_layers) {
  return std::make_unique<CircuitSampler>(shape, start, row_column_layout(shape, base_layers));
}

// --- estimators --------------------------------------------------------------

McTvResult mc_tv_estimate(const LatticeShape& shape, const TrajectorySampler& sampler,
                          std::uint64_t samples, std::uint64_t seed, int threads) {
  if (samples == 0) throw DomainError("need at least one sample");
  const BigCount d_big = falling_factorial(big_pow2(static_cast<unsigned>(shape.n)),
                                           static_cast<unsigned>(shape.k));
  const double d_size = big_count_to_double(d_big);

  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> chunk_counts(kMcChunks);
  for_chunks(samples, threads, kMcChunks, [&](int chunk, std::uint64_t begin, std::uint64_t end) {
    auto worker = sampler.clone();
    StreamRng rng = StreamRng(seed).split(static_cast<std::uint64_t>(chunk));
    auto& counts = chunk_counts[static_cast<std::size_t>(chunk)];
    for (std::uint64_t i = begin; i < end; ++i) ++counts[worker->sample(rng)];
  });

  std::unordered_map<std::uint64_t, std::uint64_t> merged;
  for (const auto& counts : chunk_counts) {
    for (const auto& [state, c] : counts) merged[state] += c;
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted(merged.begin(), merged.end());
  std::sort(sorted.begin(), sorted.end());

  const PackedOps ops(shape);
  const double uniform_mass = 1.0 / d_size;
  const double m = static_cast<double>(samples);
  double seen_term = 0.0;
  std::uint64_t distinct_in_d = 0;
  for (const auto& [state, c] : sorted) {
    const double p_hat = static_cast<double>(c) / m;
    if (ops.in_distinct_region(state)) {
      seen_term += std::abs(p_hat - uniform_mass);
      ++distinct_in_d;
    } else {
      seen_term += p_hat;
    }
  }
  const double unseen_term = (d_size - static_cast<double>(distinct_in_d)) * uniform_mass;

  McTvResult out;
  out.tv = 0.5 * (seen_term + unseen_term);
  out.bias_bound = std::sqrt(d_size / (4.0 * m));
  out.sigma_bound = 0.5 / std::sqrt(m);
  out.samples = samples;
  out.distinct_seen = sorted.size();
  out.low_sample_warning = m < 50.0 * d_size;
  out.seed = seed;
  return out;
}

McCollisionResult mc_collision_rate(const LatticeShape& shape, const TrajectorySampler& sampler,
                                    std::uint64_t samples, std::uint64_t seed, int threads) {
  if (samples == 0) throw DomainError("need at least one sample");
  const PackedOps ops(shape);
  std::vector<std::uint64_t> chunk_hits(kMcChunks, 0);
  for_chunks(samples, threads, kMcChunks, [&](int chunk, std::uint64_t begin, std::uint64_t end) {
    auto worker = sampler.clone();
    StreamRng rng = StreamRng(seed).split(static_cast<std::uint64_t>(chunk));
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      if (ops.classify(worker->sample(rng), 0) == RegionLabel::Coll) ++hits;
    }
    chunk_hits[static_cast<std::size_t>(chunk)] = hits;
  });
  std::uint64_t collisions = 0;
  for (std::uint64_t h : chunk_hits) collisions += h;

  McCollisionResult out;
  out.collisions = collisions;
  out.samples = samples;
  out.rate = static_cast<double>(collisions) / static_cast<double>(samples);
  out.interval = wilson_interval(collisions, samples);
  out.seed = seed;
  return out;
}

HammingTailResult hamming_tail_check(int length, std::uint64_t samples, std::uint64_t seed,
                                     int threads) {
  if (length < 4 || length > 63) throw DomainError("tail check supports lengths in [4, 63]");
  if (samples == 0) throw DomainError("need at least one sample");
  const std::uint64_t mask = (length == 63) ? ~0ull >> 1 : (1ull << length) - 1;
  const int threshold = length / 4;

  std::vector<std::uint64_t> chunk_hits(kMcChunks, 0);
  for_chunks(samples, threads, kMcChunks, [&](int chunk, std::uint64_t begin, std::uint64_t end) {
    StreamRng rng = StreamRng(seed).split(static_cast<std::uint64_t>(chunk));
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t x = rng.next() & mask;
      std::uint64_t y = rng.next() & mask;
      while (y == x) y = rng.next() & mask;
      if (std::popcount(x ^ y) <= threshold) ++hits;
    }
    chunk_hits[static_cast<std::size_t>(chunk)] = hits;
  });
  std::uint64_t hits = 0;
  for (std::uint64_t h : chunk_hits) hits += h;

  HammingTailResult out;
  out.p_hat = static_cast<double>(hits) / static_cast<double>(samples);
  out.bound = std::exp(-static_cast<double>(length) / 16.0);
  out.sigma = std::sqrt(std::max(out.p_hat * (1.0 - out.p_hat), 1.0 / static_cast<double>(samples)) /
                        static_cast<double>(samples));
  out.samples = samples;
  out.pass = out.p_hat <= out.bound + 3.0 * out.sigma;
  return out;
}

ChiSquareResult chi_square_vs_distribution(const LatticeShape& shape,
                                           const TrajectorySampler& sampler,
                                           const WalkVector& exact, std::uint64_t samples,
                                           std::uint64_t seed, int threads) {
  if (shape.sites() > 24) throw CapacityError("chi-square sweep needs an enumerable shape");
  const std::uint64_t num_states = 1ull << shape.sites();
  if (exact.values.size() != num_states) throw DomainError("distribution size mismatch");

  std::vector<std::vector<std::uint64_t>> chunk_counts(
      kMcChunks, std::vector<std::uint64_t>(num_states, 0));
  for_chunks(samples, threads, kMcChunks, [&](int chunk, std::uint64_t begin, std::uint64_t end) {
    auto worker = sampler.clone();
    StreamRng rng = StreamRng(seed).split(static_cast<std::uint64_t>(chunk));
    auto& counts = chunk_counts[static_cast<std::size_t>(chunk)];
    for (std::uint64_t i = begin; i < end; ++i) ++counts[worker->sample(rng)];
  });
  std::vector<std::uint64_t> counts(num_states, 0);
  for (const auto& c : chunk_counts) {
    for (std::uint64_t s = 0; s < num_states; ++s) counts[s] += c[s];
  }
  return chi_square_gof(counts, exact.values);
}

// --- repeated-member reduction ----------------------------------------------

ProjectedTuple project_first_occurrences(const PackedOps& ops, std::uint64_t state) {
  const SetPartition pattern = ops.grid_partition(state);
  const std::vector<int> reps = pattern.block_representatives();
  ProjectedTuple out;
  out.pattern = pattern;
  out.shape = ops.shape().with_arity(static_cast<int>(reps.size()));
  const PackedOps tau_ops(out.shape);
  std::uint64_t projected = 0;
  for (std::size_t b = 0; b < reps.size(); ++b) {
    projected = tau_ops.with_member(projected, static_cast<int>(b),
                                    ops.member_key(state, reps[b]));
  }
  out.state = projected;
  return out;
}

std::uint64_t lift_by_pattern(const PackedOps& ops, const SetPartition& pattern,
                              std::uint64_t tau_state) {
  if (pattern.size() != ops.shape().k) throw DomainError("pattern arity mismatch");
  const PackedOps tau_ops(ops.shape().with_arity(pattern.block_count()));
  std::uint64_t state = 0;
  for (int m = 0; m < ops.shape().k; ++m) {
    state = ops.with_member(
        state, m, tau_ops.member_key(tau_state, pattern.labels()[static_cast<std::size_t>(m)]));
  }
  return state;
}

KTauReport k_to_tau_check(const WalkSpace& space, std::uint64_t state, int t) {
  if (space.in_distinct_region(state)) {
    throw DomainError("reduction check needs a state with repeated members");
  }
  const auto steps = alternation_walk(t);

  const WalkVector image = space.push_forward(state, steps);
  const WalkVector target = space.uniform_on_grid_class(state);
  double l1 = 0.0;
  for (std::uint64_t s = 0; s < space.num_states(); ++s) {
    l1 += std::abs(image.values[s] - target.values[s]);
  }

  const ProjectedTuple projected = project_first_occurrences(space.ops(), state);
  const WalkSpace tau_space(projected.shape);
  const WalkVector tau_image = tau_space.push_forward(projected.state, steps);
  const WalkVector tau_target = tau_space.uniform_on_distinct();
  double tau_l1 = 0.0;
  for (std::uint64_t s = 0; s < tau_space.num_states(); ++s) {
    tau_l1 += std::abs(tau_image.values[s] - tau_target.values[s]);
  }

  KTauReport out;
  out.tau = projected.shape.k;
  out.tv_full = 0.5 * l1;
  out.tv_projected = 0.5 * tau_l1;
  out.delta = std::abs(out.tv_full - out.tv_projected);
  out.pass = out.delta <= 1e-12;
  return out;
}

}  // namespace latticeperm
