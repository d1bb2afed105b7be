#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latticeperm/lattice.hpp"

namespace latticeperm {

// A transition operator on functions over the packed state space.
// AxisWalk(a) resamples every slice along axis a with an independent uniform
// permutation of slice values; GlobalWalk resamples whole members with one
// uniform permutation of the member alphabet. Composition is a matrix
// product: the rightmost part acts first.
struct OperatorKind {
  enum class Tag { Axis, Global, Composition };

  Tag tag = Tag::Global;
  int axis = 0;
  std::vector<OperatorKind> parts;

  static OperatorKind axis_walk(int axis) {
    OperatorKind op;
    op.tag = Tag::Axis;
    op.axis = axis;
    return op;
  }
  static OperatorKind global() { return OperatorKind{}; }
  static OperatorKind composition(std::vector<OperatorKind> parts) {
    OperatorKind op;
    op.tag = Tag::Composition;
    op.parts = std::move(parts);
    return op;
  }

  std::string name() const;
};

// The row-column-row sandwich whose distance to the global walk drives the
// mixing analysis.
std::vector<OperatorKind> sandwich_sequence();

// Application-order operator list realizing t alternation rounds: one axis-0
// walk, then t repetitions of (axis-1 walk, axis-0 walk).
std::vector<OperatorKind> alternation_walk(int t);

struct WalkVector {
  LatticeShape shape;
  std::vector<double> values;

  double sum() const;
  double l2_norm() const;
};

struct SpectralOptions {
  double rel_tol = 1e-10;
  int max_iterations = 10000;
  std::uint64_t seed = 0x51DE5EED;
};

struct SpectralResult {
  double value = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
};

struct IdentityCheck {
  std::string identity;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::int64_t witness_state = -1;  // first offending basis state, -1 if none
};

struct EscapeBoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct CollisionExact {
  double probability = 0.0;
  double union_bound = 0.0;  // 2 * side * k^2 / 2^{(n/side)/16}
};

// Exact walk engine over an enumerable state space. Construction precomputes
// the color class of every packed state per axis plus the member-equality
// classes, after which every operator application is one linear pass.
// Instances are immutable after construction and safe to share across
// threads.
class WalkSpace {
 public:
  explicit WalkSpace(const LatticeShape& shape, int ceiling_bits = kDefaultEnumerationBits);

  const LatticeShape& shape() const { return shape_; }
  const PackedOps& ops() const { return ops_; }
  std::uint64_t num_states() const { return num_states_; }
  std::uint64_t d_size() const { return global_class_size_[discrete_class_]; }

  RegionLabel region(std::uint64_t state, int axis = 0) const {
    return static_cast<RegionLabel>(region_[static_cast<std::size_t>(axis)][state]);
  }
  bool in_distinct_region(std::uint64_t state) const {
    return global_class_[state] == discrete_class_;
  }
  // Size of the axis color class containing `state`.
  std::uint64_t class_size(std::uint64_t state, int axis) const {
    const auto& ids = axis_class_[static_cast<std::size_t>(axis)];
    return axis_class_size_[static_cast<std::size_t>(axis)][ids[state]];
  }
  std::uint64_t grid_class_size(std::uint64_t state) const {
    return global_class_size_[global_class_[state]];
  }
  std::uint64_t grid_class_id(std::uint64_t state) const { return global_class_[state]; }

  WalkVector basis(std::uint64_t state) const;
  WalkVector uniform_on_distinct() const;
  // Normalized indicator of one member-equality class.
  WalkVector uniform_on_grid_class(std::uint64_t member_state) const;
  WalkVector region_indicator(RegionLabel label, int axis = 0) const;

  WalkVector apply(const OperatorKind& op, const WalkVector& f) const;
  // Matrix product of `seq` (rightmost factor applied first).
  WalkVector apply_product(std::span<const OperatorKind> seq, const WalkVector& f) const;

  // e_X propagated through `ops` in application order; the result is a
  // probability distribution.
  WalkVector push_forward(std::uint64_t state, std::span<const OperatorKind> ops) const;

  double transition_probability(const OperatorKind& op, std::uint64_t from,
                                std::uint64_t to) const;

  // Mass on B_coll after an axis-0 walk followed by an axis-1 walk.
  CollisionExact collision_probability_exact(std::uint64_t state) const;
  // The same probability for every start state at once (row-then-column
  // escape probabilities computed through the adjoint), plus the maximum
  // over the distinct region.
  struct CollisionSweep {
    std::vector<double> probability;  // indexed by state
    double worst = 0.0;
    std::uint64_t argmax = 0;
    double union_bound = 0.0;
  };
  CollisionSweep collision_probability_sweep() const;

  // ||product(seq) - GlobalWalk||_2 by power iteration on the squared
  // difference; the difference operator is self-adjoint for palindromic
  // sequences such as the default row-column-row sandwich.
  SpectralResult spectral_norm_power(std::span<const OperatorKind> seq,
                                     const SpectralOptions& options = {}) const;
  // Dense eigen-decomposition oracle; requires 2^{nk} <= 2^12.
  double spectral_norm_dense(std::span<const OperatorKind> seq) const;

  // Self-adjointness, idempotence, global-walk absorption, and the
  // row-walk norm identity, each verified over a full basis sweep.
  std::vector<IdentityCheck> check_operator_identities(double tolerance = 1e-12) const;

  // Verifies <f, T g> <= max over supp(f) of sqrt(Pr[X -> supp(g)]) |f| |g|,
  // the warm-start bound the mixing analysis leans on.
  EscapeBoundCheck escape_bound_check(const WalkVector& f, const WalkVector& g,
                                      const OperatorKind& op) const;

 private:
  void apply_classes(const std::vector<std::uint32_t>& class_of,
                     const std::vector<std::uint64_t>& class_sizes, const double* in,
                     double* out) const;
  void apply_kind(const OperatorKind& op, const double* in, double* out,
                  std::vector<double>& scratch) const;
  void check_shape(const WalkVector& f) const;

  LatticeShape shape_;
  PackedOps ops_;
  std::uint64_t num_states_ = 0;

  std::vector<std::vector<std::uint32_t>> axis_class_;      // [axis][state]
  std::vector<std::vector<std::uint64_t>> axis_class_size_; // [axis][class]
  std::vector<std::uint32_t> global_class_;                 // [state]
  std::vector<std::uint64_t> global_class_size_;            // [class]
  std::uint32_t discrete_class_ = 0;
  std::vector<std::vector<std::uint8_t>> region_;           // [axis][state]
};

}  // namespace latticeperm
