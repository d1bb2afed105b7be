#include "latticeperm/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>

#include <Eigen/SVD>

#include "latticeperm/rng.hpp"

namespace latticeperm {

std::string OperatorKind::name() const {
  switch (tag) {
    case Tag::Axis: return "axis" + std::to_string(axis);
    case Tag::Global: return "global";
    case Tag::Composition: {
      std::string out;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.push_back('*');
        out += parts[i].name();
      }
      return out.empty() ? "identity" : out;
    }
  }
  return "?";
}

std::vector<OperatorKind> sandwich_sequence() {
  return {OperatorKind::axis_walk(0), OperatorKind::axis_walk(1), OperatorKind::axis_walk(0)};
}

std::vector<OperatorKind> alternation_walk(int t) {
  if (t < 0) throw DomainError("alternation rounds must be >= 0");
  std::vector<OperatorKind> ops;
  ops.reserve(static_cast<std::size_t>(2 * t + 1));
  ops.push_back(OperatorKind::axis_walk(0));
  for (int i = 0; i < t; ++i) {
    ops.push_back(OperatorKind::axis_walk(1));
    ops.push_back(OperatorKind::axis_walk(0));
  }
  return ops;
}

double WalkVector::sum() const {
  // Kahan compensation; plain accumulation noise at 2^24 entries would
  // swamp the 1e-12 mass checks.
  double total = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return total;
}

double WalkVector::l2_norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

WalkSpace::WalkSpace(const LatticeShape& shape, int ceiling_bits) : shape_(shape), ops_(shape) {
  if (!shape.enumerable(ceiling_bits)) {
    throw CapacityError("state space exceeds the enumeration ceiling");
  }
  if (shape.k > 6) throw CapacityError("walk tables support k <= 6");
  num_states_ = 1ull << shape.sites();

  const int dims = shape.dims;
  const int side = shape.side;
  const int k = shape.k;

  axis_class_.assign(static_cast<std::size_t>(dims), {});
  axis_class_size_.assign(static_cast<std::size_t>(dims), {});
  region_.assign(static_cast<std::size_t>(dims), {});
  global_class_.assign(num_states_, 0);

  // Per-slice partitions are interned to small ids, signatures to class ids.
  std::map<std::uint32_t, std::uint8_t> partition_ids;
  std::vector<bool> partition_discrete;
  auto intern_partition = [&](const SetPartition& p) {
    std::uint32_t packed = 0;
    for (int i = 0; i < p.size(); ++i) {
      packed |= static_cast<std::uint32_t>(p.labels()[static_cast<std::size_t>(i)]) << (3 * i);
    }
    auto [it, inserted] = partition_ids.emplace(packed, static_cast<std::uint8_t>(partition_ids.size()));
    if (inserted) partition_discrete.push_back(p.is_discrete());
    return it->second;
  };

  std::map<std::vector<std::uint8_t>, std::uint32_t> global_ids;
  std::vector<std::uint8_t> global_key(1);
  std::vector<std::uint64_t> member_keys(static_cast<std::size_t>(k));
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    for (int m = 0; m < k; ++m) member_keys[static_cast<std::size_t>(m)] = ops_.member_key(state, m);
    global_key[0] = intern_partition(SetPartition::from_values(member_keys));
    auto [it, inserted] = global_ids.emplace(global_key, static_cast<std::uint32_t>(global_ids.size()));
    global_class_[state] = it->second;
  }
  global_class_size_.assign(global_ids.size(), 0);
  for (std::uint64_t state = 0; state < num_states_; ++state) ++global_class_size_[global_class_[state]];
  {
    std::vector<std::uint8_t> discrete_key = {intern_partition(SetPartition::singletons(k))};
    discrete_class_ = global_ids.at(discrete_key);
  }

  std::vector<std::uint64_t> slice_values(static_cast<std::size_t>(k));
  for (int axis = 0; axis < dims; ++axis) {
    auto& classes = axis_class_[static_cast<std::size_t>(axis)];
    classes.assign(num_states_, 0);
    std::map<std::vector<std::uint8_t>, std::uint32_t> sig_ids;
    std::vector<bool> sig_all_singleton;
    std::vector<std::uint8_t> key(static_cast<std::size_t>(side));
    for (std::uint64_t state = 0; state < num_states_; ++state) {
      bool all_singleton = true;
      for (int i = 0; i < side; ++i) {
        for (int m = 0; m < k; ++m) {
          slice_values[static_cast<std::size_t>(m)] = ops_.slice_key(state, axis, i, m);
        }
        const SetPartition p = SetPartition::from_values(slice_values);
        if (!p.is_discrete()) all_singleton = false;
        key[static_cast<std::size_t>(i)] = intern_partition(p);
      }
      auto [it, inserted] = sig_ids.emplace(key, static_cast<std::uint32_t>(sig_ids.size()));
      if (inserted) sig_all_singleton.push_back(all_singleton);
      classes[state] = it->second;
    }
    auto& sizes = axis_class_size_[static_cast<std::size_t>(axis)];
    sizes.assign(sig_ids.size(), 0);
    for (std::uint64_t state = 0; state < num_states_; ++state) ++sizes[classes[state]];

    auto& region = region_[static_cast<std::size_t>(axis)];
    region.assign(num_states_, 0);
    for (std::uint64_t state = 0; state < num_states_; ++state) {
      if (global_class_[state] != discrete_class_) {
        region[state] = static_cast<std::uint8_t>(RegionLabel::Ident);
      } else if (sig_all_singleton[classes[state]]) {
        region[state] = static_cast<std::uint8_t>(RegionLabel::Safe);
      } else {
        region[state] = static_cast<std::uint8_t>(RegionLabel::Coll);
      }
    }
  }
}

WalkVector WalkSpace::basis(std::uint64_t state) const {
  if (state >= num_states_) throw DomainError("state out of range");
  WalkVector f{shape_, std::vector<double>(num_states_, 0.0)};
  f.values[state] = 1.0;
  return f;
}

WalkVector WalkSpace::uniform_on_distinct() const {
  WalkVector f{shape_, std::vector<double>(num_states_, 0.0)};
  const double mass = 1.0 / static_cast<double>(d_size());
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    if (global_class_[state] == discrete_class_) f.values[state] = mass;
  }
  return f;
}

WalkVector WalkSpace::uniform_on_grid_class(std::uint64_t member_state) const {
  if (member_state >= num_states_) throw DomainError("state out of range");
  const std::uint32_t cls = global_class_[member_state];
  WalkVector f{shape_, std::vector<double>(num_states_, 0.0)};
  const double mass = 1.0 / static_cast<double>(global_class_size_[cls]);
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    if (global_class_[state] == cls) f.values[state] = mass;
  }
  return f;
}

WalkVector WalkSpace::region_indicator(RegionLabel label, int axis) const {
  WalkVector f{shape_, std::vector<double>(num_states_, 0.0)};
  const auto& region = region_[static_cast<std::size_t>(axis)];
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    if (static_cast<RegionLabel>(region[state]) == label) f.values[state] = 1.0;
  }
  return f;
}

void WalkSpace::apply_classes(const std::vector<std::uint32_t>& class_of,
                              const std::vector<std::uint64_t>& class_sizes, const double* in,
                              double* out) const {
  // Kahan-compensated class sums; plain accumulation drifts past the 1e-12
  // mass tolerance once classes hold ~2^15 entries.
  std::vector<double> mean(class_sizes.size(), 0.0);
  std::vector<double> carry(class_sizes.size(), 0.0);
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    const std::uint32_t c = class_of[state];
    const double y = in[state] - carry[c];
    const double t = mean[c] + y;
    carry[c] = (t - mean[c]) - y;
    mean[c] = t;
  }
  for (std::size_t c = 0; c < mean.size(); ++c) mean[c] /= static_cast<double>(class_sizes[c]);
  for (std::uint64_t state = 0; state < num_states_; ++state) out[state] = mean[class_of[state]];
}

void WalkSpace::apply_kind(const OperatorKind& op, const double* in, double* out,
                           std::vector<double>& scratch) const {
  switch (op.tag) {
    case OperatorKind::Tag::Axis: {
      if (op.axis < 0 || op.axis >= shape_.dims) throw DomainError("walk axis out of range");
      apply_classes(axis_class_[static_cast<std::size_t>(op.axis)],
                    axis_class_size_[static_cast<std::size_t>(op.axis)], in, out);
      return;
    }
    case OperatorKind::Tag::Global:
      apply_classes(global_class_, global_class_size_, in, out);
      return;
    case OperatorKind::Tag::Composition: {
      if (op.parts.empty()) {
        if (out != in) std::memcpy(out, in, num_states_ * sizeof(double));
        return;
      }
      if (scratch.size() != num_states_) scratch.assign(num_states_, 0.0);
      // Rightmost factor first; ping-pong so the final write lands in `out`.
      const double* cur = in;
      double* a = (op.parts.size() % 2 == 1) ? out : scratch.data();
      double* b = (op.parts.size() % 2 == 1) ? scratch.data() : out;
      for (std::size_t i = op.parts.size(); i-- > 0;) {
        std::vector<double> inner;
        apply_kind(op.parts[i], cur, a, inner);
        cur = a;
        std::swap(a, b);
      }
      return;
    }
  }
}

void WalkSpace::check_shape(const WalkVector& f) const {
  if (!(f.shape == shape_) || f.values.size() != num_states_) {
    throw DomainError("walk vector shape mismatch");
  }
}

WalkVector WalkSpace::apply(const OperatorKind& op, const WalkVector& f) const {
  check_shape(f);
  WalkVector out{shape_, std::vector<double>(num_states_, 0.0)};
  std::vector<double> scratch;
  apply_kind(op, f.values.data(), out.values.data(), scratch);
  return out;
}

WalkVector WalkSpace::apply_product(std::span<const OperatorKind> seq, const WalkVector& f) const {
  check_shape(f);
  WalkVector cur = f;
  for (std::size_t i = seq.size(); i-- > 0;) {
    cur = apply(seq[i], cur);
  }
  return cur;
}

WalkVector WalkSpace::push_forward(std::uint64_t state, std::span<const OperatorKind> ops) const {
  WalkVector d = basis(state);
  for (const OperatorKind& op : ops) d = apply(op, d);
  const double total = d.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "push-forward mass drifted to %.17g", total);
    throw NumericalError(buffer);
  }
  return d;
}

double WalkSpace::transition_probability(const OperatorKind& op, std::uint64_t from,
                                         std::uint64_t to) const {
  if (from >= num_states_ || to >= num_states_) throw DomainError("state out of range");
  return apply(op, basis(to)).values[from];
}

CollisionExact WalkSpace::collision_probability_exact(std::uint64_t state) const {
  if (shape_.dims < 2) throw DomainError("collision walk needs dims >= 2");
  if (state >= num_states_) throw DomainError("state out of range");
  if (!in_distinct_region(state)) {
    throw DomainError("collision probability is defined on the distinct region");
  }
  const std::vector<OperatorKind> steps = {OperatorKind::axis_walk(0), OperatorKind::axis_walk(1)};
  const WalkVector d = push_forward(state, steps);
  double p = 0.0;
  const auto& region = region_[0];
  for (std::uint64_t y = 0; y < num_states_; ++y) {
    if (static_cast<RegionLabel>(region[y]) == RegionLabel::Coll) p += d.values[y];
  }
  CollisionExact out;
  out.probability = p;
  out.union_bound = 2.0 * shape_.side * shape_.k * shape_.k *
                    std::exp2(-static_cast<double>(shape_.slice_sites()) / 16.0);
  return out;
}

WalkSpace::CollisionSweep WalkSpace::collision_probability_sweep() const {
  if (shape_.dims < 2) throw DomainError("collision walk needs dims >= 2");
  // Escape probabilities via the adjoint: the walk matrices are symmetric,
  // so Pr[X -> coll after row,column] = (P_row P_col 1_coll)(X).
  WalkVector v = region_indicator(RegionLabel::Coll, 0);
  v = apply(OperatorKind::axis_walk(1), v);
  v = apply(OperatorKind::axis_walk(0), v);
  CollisionSweep sweep;
  sweep.probability = std::move(v.values);
  sweep.union_bound = 2.0 * shape_.side * shape_.k * shape_.k *
                      std::exp2(-static_cast<double>(shape_.slice_sites()) / 16.0);
  for (std::uint64_t state = 0; state < num_states_; ++state) {
    if (!in_distinct_region(state)) continue;
    if (sweep.probability[state] > sweep.worst) {
      sweep.worst = sweep.probability[state];
      sweep.argmax = state;
    }
  }
  return sweep;
}

SpectralResult WalkSpace::spectral_norm_power(std::span<const OperatorKind> seq,
                                              const SpectralOptions& options) const {
  StreamRng rng(options.seed);
  std::vector<double> v(num_states_);
  for (auto& x : v) x = rng.uniform01() - 0.5;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;

  std::vector<double> product(num_states_), difference(num_states_), squared(num_states_);
  std::vector<double> scratch;
  auto apply_diff = [&](const std::vector<double>& in, std::vector<double>& out) {
    const double* cur = in.data();
    // Product of `seq`, rightmost factor first.
    for (std::size_t i = seq.size(); i-- > 0;) {
      apply_kind(seq[i], cur, product.data(), scratch);
      cur = product.data();
    }
    apply_classes(global_class_, global_class_size_, in.data(), out.data());
    for (std::uint64_t s = 0; s < num_states_; ++s) out[s] = cur[s] - out[s];
  };

  double estimate = 0.0;
  double previous = -1.0;
  int hits = 0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    apply_diff(v, difference);
    apply_diff(difference, squared);
    double rayleigh = 0.0;
    double w_norm = 0.0;
    for (std::uint64_t s = 0; s < num_states_; ++s) {
      rayleigh += v[s] * squared[s];
      w_norm += squared[s] * squared[s];
    }
    w_norm = std::sqrt(w_norm);
    estimate = std::max(rayleigh, 0.0);
    if (w_norm <= 1e-30 || estimate <= 1e-26) {
      return SpectralResult{std::sqrt(estimate), iter, options.seed};
    }
    // Two consecutive hits guard against plateau stalls in clustered spectra.
    if (previous >= 0.0 && std::abs(estimate - previous) <= options.rel_tol * estimate) {
      if (++hits >= 2) return SpectralResult{std::sqrt(estimate), iter, options.seed};
    } else {
      hits = 0;
    }
    previous = estimate;
    for (std::uint64_t s = 0; s < num_states_; ++s) v[s] = squared[s] / w_norm;
  }
  throw NumericalError("power iteration did not converge; last Rayleigh estimates " +
                       std::to_string(previous) + " and " + std::to_string(estimate));
}

double WalkSpace::spectral_norm_dense(std::span<const OperatorKind> seq) const {
  if (num_states_ > (1ull << 12)) {
    throw CapacityError("dense spectral oracle requires at most 2^12 states");
  }
  const auto n = static_cast<Eigen::Index>(num_states_);
  Eigen::MatrixXd a(n, n);
  WalkVector e{shape_, std::vector<double>(num_states_, 0.0)};
  for (std::uint64_t j = 0; j < num_states_; ++j) {
    e.values.assign(num_states_, 0.0);
    e.values[j] = 1.0;
    WalkVector col = apply_product(seq, e);
    const WalkVector glob = apply(OperatorKind::global(), e);
    for (std::uint64_t i = 0; i < num_states_; ++i) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          col.values[i] - glob.values[i];
    }
  }
  const double asymmetry = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12) {
    throw DomainError("sequence does not yield a self-adjoint difference");
  }
  // Largest singular value; for a symmetric matrix this is max |eigenvalue|.
  // (The QL-based symmetric solver stalls on this family's clustered
  // spectra; the divide-and-conquer SVD does not.)
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("dense spectral oracle failed to converge");
  }
  return svd.singularValues()(0);
}

std::vector<IdentityCheck> WalkSpace::check_operator_identities(double tolerance) const {
  if (num_states_ > (1ull << 12)) {
    throw CapacityError("identity checks sweep a dense basis; need at most 2^12 states");
  }
  std::vector<IdentityCheck> checks;
  std::vector<OperatorKind> single_walks;
  for (int a = 0; a < shape_.dims; ++a) single_walks.push_back(OperatorKind::axis_walk(a));
  single_walks.push_back(OperatorKind::global());

  const std::uint64_t n = num_states_;
  std::vector<double> scratch;
  std::vector<double> column(n), twice(n), glob(n), mixed(n);

  for (const OperatorKind& op : single_walks) {
    IdentityCheck sym{"self_adjoint(" + op.name() + ")", 0.0, tolerance, false, -1};
    IdentityCheck idem{"idempotent(" + op.name() + ")", 0.0, tolerance, false, -1};
    std::vector<double> dense(n * n);
    std::vector<double> e(n, 0.0);
    for (std::uint64_t j = 0; j < n; ++j) {
      e.assign(n, 0.0);
      e[j] = 1.0;
      apply_kind(op, e.data(), column.data(), scratch);
      std::memcpy(dense.data() + j * n, column.data(), n * sizeof(double));
      apply_kind(op, column.data(), twice.data(), scratch);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double r = std::abs(twice[i] - column[i]);
        if (r > idem.residual) {
          idem.residual = r;
          idem.witness_state = static_cast<std::int64_t>(j);
        }
      }
    }
    for (std::uint64_t j = 0; j < n; ++j) {
      for (std::uint64_t i = 0; i < j; ++i) {
        const double r = std::abs(dense[j * n + i] - dense[i * n + j]);
        if (r > sym.residual) {
          sym.residual = r;
          sym.witness_state = static_cast<std::int64_t>(j);
        }
      }
    }
    sym.pass = sym.residual <= tolerance;
    idem.pass = idem.residual <= tolerance;
    checks.push_back(sym);
    checks.push_back(idem);
  }

  // Global-walk absorption on both sides, per axis walk.
  for (int a = 0; a < shape_.dims; ++a) {
    const OperatorKind axis = OperatorKind::axis_walk(a);
    IdentityCheck left{"absorb_left(" + axis.name() + ")", 0.0, tolerance, false, -1};
    IdentityCheck right{"absorb_right(" + axis.name() + ")", 0.0, tolerance, false, -1};
    std::vector<double> e(n, 0.0);
    for (std::uint64_t j = 0; j < n; ++j) {
      e.assign(n, 0.0);
      e[j] = 1.0;
      apply_classes(global_class_, global_class_size_, e.data(), glob.data());
      apply_kind(axis, glob.data(), mixed.data(), scratch);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double r = std::abs(mixed[i] - glob[i]);
        if (r > left.residual) {
          left.residual = r;
          left.witness_state = static_cast<std::int64_t>(j);
        }
      }
      apply_kind(axis, e.data(), column.data(), scratch);
      apply_classes(global_class_, global_class_size_, column.data(), mixed.data());
      for (std::uint64_t i = 0; i < n; ++i) {
        const double r = std::abs(mixed[i] - glob[i]);
        if (r > right.residual) {
          right.residual = r;
          right.witness_state = static_cast<std::int64_t>(j);
        }
      }
    }
    left.pass = left.residual <= tolerance;
    right.pass = right.residual <= tolerance;
    checks.push_back(left);
    checks.push_back(right);
  }

  // Row-walk norm identity: ||T_axis0 e_U||_2 == |B(U)|^{-1/2} for every U.
  {
    IdentityCheck norm_check{"row_norm(axis0)", 0.0, tolerance, false, -1};
    std::vector<double> e(n, 0.0);
    for (std::uint64_t u = 0; u < n; ++u) {
      e.assign(n, 0.0);
      e[u] = 1.0;
      apply_kind(OperatorKind::axis_walk(0), e.data(), column.data(), scratch);
      double norm2 = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) norm2 += column[i] * column[i];
      const double expected = 1.0 / std::sqrt(static_cast<double>(class_size(u, 0)));
      const double r = std::abs(std::sqrt(norm2) - expected);
      if (r > norm_check.residual) {
        norm_check.residual = r;
        norm_check.witness_state = static_cast<std::int64_t>(u);
      }
    }
    norm_check.pass = norm_check.residual <= tolerance;
    checks.push_back(norm_check);
  }
  return checks;
}

EscapeBoundCheck WalkSpace::escape_bound_check(const WalkVector& f, const WalkVector& g,
                                        const OperatorKind& op) const {
  check_shape(f);
  check_shape(g);
  const WalkVector tg = apply(op, g);
  double lhs = 0.0;
  for (std::uint64_t s = 0; s < num_states_; ++s) lhs += f.values[s] * tg.values[s];

  WalkVector support{shape_, std::vector<double>(num_states_, 0.0)};
  for (std::uint64_t s = 0; s < num_states_; ++s) {
    if (g.values[s] != 0.0) support.values[s] = 1.0;
  }
  const WalkVector escape = apply(op, support);
  double max_escape = 0.0;
  for (std::uint64_t s = 0; s < num_states_; ++s) {
    if (f.values[s] != 0.0) max_escape = std::max(max_escape, escape.values[s]);
  }
  EscapeBoundCheck out;
  out.lhs = lhs;
  out.rhs = std::sqrt(std::max(max_escape, 0.0)) * f.l2_norm() * g.l2_norm();
  out.pass = out.lhs <= out.rhs + 1e-12;
  return out;
}

}  // namespace latticeperm
