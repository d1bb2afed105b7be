#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latticeperm/errors.hpp"
#include "latticeperm/partitions.hpp"

namespace latticeperm {

// Exact-enumeration routines refuse state spaces above 2^24 packed states
// unless the caller raises the ceiling explicitly.
inline constexpr int kDefaultEnumerationBits = 24;

// A k-tuple of D-dimensional hypercubic bit lattices: side^dims sites per
// member, k members. `n` is the per-member site count side^dims.
struct LatticeShape {
  int dims = 0;
  int side = 0;
  int k = 0;
  std::uint64_t n = 0;

  static LatticeShape make(int dims, int side, int k);

  std::uint64_t sites() const { return n * static_cast<std::uint64_t>(k); }
  // Sites of one (dims-1)-dimensional slice of one member.
  std::uint64_t slice_sites() const { return n / static_cast<std::uint64_t>(side); }
  LatticeShape slice_shape() const;
  LatticeShape with_arity(int new_k) const;

  // True when all 2^{n k} packed states can be enumerated under the ceiling.
  bool enumerable(int ceiling_bits = kDefaultEnumerationBits) const {
    return sites() <= static_cast<std::uint64_t>(ceiling_bits);
  }

  bool operator==(const LatticeShape&) const = default;
};

// Flat addressing is row-major over (axis_0, .., axis_{D-1}, member), the
// member index varying fastest. Axis-0 slices are therefore contiguous.
std::uint64_t index_pack(std::span<const int> coords, int member, const LatticeShape& shape);
void index_unpack(std::uint64_t flat, const LatticeShape& shape, std::span<int> coords_out,
                  int& member_out);

// Packed bit storage; bit value 1 encodes +1, 0 encodes -1.
class BitLatticeTuple {
 public:
  explicit BitLatticeTuple(const LatticeShape& shape);
  static BitLatticeTuple from_packed(const LatticeShape& shape, std::uint64_t state);

  const LatticeShape& shape() const { return shape_; }
  bool get(std::uint64_t flat) const {
    return (words_[flat >> 6] >> (flat & 63u)) & 1u;
  }
  void set(std::uint64_t flat, bool value) {
    const std::uint64_t mask = 1ull << (flat & 63u);
    if (value) {
      words_[flat >> 6] |= mask;
    } else {
      words_[flat >> 6] &= ~mask;
    }
  }
  // The whole tuple as one integer; requires sites() <= 63.
  std::uint64_t packed() const;

  std::vector<std::uint64_t>& words() { return words_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const BitLatticeTuple&) const = default;

 private:
  LatticeShape shape_;
  std::vector<std::uint64_t> words_;
};

enum class RegionLabel { Safe, Coll, Ident };

const char* region_label_name(RegionLabel label);

// Per-slice equivalence pattern of a tuple along one axis: slice i's
// partition groups members whose slices at index i are bitwise equal.
struct ColorSignature {
  std::vector<SetPartition> slice_partitions;

  bool all_singletons() const;
  bool operator==(const ColorSignature&) const = default;
};

// Bit-level helpers over packed u64 states (sites() <= 63), shared by the
// exact enumeration, census, and walk machinery.
class PackedOps {
 public:
  explicit PackedOps(const LatticeShape& shape);

  const LatticeShape& shape() const { return shape_; }
  std::uint64_t num_states() const { return 1ull << shape_.sites(); }

  // Site indices (per member, in-lattice) of slice i along `axis`, in
  // row-major order of the remaining axes.
  const std::vector<std::uint32_t>& slice_sites(int axis, int i) const;

  std::uint64_t member_key(std::uint64_t state, int member) const;
  std::uint64_t slice_key(std::uint64_t state, int axis, int i, int member) const;
  std::uint64_t with_member(std::uint64_t state, int member, std::uint64_t value) const;
  std::uint64_t with_slice(std::uint64_t state, int axis, int i, int member,
                           std::uint64_t value) const;

  SetPartition slice_partition(std::uint64_t state, int axis, int i) const;
  SetPartition grid_partition(std::uint64_t state) const;
  ColorSignature coloring(std::uint64_t state, int axis) const;
  bool in_distinct_region(std::uint64_t state) const;
  RegionLabel classify(std::uint64_t state, int axis) const;

 private:
  LatticeShape shape_;
  // slice_sites_[axis][i] lists the lattice sites of that slice.
  std::vector<std::vector<std::vector<std::uint32_t>>> slice_sites_;
};

std::uint64_t pack_state(const BitLatticeTuple& tuple);

ColorSignature slice_coloring(const BitLatticeTuple& tuple, int axis);
RegionLabel classify(const BitLatticeTuple& tuple, int axis);
BitLatticeTuple axis_slice(const BitLatticeTuple& tuple, int axis, int i);

// Exact number of tuples carrying this signature: the product over slices of
// falling factorials of the slice alphabet 2^{n/side}. Unrealizable
// signatures (more blocks than alphabet letters) have size zero.
BigCount color_class_size(const ColorSignature& signature, const LatticeShape& shape);

struct RegionCensus {
  BigCount b_safe = 0;
  BigCount b_coll = 0;
  BigCount b_ident = 0;
  BigCount d_size = 0;
  double coll_over_d = 0.0;  // |B_coll| / |D|
  double fact_bound = 0.0;   // 2 * side * k^2 / 2^{n/side}
  bool enumerated = false;   // exhaustive route ran
  bool closed_form = false;  // falling-factorial route ran
};

// Region sizes along axis 0, by exhaustive enumeration when the state space
// fits the ceiling and by falling-factorial summation whenever the counts fit
// 128 bits; the two routes are cross-checked when both run.
RegionCensus region_census(const LatticeShape& shape,
                           int ceiling_bits = kDefaultEnumerationBits, int threads = 0);

struct ColorClassCount {
  BigCount exact = 0;          // realizable signatures
  double upper_bound = 0.0;    // k^(k * side)
  int realizable_per_slice = 0;
};

ColorClassCount count_color_classes(const LatticeShape& shape);

// Debug rendering: one line per axis-0 slice, '+'/'-' per site, members
// separated by '|'.
std::string render_tuple(const BitLatticeTuple& tuple);

}  // namespace latticeperm
