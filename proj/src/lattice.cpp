#include "latticeperm/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "latticeperm/parallel.hpp"

namespace latticeperm {

LatticeShape LatticeShape::make(int dims, int side, int k) {
  if (dims < 1) throw DomainError("dims must be >= 1");
  if (side < 1) throw DomainError("side must be >= 1");
  if (k < 1) throw DomainError("k must be >= 1");
  std::uint64_t n = 1;
  for (int d = 0; d < dims; ++d) {
    if (n > (1ull << 32) / static_cast<std::uint64_t>(side)) {
      throw CapacityError("lattice larger than 2^32 sites");
    }
    n *= static_cast<std::uint64_t>(side);
  }
  if (n * static_cast<std::uint64_t>(k) > (1ull << 32)) {
    throw CapacityError("tuple larger than 2^32 sites");
  }
  return LatticeShape{dims, side, k, n};
}

LatticeShape LatticeShape::slice_shape() const {
  if (dims < 1) throw DomainError("cannot slice a 0-dimensional shape");
  return LatticeShape{dims - 1, side, k, n / static_cast<std::uint64_t>(side)};
}

LatticeShape LatticeShape::with_arity(int new_k) const {
  if (new_k < 1) throw DomainError("k must be >= 1");
  return LatticeShape{dims, side, new_k, n};
}

std::uint64_t index_pack(std::span<const int> coords, int member, const LatticeShape& shape) {
  if (static_cast<int>(coords.size()) != shape.dims) {
    throw DomainError("coordinate count must equal dims");
  }
  if (member < 0 || member >= shape.k) throw DomainError("member index out of range");
  std::uint64_t site = 0;
  for (int d = 0; d < shape.dims; ++d) {
    const int c = coords[static_cast<std::size_t>(d)];
    if (c < 0 || c >= shape.side) throw DomainError("coordinate out of range");
    site = site * static_cast<std::uint64_t>(shape.side) + static_cast<std::uint64_t>(c);
  }
  return site * static_cast<std::uint64_t>(shape.k) + static_cast<std::uint64_t>(member);
}

void index_unpack(std::uint64_t flat, const LatticeShape& shape, std::span<int> coords_out,
                  int& member_out) {
  if (flat >= shape.sites()) throw DomainError("flat index out of range");
  if (static_cast<int>(coords_out.size()) != shape.dims) {
    throw DomainError("coordinate buffer must have dims entries");
  }
  member_out = static_cast<int>(flat % static_cast<std::uint64_t>(shape.k));
  std::uint64_t site = flat / static_cast<std::uint64_t>(shape.k);
  for (int d = shape.dims - 1; d >= 0; --d) {
    coords_out[static_cast<std::size_t>(d)] =
        static_cast<int>(site % static_cast<std::uint64_t>(shape.side));
    site /= static_cast<std::uint64_t>(shape.side);
  }
}

BitLatticeTuple::BitLatticeTuple(const LatticeShape& shape)
    : shape_(shape), words_((shape.sites() + 63) / 64, 0) {}

BitLatticeTuple BitLatticeTuple::from_packed(const LatticeShape& shape, std::uint64_t state) {
  if (shape.sites() > 63) throw CapacityError("packed states require sites() <= 63");
  BitLatticeTuple out(shape);
  out.words_[0] = state;
  return out;
}

std::uint64_t BitLatticeTuple::packed() const {
  if (shape_.sites() > 63) throw CapacityError("packed states require sites() <= 63");
  return words_[0];
}

std::uint64_t pack_state(const BitLatticeTuple& tuple) { return tuple.packed(); }

const char* region_label_name(RegionLabel label) {
  switch (label) {
    case RegionLabel::Safe: return "safe";
    case RegionLabel::Coll: return "coll";
    case RegionLabel::Ident: return "ident";
  }
  return "?";
}

bool ColorSignature::all_singletons() const {
  for (const auto& p : slice_partitions) {
    if (!p.is_discrete()) return false;
  }
  return true;
}

PackedOps::PackedOps(const LatticeShape& shape) : shape_(shape) {
  if (shape.sites() > 63) throw CapacityError("PackedOps requires sites() <= 63");
  slice_sites_.resize(static_cast<std::size_t>(shape.dims));
  const std::uint64_t per_slice = shape.slice_sites();
  for (int axis = 0; axis < shape.dims; ++axis) {
    auto& by_index = slice_sites_[static_cast<std::size_t>(axis)];
    by_index.assign(static_cast<std::size_t>(shape.side), {});
    for (auto& v : by_index) v.reserve(per_slice);
    std::vector<int> coords(static_cast<std::size_t>(shape.dims), 0);
    for (std::uint64_t site = 0; site < shape.n; ++site) {
      std::uint64_t rest = site;
      for (int d = shape.dims - 1; d >= 0; --d) {
        coords[static_cast<std::size_t>(d)] =
            static_cast<int>(rest % static_cast<std::uint64_t>(shape.side));
        rest /= static_cast<std::uint64_t>(shape.side);
      }
      by_index[static_cast<std::size_t>(coords[static_cast<std::size_t>(axis)])].push_back(
          static_cast<std::uint32_t>(site));
    }
  }
}

const std::vector<std::uint32_t>& PackedOps::slice_sites(int axis, int i) const {
  if (axis < 0 || axis >= shape_.dims) throw DomainError("axis out of range");
  if (i < 0 || i >= shape_.side) throw DomainError("slice index out of range");
  return slice_sites_[static_cast<std::size_t>(axis)][static_cast<std::size_t>(i)];
}

std::uint64_t PackedOps::member_key(std::uint64_t state, int member) const {
  std::uint64_t key = 0;
  const int k = shape_.k;
  for (std::uint64_t site = 0; site < shape_.n; ++site) {
    key |= ((state >> (site * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(member))) & 1ull)
           << site;
  }
  return key;
}

std::uint64_t PackedOps::slice_key(std::uint64_t state, int axis, int i, int member) const {
  const auto& sites = slice_sites(axis, i);
  std::uint64_t key = 0;
  const int k = shape_.k;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    key |= ((state >> (static_cast<std::uint64_t>(sites[j]) * static_cast<std::uint64_t>(k) +
                       static_cast<std::uint64_t>(member))) &
            1ull)
           << j;
  }
  return key;
}

std::uint64_t PackedOps::with_member(std::uint64_t state, int member, std::uint64_t value) const {
  const int k = shape_.k;
  for (std::uint64_t site = 0; site < shape_.n; ++site) {
    const std::uint64_t pos = site * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(member);
    state = (state & ~(1ull << pos)) | (((value >> site) & 1ull) << pos);
  }
  return state;
}

std::uint64_t PackedOps::with_slice(std::uint64_t state, int axis, int i, int member,
                                    std::uint64_t value) const {
  const auto& sites = slice_sites(axis, i);
  const int k = shape_.k;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const std::uint64_t pos = static_cast<std::uint64_t>(sites[j]) * static_cast<std::uint64_t>(k) +
                              static_cast<std::uint64_t>(member);
    state = (state & ~(1ull << pos)) | (((value >> j) & 1ull) << pos);
  }
  return state;
}

SetPartition PackedOps::slice_partition(std::uint64_t state, int axis, int i) const {
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(shape_.k));
  for (int m = 0; m < shape_.k; ++m) {
    keys[static_cast<std::size_t>(m)] = slice_key(state, axis, i, m);
  }
  return SetPartition::from_values(keys);
}

SetPartition PackedOps::grid_partition(std::uint64_t state) const {
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(shape_.k));
  for (int m = 0; m < shape_.k; ++m) {
    keys[static_cast<std::size_t>(m)] = member_key(state, m);
  }
  return SetPartition::from_values(keys);
}

ColorSignature PackedOps::coloring(std::uint64_t state, int axis) const {
  ColorSignature sig;
  sig.slice_partitions.reserve(static_cast<std::size_t>(shape_.side));
  for (int i = 0; i < shape_.side; ++i) {
    sig.slice_partitions.push_back(slice_partition(state, axis, i));
  }
  return sig;
}

bool PackedOps::in_distinct_region(std::uint64_t state) const {
  return grid_partition(state).is_discrete();
}

RegionLabel PackedOps::classify(std::uint64_t state, int axis) const {
  if (!in_distinct_region(state)) return RegionLabel::Ident;
  for (int i = 0; i < shape_.side; ++i) {
    if (!slice_partition(state, axis, i).is_discrete()) return RegionLabel::Coll;
  }
  return RegionLabel::Safe;
}

namespace {

// Canonical first-occurrence labels from a pairwise equality predicate.
SetPartition partition_from_equality(int k, const std::function<bool(int, int)>& equal) {
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(k), 0);
  std::uint8_t next = 0;
  for (int i = 0; i < k; ++i) {
    bool found = false;
    for (int j = 0; j < i; ++j) {
      if (equal(j, i)) {
        labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(j)];
        found = true;
        break;
      }
    }
    if (!found) labels[static_cast<std::size_t>(i)] = next++;
  }
  return SetPartition(std::move(labels));
}

std::vector<std::uint32_t> slice_site_list(const LatticeShape& shape, int axis, int i) {
  if (axis < 0 || axis >= shape.dims) throw DomainError("axis out of range");
  if (i < 0 || i >= shape.side) throw DomainError("slice index out of range");
  std::vector<std::uint32_t> sites;
  sites.reserve(shape.slice_sites());
  std::vector<int> coords(static_cast<std::size_t>(shape.dims), 0);
  for (std::uint64_t site = 0; site < shape.n; ++site) {
    std::uint64_t rest = site;
    for (int d = shape.dims - 1; d >= 0; --d) {
      coords[static_cast<std::size_t>(d)] =
          static_cast<int>(rest % static_cast<std::uint64_t>(shape.side));
      rest /= static_cast<std::uint64_t>(shape.side);
    }
    if (coords[static_cast<std::size_t>(axis)] == i) sites.push_back(static_cast<std::uint32_t>(site));
  }
  return sites;
}

bool slices_equal(const BitLatticeTuple& tuple, const std::vector<std::uint32_t>& sites, int a,
                  int b) {
  const int k = tuple.shape().k;
  for (std::uint32_t site : sites) {
    const std::uint64_t base = static_cast<std::uint64_t>(site) * static_cast<std::uint64_t>(k);
    if (tuple.get(base + static_cast<std::uint64_t>(a)) !=
        tuple.get(base + static_cast<std::uint64_t>(b))) {
      return false;
    }
  }
  return true;
}

}  // namespace

ColorSignature slice_coloring(const BitLatticeTuple& tuple, int axis) {
  const LatticeShape& shape = tuple.shape();
  if (axis < 0 || axis >= shape.dims) throw DomainError("axis out of range");
  ColorSignature sig;
  sig.slice_partitions.reserve(static_cast<std::size_t>(shape.side));
  for (int i = 0; i < shape.side; ++i) {
    const auto sites = slice_site_list(shape, axis, i);
    sig.slice_partitions.push_back(partition_from_equality(
        shape.k, [&](int a, int b) { return slices_equal(tuple, sites, a, b); }));
  }
  return sig;
}

RegionLabel classify(const BitLatticeTuple& tuple, int axis) {
  const LatticeShape& shape = tuple.shape();
  if (axis < 0 || axis >= shape.dims) throw DomainError("axis out of range");
  // Members are equal iff every slice agrees, so reuse the slice patterns.
  ColorSignature sig = slice_coloring(tuple, axis);
  SetPartition grid = SetPartition::single_block(shape.k);
  for (const auto& p : sig.slice_partitions) grid = grid.meet(p);
  if (!grid.is_discrete()) return RegionLabel::Ident;
  return sig.all_singletons() ? RegionLabel::Safe : RegionLabel::Coll;
}

BitLatticeTuple axis_slice(const BitLatticeTuple& tuple, int axis, int i) {
  const LatticeShape& shape = tuple.shape();
  const auto sites = slice_site_list(shape, axis, i);
  BitLatticeTuple out(shape.slice_shape());
  const int k = shape.k;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    for (int m = 0; m < k; ++m) {
      out.set(static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(k) +
                  static_cast<std::uint64_t>(m),
              tuple.get(static_cast<std::uint64_t>(sites[j]) * static_cast<std::uint64_t>(k) +
                        static_cast<std::uint64_t>(m)));
    }
  }
  return out;
}

BigCount color_class_size(const ColorSignature& signature, const LatticeShape& shape) {
  if (static_cast<int>(signature.slice_partitions.size()) != shape.side) {
    throw DomainError("signature must have one partition per slice");
  }
  const std::uint64_t slice_bits = shape.slice_sites();
  if (slice_bits >= 127) throw CapacityError("slice alphabet exceeds the 128-bit counter");
  const BigCount alphabet = big_pow2(static_cast<unsigned>(slice_bits));
  BigCount size = 1;
  for (const auto& partition : signature.slice_partitions) {
    if (partition.size() != shape.k) throw DomainError("partition arity must equal k");
    size = checked_mul(size, falling_factorial(alphabet, static_cast<unsigned>(partition.block_count())));
  }
  return size;
}

namespace {

struct FormulaCensus {
  BigCount b_safe, d_size, total;
};

// Sums color-class sizes over all signatures with a DP over slices: the state
// is the running meet of the chosen per-slice partitions, which is all that
// distinguishing whole members requires. A tuple is distinct iff the final
// meet is the all-singletons partition.
FormulaCensus census_by_formula(const LatticeShape& shape) {
  if (shape.sites() > 126) throw CapacityError("census exceeds the 128-bit counter");
  if (shape.k > 6) throw CapacityError("signature enumeration supports k <= 6");
  const BigCount alphabet = big_pow2(static_cast<unsigned>(shape.slice_sites()));
  const auto partitions = all_partitions(shape.k);
  const int count = static_cast<int>(partitions.size());

  std::vector<BigCount> weight(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    weight[static_cast<std::size_t>(j)] = falling_factorial(
        alphabet, static_cast<unsigned>(partitions[static_cast<std::size_t>(j)].block_count()));
  }

  // meet_index[a][b] resolved through canonical label lookup.
  std::vector<int> meet_index(static_cast<std::size_t>(count) * static_cast<std::size_t>(count));
  for (int a = 0; a < count; ++a) {
    for (int b = 0; b < count; ++b) {
      const SetPartition m = partitions[static_cast<std::size_t>(a)].meet(
          partitions[static_cast<std::size_t>(b)]);
      const auto it = std::find(partitions.begin(), partitions.end(), m);
      meet_index[static_cast<std::size_t>(a) * static_cast<std::size_t>(count) +
                 static_cast<std::size_t>(b)] = static_cast<int>(it - partitions.begin());
    }
  }

  int start = -1;
  int discrete = -1;
  for (int j = 0; j < count; ++j) {
    if (partitions[static_cast<std::size_t>(j)].block_count() == 1) start = j;
    if (partitions[static_cast<std::size_t>(j)].is_discrete()) discrete = j;
  }

  std::vector<BigCount> mass(static_cast<std::size_t>(count), 0);
  mass[static_cast<std::size_t>(start)] = 1;
  for (int slice = 0; slice < shape.side; ++slice) {
    std::vector<BigCount> next(static_cast<std::size_t>(count), 0);
    for (int q = 0; q < count; ++q) {
      const BigCount m = mass[static_cast<std::size_t>(q)];
      if (m == 0) continue;
      for (int j = 0; j < count; ++j) {
        if (weight[static_cast<std::size_t>(j)] == 0) continue;
        next[static_cast<std::size_t>(
            meet_index[static_cast<std::size_t>(q) * static_cast<std::size_t>(count) +
                       static_cast<std::size_t>(j)])] +=
            checked_mul(m, weight[static_cast<std::size_t>(j)]);
      }
    }
    mass = std::move(next);
  }

  FormulaCensus out{};
  out.total = big_pow2(static_cast<unsigned>(shape.sites()));
  out.d_size = mass[static_cast<std::size_t>(discrete)];
  out.b_safe = 1;
  for (int i = 0; i < shape.side; ++i) {
    out.b_safe = checked_mul(out.b_safe, falling_factorial(alphabet, static_cast<unsigned>(shape.k)));
  }

  // Independent identity: distinct k-tuples over the 2^n member alphabet.
  if (shape.n <= 126) {
    const BigCount direct = falling_factorial(big_pow2(static_cast<unsigned>(shape.n)),
                                              static_cast<unsigned>(shape.k));
    if (direct != out.d_size) {
      throw std::logic_error("signature summation disagrees with the distinct-tuple count");
    }
  }
  return out;
}

}  // namespace

RegionCensus region_census(const LatticeShape& shape, int ceiling_bits, int threads) {
  RegionCensus census{};
  bool have_any = false;

  if (shape.enumerable(ceiling_bits) && shape.sites() <= 63) {
    const PackedOps ops(shape);
    const std::uint64_t num_states = ops.num_states();
    constexpr int kChunks = 64;
    std::array<std::uint64_t, kChunks> safe{}, coll{}, ident{};
    for_chunks(num_states, threads, kChunks,
               [&](int chunk, std::uint64_t begin, std::uint64_t end) {
                 std::uint64_t s = 0, c = 0, id = 0;
                 for (std::uint64_t state = begin; state < end; ++state) {
                   switch (ops.classify(state, 0)) {
                     case RegionLabel::Safe: ++s; break;
                     case RegionLabel::Coll: ++c; break;
                     case RegionLabel::Ident: ++id; break;
                   }
                 }
                 safe[static_cast<std::size_t>(chunk)] = s;
                 coll[static_cast<std::size_t>(chunk)] = c;
                 ident[static_cast<std::size_t>(chunk)] = id;
               });
    std::uint64_t s = 0, c = 0, id = 0;
    for (int i = 0; i < kChunks; ++i) {
      s += safe[static_cast<std::size_t>(i)];
      c += coll[static_cast<std::size_t>(i)];
      id += ident[static_cast<std::size_t>(i)];
    }
    census.b_safe = s;
    census.b_coll = c;
    census.b_ident = id;
    census.d_size = static_cast<BigCount>(s) + c;
    census.enumerated = true;
    have_any = true;
  }

  try {
    const FormulaCensus formula = census_by_formula(shape);
    const BigCount b_ident = formula.total - formula.d_size;
    const BigCount b_coll = formula.d_size - formula.b_safe;
    if (census.enumerated) {
      if (census.b_safe != formula.b_safe || census.b_coll != b_coll ||
          census.b_ident != b_ident) {
        throw std::logic_error("enumeration and closed-form census disagree");
      }
    } else {
      census.b_safe = formula.b_safe;
      census.b_coll = b_coll;
      census.b_ident = b_ident;
      census.d_size = formula.d_size;
    }
    census.closed_form = true;
    have_any = true;
  } catch (const CapacityError&) {
    if (!have_any) throw;
  }

  census.coll_over_d =
      census.d_size == 0 ? 0.0 : big_count_to_double(census.b_coll) / big_count_to_double(census.d_size);
  census.fact_bound = std::ldexp(2.0 * shape.side * shape.k * shape.k,
                                 -static_cast<int>(shape.slice_sites()));
  return census;
}

ColorClassCount count_color_classes(const LatticeShape& shape) {
  if (shape.k > 6) throw CapacityError("signature enumeration supports k <= 6");
  const auto partitions = all_partitions(shape.k);
  int realizable = 0;
  for (const auto& p : partitions) {
    // Realizable iff the alphabet 2^{n/side} has at least block_count letters.
    if (shape.slice_sites() >= 7 ||
        static_cast<BigCount>(p.block_count()) <= big_pow2(static_cast<unsigned>(shape.slice_sites()))) {
      ++realizable;
    }
  }
  ColorClassCount out;
  out.realizable_per_slice = realizable;
  out.exact = 1;
  for (int i = 0; i < shape.side; ++i) {
    out.exact = checked_mul(out.exact, static_cast<BigCount>(realizable));
  }
  out.upper_bound = std::pow(static_cast<double>(shape.k),
                             static_cast<double>(shape.k) * static_cast<double>(shape.side));
  if (big_count_to_double(out.exact) > out.upper_bound) {
    throw std::logic_error("exact color-class count exceeds its upper bound");
  }
  return out;
}

std::string render_tuple(const BitLatticeTuple& tuple) {
  const LatticeShape& shape = tuple.shape();
  std::string out;
  for (int i = 0; i < shape.side; ++i) {
    const auto sites = slice_site_list(shape, 0, i);
    for (int m = 0; m < shape.k; ++m) {
      if (m > 0) out.push_back('|');
      for (std::uint32_t site : sites) {
        out.push_back(tuple.get(static_cast<std::uint64_t>(site) *
                                    static_cast<std::uint64_t>(shape.k) +
                                static_cast<std::uint64_t>(m))
                          ? '+'
                          : '-');
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace latticeperm
