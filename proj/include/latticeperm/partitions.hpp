#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latticeperm/errors.hpp"

namespace latticeperm {

// 128-bit unsigned counter for exact combinatorics that outgrow 64 bits.
using BigCount = unsigned __int128;

std::string big_count_to_string(BigCount value);

inline double big_count_to_double(BigCount value) {
  return static_cast<double>(value);
}

// value * factor, or throws CapacityError on overflow.
inline BigCount checked_mul(BigCount value, BigCount factor) {
  if (factor != 0 && value > static_cast<BigCount>(-1) / factor) {
    throw CapacityError("128-bit counter overflow in exact count");
  }
  return value * factor;
}

// 2^exponent as a BigCount; exponent must be < 128.
inline BigCount big_pow2(unsigned exponent) {
  if (exponent >= 128) {
    throw CapacityError("2^" + std::to_string(exponent) +
                        " exceeds the 128-bit counter");
  }
  return static_cast<BigCount>(1) << exponent;
}

// alphabet * (alphabet-1) * ... * (alphabet-count+1); zero when count exceeds
// the alphabet, so unrealizable patterns contribute nothing to summations.
BigCount falling_factorial(BigCount alphabet, unsigned count);

// A set partition of {0, .., k-1} in canonical first-occurrence labeling:
// labels[0] == 0 and each new label is one more than the running maximum.
// Two partitions describe the same equivalence pattern iff their canonical
// label vectors are equal.
class SetPartition {
 public:
  SetPartition() = default;
  explicit SetPartition(std::vector<std::uint8_t> canonical_labels);

  // Canonicalizes an arbitrary equivalence labeling (any comparable values).
  template <typename T>
  static SetPartition from_values(const std::vector<T>& values) {
    std::vector<std::uint8_t> labels(values.size(), 0);
    std::uint8_t next = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (values[j] == values[i]) {
          labels[i] = labels[j];
          found = true;
          break;
        }
      }
      if (!found) labels[i] = next++;
    }
    return SetPartition(std::move(labels));
  }

  static SetPartition singletons(int k);
  static SetPartition single_block(int k);

  int size() const { return static_cast<int>(labels_.size()); }
  int block_count() const;
  bool is_discrete() const { return block_count() == size(); }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  // Coarsest common refinement: i ~ j iff i ~ j in both inputs.
  SetPartition meet(const SetPartition& other) const;

  // Indices of the first member of each block, in block-label order.
  std::vector<int> block_representatives() const;

  bool operator==(const SetPartition& other) const = default;

  std::string to_string() const;

 private:
  std::vector<std::uint8_t> labels_;
};

// All set partitions of {0, .., k-1} via restricted growth strings;
// result.size() == Bell(k). Ordered lexicographically by label vector, so
// index 0 is the single-block partition and the last is all-singletons.
std::vector<SetPartition> all_partitions(int k);

BigCount bell_number(int k);

}  // namespace latticeperm
