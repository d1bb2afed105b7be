#include "latticeperm/partitions.hpp"

#include <algorithm>

namespace latticeperm {

std::string big_count_to_string(BigCount value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<unsigned>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

BigCount falling_factorial(BigCount alphabet, unsigned count) {
  BigCount result = 1;
  for (unsigned i = 0; i < count; ++i) {
    BigCount term = (alphabet >= i) ? alphabet - i : 0;
    if (term == 0) return 0;
    result = checked_mul(result, term);
  }
  return result;
}

SetPartition::SetPartition(std::vector<std::uint8_t> canonical_labels)
    : labels_(std::move(canonical_labels)) {
  std::uint8_t max_seen = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i == 0) {
      if (labels_[0] != 0) throw DomainError("partition labels must start at 0");
      continue;
    }
    if (labels_[i] > max_seen + 1) {
      throw DomainError("partition labels must be in first-occurrence order");
    }
    max_seen = std::max(max_seen, labels_[i]);
  }
}

SetPartition SetPartition::singletons(int k) {
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  return SetPartition(std::move(labels));
}

SetPartition SetPartition::single_block(int k) {
  return SetPartition(std::vector<std::uint8_t>(static_cast<std::size_t>(k), 0));
}

int SetPartition::block_count() const {
  std::uint8_t max_label = 0;
  for (std::uint8_t l : labels_) max_label = std::max(max_label, l);
  return labels_.empty() ? 0 : max_label + 1;
}

SetPartition SetPartition::meet(const SetPartition& other) const {
  if (other.size() != size()) throw DomainError("partition size mismatch in meet");
  std::vector<std::uint16_t> combined(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    combined[i] = static_cast<std::uint16_t>(labels_[i]) * 256u + other.labels_[i];
  }
  return SetPartition::from_values(combined);
}

std::vector<int> SetPartition::block_representatives() const {
  std::vector<int> reps(static_cast<std::size_t>(block_count()), -1);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (reps[labels_[i]] < 0) reps[labels_[i]] = static_cast<int>(i);
  }
  return reps;
}

std::string SetPartition::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0) out.push_back('.');
    out += std::to_string(static_cast<int>(labels_[i]));
  }
  return out;
}

std::vector<SetPartition> all_partitions(int k) {
  if (k < 1) throw DomainError("partitions require k >= 1");
  std::vector<SetPartition> out;
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(k), 0);
  // Restricted growth strings: labels[i] <= 1 + max(labels[0..i-1]).
  while (true) {
    out.emplace_back(labels);
    int i = k - 1;
    for (; i > 0; --i) {
      std::uint8_t max_prefix = 0;
      for (int j = 0; j < i; ++j) max_prefix = std::max(max_prefix, labels[static_cast<std::size_t>(j)]);
      if (labels[static_cast<std::size_t>(i)] <= max_prefix) break;
    }
    if (i == 0) break;
    ++labels[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) labels[static_cast<std::size_t>(j)] = 0;
  }
  return out;
}

BigCount bell_number(int k) {
  if (k < 0) throw DomainError("Bell number requires k >= 0");
  // Bell triangle.
  std::vector<BigCount> row = {1};
  for (int i = 1; i < k; ++i) {
    std::vector<BigCount> next(row.size() + 1);
    next[0] = row.back();
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[j + 1] = next[j] + row[j];
    }
    row = std::move(next);
  }
  return k == 0 ? 1 : row.back();
}

}  // namespace latticeperm
