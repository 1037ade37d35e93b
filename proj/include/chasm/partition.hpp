#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chasm/poly.hpp"

namespace chasm {

/// Disjoint, nonempty blocks of variables x = x_1 ⊔ ... ⊔ x_d.
class Partition {
 public:
  Partition() = default;
  /// Throws PreconditionError on empty or overlapping blocks.
  explicit Partition(std::vector<std::vector<Var>> blocks);
  /// d consecutive blocks of n variables each: block j = {j*n, ..., j*n + n - 1}.
  static Partition uniform(std::size_t d, std::size_t n);
  /// Consecutive blocks with the given sizes, starting at variable `offset`.
  static Partition consecutive(const std::vector<std::size_t>& sizes, Var offset = 0);

  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<std::vector<Var>>& blocks() const { return blocks_; }
  const std::vector<Var>& block(std::size_t j) const { return blocks_.at(j); }
  std::size_t block_size(std::size_t j) const { return blocks_.at(j).size(); }
  std::vector<std::size_t> shape() const;
  /// (block, position within block), if v belongs to the partition.
  std::optional<std::pair<std::size_t, std::size_t>> locate(Var v) const;
  /// One past the largest variable index referenced.
  std::size_t var_span() const;

  /// Sub-partition restricted to the given block indices (in that order).
  Partition restrict_to(const std::vector<std::size_t>& block_ids) const;

  bool operator==(const Partition& o) const { return blocks_ == o.blocks_; }

 private:
  std::vector<std::vector<Var>> blocks_;
  std::vector<std::pair<Var, std::pair<std::size_t, std::size_t>>> index_;  // sorted by var
};

}  // namespace chasm
