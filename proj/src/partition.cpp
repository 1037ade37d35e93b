#include "chasm/partition.hpp"

#include <algorithm>

namespace chasm {

Partition::Partition(std::vector<std::vector<Var>> blocks) : blocks_(std::move(blocks)) {
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (blocks_[j].empty()) throw PreconditionError("partition block " + std::to_string(j) + " is empty");
    for (std::size_t i = 0; i < blocks_[j].size(); ++i) index_.push_back({blocks_[j][i], {j, i}});
  }
  std::sort(index_.begin(), index_.end());
  for (std::size_t k = 1; k < index_.size(); ++k) {
    if (index_[k].first == index_[k - 1].first) {
      throw PreconditionError("variable x" + std::to_string(index_[k].first) + " appears in two blocks");
    }
  }
}

Partition Partition::uniform(std::size_t d, std::size_t n) {
  return consecutive(std::vector<std::size_t>(d, n));
}

Partition Partition::consecutive(const std::vector<std::size_t>& sizes, Var offset) {
  std::vector<std::vector<Var>> blocks;
  Var next = offset;
  for (std::size_t s : sizes) {
    std::vector<Var> b;
    for (std::size_t i = 0; i < s; ++i) b.push_back(next++);
    blocks.push_back(std::move(b));
  }
  return Partition(std::move(blocks));
}

std::vector<std::size_t> Partition::shape() const {
  std::vector<std::size_t> s;
  for (const auto& b : blocks_) s.push_back(b.size());
  return s;
}

std::optional<std::pair<std::size_t, std::size_t>> Partition::locate(Var v) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), v,
                             [](const auto& e, Var x) { return e.first < x; });
  if (it == index_.end() || it->first != v) return std::nullopt;
  return it->second;
}

std::size_t Partition::var_span() const {
  return index_.empty() ? 0 : static_cast<std::size_t>(index_.back().first) + 1;
}

Partition Partition::restrict_to(const std::vector<std::size_t>& block_ids) const {
  std::vector<std::vector<Var>> b;
  for (std::size_t j : block_ids) b.push_back(blocks_.at(j));
  return Partition(std::move(b));
}

}  // namespace chasm
