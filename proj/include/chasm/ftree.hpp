#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chasm/circuit.hpp"
#include "chasm/poly.hpp"

namespace chasm {

struct FNode;
using FRef = std::shared_ptr<const FNode>;

/// Immutable formula node. Subtrees are shared between formulas in memory,
/// but every FRef denotes a tree: size counts repeated subtrees again.
struct FNode {
  GateKind kind = GateKind::Const;
  u64 value = 0;
  std::vector<FRef> children;
  int degree = 0;
  std::size_t size = 1;
};

FRef fnode_input(Var v);
FRef fnode_const(u64 c);
/// Single-child sums and products collapse to the child; an empty product is 1.
FRef fnode_add(std::vector<FRef> children);
FRef fnode_mul(std::vector<FRef> children);

/// Tree of the live part of a formula.
FRef ftree_of(const Formula& f);
/// Trees of every gate of a formula-shaped circuit (entry g is the subtree of g).
std::vector<FRef> ftree_all_gates(const Circuit& c);

/// Lays a tree out as a circuit; the result is a formula.
Circuit circuit_of(const FRef& f, PrimeField field, std::size_t num_vars, const std::string& name = "f");

/// Max number of non-scalar Mul nodes on a root-to-leaf path.
int ftree_product_depth(const FRef& f);
/// Every Add node's children share its degree.
bool ftree_homogeneous(const FRef& f);
/// Largest count of non-constant children over Mul nodes.
std::size_t ftree_max_mul_fanin(const FRef& f);

/// Memoized (per node pointer) evaluation and expansion.
class FTreeEval {
 public:
  FTreeEval(PrimeField field, std::size_t num_vars, std::size_t monomial_cap = kDefaultMonomialCap)
      : field_(field), n_(num_vars), cap_(monomial_cap) {}
  const SparsePoly& expand(const FRef& f);
  u64 evaluate(const FRef& f, std::span<const u64> point);

 private:
  PrimeField field_;
  std::size_t n_;
  std::size_t cap_;
  std::unordered_map<const FNode*, SparsePoly> polys_;
  std::vector<FRef> keep_;
};

}  // namespace chasm
