#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chasm/circuit.hpp"
#include "chasm/poly.hpp"

namespace chasm {

using NodeId = std::uint32_t;
inline constexpr GateId kNoGate = static_cast<GateId>(-1);

/// One summand of an expansion: coeff * product of the referenced nodes.
/// Entries all have degree >= 1; degree-zero quotients are folded into coeff.
struct ExpansionRow {
  u64 coeff = 1;
  std::vector<NodeId> entries;
};

/// A polynomial of the log-depth system: either the polynomial [u] of a base
/// gate (v == kNoGate) or the gate quotient [u:v].
struct ReducedNode {
  GateId u = kNoGate;
  GateId v = kNoGate;
  int degree = 0;
  /// Nodes of degree <= 1 are kept as explicit linear forms (coefficient of
  /// x_i at index i, constant term last).
  std::vector<u64> linear_form;
  /// Expansion into products of nodes of at most half the degree (degree >= 2).
  std::vector<ExpansionRow> rows;
  /// Known to compute the zero polynomial.
  bool zero = false;
  /// Gate computing this node in the materialized circuit.
  GateId gate = kNoGate;

  bool is_quotient() const { return v != kNoGate; }
  bool is_linear() const { return degree <= 1; }
  std::string label() const;
};

/// Log-depth rewrite of a homogeneous, binarized, left-heavy circuit built from
/// gate quotients. Nodes are materialized on demand from the output, so
/// quotients that are never needed never appear.
class ReducedCircuit {
 public:
  const Circuit& base() const { return base_; }
  const Circuit& circuit() const { return circuit_; }
  const std::vector<ReducedNode>& nodes() const { return nodes_; }
  const ReducedNode& node(NodeId id) const { return nodes_.at(id); }
  NodeId output_node() const { return output_; }
  std::optional<NodeId> find(GateId u, GateId v = kNoGate) const;

  /// (u, w) -> gate of the materialized circuit computing [u:w].
  const std::map<std::pair<GateId, GateId>, GateId>& quotient_gates() const { return quotient_gates_; }
  /// (u, m) -> frontier: Mul gates w reachable from u through Add children
  /// and left Mul children with deg(w) > m >= deg(left(w)).
  const std::map<std::pair<GateId, int>, std::vector<GateId>>& frontier_cache() const { return frontier_cache_; }

  std::size_t size() const { return circuit_.size(); }
  int depth() const { return circuit_.depth(); }
  /// Materialized circuit in the exchange format, quotient gates annotated
  /// with "# quotient <u> <w>".
  std::string serialize() const;

 private:
  friend class ReducedCircuitBuilder;
  Circuit base_;
  Circuit circuit_;
  std::vector<ReducedNode> nodes_;
  NodeId output_ = 0;
  std::map<std::pair<GateId, GateId>, NodeId> index_;
  std::map<std::pair<GateId, GateId>, GateId> quotient_gates_;
  std::map<std::pair<GateId, int>, std::vector<GateId>> frontier_cache_;
};

/// Pre: c homogeneous, binarized left-heavy, degree >= 1.
ReducedCircuit vsbr_reduce(const Circuit& c);

/// g = sum over rows of coeff * product of entries; every entry has degree in
/// [1, deg(g)/2] and each row's degrees sum to deg(g). Throws for nodes of
/// degree below 2.
const std::vector<ExpansionRow>& expansion_rows(const ReducedCircuit& r, NodeId g);

/// Exact polynomials of reduced nodes, memoized.
class NodeExpander {
 public:
  explicit NodeExpander(const ReducedCircuit& r, std::size_t monomial_cap = kDefaultMonomialCap)
      : r_(r), cap_(monomial_cap) {}
  const SparsePoly& operator()(NodeId id);

 private:
  const ReducedCircuit& r_;
  std::size_t cap_;
  std::map<NodeId, SparsePoly> cache_;
};

/// Measured structural properties of a reduced circuit.
struct VsbrStats {
  std::size_t size = 0;
  int depth = 0;
  int degree = 0;
  /// Largest count of non-constant children over non-scalar Mul gates.
  std::size_t max_mul_fanin = 0;
  /// Non-scalar Mul gates having a child of degree above half their own.
  std::size_t halving_violations = 0;
  std::size_t max_rows = 0;
  std::size_t quotient_count = 0;
};

VsbrStats vsbr_stats(const ReducedCircuit& r);

/// Documented constant: depth <= kVsbrDepthConstant * max(1, ceil(log2 d)).
inline constexpr int kVsbrDepthConstant = 4;

/// Reference value of [u:v] computed straight from the definition
/// ([u:u] = 1, Add distributes, Mul u = l*r gives [l:v]*[r]); test oracle.
SparsePoly quotient_by_definition(const Circuit& c, GateId u, GateId v,
                                  std::size_t monomial_cap = kDefaultMonomialCap);

}  // namespace chasm
