#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chasm/field.hpp"
#include "chasm/poly.hpp"

namespace chasm {

using GateId = std::uint32_t;

enum class GateKind : std::uint8_t { Input, Const, Add, Mul };

struct Gate {
  GateKind kind = GateKind::Const;
  /// Variable index for Input, residue for Const; unused otherwise.
  u64 value = 0;
  std::vector<GateId> children;
  int formal_degree = 0;
};

/// Gate DAG in topological order: every child id is smaller than its parent's.
/// Gates not reachable from the output are dead; they are kept (so that
/// serialization round-trips) but excluded from size().
class Circuit {
 public:
  Circuit() = default;
  Circuit(std::string name, PrimeField field, std::size_t num_vars);

  GateId add_input(Var v);
  GateId add_const(u64 c);
  GateId add_add(std::vector<GateId> children);
  GateId add_mul(std::vector<GateId> children);
  void set_output(GateId g);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const PrimeField& field() const { return field_; }
  std::size_t num_vars() const { return num_vars_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const Gate& gate(GateId g) const { return gates_.at(g); }
  std::size_t gate_count() const { return gates_.size(); }
  GateId output() const;
  bool has_output() const { return output_.has_value(); }

  /// Formal degree of the output gate.
  int degree() const { return gate(output()).formal_degree; }
  std::vector<bool> live_mask() const;
  /// Number of live gates.
  std::size_t size() const;
  /// Every live non-output gate has exactly one live parent.
  bool is_tree() const;
  /// Longest output-to-leaf path, counted in edges.
  int depth() const;

 private:
  GateId push(Gate g);

  std::string name_ = "c";
  PrimeField field_;
  std::size_t num_vars_ = 0;
  std::vector<Gate> gates_;
  std::optional<GateId> output_;
};

/// A circuit whose live part is a tree.
class Formula {
 public:
  /// Throws PreconditionError unless c.is_tree().
  explicit Formula(Circuit c);
  const Circuit& circuit() const { return circuit_; }
  int degree() const { return circuit_.degree(); }
  std::size_t size() const { return circuit_.size(); }
  std::size_t num_vars() const { return circuit_.num_vars(); }
  const PrimeField& field() const { return circuit_.field(); }

 private:
  Circuit circuit_;
};

/// Mul gates with at most one non-constant child act as scalar weights on a
/// wire; they do not count toward product depth or multiplication fan-in.
bool is_scalar_mul(const Circuit& c, GateId g);
std::size_t nonconst_fanin(const Circuit& c, GateId g);

inline constexpr std::size_t kDefaultMonomialCap = 1'000'000;

u64 evaluate(const Circuit& c, std::span<const u64> point);
SparsePoly expand_to_sparse(const Circuit& c, std::size_t monomial_cap = kDefaultMonomialCap);
/// Polynomial at every gate (dead gates included).
std::vector<SparsePoly> expand_all_gates(const Circuit& c, std::size_t monomial_cap = kDefaultMonomialCap);

/// Folds constants, drops zero operands, collapses single-child gates and
/// removes dead gates. Gates computing the constant zero never survive as
/// operands.
Circuit fold_constants(const Circuit& c);

/// Result of the per-gate degree-component split.
struct Homogenized {
  Circuit circuit;
  /// components[k] = gate computing the degree-k part, if nonzero.
  std::vector<std::optional<GateId>> components;
};

/// Splits every gate into homogeneous components up to the output's formal
/// degree. The output gate is the sum of components (it is itself homogeneous
/// whenever only one component is nonzero).
Homogenized homogenize(const Circuit& c);
/// Only the degree-k component of c.
Circuit homogenize_component(const Circuit& c, int k);

/// Rewrites a formally homogeneous circuit so every Add/Mul gate has fan-in 2
/// and every Mul gate has formal_degree(left) >= formal_degree(right).
Circuit binarize_left_heavy(const Circuit& c);

/// Exchange format.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Circuit parse_circuit(std::string_view text);
/// Extra comment lines emitted right before a gate's definition.
using GateAnnotations = std::map<GateId, std::vector<std::string>>;
std::string serialize(const Circuit& c, const GateAnnotations& notes = {});

}  // namespace chasm
