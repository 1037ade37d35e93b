#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chasm/circuit.hpp"
#include "chasm/depth4_circuit.hpp"
#include "chasm/partition.hpp"
#include "chasm/poly.hpp"

namespace chasm {

// ---------------------------------------------------------------------------
// Structural validators

struct CheckResult {
  bool pass = true;
  std::optional<GateId> offending_gate;
  std::optional<Monomial> offending_monomial;
  std::string message;

  explicit operator bool() const { return pass; }
};

/// Formal check: every Add gate's children share its formal degree. With
/// `deep`, additionally expands every live gate (oracle-feasible instances
/// only) and checks that its polynomial is homogeneous of its formal degree.
CheckResult check_homogeneous(const Circuit& c, bool deep = false,
                              std::size_t monomial_cap = kDefaultMonomialCap);

std::vector<int> formal_degrees(const Circuit& c);

/// Maximum number of (non-scalar) Mul gates on a root-to-leaf path.
int product_depth(const Formula& f);
/// Same, after checking tree shape; throws PreconditionError on a DAG.
int product_depth(const Circuit& c);

/// Every monomial takes exactly one variable, to the first power, from each block.
CheckResult check_set_multilinear(const SparsePoly& f, const Partition& part);
CheckResult check_set_multilinear(const Circuit& c, const Partition& part,
                                  std::size_t monomial_cap = kDefaultMonomialCap);
/// Syntactic check on every live gate: inputs name one block, Add children
/// cover the same block set, Mul children cover disjoint block sets, and the
/// output covers every block.
CheckResult check_syntactic_set_multilinear(const Circuit& c, const Partition& part);

// ---------------------------------------------------------------------------
// Randomized identity testing

/// Anything that can be evaluated at a point of F_p^n.
struct Evaluable {
  PrimeField field;
  std::size_t num_vars = 0;
  int degree = 0;
  std::function<u64(std::span<const u64>)> eval;

  // The lvalue forms keep a reference; the rvalue forms take ownership.
  static Evaluable of(const Circuit& c);
  static Evaluable of(const DepthFourCircuit& d4);
  static Evaluable of(const SparsePoly& p);
  static Evaluable of(Circuit&& c);
  static Evaluable of(DepthFourCircuit&& d4);
  static Evaluable of(SparsePoly&& p);
};

struct PitVerdict {
  bool equal = true;
  std::size_t trials = 0;
  /// (d/p)^trials; an upper bound on the chance that unequal inputs look equal.
  double failure_bound = 0;
  double failure_bound_log2 = 0;
  /// Set when equal is false; both sides were re-evaluated there.
  std::optional<std::vector<u64>> witness;
  u64 value_a = 0;
  u64 value_b = 0;
};

/// The trial-th sample point: coordinates uniform over F_p, drawn from a
/// counter-based stream keyed by (seed, trial).
std::vector<u64> pit_point(const PrimeField& field, std::size_t num_vars, std::uint64_t seed, std::size_t trial);

PitVerdict pit_equivalent(const Evaluable& a, const Evaluable& b, std::size_t trials, std::uint64_t seed);

template <class A, class B>
PitVerdict pit_equivalent(const A& a, const B& b, std::size_t trials, std::uint64_t seed) {
  return pit_equivalent(Evaluable::of(a), Evaluable::of(b), trials, seed);
}

// ---------------------------------------------------------------------------
// Reports

struct PassMeta {
  std::string pass_name;
  std::size_t input_size = 0;
  int degree = 0;
  int cut = 0;
  std::size_t iteration_count = 0;
  std::uint64_t seed = 0;
  /// Exponent constant k in the top fan-in bound s^(k*d/t) plus an additive
  /// term: bound = s^(top_fanin_exponent * d / t + top_fanin_offset).
  double top_fanin_exponent = 8;
  double top_fanin_offset = 0;
  nlohmann::json extras = nlohmann::json::object();
};

/// Measured structure of a depth-four circuit next to the corresponding bounds.
struct ReductionReport {
  std::size_t input_size = 0;
  std::size_t num_vars = 0;
  int degree = 0;
  int cut = 0;
  std::size_t top_fanin = 0;
  std::size_t min_factor_count = 0;
  std::size_t max_factor_count = 0;
  int max_bottom_degree = 0;
  std::size_t iteration_count = 0;
  /// bad_term_histogram[k] = number of summands with exactly k factors of
  /// degree above the pass's badness threshold.
  std::vector<std::size_t> bad_term_histogram;
  double bound_top_fanin = 0;
  double bound_top_fanin_log2 = 0;
  double bound_a = 0;
  std::string pass_name;
  std::uint64_t seed = 0;
  nlohmann::json extras = nlohmann::json::object();

  bool top_fanin_within_bound() const;
  nlohmann::json to_json() const;
};

/// Badness threshold divisor for a pass: t/8 for the general pass, t/9 for the
/// formula passes.
double bad_threshold_divisor(const std::string& pass_name);

ReductionReport structure_report(const DepthFourCircuit& d4, const PassMeta& meta);

/// Pretty-printed JSON with sorted keys and a trailing newline.
std::string dump_report(const nlohmann::json& j);

}  // namespace chasm
