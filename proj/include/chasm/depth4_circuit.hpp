#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chasm/field.hpp"
#include "chasm/poly.hpp"

namespace chasm {

/// One product gate feeding the top sum: a product of low-degree polynomials.
struct Summand {
  std::vector<SparsePoly> factors;
  /// Where each factor came from (e.g. "[g12:g7]" or a sub-formula label).
  std::vector<std::string> provenance;

  int degree() const;
};

/// Sum of products of sparse polynomials: a depth-four circuit whose bottom
/// products have degree at most t.
class DepthFourCircuit {
 public:
  DepthFourCircuit() = default;
  DepthFourCircuit(PrimeField field, std::size_t num_vars, int d, int t)
      : field_(field), num_vars_(num_vars), d_(d), t_(t) {}

  const PrimeField& field() const { return field_; }
  std::size_t num_vars() const { return num_vars_; }
  int d() const { return d_; }
  int t() const { return t_; }
  bool homogeneous() const { return homogeneous_; }
  void set_homogeneous(bool h) { homogeneous_ = h; }

  const std::vector<Summand>& summands() const { return summands_; }
  std::size_t top_fanin() const { return summands_.size(); }
  void add_summand(Summand s);

  u64 evaluate(std::span<const u64> point) const;
  SparsePoly expand(std::size_t monomial_cap) const;
  /// Checks the type invariants; returns a description of the first violation.
  std::optional<std::string> validate() const;

  std::string serialize() const;
  static DepthFourCircuit parse(std::string_view text);

 private:
  PrimeField field_;
  std::size_t num_vars_ = 0;
  int d_ = 0;
  int t_ = 0;
  bool homogeneous_ = true;
  std::vector<Summand> summands_;
};

}  // namespace chasm
