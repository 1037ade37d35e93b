#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chasm/field.hpp"

namespace chasm {

using Var = std::uint32_t;

/// Sparse exponent vector: (variable, exponent) pairs with strictly increasing
/// variables and positive exponents.
class Monomial {
 public:
  Monomial() = default;
  static Monomial var(Var v, std::uint32_t e = 1);
  /// Builds from arbitrary (var, exp) pairs; merges repeats, drops zeros.
  static Monomial from_pairs(std::vector<std::pair<Var, std::uint32_t>> pairs);

  const std::vector<std::pair<Var, std::uint32_t>>& pairs() const { return pairs_; }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t exponent(Var v) const;
  bool empty() const { return pairs_.empty(); }

  Monomial operator*(const Monomial& o) const;

  /// Graded order: total degree first, then lexicographic on the pairs.
  bool operator<(const Monomial& o) const;
  bool operator==(const Monomial& o) const { return degree_ == o.degree_ && pairs_ == o.pairs_; }

  std::size_t hash() const;
  std::string to_string() const;

 private:
  std::vector<std::pair<Var, std::uint32_t>> pairs_;
  std::uint32_t degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

/// Canonical sparse multivariate polynomial over a prime field. Terms are kept
/// sorted by the monomial order and never carry a zero coefficient.
class SparsePoly {
 public:
  using Term = std::pair<Monomial, u64>;

  SparsePoly() = default;
  SparsePoly(PrimeField field, std::size_t num_vars) : field_(field), num_vars_(num_vars) {}

  static SparsePoly constant(PrimeField field, std::size_t num_vars, u64 c);
  static SparsePoly variable(PrimeField field, std::size_t num_vars, Var v);
  /// Canonicalizes arbitrary terms (merging duplicates, dropping zeros).
  static SparsePoly from_terms(PrimeField field, std::size_t num_vars, std::vector<Term> terms);

  const PrimeField& field() const { return field_; }
  std::size_t num_vars() const { return num_vars_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const;
  bool is_homogeneous() const;
  u64 coefficient(const Monomial& m) const;

  SparsePoly operator+(const SparsePoly& o) const;
  SparsePoly operator-(const SparsePoly& o) const;
  SparsePoly operator*(const SparsePoly& o) const;
  SparsePoly operator-() const;
  SparsePoly scaled(u64 c) const;
  /// Product with a cap on the number of distinct monomials produced.
  SparsePoly mul_capped(const SparsePoly& o, std::size_t cap) const;

  SparsePoly homogeneous_component(int k) const;
  SparsePoly filter(const std::function<bool(const Monomial&)>& keep) const;

  u64 evaluate(std::span<const u64> point) const;

  bool operator==(const SparsePoly& o) const {
    return field_ == o.field_ && terms_ == o.terms_;
  }

  /// "3*x0^2*x1 + x2" in canonical (descending) order; "0" for zero.
  std::string to_string() const;
  static SparsePoly parse(std::string_view text, PrimeField field, std::size_t num_vars);

 private:
  PrimeField field_;
  std::size_t num_vars_ = 0;
  std::vector<Term> terms_;
};

}  // namespace chasm
