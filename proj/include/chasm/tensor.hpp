#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chasm/circuit.hpp"
#include "chasm/depth4_circuit.hpp"
#include "chasm/partition.hpp"
#include "chasm/poly.hpp"

namespace chasm {

using TensorIndex = std::vector<std::uint32_t>;

/// Coefficient map over [n_1] x ... x [n_d] (0-based in memory, 1-based in
/// files). Zero entries are never stored.
class Tensor {
 public:
  Tensor() = default;
  Tensor(PrimeField field, Partition part);

  const PrimeField& field() const { return field_; }
  const Partition& partition() const { return part_; }
  std::vector<std::size_t> shape() const { return part_.shape(); }
  std::size_t order() const { return part_.num_blocks(); }
  const std::map<TensorIndex, u64>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  u64 get(const TensorIndex& idx) const;
  void set(const TensorIndex& idx, u64 v);
  void add(const TensorIndex& idx, u64 v);

  bool operator==(const Tensor& o) const {
    return field_ == o.field_ && part_ == o.part_ && coeffs_ == o.coeffs_;
  }

  /// Header "tensor p=<p> shape=AxBxC", then "i1 .. id coeff" lines.
  std::string serialize() const;
  /// Blocks are laid out consecutively from variable 0.
  static Tensor parse(std::string_view text);

 private:
  void check(const TensorIndex& idx) const;

  PrimeField field_;
  Partition part_;
  std::map<TensorIndex, u64> coeffs_;
};

/// Pre: f set-multilinear w.r.t. part (PreconditionError names the monomial).
Tensor tensor_of(const SparsePoly& f, const Partition& part);
SparsePoly poly_of(const Tensor& t, std::size_t num_vars);
SparsePoly poly_of(const Tensor& t);

/// Keeps only the set-multilinear monomials.
SparsePoly sml_restriction(const SparsePoly& f, const Partition& part);

/// Product of d linear forms; form j has one coefficient per block-j variable.
struct RankOneTerm {
  std::vector<std::vector<u64>> forms;
};

struct RankDecomposition {
  Tensor target;
  std::vector<RankOneTerm> terms;

  std::size_t size() const { return terms.size(); }
  Tensor resum() const;
  /// Exact coefficient-wise comparison with the target.
  bool verify() const { return resum() == target; }

  /// Header "decomposition p=<p> shape=... terms=<r>", then per term a
  /// "term <k>:" line followed by one coefficient line per block.
  std::string serialize() const;
};

RankDecomposition trivial_decomposition(const Tensor& t);
/// Pre: same partition.
RankDecomposition combine_add(const RankDecomposition& a, const RankDecomposition& b);
/// Pre: partitions on disjoint variables; the result uses a's blocks then b's.
RankDecomposition combine_mul(const RankDecomposition& a, const RankDecomposition& b);
/// Permutes blocks so that the partition equals `order` (same blocks, any order).
RankDecomposition reorder_blocks(const RankDecomposition& r, const Partition& order);
/// Drops zero terms, then re-expresses each group of terms sharing their first
/// d-2 forms through a row-reduced basis of the last two modes.
RankDecomposition prune(const RankDecomposition& r);

/// Rank by Gaussian elimination (independent oracle for the matrix case).
std::size_t matrix_rank(std::vector<std::vector<u64>> m, const PrimeField& field);

/// Exact rank over F_q by exhaustive search (coefficients must be below q).
/// Throws CapExceeded when the enumeration would exceed `budget` candidates.
std::size_t brute_force_rank(const Tensor& t, u64 q, std::size_t budget = 200'000'000);

/// Set-multilinear split of one depth-four summand.
struct SmlSplit {
  /// (factor index, block mask) -> projection Q_{i,S}, nonzero ones only.
  std::map<std::pair<std::size_t, std::uint64_t>, SparsePoly> projections;
  /// Block masks (S_1, ..., S_a) whose projections are all nonzero.
  std::vector<std::vector<std::uint64_t>> rows;
  /// All admissible ordered set partitions with |S_i| = d_i.
  std::size_t admissible = 0;
  /// d! / (d_1! ... d_a!).
  double multinomial_bound = 0;

  SparsePoly row_product(std::size_t k) const;
};

SmlSplit sml_of_summand(const Summand& sm, const Partition& part);

enum class CertMode { Sml, Homogeneous };

struct RankCertificate {
  RankDecomposition decomposition;
  nlohmann::json report;
};

/// Depth-four reduction followed by sub-additivity / sub-multiplicativity of
/// the trivial bound. The decomposition re-sums to the set-multilinear part of f.
RankCertificate rank_certificate(const Formula& f, const Partition& part, double c, CertMode mode,
                                 std::uint64_t seed = 0);

}  // namespace chasm
