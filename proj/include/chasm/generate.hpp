#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chasm/circuit.hpp"
#include "chasm/partition.hpp"
#include "chasm/tensor.hpp"

namespace chasm {

struct GeneratorParams {
  std::string family;  // random-homogeneous-formula | balanced-product | shallow | imm | random-tensor | random-sml-formula
  std::uint64_t seed = 0;
  std::size_t n = 4;
  int d = 8;
  std::size_t s = 60;
  int delta = 2;
  bool dag = false;
  u64 p = kMersenne61;
  /// Matrix width for imm.
  std::size_t width = 2;
  /// Tensor shape for random-tensor.
  std::vector<std::size_t> shape;
};

/// Homogeneous formula of degree d over n variables with at most s gates.
Circuit gen_random_homogeneous_formula(std::uint64_t seed, std::size_t n, int d, std::size_t s,
                                       PrimeField field = {});
/// Same degree profile, but gates are reused across the DAG.
Circuit gen_random_homogeneous_circuit(std::uint64_t seed, std::size_t n, int d, std::size_t s,
                                       PrimeField field = {});
/// Balanced binary product tree of d random linear forms.
Circuit gen_balanced_product(std::uint64_t seed, std::size_t n, int d, PrimeField field = {});
/// Homogeneous formula of product depth exactly delta (needs d >= 2^(delta-1)+1 or delta == 1).
Circuit gen_shallow(std::uint64_t seed, std::size_t n, int d, int delta, PrimeField field = {});
/// Entry (1,1) of a product of d generic w x w matrices; block j holds the
/// entries of matrix j (see imm_partition).
Circuit gen_imm(std::size_t width, int d, PrimeField field = {});
Partition imm_partition(std::size_t width, int d);
/// Syntactically set-multilinear formula over Partition::uniform(d, n).
Circuit gen_random_sml_formula(std::uint64_t seed, std::size_t n, int d, std::size_t s, PrimeField field = {});
/// Dense tensor with uniform coefficients.
Tensor gen_random_tensor(std::uint64_t seed, const std::vector<std::size_t>& shape, PrimeField field = {});

/// Dispatch on params.family. Tensor families are not circuits and throw here.
Circuit generate_circuit(const GeneratorParams& params);

}  // namespace chasm
