#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "chasm/analysis.hpp"
#include "chasm/circuit.hpp"
#include "chasm/depth4_circuit.hpp"
#include "chasm/ftree.hpp"
#include "chasm/vsbr.hpp"

namespace chasm {

// ---------------------------------------------------------------------------
// Expansion suppliers

struct HyFactor {
  FRef formula;
  int degree = 0;
};

/// f = sum over rows of the product of the row's factors, factor j of degree
/// in [d/3^j, d(2/3)^j].
struct HyRow {
  std::size_t row_index = 0;
  std::vector<HyFactor> factors;
};

/// Pre: homogeneous formula of degree >= 1.
std::vector<HyRow> hy_rows(const Formula& f);
std::vector<HyRow> hy_rows(const FRef& f);

/// Checks the degree windows of every factor against d (exact arithmetic).
bool hy_windows_hold(const HyRow& row, int d);
/// Row length cap: log_{3/2} d + 2.
double hy_length_bound(int d);

/// f = A * [v] + B for a node v (or a product of Mul children) with
/// d/3 <= deg v <= 2d/3. b is null when B vanishes.
struct AffineSplit {
  FRef v;
  FRef a;
  FRef b;
};
AffineSplit split_at_middle(const FRef& f);

struct ShallowRow {
  std::size_t row_index = 0;
  /// The HY factors f_2..f_r of the row the split came from.
  std::vector<HyFactor> hy_factors;
  /// Children of the chosen Mul gate h together with the factors of A.
  std::vector<HyFactor> split_factors;
};

/// Pre: homogeneous formula, product depth <= delta, degree >= 2.
std::vector<ShallowRow> shallow_rows(const Formula& f, int delta);
std::vector<ShallowRow> shallow_rows(const FRef& f, int delta);
/// floor((d/3)^(1/delta)), the guaranteed split length.
std::size_t shallow_min_split(int d, int delta);

// ---------------------------------------------------------------------------
// Passes

/// Iteration accounting shared by the passes.
struct ExpansionAudit {
  double bad_threshold = 0;
  double bad_cap = 0;
  std::size_t expansions = 0;
  std::size_t max_lineage_depth = 0;
  std::size_t max_branching = 0;
  std::size_t max_bad = 0;
  /// Children whose bad count is not above their parent's.
  std::size_t monotonicity_violations = 0;
  std::size_t bad_cap_violations = 0;
  /// Largest drop of the total degree of factors above t in one expansion.
  int max_big_degree_drop = 0;
  /// Drops above this count as violations; 0 means recorded only.
  int big_drop_cap = 0;
  std::size_t big_drop_violations = 0;
  bool degenerate = false;

  nlohmann::json to_json() const;
};

struct PassResult {
  DepthFourCircuit circuit;
  ReductionReport report;
  ExpansionAudit audit;
};

/// 10^6 unless CHASM_SUMMAND_CAP is set.
std::size_t summand_cap();

/// Pre: c formally homogeneous, 1 <= t <= deg c.
PassResult reduce_general(const Circuit& c, int t, std::uint64_t seed = 0);
/// Pre: homogeneous formula, t >= 1; t >= deg f gives the single-factor output.
PassResult reduce_hom_formula(const Formula& f, int t, std::uint64_t seed = 0);
PassResult reduce_hom_formula_alt(const Formula& f, int t, std::uint64_t seed = 0);
PassResult reduce_shallow(const Formula& f, int t, std::uint64_t seed = 0);

/// Implementation constant c_delta in a_min >= c_delta * (d/t) * t^(1/delta).
inline constexpr double kShallowConstant = 0.5;
double shallow_a_bound(int d, int t, int delta);
/// ceil((1/10) (d/t) log2 t).
std::size_t hom_a_bound(int d, int t);

}  // namespace chasm
