#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "chasm/analysis.hpp"
#include "chasm/depth4.hpp"
#include "chasm/generate.hpp"

using namespace chasm;

namespace {

// (x0+x1)(x2+x3)(x4+x5)(x6+x7) as a flat product.
Circuit four_sums() {
  std::string t = "circuit f p=2305843009213693951 nvars=8\n";
  for (int i = 0; i < 4; ++i) {
    t += "gate a" + std::to_string(i) + " = var " + std::to_string(2 * i) + "\n";
    t += "gate b" + std::to_string(i) + " = var " + std::to_string(2 * i + 1) + "\n";
    t += "gate s" + std::to_string(i) + " = add a" + std::to_string(i) + " b" + std::to_string(i) + "\n";
  }
  t += "gate p = mul s0 s1 s2 s3\noutput p\n";
  return parse_circuit(t);
}

void check_pass(const Circuit& c, const PassResult& pr, int t) {
  CHECK_FALSE(pr.circuit.validate().has_value());
  CHECK(pr.report.max_bottom_degree <= t);
  CHECK(pr.audit.monotonicity_violations == 0);
  CHECK(pr.audit.bad_cap_violations == 0);
  CHECK(pr.audit.big_drop_violations == 0);
  CHECK(pr.report.top_fanin_within_bound());
  for (const auto& s : pr.circuit.summands()) CHECK(s.degree() == c.degree());
  CHECK(pit_equivalent(c, pr.circuit, 32, 7).equal);
}

}  // namespace

TEST_CASE("general pass on a product of four sums") {
  Circuit c = four_sums();
  PassResult pr = reduce_general(c, 2, 1);
  check_pass(c, pr, 2);
  CHECK(expand_to_sparse(c) == pr.circuit.expand(kDefaultMonomialCap));
}

TEST_CASE("general pass with t = d never iterates") {
  Circuit c = gen_random_homogeneous_formula(2, 4, 6, 50);
  PassResult pr = reduce_general(c, 6, 2);
  CHECK(pr.audit.expansions == 0);
  check_pass(c, pr, 6);
}

TEST_CASE("general pass lineages on a product of sixteen forms") {
  Circuit c = gen_balanced_product(3, 4, 16);
  PassResult pr = reduce_general(c, 4, 3);
  check_pass(c, pr, 4);
  CHECK(pr.report.iteration_count <= 8 * 16 / 4);
  CHECK(pr.audit.max_bad <= 8 * 16 / 4);
}

TEST_CASE("general pass rejects bad cuts") {
  Circuit c = gen_random_homogeneous_formula(2, 4, 6, 50);
  CHECK_THROWS_AS(reduce_general(c, 0), PreconditionError);
  CHECK_THROWS_AS(reduce_general(c, 7), PreconditionError);
}

TEST_CASE("summand cap comes from the environment") {
  CHECK(summand_cap() == 1'000'000);
  Circuit c = gen_random_homogeneous_formula(5, 5, 12, 80);
  std::size_t top = reduce_general(c, 2).circuit.top_fanin();
  REQUIRE(top >= 2);
  setenv("CHASM_SUMMAND_CAP", std::to_string(top - 1).c_str(), 1);
  CHECK(summand_cap() == top - 1);
  CHECK_THROWS_AS(reduce_general(c, 2), CapExceeded);
  unsetenv("CHASM_SUMMAND_CAP");
}

TEST_CASE("hy rows of a linear formula") {
  Formula f(gen_random_homogeneous_formula(1, 3, 1, 10));
  auto rows = hy_rows(f);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].factors.size() == 1);
  CHECK(rows[0].factors[0].degree == 1);
}

TEST_CASE("hy rows of a product of eight forms") {
  Formula f(gen_balanced_product(4, 4, 8));
  auto rows = hy_rows(f);
  REQUIRE(rows.size() == 1);
  std::vector<int> degs;
  for (const auto& x : rows[0].factors) degs.push_back(x.degree);
  CHECK(degs == std::vector<int>{4, 2, 1, 1});
  CHECK(hy_windows_hold(rows[0], 8));
}

TEST_CASE("hy rows of a sum of two products") {
  Circuit a = gen_balanced_product(5, 4, 8), b = gen_balanced_product(6, 4, 8);
  // Splice b into a under a new top Add.
  Circuit c = a;
  std::vector<GateId> map(b.gate_count());
  for (GateId g = 0; g < b.gate_count(); ++g) {
    const Gate& x = b.gate(g);
    std::vector<GateId> kids;
    for (GateId k : x.children) kids.push_back(map[k]);
    switch (x.kind) {
      case GateKind::Input: map[g] = c.add_input(static_cast<Var>(x.value)); break;
      case GateKind::Const: map[g] = c.add_const(x.value); break;
      case GateKind::Add: map[g] = c.add_add(kids); break;
      case GateKind::Mul: map[g] = c.add_mul(kids); break;
    }
  }
  c.set_output(c.add_add({a.output(), map[b.output()]}));
  Formula f(c);
  auto rows = hy_rows(f);
  CHECK(rows.size() <= 2);
  FTreeEval ev(f.field(), f.num_vars());
  SparsePoly sum(f.field(), f.num_vars());
  for (const auto& r : rows) {
    CHECK(hy_windows_hold(r, 8));
    SparsePoly prod = SparsePoly::constant(f.field(), f.num_vars(), 1);
    for (const auto& x : r.factors) prod = prod * ev.expand(x.formula);
    sum = sum + prod;
  }
  CHECK(sum == expand_to_sparse(c));
}

TEST_CASE("hy windows on random formulas") {
  for (int d : {3, 8, 12, 16}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Formula f(gen_random_homogeneous_formula(seed, 4, d, 80));
      for (const auto& r : hy_rows(f)) {
        CHECK(hy_windows_hold(r, d));
        CHECK(static_cast<double>(r.factors.size()) <= hy_length_bound(d));
      }
    }
  }
}

TEST_CASE("middle split") {
  Formula f(gen_random_homogeneous_formula(9, 4, 9, 70));
  AffineSplit sp = split_at_middle(ftree_of(f));
  CHECK(3 * sp.v->degree >= 9);
  CHECK(3 * sp.v->degree <= 18);
  FTreeEval ev(f.field(), f.num_vars());
  SparsePoly rebuilt = ev.expand(sp.a) * ev.expand(sp.v);
  if (sp.b) rebuilt = rebuilt + ev.expand(sp.b);
  CHECK(rebuilt == expand_to_sparse(f.circuit()));
}

TEST_CASE("hom pass on a product of 64 forms") {
  Circuit c = gen_balanced_product(1, 4, 64);
  Formula f(c);
  PassResult a = reduce_hom_formula(f, 8, 1);
  PassResult b = reduce_hom_formula_alt(f, 8, 1);
  check_pass(c, a, 8);
  check_pass(c, b, 8);
  CHECK(hom_a_bound(64, 8) == 3);
  CHECK(a.report.min_factor_count >= 3);
  CHECK(b.report.min_factor_count >= 3);
  CHECK(a.report.iteration_count <= 9 * 64 / 8);
  CHECK(a.audit.max_big_degree_drop <= 3 * 8);
  CHECK(pit_equivalent(a.circuit, b.circuit, 32, 5).equal);
}

TEST_CASE("hom passes on random formulas") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Circuit c = gen_random_homogeneous_formula(seed, 4, 12, 80);
    Formula f(c);
    PassResult a = reduce_hom_formula(f, 4, seed);
    PassResult b = reduce_hom_formula_alt(f, 4, seed);
    check_pass(c, a, 4);
    check_pass(c, b, 4);
    CHECK(a.report.min_factor_count >= hom_a_bound(12, 4));
    CHECK(b.report.min_factor_count >= hom_a_bound(12, 4));
  }
}

TEST_CASE("hom pass with t >= d is degenerate") {
  Circuit c = gen_random_homogeneous_formula(3, 4, 6, 50);
  PassResult pr = reduce_hom_formula(Formula(c), 6);
  CHECK(pr.audit.degenerate);
  CHECK(pr.circuit.top_fanin() == 1);
  CHECK(pit_equivalent(c, pr.circuit, 16, 1).equal);
}

TEST_CASE("shallow rows") {
  for (int d : {8, 16}) {
    Formula one(gen_shallow(1, 4, d, 1));
    for (const auto& r : shallow_rows(one, 1)) CHECK(r.split_factors.size() >= shallow_min_split(d, 1));
    Formula two(gen_shallow(2, 4, d, 2));
    for (const auto& r : shallow_rows(two, 2)) CHECK(r.split_factors.size() >= shallow_min_split(d, 2));
  }
  CHECK(shallow_min_split(16, 2) == 2);
  CHECK(shallow_min_split(16, 1) == 5);
}

TEST_CASE("shallow pass") {
  for (int delta : {1, 2}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      Circuit c = gen_shallow(seed, 4, 16, delta);
      PassResult pr = reduce_shallow(Formula(c), 4, seed);
      check_pass(c, pr, 4);
      CHECK(static_cast<double>(pr.report.min_factor_count) >= shallow_a_bound(16, 4, delta));
    }
  }
  CHECK(shallow_a_bound(16, 4, 1) == doctest::Approx(kShallowConstant * 16));
}
