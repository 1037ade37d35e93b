#include <doctest.h>

#include <cmath>
#include <vector>

#include "chasm/analysis.hpp"
#include "chasm/depth4.hpp"
#include "chasm/generate.hpp"

using namespace chasm;

namespace {

Circuit from_text(const std::string& body, std::size_t n = 3) {
  return parse_circuit("circuit c p=101 nvars=" + std::to_string(n) + "\n" + body);
}

}  // namespace

TEST_CASE("check_homogeneous") {
  Circuit bad = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1\ngate g3 = add g2 g0\noutput g3\n");
  auto r = check_homogeneous(bad);
  CHECK_FALSE(r.pass);
  REQUIRE(r.offending_gate.has_value());
  CHECK(*r.offending_gate == 3);

  Circuit good = from_text(
      "gate g0 = var 0\ngate g1 = var 1\ngate g2 = var 2\ngate g3 = mul g0 g1\ngate g4 = mul g1 g2\n"
      "gate g5 = add g3 g4\noutput g5\n");
  CHECK(check_homogeneous(good, true));
}

TEST_CASE("formal degrees") {
  Circuit c = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = var 2\ngate g3 = add g1 g2\ngate g4 = mul g0 g3\noutput g4\n");
  CHECK(formal_degrees(c).back() == 2);
  Circuit k = from_text("gate g0 = const 5\noutput g0\n");
  CHECK(formal_degrees(k).back() == 0);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Circuit r = gen_random_homogeneous_circuit(seed, 3, 5, 40);
    int formal = formal_degrees(r)[r.output()];
    SparsePoly p = expand_to_sparse(r);
    CHECK(formal >= p.degree());
  }
}

TEST_CASE("product depth") {
  Circuit single = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1\noutput g2\n");
  CHECK(product_depth(single) == 1);
  Circuit prod8 = gen_balanced_product(7, 4, 8);
  CHECK(product_depth(Formula(prod8)) == 3);
  CHECK(product_depth(Formula(gen_shallow(3, 4, 16, 2))) == 2);
  // Scalar multiples do not add product depth.
  Circuit scaled = from_text("gate g0 = var 0\ngate g1 = const 3\ngate g2 = mul g1 g0\ngate g4 = var 1\ngate g3 = mul g2 g4\noutput g3\n");
  CHECK(product_depth(scaled) == 1);
  Circuit dag = from_text("gate g0 = var 0\ngate g1 = mul g0 g0\ngate g2 = mul g1 g1\noutput g2\n");
  CHECK_THROWS_AS(product_depth(dag), PreconditionError);
}

TEST_CASE("set-multilinearity") {
  PrimeField f(101);
  Partition part({{0, 1}, {2, 3}});
  auto x = [&](Var v) { return SparsePoly::variable(f, 4, v); };
  CHECK(check_set_multilinear(x(0) * x(3), part));
  auto r = check_set_multilinear(x(0) * x(1), part);
  CHECK_FALSE(r.pass);
  REQUIRE(r.offending_monomial.has_value());
  CHECK(*r.offending_monomial == Monomial::from_pairs({{0, 1}, {1, 1}}));

  Circuit imm = gen_imm(2, 3);
  Partition ip = imm_partition(2, 3);
  CHECK(ip.num_blocks() == 3);
  CHECK(ip.block_size(0) == 4);
  CHECK(check_set_multilinear(imm, ip));
  CHECK(check_syntactic_set_multilinear(imm, ip));
}

TEST_CASE("identity testing") {
  Circuit c = gen_random_homogeneous_formula(1, 4, 6, 40);
  CHECK(pit_equivalent(c, c, 16, 1).equal);

  Circuit a = from_text("gate g0 = var 0\ngate g1 = mul g0 g0\noutput g1\n");
  PrimeField f(101);
  SparsePoly sq = SparsePoly::variable(f, 3, 0) * SparsePoly::variable(f, 3, 0);
  CHECK(pit_equivalent(a, sq, 16, 2).equal);

  Circuit x0 = from_text("gate g0 = var 0\noutput g0\n");
  Circuit x0p1 = from_text("gate g0 = var 0\ngate g1 = const 1\ngate g2 = add g0 g1\noutput g2\n");
  auto v = pit_equivalent(x0, x0p1, 16, 3);
  CHECK_FALSE(v.equal);
  REQUIRE(v.witness.has_value());
  CHECK(v.value_a != v.value_b);
  CHECK(v.trials >= 1);
}

TEST_CASE("pit points are reproducible") {
  PrimeField f;
  CHECK(pit_point(f, 5, 11, 3) == pit_point(f, 5, 11, 3));
  CHECK(pit_point(f, 5, 11, 3) != pit_point(f, 5, 11, 4));
}

TEST_CASE("structure report counts") {
  PrimeField f(101);
  auto x = [&](Var v) { return SparsePoly::variable(f, 4, v); };
  DepthFourCircuit d4(f, 4, 4, 2);
  d4.add_summand({{x(0) * x(1), x(2) * x(3)}, {}});
  d4.add_summand({{x(0) * x(0), x(1) * x(2)}, {}});
  d4.add_summand({{x(3) * x(3), x(1) * x(1)}, {}});
  PassMeta meta;
  meta.pass_name = "general";
  meta.degree = 4;
  meta.cut = 2;
  meta.input_size = 20;
  ReductionReport rep = structure_report(d4, meta);
  CHECK(rep.top_fanin == 3);
  CHECK(rep.min_factor_count == 2);
  CHECK(rep.max_bottom_degree == 2);
  CHECK(rep.top_fanin_within_bound());
  auto j = rep.to_json();
  for (const char* key : {"input_size", "top_fanin", "min_factor_count", "max_bottom_degree", "iteration_count",
                          "bad_term_histogram", "bound_top_fanin_log2", "pass_name", "seed"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
}

TEST_CASE("general-pass fan-in bound at s=20, d=8, t=4") {
  PassMeta meta;
  meta.pass_name = "general";
  meta.degree = 8;
  meta.cut = 4;
  meta.input_size = 20;
  ReductionReport rep = structure_report(DepthFourCircuit(PrimeField(), 1, 8, 4), meta);
  CHECK(rep.bound_top_fanin_log2 == doctest::Approx(16 * std::log2(20.0)));
}

TEST_CASE("report dump is stable") {
  nlohmann::json j{{"b", 1}, {"a", 2}};
  std::string s = dump_report(j);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.back() == '\n');
}

TEST_CASE("evaluable built from a temporary owns it") {
  Circuit c = gen_balanced_product(2, 4, 6);
  Evaluable e = Evaluable::of(parse_circuit(serialize(c)));
  PitVerdict v = pit_equivalent(e, Evaluable::of(c), 8, 3);
  CHECK(v.equal);
  CHECK(v.trials == 8);
}
