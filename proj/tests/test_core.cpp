#include <doctest.h>

#include <vector>

#include "chasm/analysis.hpp"
#include "chasm/circuit.hpp"
#include "chasm/field.hpp"
#include "chasm/generate.hpp"
#include "chasm/poly.hpp"
#include "chasm/rng.hpp"

using namespace chasm;

namespace {

Circuit from_text(const std::string& body, u64 p = 101, std::size_t n = 2) {
  return parse_circuit("circuit c p=" + std::to_string(p) + " nvars=" + std::to_string(n) + "\n" + body);
}

}  // namespace

TEST_CASE("mersenne fast path agrees with generic reduction") {
  PrimeField f;
  CounterStream r(1, 0);
  for (int i = 0; i < 2000; ++i) {
    u64 a = r.below(kMersenne61), b = r.below(kMersenne61);
    u128 z = static_cast<u128>(a) * b;
    CHECK(f.mul(a, b) == static_cast<u64>(z % kMersenne61));
  }
  CHECK(f.mul(kMersenne61 - 1, kMersenne61 - 1) == 1);
}

TEST_CASE("field inverse and errors") {
  PrimeField f(101);
  for (u64 a = 1; a < 101; ++a) CHECK(f.mul(a, f.inv(a)) == 1);
  CHECK_THROWS_AS(f.inv(0), Error);
  CHECK_THROWS_AS(PrimeField(100), Error);
  CHECK(f.from_signed(-1) == 100);
  CHECK(is_prime_u64(kMersenne61));
  CHECK_FALSE(is_prime_u64(kMersenne61 + 2));
}

TEST_CASE("counter streams are independent of draw order") {
  CounterStream a(9, 3), b(9, 4);
  std::vector<u64> first{a.next(), a.next()};
  CounterStream a2(9, 3), b2(9, 4);
  b2.next();
  CHECK(a2.next() == first[0]);
  CHECK(a2.next() == first[1]);
  CHECK(CounterStream(9, 3, 1).next() != CounterStream(9, 3, 0).next());
}

TEST_CASE("parse a product of two variables") {
  Circuit c = from_text("gate g0 = var x0\ngate g1 = var x1\ngate g2 = mul g0 g1\noutput g2\n");
  CHECK(c.size() == 3);
  CHECK(c.degree() == 2);
  Circuit compact = from_text("gate g0=var 0\ngate g1=var 1\ngate g2=mul g0 g1\noutput g2\n");
  CHECK(compact.size() == 3);
}

TEST_CASE("forward reference is a topological-order error") {
  try {
    from_text("gate g0 = var 0\ngate g2 = mul g0 g3\ngate g3 = var 1\noutput g2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("topological") != std::string::npos);
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(from_text("gate g0 = var 7\noutput g0\n"), ParseError);
  CHECK_THROWS_AS(parse_circuit("gate g0 = var 0\n"), ParseError);
}

TEST_CASE("serialize then parse keeps the gate list") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Circuit c = gen_random_homogeneous_circuit(seed, 4, 6, 50);
    Circuit back = parse_circuit(serialize(c));
    REQUIRE(back.gate_count() == c.gate_count());
    for (GateId g = 0; g < c.gate_count(); ++g) {
      CHECK(back.gate(g).kind == c.gate(g).kind);
      CHECK(back.gate(g).value == c.gate(g).value);
      CHECK(back.gate(g).children == c.gate(g).children);
    }
    CHECK(back.output() == c.output());
    CHECK(serialize(back) == serialize(c));
  }
}

TEST_CASE("evaluation by hand") {
  Circuit c = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1\ngate g3 = const 2\ngate g4 = add g2 g3\noutput g4\n");
  std::vector<u64> pt{3, 4};
  CHECK(evaluate(c, pt) == 14);
  Circuit seven = from_text("gate g0 = const 7\noutput g0\n");
  CHECK(evaluate(seven, pt) == 7);
  Circuit sq = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = add g0 g1\ngate g3 = mul g2 g2\noutput g3\n");
  std::vector<u64> pt2{1, 2};
  CHECK(evaluate(sq, pt2) == 9);
}

TEST_CASE("sparse arithmetic") {
  PrimeField f(101);
  auto x0 = SparsePoly::variable(f, 2, 0), x1 = SparsePoly::variable(f, 2, 1);
  auto twice = x0 * x1 + x0 * x1;
  REQUIRE(twice.size() == 1);
  CHECK(twice.coefficient(Monomial::from_pairs({{0, 1}, {1, 1}})) == 2);
  auto diff = (x0 + x1) * (x0 - x1);
  CHECK(diff == SparsePoly::parse("x0^2 + 100*x1^2", f, 2));
  CHECK(diff.is_homogeneous());
  CHECK((x0 - x0).is_zero());
  CHECK((x0 - x0).degree() == -1);
  CHECK(SparsePoly::parse(diff.to_string(), f, 2) == diff);
}

TEST_CASE("monomial order is graded") {
  auto a = Monomial::var(0, 2), b = Monomial::from_pairs({{0, 1}, {1, 2}});
  CHECK(a < b);
  CHECK_FALSE(b < a);
  CHECK((a * Monomial::var(1)).degree() == 3);
}

TEST_CASE("two evaluators agree on generated circuits") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Circuit c = gen_random_homogeneous_circuit(seed, 4, 6, 60);
    SparsePoly p = expand_to_sparse(c);
    for (std::size_t k = 0; k < 20; ++k) {
      auto pt = pit_point(c.field(), c.num_vars(), seed, k);
      CHECK(evaluate(c, pt) == p.evaluate(pt));
    }
  }
}

TEST_CASE("expansion respects the monomial cap") {
  Circuit c = gen_balanced_product(1, 6, 12);
  CHECK_THROWS_AS(expand_to_sparse(c, 50), CapExceeded);
}

TEST_CASE("homogenize splits components") {
  Circuit c = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1\ngate g3 = add g2 g0\noutput g3\n");
  Homogenized h = homogenize(c);
  REQUIRE(h.components.size() >= 3);
  CHECK_FALSE(h.components[0].has_value());
  REQUIRE(h.components[1].has_value());
  REQUIRE(h.components[2].has_value());
  CHECK(pit_equivalent(c, h.circuit, 32, 1).equal);
  Circuit c1 = homogenize_component(c, 1), c2 = homogenize_component(c, 2);
  PrimeField f(101);
  CHECK(expand_to_sparse(c1) == SparsePoly::variable(f, 2, 0));
  CHECK(expand_to_sparse(c2) == SparsePoly::variable(f, 2, 0) * SparsePoly::variable(f, 2, 1));
}

TEST_CASE("homogenize keeps homogeneous circuits and sums random ones back") {
  Circuit hom = gen_random_homogeneous_formula(3, 4, 6, 50);
  Homogenized h = homogenize(hom);
  CHECK(check_homogeneous(h.circuit));
  CHECK(pit_equivalent(hom, h.circuit, 32, 2).equal);

  // Non-homogeneous: add a lower-degree sum to a homogeneous circuit.
  Circuit mixed = hom;
  GateId x = mixed.add_input(1);
  GateId k = mixed.add_const(5);
  mixed.set_output(mixed.add_add({mixed.output(), mixed.add_mul({x, x}), k}));
  CHECK_FALSE(check_homogeneous(mixed));
  Homogenized hm = homogenize(mixed);
  CHECK(pit_equivalent(mixed, hm.circuit, 32, 3).equal);
  CHECK(expand_to_sparse(hm.circuit) == expand_to_sparse(mixed));
}

TEST_CASE("binarize left-heavy") {
  Circuit c = from_text(
      "gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1 g0\ngate g3 = mul g0 g1\n"
      "gate g4 = mul g0 g2 g3\noutput g4\n");
  Circuit b = binarize_left_heavy(c);
  for (const auto& g : b.gates()) {
    if (g.kind == GateKind::Mul || g.kind == GateKind::Add) {
      REQUIRE(g.children.size() == 2);
      if (g.kind == GateKind::Mul) CHECK(b.gate(g.children[0]).formal_degree >= b.gate(g.children[1]).formal_degree);
    }
  }
  CHECK(pit_equivalent(c, b, 16, 1).equal);

  Circuit bin = from_text("gate g0 = var 0\ngate g1 = var 1\ngate g2 = mul g0 g1\noutput g2\n");
  CHECK(binarize_left_heavy(bin).size() == bin.size());

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Circuit r = gen_random_homogeneous_circuit(seed, 4, 8, 60);
    Circuit rb = binarize_left_heavy(r);
    CHECK(pit_equivalent(r, rb, 16, seed).equal);
  }
}

TEST_CASE("fold constants") {
  Circuit c = from_text(
      "gate g0 = var 0\ngate g1 = const 0\ngate g2 = mul g0 g1\ngate g3 = var 1\ngate g4 = add g2 g3\noutput g4\n");
  Circuit f = fold_constants(c);
  CHECK(f.size() == 1);
  CHECK(pit_equivalent(c, f, 8, 1).equal);
}
