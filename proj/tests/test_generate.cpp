#include <doctest.h>

#include "chasm/analysis.hpp"
#include "chasm/generate.hpp"

using namespace chasm;

TEST_CASE("balanced product family") {
  Circuit a = gen_balanced_product(7, 4, 8);
  Circuit b = gen_balanced_product(7, 4, 8);
  CHECK(serialize(a) == serialize(b));
  CHECK(a.degree() == 8);
  CHECK(product_depth(Formula(a)) == 3);
  CHECK(check_homogeneous(a, true));
  CHECK(serialize(gen_balanced_product(8, 4, 8)) != serialize(a));
}

TEST_CASE("random homogeneous formulas") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Circuit c = gen_random_homogeneous_formula(seed, 4, 12, 80);
    CHECK(c.degree() == 12);
    CHECK(c.is_tree());
    CHECK(c.size() <= 80);
    CHECK(check_homogeneous(c));
    CHECK(expand_to_sparse(c).degree() <= 12);
  }
}

TEST_CASE("random homogeneous circuits share gates") {
  std::size_t shared = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Circuit c = gen_random_homogeneous_circuit(seed, 4, 10, 70);
    CHECK(c.degree() == 10);
    CHECK(check_homogeneous(c));
    if (!c.is_tree()) ++shared;
  }
  CHECK(shared > 0);
}

TEST_CASE("shallow family has the requested product depth") {
  for (int delta : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Circuit c = gen_shallow(seed, 4, 16, delta);
      CHECK(product_depth(Formula(c)) == delta);
      CHECK(c.degree() == 16);
      CHECK(check_homogeneous(c));
    }
  }
}

TEST_CASE("imm family") {
  Circuit c = gen_imm(2, 3);
  Partition part = imm_partition(2, 3);
  CHECK(part.num_blocks() == 3);
  CHECK(c.num_vars() == 12);
  CHECK(check_set_multilinear(c, part));
  // (1,1) entry of a product of three 2x2 matrices has 2^2 monomials.
  CHECK(expand_to_sparse(c).size() == 4);
}

TEST_CASE("random set-multilinear formulas") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Circuit c = gen_random_sml_formula(seed, 2, 4, 40);
    CHECK(check_syntactic_set_multilinear(c, Partition::uniform(4, 2)));
  }
}

TEST_CASE("random tensors are dense and reproducible") {
  Tensor a = gen_random_tensor(3, {3, 3, 3}, PrimeField(101));
  CHECK(a == gen_random_tensor(3, {3, 3, 3}, PrimeField(101)));
  CHECK(a.coeffs().size() >= 20);
}

TEST_CASE("dispatch") {
  GeneratorParams p;
  p.family = "balanced-product";
  p.seed = 7;
  p.d = 8;
  CHECK(serialize(generate_circuit(p)) == serialize(gen_balanced_product(7, 4, 8)));
  p.family = "random-tensor";
  CHECK_THROWS_AS(generate_circuit(p), PreconditionError);
  p.family = "bogus";
  CHECK_THROWS_AS(generate_circuit(p), PreconditionError);
  p.family = "random-homogeneous-formula";
  p.dag = true;
  p.d = 6;
  CHECK(check_homogeneous(generate_circuit(p)));
}
