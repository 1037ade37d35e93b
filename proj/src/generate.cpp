#include "chasm/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chasm/analysis.hpp"
#include "chasm/rng.hpp"

namespace chasm {

namespace {

// Each gate decision draws from its own stream, keyed by the order in which
// the generator visits gates.
class Builder {
 public:
  Builder(std::string name, PrimeField field, std::size_t n, std::uint64_t seed, std::uint64_t tag)
      : c(std::move(name), field, n), field_(field), seed_(seed), tag_(tag) {}

  CounterStream stream() { return CounterStream(seed_, next_++, tag_); }

  u64 nonzero(CounterStream& rng) { return 1 + rng.below(field_.modulus() - 1); }

  // Sum of r terms c_i * x_i over distinct variables drawn from vars. With
  // `bare`, each c_i is 1 (and omitted) with probability 1/2.
  GateId linear_form(CounterStream& rng, std::vector<Var> vars, std::size_t r, bool bare = false) {
    r = std::max<std::size_t>(1, std::min(r, vars.size()));
    for (std::size_t i = 0; i < r; ++i) {
      std::size_t j = i + rng.below(vars.size() - i);
      std::swap(vars[i], vars[j]);
    }
    std::sort(vars.begin(), vars.begin() + static_cast<std::ptrdiff_t>(r));
    std::vector<GateId> terms;
    for (std::size_t i = 0; i < r; ++i) {
      if (bare && rng.below(2) == 0) {
        terms.push_back(c.add_input(vars[i]));
        continue;
      }
      GateId k = c.add_const(nonzero(rng));
      terms.push_back(c.add_mul({k, c.add_input(vars[i])}));
    }
    return terms.size() == 1 ? terms[0] : c.add_add(terms);
  }

  Circuit c;

 private:
  PrimeField field_;
  std::uint64_t seed_;
  std::uint64_t tag_;
  std::uint64_t next_ = 0;
};

std::vector<Var> all_vars(std::size_t n) {
  std::vector<Var> v(n);
  std::iota(v.begin(), v.end(), Var{0});
  return v;
}

// Copy of the live part only.
Circuit compact(const Circuit& c) {
  auto live = c.live_mask();
  Circuit out(c.name(), c.field(), c.num_vars());
  std::vector<GateId> map(c.gate_count(), 0);
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    std::vector<GateId> kids;
    for (GateId ch : g.children) kids.push_back(map[ch]);
    switch (g.kind) {
      case GateKind::Input: map[i] = out.add_input(static_cast<Var>(g.value)); break;
      case GateKind::Const: map[i] = out.add_const(g.value); break;
      case GateKind::Add: map[i] = out.add_add(std::move(kids)); break;
      case GateKind::Mul: map[i] = out.add_mul(std::move(kids)); break;
    }
  }
  out.set_output(map[c.output()]);
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError("infeasible generator parameters: " + what);
}

}  // namespace

Circuit gen_random_homogeneous_formula(std::uint64_t seed, std::size_t n, int d, std::size_t s, PrimeField field) {
  require(n >= 1 && d >= 1, "need n >= 1 and d >= 1");
  require(s >= static_cast<std::size_t>(2 * d - 1), "size budget below 2d-1");
  Builder b("random_formula", field, n, seed, 0x11);
  const auto vars = all_vars(n);
  std::function<GateId(int, std::size_t)> build = [&](int k, std::size_t budget) -> GateId {
    auto rng = b.stream();
    // The right child gets whatever the left one left unused.
    auto pair = [&](int kl, std::size_t bl, int kr, std::size_t total) {
      const std::size_t before = b.c.gate_count();
      GateId l = build(kl, bl);
      GateId r = build(kr, total - (b.c.gate_count() - before));
      return std::pair{l, r};
    };
    if (k == 1 && budget >= 14 && rng.below(2) == 0) {
      auto [l, r] = pair(1, 7 + rng.below(budget - 13), 1, budget - 1);
      return b.c.add_add({l, r});
    }
    if (k == 1) {
      if (budget < 3) return b.c.add_input(vars[rng.below(n)]);
      std::size_t max_r = budget >= 7 ? std::min<std::size_t>(3, (budget - 1) / 3) : 1;
      return b.linear_form(rng, vars, 1 + rng.below(max_r), true);
    }
    const std::size_t least = static_cast<std::size_t>(2 * k - 1);
    const std::size_t rem = budget - 1;
    if (budget >= 2 * least + 1 && rng.below(100) < (budget >= 4 * least ? 60u : 30u)) {
      auto [l, r] = pair(k, least + rng.below(rem - 2 * least + 1), k, rem);
      return b.c.add_add({l, r});
    }
    int a = rng.range(1, k - 1);
    std::size_t lo = static_cast<std::size_t>(2 * a - 1);
    std::size_t hi = rem - static_cast<std::size_t>(2 * (k - a) - 1);
    std::size_t b1 = std::clamp<std::size_t>(rem * static_cast<std::size_t>(a) / static_cast<std::size_t>(k), lo, hi);
    auto [l, r] = pair(a, b1, k - a, rem);
    return b.c.add_mul({l, r});
  };
  b.c.set_output(build(d, s));
  return b.c;
}

Circuit gen_random_homogeneous_circuit(std::uint64_t seed, std::size_t n, int d, std::size_t s, PrimeField field) {
  require(n >= 1 && d >= 1, "need n >= 1 and d >= 1");
  require(s >= static_cast<std::size_t>(2 * d - 1), "size budget below 2d-1");
  Builder b("random_circuit", field, n, seed, 0x22);
  const auto vars = all_vars(n);
  // Top-down like the formula generator, but a gate of the wanted degree that
  // already exists is reused (for free) with some probability.
  std::vector<std::vector<GateId>> made(static_cast<std::size_t>(d) + 1);
  std::function<GateId(int, std::size_t)> build = [&](int k, std::size_t budget) -> GateId {
    auto rng = b.stream();
    auto& pool = made[static_cast<std::size_t>(k)];
    if (!pool.empty() && rng.below(100) < 20) return pool[rng.below(pool.size())];
    // Reused gates cost nothing, so the right child inherits the savings.
    auto pair = [&](int kl, std::size_t bl, int kr, std::size_t total) {
      const std::size_t before = b.c.gate_count();
      GateId l = build(kl, bl);
      GateId r = build(kr, total - (b.c.gate_count() - before));
      return std::pair{l, r};
    };
    GateId g;
    if (k == 1 && budget >= 14 && rng.below(2) == 0) {
      auto [l, r] = pair(1, 7 + rng.below(budget - 13), 1, budget - 1);
      g = l == r ? l : b.c.add_add({l, r});
    } else if (k == 1) {
      if (budget < 3) {
        g = b.c.add_input(vars[rng.below(n)]);
      } else {
        std::size_t max_r = budget >= 7 ? std::min<std::size_t>(3, (budget - 1) / 3) : 1;
        g = b.linear_form(rng, vars, 1 + rng.below(max_r), true);
      }
    } else {
      const std::size_t least = static_cast<std::size_t>(2 * k - 1);
      const std::size_t rem = budget - 1;
      if (budget >= 2 * least + 1 && rng.below(100) < (budget >= 4 * least ? 60u : 30u)) {
        auto [l, r] = pair(k, least + rng.below(rem - 2 * least + 1), k, rem);
        g = l == r ? l : b.c.add_add({l, r});
      } else {
        int a = rng.range(1, k - 1);
        std::size_t lo = static_cast<std::size_t>(2 * a - 1);
        std::size_t hi = rem - static_cast<std::size_t>(2 * (k - a) - 1);
        std::size_t b1 =
            std::clamp<std::size_t>(rem * static_cast<std::size_t>(a) / static_cast<std::size_t>(k), lo, hi);
        auto [l, r] = pair(a, b1, k - a, rem);
        g = b.c.add_mul({l, r});
      }
    }
    pool.push_back(g);
    return g;
  };
  b.c.set_output(build(d, s));
  return compact(b.c);
}

Circuit gen_balanced_product(std::uint64_t seed, std::size_t n, int d, PrimeField field) {
  require(n >= 1 && d >= 1, "need n >= 1 and d >= 1");
  Builder b("balanced_product", field, n, seed, 0x33);
  const auto vars = all_vars(n);
  std::vector<GateId> level;
  for (int i = 0; i < d; ++i) {
    auto r = b.stream();
    level.push_back(b.linear_form(r, vars, 2));
  }
  std::function<GateId(std::size_t, std::size_t)> tree = [&](std::size_t lo, std::size_t hi) -> GateId {
    if (hi - lo == 1) return level[lo];
    std::size_t mid = lo + (hi - lo + 1) / 2;
    GateId l = tree(lo, mid);
    GateId r = tree(mid, hi);
    return b.c.add_mul({l, r});
  };
  b.c.set_output(tree(0, level.size()));
  return b.c;
}

Circuit gen_shallow(std::uint64_t seed, std::size_t n, int d, int delta, PrimeField field) {
  require(n >= 1 && d >= 2 && delta >= 1, "need n >= 1, d >= 2, delta >= 1");
  Builder b("shallow", field, n, seed, 0x44);
  const auto vars = all_vars(n);
  std::function<GateId(int, int)> build = [&](int k, int dl) -> GateId {
    auto rng = b.stream();
    if (k == 1) return b.linear_form(rng, vars, 1 + rng.below(2));
    if (dl == 1) {
      std::vector<GateId> kids;
      for (int i = 0; i < k; ++i) {
        auto r = b.stream();
        kids.push_back(b.linear_form(r, vars, 1 + r.below(2)));
      }
      return b.c.add_mul(std::move(kids));
    }
    int q = static_cast<int>(std::ceil(std::pow(static_cast<double>(k), 1.0 / dl) - 1e-9));
    q = std::clamp(q, 2, k);
    std::vector<GateId> kids;
    for (int i = 0; i < q; ++i) {
      int part = k / q + (i < k % q ? 1 : 0);
      int terms = 1 + static_cast<int>(rng.below(2));
      std::vector<GateId> sum;
      for (int j = 0; j < terms; ++j) sum.push_back(build(part, dl - 1));
      kids.push_back(sum.size() == 1 ? sum[0] : b.c.add_add(std::move(sum)));
    }
    return b.c.add_mul(std::move(kids));
  };
  auto rng = b.stream();
  int terms = 1 + static_cast<int>(rng.below(2));
  std::vector<GateId> top;
  for (int j = 0; j < terms; ++j) top.push_back(build(d, delta));
  b.c.set_output(top.size() == 1 ? top[0] : b.c.add_add(std::move(top)));
  require(product_depth(b.c) == delta, "degree " + std::to_string(d) + " cannot reach product depth " +
                                           std::to_string(delta));
  return b.c;
}

Partition imm_partition(std::size_t width, int d) {
  return Partition::uniform(static_cast<std::size_t>(d), width * width);
}

Circuit gen_imm(std::size_t width, int d, PrimeField field) {
  require(width >= 1 && d >= 1, "need width >= 1 and d >= 1");
  const std::size_t w = width;
  Circuit c("imm", field, w * w * static_cast<std::size_t>(d));
  auto x = [&](int j, std::size_t a, std::size_t b) {
    return c.add_input(static_cast<Var>(static_cast<std::size_t>(j) * w * w + a * w + b));
  };
  // F(j, i) = sum_k x^(j)_{i,k} F(j+1, k);  F(d-1, i) = x^(d-1)_{i,0}.
  std::function<GateId(int, std::size_t)> entry = [&](int j, std::size_t i) -> GateId {
    if (j == d - 1) return x(j, i, 0);
    std::vector<GateId> terms;
    for (std::size_t k = 0; k < w; ++k) {
      GateId head = x(j, i, k);
      GateId tail = entry(j + 1, k);
      terms.push_back(c.add_mul({head, tail}));
    }
    return terms.size() == 1 ? terms[0] : c.add_add(std::move(terms));
  };
  c.set_output(entry(0, 0));
  return c;
}

Circuit gen_random_sml_formula(std::uint64_t seed, std::size_t n, int d, std::size_t s, PrimeField field) {
  require(n >= 1 && d >= 1, "need n >= 1 and d >= 1");
  require(s >= static_cast<std::size_t>(2 * d - 1), "size budget below 2d-1");
  const Partition part = Partition::uniform(static_cast<std::size_t>(d), n);
  Builder b("random_sml", field, n * static_cast<std::size_t>(d), seed, 0x55);
  std::function<GateId(std::vector<std::size_t>, std::size_t)> build = [&](std::vector<std::size_t> blocks,
                                                                           std::size_t budget) -> GateId {
    auto rng = b.stream();
    const std::size_t k = blocks.size();
    if (k == 1) {
      const auto& vars = part.block(blocks[0]);
      if (budget < 3) return b.c.add_input(vars[rng.below(vars.size())]);
      std::size_t max_r = budget >= 7 ? 2 : 1;
      return b.linear_form(rng, vars, 1 + rng.below(max_r));
    }
    const std::size_t least = 2 * k - 1;
    const std::size_t rem = budget - 1;
    if (budget >= 2 * least + 1 && rng.below(100) < 30) {
      std::size_t b1 = least + rng.below(rem - 2 * least + 1);
      GateId l = build(blocks, b1);
      GateId r = build(blocks, rem - b1);
      return b.c.add_add({l, r});
    }
    for (std::size_t i = 0; i + 1 < k; ++i) std::swap(blocks[i], blocks[i + rng.below(k - i)]);
    std::size_t a = 1 + rng.below(k - 1);
    std::vector<std::size_t> left(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(a));
    std::vector<std::size_t> right(blocks.begin() + static_cast<std::ptrdiff_t>(a), blocks.end());
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    std::size_t lo = 2 * a - 1, hi = rem - (2 * (k - a) - 1);
    std::size_t b1 = std::clamp<std::size_t>(rem * a / k, lo, hi);
    GateId l = build(left, b1);
    GateId r = build(right, rem - b1);
    return b.c.add_mul({l, r});
  };
  std::vector<std::size_t> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), std::size_t{0});
  b.c.set_output(build(all, s));
  return b.c;
}

Tensor gen_random_tensor(std::uint64_t seed, const std::vector<std::size_t>& shape, PrimeField field) {
  require(!shape.empty(), "empty shape");
  for (auto k : shape) require(k >= 1, "zero-length mode");
  Tensor t(field, Partition::consecutive(shape));
  const std::size_t d = shape.size();
  TensorIndex idx(d, 0);
  std::uint64_t cell = 0;
  for (;;) {
    CounterStream rng(seed, cell++, 0x7e);
    t.set(idx, rng.below(field.modulus()));
    std::size_t j = d;
    while (j > 0 && ++idx[j - 1] == shape[j - 1]) idx[--j] = 0;
    if (j == 0) break;
  }
  return t;
}

Circuit generate_circuit(const GeneratorParams& p) {
  const PrimeField field(p.p);
  const std::string& f = p.family;
  if (f == "random-homogeneous-formula") {
    return p.dag ? gen_random_homogeneous_circuit(p.seed, p.n, p.d, p.s, field)
                 : gen_random_homogeneous_formula(p.seed, p.n, p.d, p.s, field);
  }
  if (f == "balanced-product") return gen_balanced_product(p.seed, p.n, p.d, field);
  if (f == "shallow" || f.rfind("shallow-", 0) == 0) return gen_shallow(p.seed, p.n, p.d, p.delta, field);
  if (f == "imm") return gen_imm(p.width, p.d, field);
  if (f == "random-sml-formula") return gen_random_sml_formula(p.seed, p.n, p.d, p.s, field);
  throw PreconditionError("unknown circuit family '" + f + "'");
}

}  // namespace chasm
