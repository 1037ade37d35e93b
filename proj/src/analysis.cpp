#include "chasm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "chasm/rng.hpp"

namespace chasm {

CheckResult check_homogeneous(const Circuit& c, bool deep, std::size_t monomial_cap) {
  auto live = c.live_mask();
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gate(static_cast<GateId>(i));
    if (!live[i] || g.kind != GateKind::Add) continue;
    for (GateId ch : g.children) {
      if (c.gate(ch).formal_degree != g.formal_degree) {
        return {false, static_cast<GateId>(i), std::nullopt,
                "add gate g" + std::to_string(i) + " mixes children of formal degree " +
                    std::to_string(c.gate(ch).formal_degree) + " and " + std::to_string(g.formal_degree)};
      }
    }
  }
  if (deep) {
    auto polys = expand_all_gates(c, monomial_cap);
    for (std::size_t i = 0; i < c.gate_count(); ++i) {
      if (!live[i]) continue;
      const auto& p = polys[i];
      if (p.is_zero()) continue;
      if (!p.is_homogeneous() || p.degree() != c.gate(static_cast<GateId>(i)).formal_degree) {
        return {false, static_cast<GateId>(i), std::nullopt,
                "gate g" + std::to_string(i) + " does not compute a homogeneous polynomial of its formal degree"};
      }
    }
  }
  return {};
}

std::vector<int> formal_degrees(const Circuit& c) {
  std::vector<int> d;
  d.reserve(c.gate_count());
  for (const Gate& g : c.gates()) d.push_back(g.formal_degree);
  return d;
}

int product_depth(const Formula& f) {
  const Circuit& c = f.circuit();
  std::vector<int> pd(c.gate_count(), 0);
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gate(static_cast<GateId>(i));
    int m = 0;
    for (GateId ch : g.children) m = std::max(m, pd[ch]);
    pd[i] = m + ((g.kind == GateKind::Mul && !is_scalar_mul(c, static_cast<GateId>(i))) ? 1 : 0);
  }
  return pd[c.output()];
}

int product_depth(const Circuit& c) { return product_depth(Formula(c)); }

CheckResult check_set_multilinear(const SparsePoly& f, const Partition& part) {
  const std::size_t d = part.num_blocks();
  for (const auto& [m, coeff] : f.terms()) {
    std::vector<int> hits(d, 0);
    bool ok = m.degree() == d;
    for (const auto& [v, e] : m.pairs()) {
      auto loc = part.locate(v);
      if (!loc) throw PreconditionError("variable x" + std::to_string(v) + " lies outside the partition");
      hits[loc->first] += static_cast<int>(e);
      if (e != 1) ok = false;
    }
    for (int h : hits) ok = ok && h == 1;
    if (!ok) return {false, std::nullopt, m, "monomial " + m.to_string() + " is not set-multilinear"};
  }
  return {};
}

CheckResult check_set_multilinear(const Circuit& c, const Partition& part, std::size_t monomial_cap) {
  return check_set_multilinear(expand_to_sparse(c, monomial_cap), part);
}

CheckResult check_syntactic_set_multilinear(const Circuit& c, const Partition& part) {
  auto live = c.live_mask();
  std::vector<std::set<std::size_t>> blocks(c.gate_count());
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    auto fail = [&](const std::string& why) {
      return CheckResult{false, static_cast<GateId>(i), std::nullopt, "gate g" + std::to_string(i) + ": " + why};
    };
    switch (g.kind) {
      case GateKind::Input: {
        auto loc = part.locate(static_cast<Var>(g.value));
        if (!loc) throw PreconditionError("variable x" + std::to_string(g.value) + " lies outside the partition");
        blocks[i] = {loc->first};
        break;
      }
      case GateKind::Const: break;
      case GateKind::Add:
        blocks[i] = blocks[g.children[0]];
        for (GateId ch : g.children) {
          if (blocks[ch] != blocks[i]) return fail("add children cover different block sets");
        }
        break;
      case GateKind::Mul:
        for (GateId ch : g.children) {
          for (std::size_t b : blocks[ch]) {
            if (!blocks[i].insert(b).second) return fail("mul children share block " + std::to_string(b));
          }
        }
        break;
    }
  }
  if (blocks[c.output()].size() != part.num_blocks()) {
    return {false, c.output(), std::nullopt, "output does not cover every block"};
  }
  return {};
}

// ---------------------------------------------------------------------------

Evaluable Evaluable::of(const Circuit& c) {
  return {c.field(), c.num_vars(), std::max(0, c.degree()), [&c](std::span<const u64> x) { return evaluate(c, x); }};
}

Evaluable Evaluable::of(const DepthFourCircuit& d4) {
  int deg = 0;
  for (const auto& s : d4.summands()) deg = std::max(deg, s.degree());
  return {d4.field(), d4.num_vars(), deg, [&d4](std::span<const u64> x) { return d4.evaluate(x); }};
}

Evaluable Evaluable::of(const SparsePoly& p) {
  return {p.field(), p.num_vars(), std::max(0, p.degree()), [&p](std::span<const u64> x) {
            if (x.size() < p.num_vars()) throw PreconditionError("point arity does not match polynomial");
            return p.evaluate(x);
          }};
}

Evaluable Evaluable::of(Circuit&& c) {
  auto own = std::make_shared<const Circuit>(std::move(c));
  Evaluable e = of(*own);
  e.eval = [own](std::span<const u64> x) { return evaluate(*own, x); };
  return e;
}

Evaluable Evaluable::of(DepthFourCircuit&& d4) {
  auto own = std::make_shared<const DepthFourCircuit>(std::move(d4));
  Evaluable e = of(*own);
  e.eval = [own](std::span<const u64> x) { return own->evaluate(x); };
  return e;
}

Evaluable Evaluable::of(SparsePoly&& p) {
  auto own = std::make_shared<const SparsePoly>(std::move(p));
  Evaluable e = of(*own);
  auto inner = std::move(e.eval);
  e.eval = [own, inner](std::span<const u64> x) { return inner(x); };
  return e;
}

std::vector<u64> pit_point(const PrimeField& field, std::size_t num_vars, std::uint64_t seed, std::size_t trial) {
  CounterStream rng(seed, trial, 0x51);
  std::vector<u64> pt(num_vars);
  for (auto& x : pt) x = rng.below(field.modulus());
  return pt;
}

PitVerdict pit_equivalent(const Evaluable& a, const Evaluable& b, std::size_t trials, std::uint64_t seed) {
  if (a.num_vars != b.num_vars) {
    throw PreconditionError("arity mismatch: " + std::to_string(a.num_vars) + " vs " + std::to_string(b.num_vars) +
                            " variables");
  }
  if (!(a.field == b.field)) throw PreconditionError("field mismatch");
  PitVerdict v;
  const double p = static_cast<double>(a.field.modulus());
  const double d = std::max({1, a.degree, b.degree});
  v.failure_bound_log2 = static_cast<double>(trials) * (std::log2(d) - std::log2(p));
  v.failure_bound = std::exp2(v.failure_bound_log2);
  for (std::size_t k = 0; k < trials; ++k) {
    auto pt = pit_point(a.field, a.num_vars, seed, k);
    u64 va = a.eval(pt);
    u64 vb = b.eval(pt);
    ++v.trials;
    if (va != vb) {
      // Re-evaluate so the recorded witness is confirmed, not just observed once.
      if (a.eval(pt) != va || b.eval(pt) != vb) throw Error("non-deterministic evaluation during PIT");
      v.equal = false;
      v.witness = std::move(pt);
      v.value_a = va;
      v.value_b = vb;
      return v;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------

double bad_threshold_divisor(const std::string& pass_name) { return pass_name == "general" ? 8.0 : 9.0; }

bool ReductionReport::top_fanin_within_bound() const {
  if (top_fanin == 0) return true;
  return std::log2(static_cast<double>(top_fanin)) <= bound_top_fanin_log2 + 1e-9;
}

ReductionReport structure_report(const DepthFourCircuit& d4, const PassMeta& meta) {
  ReductionReport r;
  r.input_size = meta.input_size;
  r.num_vars = d4.num_vars();
  r.degree = meta.degree ? meta.degree : d4.d();
  r.cut = meta.cut ? meta.cut : d4.t();
  r.top_fanin = d4.top_fanin();
  r.iteration_count = meta.iteration_count;
  r.pass_name = meta.pass_name;
  r.seed = meta.seed;
  r.extras = meta.extras;

  const double threshold = r.cut / bad_threshold_divisor(meta.pass_name);
  bool first = true;
  for (const auto& s : d4.summands()) {
    std::size_t k = s.factors.size();
    std::size_t bad = 0;
    for (const auto& f : s.factors) {
      r.max_bottom_degree = std::max(r.max_bottom_degree, f.degree());
      if (f.degree() > threshold) ++bad;
    }
    if (r.bad_term_histogram.size() <= bad) r.bad_term_histogram.resize(bad + 1, 0);
    ++r.bad_term_histogram[bad];
    r.min_factor_count = first ? k : std::min(r.min_factor_count, k);
    r.max_factor_count = std::max(r.max_factor_count, k);
    first = false;
  }

  const double s = std::max<double>(2.0, static_cast<double>(meta.input_size));
  const double d = r.degree;
  const double t = std::max(1, r.cut);
  const double exponent = meta.top_fanin_exponent * d / t + meta.top_fanin_offset;
  r.bound_top_fanin_log2 = exponent * std::log2(s);
  r.bound_top_fanin = std::exp2(r.bound_top_fanin_log2);
  r.bound_a = 0.1 * (d / t) * std::log2(t);
  return r;
}

nlohmann::json ReductionReport::to_json() const {
  nlohmann::json j;
  j["input_size"] = input_size;
  j["num_vars"] = num_vars;
  j["degree"] = degree;
  j["cut"] = cut;
  j["top_fanin"] = top_fanin;
  j["min_factor_count"] = min_factor_count;
  j["max_factor_count"] = max_factor_count;
  j["max_bottom_degree"] = max_bottom_degree;
  j["iteration_count"] = iteration_count;
  j["bad_term_histogram"] = bad_term_histogram;
  if (std::isfinite(bound_top_fanin)) {
    j["bound_top_fanin"] = bound_top_fanin;
  } else {
    j["bound_top_fanin"] = nullptr;
  }
  j["bound_top_fanin_log2"] = bound_top_fanin_log2;
  j["bound_a"] = bound_a;
  j["pass_name"] = pass_name;
  j["seed"] = seed;
  j["extras"] = extras;
  return j;
}

std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace chasm
