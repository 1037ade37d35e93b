#include "chasm/ftree.hpp"

#include <algorithm>
#include <functional>

namespace chasm {

FRef fnode_input(Var v) {
  auto n = std::make_shared<FNode>();
  n->kind = GateKind::Input;
  n->value = v;
  n->degree = 1;
  return n;
}

FRef fnode_const(u64 c) {
  auto n = std::make_shared<FNode>();
  n->kind = GateKind::Const;
  n->value = c;
  return n;
}

FRef fnode_add(std::vector<FRef> children) {
  if (children.empty()) throw PreconditionError("empty sum node");
  if (children.size() == 1) return children[0];
  auto n = std::make_shared<FNode>();
  n->kind = GateKind::Add;
  for (const auto& c : children) {
    n->degree = std::max(n->degree, c->degree);
    n->size += c->size;
  }
  n->children = std::move(children);
  return n;
}

FRef fnode_mul(std::vector<FRef> children) {
  if (children.empty()) return fnode_const(1);
  if (children.size() == 1) return children[0];
  auto n = std::make_shared<FNode>();
  n->kind = GateKind::Mul;
  for (const auto& c : children) {
    n->degree += c->degree;
    n->size += c->size;
  }
  n->children = std::move(children);
  return n;
}

std::vector<FRef> ftree_all_gates(const Circuit& c) {
  std::vector<FRef> t(c.gate_count());
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gate(static_cast<GateId>(i));
    std::vector<FRef> kids;
    for (GateId ch : g.children) kids.push_back(t[ch]);
    switch (g.kind) {
      case GateKind::Input: t[i] = fnode_input(static_cast<Var>(g.value)); break;
      case GateKind::Const: t[i] = fnode_const(g.value); break;
      case GateKind::Add: t[i] = fnode_add(std::move(kids)); break;
      case GateKind::Mul: t[i] = fnode_mul(std::move(kids)); break;
    }
  }
  return t;
}

FRef ftree_of(const Formula& f) { return ftree_all_gates(f.circuit())[f.circuit().output()]; }

Circuit circuit_of(const FRef& f, PrimeField field, std::size_t num_vars, const std::string& name) {
  Circuit c(name, field, num_vars);
  std::function<GateId(const FRef&)> lay = [&](const FRef& x) -> GateId {
    switch (x->kind) {
      case GateKind::Input: return c.add_input(static_cast<Var>(x->value));
      case GateKind::Const: return c.add_const(x->value);
      default: break;
    }
    std::vector<GateId> kids;
    for (const auto& ch : x->children) kids.push_back(lay(ch));
    return x->kind == GateKind::Add ? c.add_add(std::move(kids)) : c.add_mul(std::move(kids));
  };
  c.set_output(lay(f));
  return c;
}

int ftree_product_depth(const FRef& f) {
  int m = 0;
  std::size_t nonconst = 0;
  for (const auto& c : f->children) {
    m = std::max(m, ftree_product_depth(c));
    if (c->degree > 0) ++nonconst;
  }
  return m + ((f->kind == GateKind::Mul && nonconst >= 2) ? 1 : 0);
}

bool ftree_homogeneous(const FRef& f) {
  for (const auto& c : f->children) {
    if (f->kind == GateKind::Add && c->degree != f->degree) return false;
    if (!ftree_homogeneous(c)) return false;
  }
  return true;
}

std::size_t ftree_max_mul_fanin(const FRef& f) {
  std::size_t best = 0, nonconst = 0;
  for (const auto& c : f->children) {
    best = std::max(best, ftree_max_mul_fanin(c));
    if (c->degree > 0) ++nonconst;
  }
  if (f->kind == GateKind::Mul) best = std::max(best, nonconst);
  return best;
}

const SparsePoly& FTreeEval::expand(const FRef& f) {
  auto it = polys_.find(f.get());
  if (it != polys_.end()) return it->second;
  SparsePoly p(field_, n_);
  switch (f->kind) {
    case GateKind::Input: p = SparsePoly::variable(field_, n_, static_cast<Var>(f->value)); break;
    case GateKind::Const: p = SparsePoly::constant(field_, n_, f->value); break;
    case GateKind::Add:
      for (const auto& c : f->children) p = p + expand(c);
      break;
    case GateKind::Mul:
      p = SparsePoly::constant(field_, n_, 1);
      for (const auto& c : f->children) p = p.mul_capped(expand(c), cap_);
      break;
  }
  if (p.size() > cap_) throw CapExceeded("monomial cap exceeded while expanding a formula");
  keep_.push_back(f);  // pins the pointer used as key
  return polys_.emplace(f.get(), std::move(p)).first->second;
}

u64 FTreeEval::evaluate(const FRef& f, std::span<const u64> point) {
  std::unordered_map<const FNode*, u64> memo;
  std::function<u64(const FRef&)> ev = [&](const FRef& x) -> u64 {
    auto it = memo.find(x.get());
    if (it != memo.end()) return it->second;
    u64 r = 0;
    switch (x->kind) {
      case GateKind::Input: r = point[x->value]; break;
      case GateKind::Const: r = x->value; break;
      case GateKind::Add:
        for (const auto& c : x->children) r = field_.add(r, ev(c));
        break;
      case GateKind::Mul:
        r = 1;
        for (const auto& c : x->children) r = field_.mul(r, ev(c));
        break;
    }
    memo.emplace(x.get(), r);
    return r;
  };
  return ev(f);
}

}  // namespace chasm
