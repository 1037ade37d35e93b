#include "chasm/vsbr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "chasm/analysis.hpp"

namespace chasm {

std::string ReducedNode::label() const {
  if (v == kNoGate) return "[g" + std::to_string(u) + "]";
  return "[g" + std::to_string(u) + ":g" + std::to_string(v) + "]";
}

std::optional<NodeId> ReducedCircuit::find(GateId u, GateId v) const {
  auto it = index_.find({u, v});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string ReducedCircuit::serialize() const {
  GateAnnotations notes;
  for (const auto& [key, gate] : quotient_gates_) {
    notes[gate].push_back("quotient " + std::to_string(key.first) + " " + std::to_string(key.second));
  }
  return chasm::serialize(circuit_, notes);
}

class ReducedCircuitBuilder {
 public:
  explicit ReducedCircuitBuilder(const Circuit& c) : base_(c), field_(c.field()), n_(c.num_vars()) {
    reach_.resize(c.gate_count());
    for (std::size_t i = 0; i < c.gate_count(); ++i) {
      const Gate& g = c.gate(static_cast<GateId>(i));
      auto& r = reach_[i];
      r.assign(c.gate_count(), 0);
      r[i] = 1;
      if (g.kind == GateKind::Add) {
        for (GateId ch : g.children) merge(r, reach_[ch]);
      } else if (g.kind == GateKind::Mul) {
        merge(r, reach_[g.children[0]]);
      }
    }
  }

  ReducedCircuit build() {
    ReducedCircuit rc;
    rc.base_ = base_;
    rc.circuit_ = Circuit(base_.name() + "_vsbr", field_, n_);
    out_ = &rc;
    NodeId root = node_for(base_.output(), kNoGate);
    GateId g = materialize(root);
    rc.circuit_.set_output(g);
    rc.output_ = root;
    return rc;
  }

 private:
  static void merge(std::vector<char>& into, const std::vector<char>& from) {
    for (std::size_t k = 0; k < into.size(); ++k) into[k] |= from[k];
  }

  int deg(GateId g) const { return base_.gate(g).formal_degree; }
  GateId left(GateId w) const { return base_.gate(w).children.at(0); }
  GateId right(GateId w) const { return base_.gate(w).children.at(1); }

  const std::vector<GateId>& frontier(GateId u, int m) {
    auto key = std::make_pair(u, m);
    auto it = out_->frontier_cache_.find(key);
    if (it != out_->frontier_cache_.end()) return it->second;
    std::vector<GateId> f;
    for (std::size_t w = 0; w < base_.gate_count(); ++w) {
      if (!reach_[u][w]) continue;
      const Gate& g = base_.gate(static_cast<GateId>(w));
      if (g.kind == GateKind::Mul && g.formal_degree > m && deg(g.children[0]) <= m) {
        f.push_back(static_cast<GateId>(w));
      }
    }
    return out_->frontier_cache_.emplace(key, std::move(f)).first->second;
  }

  // Linear form (coefficients of x_0..x_{n-1}, then constant) of [u] or [u:v]
  // when its degree is at most one, straight from the recursive definition.
  const std::vector<u64>& low(GateId u, GateId v) {
    auto key = std::make_pair(u, v);
    auto it = low_.find(key);
    if (it != low_.end()) return it->second;
    std::vector<u64> r(n_ + 1, 0);
    const Gate& g = base_.gate(u);
    if (v != kNoGate && u == v) {
      r[n_] = 1;
    } else if (v != kNoGate && (deg(u) < deg(v) || !reach_[u][v])) {
      // zero
    } else {
      switch (g.kind) {
        case GateKind::Input:
          if (v == kNoGate) r[g.value] = 1;
          break;
        case GateKind::Const:
          if (v == kNoGate) r[n_] = g.value;
          break;
        case GateKind::Add:
          for (GateId ch : g.children) {
            const auto& c = low(ch, v);
            for (std::size_t k = 0; k <= n_; ++k) r[k] = field_.add(r[k], c[k]);
          }
          break;
        case GateKind::Mul: {
          // Homogeneous of degree <= 1: one operand is a constant.
          std::vector<u64> a = low(g.children[0], v);
          const auto& b = low(g.children[1], kNoGate);
          bool a_const = std::all_of(a.begin(), a.end() - 1, [](u64 x) { return x == 0; });
          if (a_const) {
            for (std::size_t k = 0; k <= n_; ++k) r[k] = field_.mul(a[n_], b[k]);
          } else {
            for (std::size_t k = 0; k <= n_; ++k) r[k] = field_.mul(a[k], b[n_]);
          }
          break;
        }
      }
    }
    return low_.emplace(key, std::move(r)).first->second;
  }

  NodeId node_for(GateId u, GateId v) {
    auto key = std::make_pair(u, v);
    auto it = out_->index_.find(key);
    if (it != out_->index_.end()) return it->second;

    ReducedNode node;
    node.u = u;
    node.v = v;
    node.degree = deg(u) - (v == kNoGate ? 0 : deg(v));
    if (node.degree <= 1) {
      node.linear_form = low(u, v);
      node.zero = std::all_of(node.linear_form.begin(), node.linear_form.end(), [](u64 x) { return x == 0; });
      NodeId id = static_cast<NodeId>(out_->nodes_.size());
      out_->nodes_.push_back(std::move(node));
      out_->index_.emplace(key, id);
      return id;
    }

    NodeId id = static_cast<NodeId>(out_->nodes_.size());
    out_->nodes_.push_back(node);
    out_->index_.emplace(key, id);
    auto rows = v == kNoGate ? expand_base(u) : expand_quotient(u, v);
    auto& stored = out_->nodes_[id];
    stored.rows = std::move(rows);
    stored.zero = stored.rows.empty();
    return id;
  }

  // Degree-0 nodes fold into the row coefficient; zero nodes kill the row.
  bool push_entry(ExpansionRow& row, GateId u, GateId v) {
    int d = deg(u) - (v == kNoGate ? 0 : deg(v));
    if (d == 0) {
      row.coeff = field_.mul(row.coeff, low(u, v)[n_]);
      return row.coeff != 0;
    }
    NodeId e = node_for(u, v);
    if (out_->nodes_[e].zero) return false;
    row.entries.push_back(e);
    return true;
  }

  // [u] = sum_{w in F_m(u)} [u:w] [w_L] [w_R] with m = floor(deg(u)/2).
  std::vector<ExpansionRow> expand_base(GateId u) {
    const int m = deg(u) / 2;
    std::vector<GateId> fr = frontier(u, m);
    std::vector<ExpansionRow> rows;
    for (GateId w : fr) {
      ExpansionRow row;
      if (push_entry(row, u, w) && push_entry(row, left(w), kNoGate) && push_entry(row, right(w), kNoGate)) {
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  // [u:v] = sum_{w in F_m(u)} [u:w] [w_L:v] [w_R] with
  // m = floor((deg u + deg v)/2); a right factor [w_R] above half the degree
  // is replaced by its own expansion, giving rows of up to five entries.
  std::vector<ExpansionRow> expand_quotient(GateId u, GateId v) {
    const int k = deg(u) - deg(v);
    const int m = (deg(u) + deg(v)) / 2;
    std::vector<GateId> fr = frontier(u, m);
    std::vector<ExpansionRow> rows;
    for (GateId w : fr) {
      if (!reach_[left(w)][v] || deg(left(w)) < deg(v)) continue;
      ExpansionRow head;
      if (!push_entry(head, u, w) || !push_entry(head, left(w), v)) continue;
      GateId wr = right(w);
      if (2 * deg(wr) <= k) {
        if (push_entry(head, wr, kNoGate)) rows.push_back(std::move(head));
        continue;
      }
      NodeId inner = node_for(wr, kNoGate);
      // Copy: node_for may grow nodes_ while we iterate.
      std::vector<ExpansionRow> sub = out_->nodes_[inner].rows;
      for (const auto& s : sub) {
        ExpansionRow row = head;
        row.coeff = field_.mul(row.coeff, s.coeff);
        if (row.coeff == 0) continue;
        row.entries.insert(row.entries.end(), s.entries.begin(), s.entries.end());
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  GateId input_gate(Var x) {
    auto it = inputs_.find(x);
    if (it != inputs_.end()) return it->second;
    return inputs_[x] = out_->circuit_.add_input(x);
  }
  GateId const_gate(u64 c) {
    auto it = consts_.find(c);
    if (it != consts_.end()) return it->second;
    return consts_[c] = out_->circuit_.add_const(c);
  }

  GateId materialize(NodeId id) {
    if (out_->nodes_[id].gate != kNoGate) return out_->nodes_[id].gate;
    ReducedNode node = out_->nodes_[id];
    Circuit& c = out_->circuit_;
    GateId g;
    if (node.zero) {
      g = const_gate(0);
    } else if (node.is_linear()) {
      std::vector<GateId> parts;
      for (std::size_t k = 0; k < n_; ++k) {
        u64 a = node.linear_form[k];
        if (a == 0) continue;
        GateId x = input_gate(static_cast<Var>(k));
        parts.push_back(a == 1 ? x : c.add_mul({const_gate(a), x}));
      }
      if (node.linear_form[n_] != 0) parts.push_back(const_gate(node.linear_form[n_]));
      g = parts.size() == 1 ? parts[0] : c.add_add(std::move(parts));
    } else {
      std::vector<GateId> row_gates;
      for (const auto& row : node.rows) {
        std::vector<GateId> kids;
        if (row.coeff != 1) kids.push_back(const_gate(row.coeff));
        for (NodeId e : row.entries) kids.push_back(materialize(e));
        row_gates.push_back(kids.size() == 1 ? kids[0] : c.add_mul(std::move(kids)));
      }
      g = row_gates.size() == 1 ? row_gates[0] : c.add_add(std::move(row_gates));
    }
    out_->nodes_[id].gate = g;
    if (node.is_quotient()) out_->quotient_gates_[{node.u, node.v}] = g;
    return g;
  }

  const Circuit& base_;
  PrimeField field_;
  std::size_t n_;
  std::vector<std::vector<char>> reach_;
  std::map<std::pair<GateId, GateId>, std::vector<u64>> low_;
  std::map<Var, GateId> inputs_;
  std::map<u64, GateId> consts_;
  ReducedCircuit* out_ = nullptr;
};

namespace {

void require_binary_left_heavy(const Circuit& c) {
  auto live = c.live_mask();
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gate(static_cast<GateId>(i));
    if (!live[i] || g.kind == GateKind::Input || g.kind == GateKind::Const) continue;
    if (g.children.size() != 2) {
      throw PreconditionError("vsbr_reduce needs a binarized circuit; gate g" + std::to_string(i) + " has fan-in " +
                              std::to_string(g.children.size()));
    }
    if (g.kind == GateKind::Mul && c.gate(g.children[0]).formal_degree < c.gate(g.children[1]).formal_degree) {
      throw PreconditionError("vsbr_reduce needs left-heavy Mul gates; gate g" + std::to_string(i) + " is not");
    }
  }
}

}  // namespace

ReducedCircuit vsbr_reduce(const Circuit& c) {
  auto hom = check_homogeneous(c);
  if (!hom) throw PreconditionError("vsbr_reduce needs a homogeneous circuit: " + hom.message);
  if (c.degree() < 1) throw PreconditionError("vsbr_reduce needs degree >= 1");
  if (c.degree() >= 2) require_binary_left_heavy(c);
  ReducedCircuitBuilder b(c);
  ReducedCircuit r = b.build();
  if (c.degree() == 1) {
    // Base case: a linear form is already shallow; keep the input as is.
    // The node system still exposes the output as a linear node.
    ReducedCircuit keep = std::move(r);
    return keep;
  }
  return r;
}

const std::vector<ExpansionRow>& expansion_rows(const ReducedCircuit& r, NodeId g) {
  const ReducedNode& n = r.node(g);
  if (n.degree < 2) {
    throw PreconditionError("expansion_rows is defined for degree >= 2, node " + n.label() + " has degree " +
                            std::to_string(n.degree));
  }
  return n.rows;
}

const SparsePoly& NodeExpander::operator()(NodeId id) {
  auto it = cache_.find(id);
  if (it != cache_.end()) return it->second;
  const ReducedNode& n = r_.node(id);
  const auto& f = r_.base().field();
  const std::size_t nv = r_.base().num_vars();
  SparsePoly p(f, nv);
  if (n.zero) {
    // zero polynomial
  } else if (n.is_linear()) {
    std::vector<SparsePoly::Term> terms;
    for (std::size_t k = 0; k < nv; ++k) {
      if (n.linear_form[k]) terms.emplace_back(Monomial::var(static_cast<Var>(k)), n.linear_form[k]);
    }
    if (n.linear_form[nv]) terms.emplace_back(Monomial{}, n.linear_form[nv]);
    p = SparsePoly::from_terms(f, nv, std::move(terms));
  } else {
    for (const auto& row : n.rows) {
      SparsePoly prod = SparsePoly::constant(f, nv, row.coeff);
      for (NodeId e : row.entries) prod = prod.mul_capped((*this)(e), cap_);
      p = p + prod;
      if (p.size() > cap_) throw CapExceeded("monomial cap exceeded while expanding node " + n.label());
    }
  }
  return cache_.emplace(id, std::move(p)).first->second;
}

VsbrStats vsbr_stats(const ReducedCircuit& r) {
  VsbrStats s;
  const Circuit& c = r.circuit();
  s.size = c.size();
  s.depth = c.depth();
  s.degree = c.degree();
  auto live = c.live_mask();
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    GateId g = static_cast<GateId>(i);
    const Gate& gate = c.gate(g);
    if (gate.kind != GateKind::Mul || is_scalar_mul(c, g)) continue;
    s.max_mul_fanin = std::max(s.max_mul_fanin, nonconst_fanin(c, g));
    for (GateId ch : gate.children) {
      if (2 * c.gate(ch).formal_degree > gate.formal_degree) ++s.halving_violations;
    }
  }
  for (const auto& n : r.nodes()) {
    s.max_rows = std::max(s.max_rows, n.rows.size());
    if (n.is_quotient()) ++s.quotient_count;
  }
  return s;
}

SparsePoly quotient_by_definition(const Circuit& c, GateId u, GateId v, std::size_t monomial_cap) {
  std::map<GateId, SparsePoly> memo;
  auto polys = expand_all_gates(c, monomial_cap);
  std::function<SparsePoly(GateId)> q = [&](GateId x) -> SparsePoly {
    auto it = memo.find(x);
    if (it != memo.end()) return it->second;
    const Gate& g = c.gate(x);
    SparsePoly r(c.field(), c.num_vars());
    if (x == v) {
      r = SparsePoly::constant(c.field(), c.num_vars(), 1);
    } else if (g.kind == GateKind::Add) {
      for (GateId ch : g.children) r = r + q(ch);
    } else if (g.kind == GateKind::Mul) {
      r = q(g.children[0]) * polys[g.children[1]];
    }
    memo.emplace(x, r);
    return r;
  };
  return q(u);
}

}  // namespace chasm
