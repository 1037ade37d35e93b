#include "chasm/depth4.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <unordered_map>

namespace chasm {

namespace {

struct PathStep {
  FRef node;
  std::size_t child;
};

// Rebuilds the formula with the node reached by `path` (the root when the path
// is empty) replaced by zero. Returns null if the whole formula vanishes.
FRef zero_at(const std::vector<PathStep>& path) {
  FRef repl;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const FNode& node = *it->node;
    std::vector<FRef> kids = node.children;
    if (!repl) {
      if (node.kind == GateKind::Mul) continue;
      kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(it->child));
      if (kids.empty()) continue;
      repl = fnode_add(std::move(kids));
    } else {
      kids[it->child] = repl;
      repl = node.kind == GateKind::Add ? fnode_add(std::move(kids)) : fnode_mul(std::move(kids));
    }
  }
  return repl;
}

// Children of the Mul nodes along the path other than the one followed.
std::vector<FRef> path_siblings(const std::vector<PathStep>& path) {
  std::vector<FRef> out;
  for (const auto& s : path) {
    if (s.node->kind != GateKind::Mul) continue;
    for (std::size_t k = 0; k < s.node->children.size(); ++k) {
      if (k != s.child) out.push_back(s.node->children[k]);
    }
  }
  return out;
}

class HyCache {
 public:
  const std::vector<HyRow>& rows(const FRef& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second;
    std::vector<HyRow> out;
    if (f->degree <= 1) {
      out.push_back({0, {{f, f->degree}}});
    } else {
      FRef cur = f;
      while (cur) {
        AffineSplit sp = split_at_middle(cur);
        // Keep the larger part whole, recurse into the other (v on ties).
        FRef big = sp.a, small = sp.v;
        if (sp.v->degree > sp.a->degree) std::swap(big, small);
        for (const auto& sub : rows(small)) {
          HyRow r;
          r.row_index = out.size();
          r.factors.push_back({big, big->degree});
          r.factors.insert(r.factors.end(), sub.factors.begin(), sub.factors.end());
          out.push_back(std::move(r));
        }
        cur = sp.b;
      }
    }
    keep_.push_back(f);
    return memo_.emplace(f.get(), std::move(out)).first->second;
  }

 private:
  std::unordered_map<const FNode*, std::vector<HyRow>> memo_;
  std::vector<FRef> keep_;
};

std::vector<ShallowRow> shallow_rows_impl(const FRef& f, HyCache& hy) {
  std::vector<ShallowRow> out;
  for (const auto& hr : hy.rows(f)) {
    std::vector<HyFactor> rest(hr.factors.begin() + 1, hr.factors.end());
    FRef cur = hr.factors[0].formula;
    while (cur) {
      // h = first Mul (preorder) of maximum non-constant fan-in.
      std::vector<PathStep> path, best_path;
      FRef best;
      std::size_t best_fanin = 1;
      std::function<void(const FRef&)> walk = [&](const FRef& x) {
        if (x->kind == GateKind::Mul) {
          std::size_t k = 0;
          for (const auto& c : x->children) k += c->degree > 0 ? 1 : 0;
          if (k > best_fanin) {
            best_fanin = k;
            best = x;
            best_path = path;
          }
        }
        for (std::size_t i = 0; i < x->children.size(); ++i) {
          path.push_back({x, i});
          walk(x->children[i]);
          path.pop_back();
        }
      };
      walk(cur);

      ShallowRow row;
      row.row_index = out.size();
      row.hy_factors = rest;
      if (!best) {
        // Degree one: nothing to split.
        row.split_factors.push_back({cur, cur->degree});
        out.push_back(std::move(row));
        break;
      }
      std::vector<FRef> parts = path_siblings(best_path);
      parts.insert(parts.end(), best->children.begin(), best->children.end());
      std::vector<FRef> consts;
      for (const auto& p : parts) {
        if (p->degree == 0) {
          consts.push_back(p);
        } else {
          row.split_factors.push_back({p, p->degree});
        }
      }
      if (!consts.empty()) {
        // Constants ride along with the first non-constant factor.
        consts.push_back(row.split_factors[0].formula);
        row.split_factors[0].formula = fnode_mul(std::move(consts));
      }
      out.push_back(std::move(row));
      cur = zero_at(best_path);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].row_index = i;
  return out;
}

// ---------------------------------------------------------------------------
// Iteration engine

template <class H>
struct Row {
  u64 coeff = 1;
  std::vector<H> factors;
};

template <class H>
struct Work {
  u64 coeff = 1;
  std::vector<H> factors;
  std::size_t depth = 0;
};

template <class H, class Deg, class Rows>
std::vector<Work<H>> run_expansion(std::vector<Work<H>> init, int t, int d, double divisor, const PrimeField& field,
                                   Deg deg, Rows rows, ExpansionAudit& audit) {
  audit.bad_threshold = t / divisor;
  audit.bad_cap = divisor * d / t;
  const std::size_t cap = summand_cap();
  auto bad = [&](const std::vector<H>& fs) {
    std::size_t b = 0;
    for (const auto& h : fs) b += divisor * deg(h) > t ? 1 : 0;
    return b;
  };
  auto big = [&](const std::vector<H>& fs) {
    int s = 0;
    for (const auto& h : fs) s += deg(h) > t ? deg(h) : 0;
    return s;
  };
  std::vector<Work<H>> stack(init.rbegin(), init.rend());
  std::vector<Work<H>> done;
  while (!stack.empty()) {
    Work<H> w = std::move(stack.back());
    stack.pop_back();
    std::size_t j = 0;
    for (std::size_t k = 1; k < w.factors.size(); ++k) {
      if (deg(w.factors[k]) > deg(w.factors[j])) j = k;
    }
    if (w.factors.empty() || deg(w.factors[j]) <= t) {
      audit.max_lineage_depth = std::max(audit.max_lineage_depth, w.depth);
      audit.max_bad = std::max(audit.max_bad, bad(w.factors));
      done.push_back(std::move(w));
      continue;
    }
    const auto& rs = rows(w.factors[j]);
    ++audit.expansions;
    audit.max_branching = std::max(audit.max_branching, rs.size());
    const std::size_t pb = bad(w.factors);
    const int pbig = big(w.factors);
    std::vector<Work<H>> kids;
    for (const auto& r : rs) {
      Work<H> c;
      c.coeff = field.mul(w.coeff, r.coeff);
      if (c.coeff == 0) continue;
      c.depth = w.depth + 1;
      c.factors.reserve(w.factors.size() + r.factors.size());
      c.factors.insert(c.factors.end(), w.factors.begin(), w.factors.begin() + static_cast<std::ptrdiff_t>(j));
      c.factors.insert(c.factors.end(), r.factors.begin(), r.factors.end());
      c.factors.insert(c.factors.end(), w.factors.begin() + static_cast<std::ptrdiff_t>(j) + 1, w.factors.end());
      const std::size_t cb = bad(c.factors);
      if (cb <= pb) ++audit.monotonicity_violations;
      if (static_cast<double>(cb) > audit.bad_cap + 1e-9) ++audit.bad_cap_violations;
      const int drop = pbig - big(c.factors);
      audit.max_big_degree_drop = std::max(audit.max_big_degree_drop, drop);
      if (audit.big_drop_cap > 0 && drop > audit.big_drop_cap) ++audit.big_drop_violations;
      kids.push_back(std::move(c));
    }
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
    if (stack.size() + done.size() > cap) {
      throw CapExceeded("summand cap " + std::to_string(cap) + " exceeded; instance too large for this cut");
    }
  }
  return done;
}

std::string formula_label(const FRef& f) {
  return "f(deg=" + std::to_string(f->degree) + ",size=" + std::to_string(f->size) + ")";
}

// Final conversion of formula-handle summands; summands with a vanishing
// factor are dropped.
DepthFourCircuit to_depth_four(const std::vector<Work<FRef>>& work, const PrimeField& field, std::size_t n, int d,
                               int t) {
  DepthFourCircuit out(field, n, d, t);
  FTreeEval ev(field, n);
  for (const auto& w : work) {
    Summand s;
    bool zero = false;
    for (const auto& h : w.factors) {
      const SparsePoly& p = ev.expand(h);
      if (p.is_zero()) {
        zero = true;
        break;
      }
      s.factors.push_back(p);
      s.provenance.push_back(formula_label(h));
    }
    if (zero) continue;
    if (w.coeff != 1) s.factors[0] = s.factors[0].scaled(w.coeff);
    out.add_summand(std::move(s));
  }
  return out;
}

void require_formula_input(const Formula& f, int t) {
  if (t < 1) throw PreconditionError("cut t must be >= 1, got " + std::to_string(t));
  auto hom = check_homogeneous(f.circuit());
  if (!hom) throw PreconditionError("formula is not homogeneous: " + hom.message);
  if (f.degree() < 1) throw PreconditionError("formula must have degree >= 1");
}

PassResult finish(DepthFourCircuit d4, ExpansionAudit audit, PassMeta meta) {
  meta.iteration_count = audit.max_lineage_depth;
  meta.extras["audit"] = audit.to_json();
  PassResult r{std::move(d4), {}, audit};
  r.report = structure_report(r.circuit, meta);
  return r;
}

// reduce_general's worklist on reduced-circuit nodes.
struct GeneralRun {
  ReducedCircuit reduced;
  std::vector<Work<NodeId>> summands;
  ExpansionAudit audit;
};

GeneralRun run_general(const Circuit& c, int t) {
  const int d = c.degree();
  if (t < 1 || t > d) {
    throw PreconditionError("cut t must lie in [1, " + std::to_string(d) + "], got " + std::to_string(t));
  }
  auto hom = check_homogeneous(c);
  if (!hom) throw PreconditionError("reduce_general needs a homogeneous circuit: " + hom.message);
  GeneralRun run{vsbr_reduce(binarize_left_heavy(c)), {}, {}};
  const ReducedCircuit& r = run.reduced;
  const NodeId out = r.output_node();
  std::vector<Work<NodeId>> init;
  if (r.node(out).degree <= 1) {
    if (!r.node(out).zero) init.push_back({1, {out}, 0});
  } else {
    for (const auto& row : expansion_rows(r, out)) init.push_back({row.coeff, row.entries, 0});
  }
  std::unordered_map<NodeId, std::vector<Row<NodeId>>> cache;
  auto rows = [&](NodeId id) -> const std::vector<Row<NodeId>>& {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    std::vector<Row<NodeId>> rs;
    for (const auto& row : expansion_rows(r, id)) rs.push_back({row.coeff, row.entries});
    return cache.emplace(id, std::move(rs)).first->second;
  };
  auto deg = [&](NodeId id) { return r.node(id).degree; };
  run.audit.big_drop_cap = 3 * t;
  run.summands = run_expansion<NodeId>(std::move(init), t, d, 8.0, c.field(), deg, rows, run.audit);
  return run;
}

}  // namespace

// ---------------------------------------------------------------------------

AffineSplit split_at_middle(const FRef& f) {
  const int D = f->degree;
  if (D < 2) throw PreconditionError("split_at_middle needs degree >= 2");
  std::vector<PathStep> path;
  FRef cur = f;
  for (;;) {
    if (!path.empty() && 3 * cur->degree <= 2 * D) {
      return {cur, fnode_mul(path_siblings(path)), zero_at(path)};
    }
    if (cur->kind == GateKind::Add) {
      path.push_back({cur, 0});
      cur = cur->children[0];
      continue;
    }
    if (cur->kind != GateKind::Mul) throw Error("split_at_middle walked into a leaf; formula not homogeneous?");
    const auto& kids = cur->children;
    std::size_t best = 0;
    for (std::size_t k = 1; k < kids.size(); ++k) {
      if (kids[k]->degree > kids[best]->degree) best = k;
    }
    if (3 * kids[best]->degree >= D) {
      path.push_back({cur, best});
      cur = kids[best];
      continue;
    }
    // Every child is below D/3: take a heaviest-first prefix reaching D/3.
    std::vector<std::size_t> order(kids.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return kids[a]->degree > kids[b]->degree; });
    std::vector<char> take(kids.size(), 0);
    int sum = 0;
    for (std::size_t k : order) {
      if (3 * sum >= D) break;
      take[k] = 1;
      sum += kids[k]->degree;
    }
    std::vector<FRef> in, out = path_siblings(path);
    for (std::size_t k = 0; k < kids.size(); ++k) (take[k] ? in : out).push_back(kids[k]);
    return {fnode_mul(std::move(in)), fnode_mul(std::move(out)), zero_at(path)};
  }
}

std::vector<HyRow> hy_rows(const FRef& f) {
  if (f->degree < 1) throw PreconditionError("hy_rows needs degree >= 1");
  if (!ftree_homogeneous(f)) throw PreconditionError("hy_rows needs a homogeneous formula");
  HyCache cache;
  return cache.rows(f);
}

std::vector<HyRow> hy_rows(const Formula& f) { return hy_rows(ftree_of(f)); }

bool hy_windows_hold(const HyRow& row, int d) {
  u128 p3 = 1, p2 = 1;
  int sum = 0;
  for (const auto& fac : row.factors) {
    p3 *= 3;
    p2 *= 2;
    const u128 dj = static_cast<u128>(fac.degree);
    // d/3^j <= d_j <= d 2^j / 3^j
    if (dj * p3 < static_cast<u128>(d) || dj * p3 > static_cast<u128>(d) * p2) return false;
    sum += fac.degree;
  }
  return sum == d && static_cast<double>(row.factors.size()) <= hy_length_bound(d) + 1e-9;
}

double hy_length_bound(int d) { return std::log(static_cast<double>(d)) / std::log(1.5) + 2; }

std::vector<ShallowRow> shallow_rows(const FRef& f, int delta) {
  if (f->degree < 2) throw PreconditionError("shallow_rows needs degree >= 2");
  if (!ftree_homogeneous(f)) throw PreconditionError("shallow_rows needs a homogeneous formula");
  const int pd = ftree_product_depth(f);
  if (pd > delta) {
    throw PreconditionError("formula has product depth " + std::to_string(pd) + " > " + std::to_string(delta));
  }
  HyCache hy;
  return shallow_rows_impl(f, hy);
}

std::vector<ShallowRow> shallow_rows(const Formula& f, int delta) { return shallow_rows(ftree_of(f), delta); }

std::size_t shallow_min_split(int d, int delta) {
  if (delta < 1) return static_cast<std::size_t>(std::max(d, 0));
  return static_cast<std::size_t>(std::floor(std::pow(d / 3.0, 1.0 / delta) + 1e-9));
}

nlohmann::json ExpansionAudit::to_json() const {
  return {{"bad_threshold", bad_threshold},
          {"bad_cap", bad_cap},
          {"expansions", expansions},
          {"max_lineage_depth", max_lineage_depth},
          {"max_branching", max_branching},
          {"max_bad", max_bad},
          {"monotonicity_violations", monotonicity_violations},
          {"bad_cap_violations", bad_cap_violations},
          {"max_big_degree_drop", max_big_degree_drop},
          {"big_drop_cap", big_drop_cap},
          {"big_drop_violations", big_drop_violations},
          {"degenerate", degenerate}};
}

std::size_t summand_cap() {
  if (const char* env = std::getenv("CHASM_SUMMAND_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw PreconditionError(std::string("CHASM_SUMMAND_CAP is not a positive integer: ") + env);
  }
  return 1'000'000;
}

std::size_t hom_a_bound(int d, int t) {
  if (t <= 1) return 0;
  return static_cast<std::size_t>(std::ceil(0.1 * d / t * std::log2(static_cast<double>(t)) - 1e-12));
}

double shallow_a_bound(int d, int t, int delta) {
  if (delta < 1) delta = 1;
  return kShallowConstant * d / t * std::pow(static_cast<double>(t), 1.0 / delta);
}

PassResult reduce_general(const Circuit& c, int t, std::uint64_t seed) {
  GeneralRun run = run_general(c, t);
  const int d = c.degree();
  DepthFourCircuit d4(c.field(), c.num_vars(), d, t);
  NodeExpander ex(run.reduced);
  for (const auto& w : run.summands) {
    Summand s;
    bool zero = false;
    for (NodeId id : w.factors) {
      const SparsePoly& p = ex(id);
      if (p.is_zero()) {
        zero = true;
        break;
      }
      s.factors.push_back(p);
      s.provenance.push_back(run.reduced.node(id).label());
    }
    if (zero) continue;
    if (w.coeff != 1) s.factors[0] = s.factors[0].scaled(w.coeff);
    d4.add_summand(std::move(s));
  }
  PassMeta meta;
  meta.pass_name = "general";
  meta.input_size = c.size();
  meta.degree = d;
  meta.cut = t;
  meta.seed = seed;
  meta.top_fanin_exponent = 8;
  VsbrStats vs = vsbr_stats(run.reduced);
  meta.extras["vsbr"] = {{"size", vs.size},
                         {"depth", vs.depth},
                         {"max_mul_fanin", vs.max_mul_fanin},
                         {"halving_violations", vs.halving_violations},
                         {"max_rows", vs.max_rows},
                         {"quotient_count", vs.quotient_count}};
  return finish(std::move(d4), run.audit, std::move(meta));
}

namespace {

template <class RowsFn>
PassResult formula_pass(const Formula& f, int t, std::uint64_t seed, const std::string& name, double exponent,
                        double offset, int drop_cap, RowsFn rows, nlohmann::json extras) {
  const FRef root = ftree_of(f);
  const int d = f.degree();
  ExpansionAudit audit;
  audit.big_drop_cap = drop_cap;
  std::vector<Work<FRef>> done;
  if (t >= d) {
    audit.degenerate = true;
    audit.bad_threshold = t / 9.0;
    audit.bad_cap = 9.0 * d / t;
    done.push_back({1, {root}, 0});
  } else {
    auto deg = [](const FRef& h) { return h->degree; };
    done = run_expansion<FRef>({{1, {root}, 0}}, t, d, 9.0, f.field(), deg, rows, audit);
  }
  PassMeta meta;
  meta.pass_name = name;
  meta.input_size = f.size();
  meta.degree = d;
  meta.cut = t;
  meta.seed = seed;
  meta.top_fanin_exponent = exponent;
  meta.top_fanin_offset = offset;
  meta.extras = std::move(extras);
  meta.extras["degenerate"] = audit.degenerate;
  return finish(to_depth_four(done, f.field(), f.num_vars(), d, t), audit, std::move(meta));
}

}  // namespace

PassResult reduce_hom_formula(const Formula& f, int t, std::uint64_t seed) {
  require_formula_input(f, t);
  HyCache hy;
  std::unordered_map<const FNode*, std::vector<Row<FRef>>> cache;
  auto rows = [&](const FRef& h) -> const std::vector<Row<FRef>>& {
    auto it = cache.find(h.get());
    if (it != cache.end()) return it->second;
    std::vector<Row<FRef>> rs;
    for (const auto& r : hy.rows(h)) {
      Row<FRef> row;
      for (const auto& fac : r.factors) row.factors.push_back(fac.formula);
      rs.push_back(std::move(row));
    }
    return cache.emplace(h.get(), std::move(rs)).first->second;
  };
  nlohmann::json extras;
  extras["a_bound"] = hom_a_bound(f.degree(), t);
  extras["stated_top_fanin_exponent"] = 10;
  PassResult r = formula_pass(f, t, seed, "hom", 9, 0, 3 * t, rows, extras);
  r.report.extras["a_bound_ok"] = r.report.min_factor_count >= hom_a_bound(f.degree(), t);
  return r;
}

PassResult reduce_shallow(const Formula& f, int t, std::uint64_t seed) {
  require_formula_input(f, t);
  const FRef root = ftree_of(f);
  const int delta = std::max(1, ftree_product_depth(root));
  const std::size_t s = f.size();
  HyCache hy;
  std::size_t min_split = static_cast<std::size_t>(-1), split_violations = 0, max_rows = 0, row_violations = 0;
  std::unordered_map<const FNode*, std::vector<Row<FRef>>> cache;
  std::vector<FRef> keep;
  auto rows = [&](const FRef& h) -> const std::vector<Row<FRef>>& {
    auto it = cache.find(h.get());
    if (it != cache.end()) return it->second;
    std::vector<Row<FRef>> rs;
    const std::size_t need = shallow_min_split(h->degree, delta);
    for (const auto& sr : shallow_rows_impl(h, hy)) {
      Row<FRef> row;
      for (const auto& fac : sr.split_factors) row.factors.push_back(fac.formula);
      for (const auto& fac : sr.hy_factors) row.factors.push_back(fac.formula);
      min_split = std::min(min_split, sr.split_factors.size());
      if (sr.split_factors.size() < need) ++split_violations;
      rs.push_back(std::move(row));
    }
    max_rows = std::max(max_rows, rs.size());
    if (rs.size() > s * s) ++row_violations;
    keep.push_back(h);
    return cache.emplace(h.get(), std::move(rs)).first->second;
  };
  nlohmann::json extras;
  extras["delta"] = delta;
  extras["c_delta"] = kShallowConstant;
  extras["a_bound"] = shallow_a_bound(f.degree(), std::min(t, f.degree()), delta);
  PassResult r = formula_pass(f, t, seed, "shallow", 18, 0, 0, rows, extras);
  r.report.extras["min_split"] = min_split == static_cast<std::size_t>(-1) ? 0 : min_split;
  r.report.extras["split_violations"] = split_violations;
  r.report.extras["max_rows"] = max_rows;
  r.report.extras["row_violations"] = row_violations;
  r.report.extras["a_bound_ok"] = static_cast<double>(r.report.min_factor_count) + 1e-9 >=
                                  shallow_a_bound(f.degree(), std::min(t, f.degree()), delta);
  return r;
}

PassResult reduce_hom_formula_alt(const Formula& f, int t, std::uint64_t seed) {
  require_formula_input(f, t);
  const int d = f.degree();
  if (t >= d) {
    // Nothing to regroup; same degenerate output as the primary pass.
    PassResult r = reduce_hom_formula(f, t, seed);
    r.report.pass_name = "hom-alt";
    return r;
  }
  GeneralRun run = run_general(f.circuit(), t);
  const Circuit& base = run.reduced.base();
  if (!base.is_tree()) throw Error("binarized formula lost its tree shape; no provenance");
  const std::vector<FRef> trees = ftree_all_gates(base);
  std::vector<GateId> parent(base.gate_count(), kNoGate);
  auto live = base.live_mask();
  for (std::size_t i = 0; i < base.gate_count(); ++i) {
    if (!live[i]) continue;
    for (GateId ch : base.gate(static_cast<GateId>(i)).children) parent[ch] = static_cast<GateId>(i);
  }
  // [u] is the subtree at u; [u:v] the product of right Mul siblings on the
  // path from u down to v.
  auto provenance = [&](NodeId id) -> FRef {
    const ReducedNode& n = run.reduced.node(id);
    if (!n.is_quotient()) return trees[n.u];
    std::vector<FRef> sibs;
    for (GateId x = n.v; x != n.u;) {
      GateId p = parent[x];
      if (p == kNoGate) throw Error("missing provenance for " + n.label());
      const Gate& g = base.gate(p);
      if (g.kind == GateKind::Mul) {
        if (g.children[0] != x) throw Error("missing provenance for " + n.label() + " (right branch)");
        sibs.push_back(trees[g.children[1]]);
      }
      x = p;
    }
    return fnode_mul(std::move(sibs));
  };

  HyCache hy;
  const std::size_t cap = summand_cap();
  std::vector<Work<FRef>> done;
  std::size_t max_groups = 0, min_groups = static_cast<std::size_t>(-1), max_group_rows = 0;
  for (const auto& w : run.summands) {
    std::vector<FRef> fs;
    for (NodeId id : w.factors) fs.push_back(provenance(id));
    if (w.coeff != 1 && !fs.empty()) fs[0] = fnode_mul({fnode_const(w.coeff), fs[0]});
    // Greedy regrouping into degree [t/2, t]; a short leftover group stays.
    std::vector<std::vector<FRef>> groups;
    std::vector<FRef> cur;
    int cur_deg = 0;
    for (const auto& x : fs) {
      if (2 * x->degree > t) {
        groups.push_back({x});
        continue;
      }
      cur.push_back(x);
      cur_deg += x->degree;
      if (2 * cur_deg >= t) {
        groups.push_back(std::move(cur));
        cur.clear();
        cur_deg = 0;
      }
    }
    if (!cur.empty()) groups.push_back(std::move(cur));
    max_groups = std::max(max_groups, groups.size());
    min_groups = std::min(min_groups, groups.size());

    std::vector<const std::vector<HyRow>*> grows;
    for (auto& g : groups) {
      FRef gf = fnode_mul(std::move(g));
      grows.push_back(&hy.rows(gf));
      max_group_rows = std::max(max_group_rows, grows.back()->size());
    }
    // Cartesian product of the groups' rows.
    std::vector<std::size_t> pick(grows.size(), 0);
    for (;;) {
      Work<FRef> out;
      out.depth = w.depth;
      for (std::size_t g = 0; g < grows.size(); ++g) {
        for (const auto& fac : (*grows[g])[pick[g]].factors) out.factors.push_back(fac.formula);
      }
      done.push_back(std::move(out));
      if (done.size() > cap) {
        throw CapExceeded("summand cap " + std::to_string(cap) + " exceeded; instance too large for this cut");
      }
      // Odometer step; stops after the last combination.
      std::size_t g = grows.size();
      while (g > 0 && ++pick[g - 1] == grows[g - 1]->size()) pick[--g] = 0;
      if (g == 0) break;
    }
  }
  PassMeta meta;
  meta.pass_name = "hom-alt";
  meta.input_size = f.size();
  meta.degree = d;
  meta.cut = t;
  meta.seed = seed;
  meta.top_fanin_exponent = 10;
  meta.top_fanin_offset = 1;
  meta.extras["a_bound"] = hom_a_bound(d, t);
  meta.extras["max_groups"] = max_groups;
  meta.extras["min_groups"] = min_groups == static_cast<std::size_t>(-1) ? 0 : min_groups;
  meta.extras["max_group_rows"] = max_group_rows;
  meta.extras["degenerate"] = false;
  PassResult r = finish(to_depth_four(done, f.field(), f.num_vars(), d, t), run.audit, std::move(meta));
  r.report.extras["a_bound_ok"] = r.report.min_factor_count >= hom_a_bound(d, t);
  return r;
}

}  // namespace chasm
