#include "chasm/circuit.hpp"

#include <algorithm>
#include <sstream>

namespace chasm {

Circuit::Circuit(std::string name, PrimeField field, std::size_t num_vars)
    : name_(std::move(name)), field_(field), num_vars_(num_vars) {}

GateId Circuit::push(Gate g) {
  for (GateId ch : g.children) {
    if (ch >= gates_.size()) throw PreconditionError("child gate must precede its parent");
  }
  gates_.push_back(std::move(g));
  return static_cast<GateId>(gates_.size() - 1);
}

GateId Circuit::add_input(Var v) {
  if (v >= num_vars_) throw PreconditionError("variable index " + std::to_string(v) + " out of range");
  return push(Gate{GateKind::Input, v, {}, 1});
}

GateId Circuit::add_const(u64 c) { return push(Gate{GateKind::Const, field_.reduce(c), {}, 0}); }

GateId Circuit::add_add(std::vector<GateId> children) {
  if (children.empty()) throw PreconditionError("add gate needs at least one child");
  int deg = 0;
  for (GateId ch : children) deg = std::max(deg, gates_.at(ch).formal_degree);
  return push(Gate{GateKind::Add, 0, std::move(children), deg});
}

GateId Circuit::add_mul(std::vector<GateId> children) {
  if (children.empty()) throw PreconditionError("mul gate needs at least one child");
  int deg = 0;
  for (GateId ch : children) deg += gates_.at(ch).formal_degree;
  return push(Gate{GateKind::Mul, 0, std::move(children), deg});
}

void Circuit::set_output(GateId g) {
  if (g >= gates_.size()) throw PreconditionError("output gate does not exist");
  output_ = g;
}

GateId Circuit::output() const {
  if (!output_) throw PreconditionError("circuit has no output");
  return *output_;
}

std::vector<bool> Circuit::live_mask() const {
  std::vector<bool> live(gates_.size(), false);
  if (!output_) return live;
  live[*output_] = true;
  for (std::size_t i = gates_.size(); i-- > 0;) {
    if (!live[i]) continue;
    for (GateId ch : gates_[i].children) live[ch] = true;
  }
  return live;
}

std::size_t Circuit::size() const {
  auto live = live_mask();
  return static_cast<std::size_t>(std::count(live.begin(), live.end(), true));
}

bool Circuit::is_tree() const {
  auto live = live_mask();
  std::vector<int> parents(gates_.size(), 0);
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    if (!live[i]) continue;
    for (GateId ch : gates_[i].children) ++parents[ch];
  }
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    if (!live[i]) continue;
    int expect = (output_ && i == *output_) ? 0 : 1;
    if (parents[i] != expect) return false;
  }
  return true;
}

int Circuit::depth() const {
  std::vector<int> depth(gates_.size(), 0);
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    for (GateId ch : gates_[i].children) depth[i] = std::max(depth[i], depth[ch] + 1);
  }
  return depth.at(output());
}

Formula::Formula(Circuit c) : circuit_(std::move(c)) {
  if (!circuit_.is_tree()) throw PreconditionError("circuit is not a formula (some gate has fan-out > 1)");
}

std::size_t nonconst_fanin(const Circuit& c, GateId g) {
  std::size_t k = 0;
  for (GateId ch : c.gate(g).children) {
    if (c.gate(ch).formal_degree > 0) ++k;
  }
  return k;
}

bool is_scalar_mul(const Circuit& c, GateId g) {
  return c.gate(g).kind == GateKind::Mul && nonconst_fanin(c, g) <= 1;
}

u64 evaluate(const Circuit& c, std::span<const u64> point) {
  if (point.size() != c.num_vars()) {
    throw PreconditionError("point has " + std::to_string(point.size()) + " coordinates, circuit has " +
                            std::to_string(c.num_vars()) + " variables");
  }
  const auto& f = c.field();
  std::vector<u64> val(c.gate_count(), 0);
  auto live = c.live_mask();
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    switch (g.kind) {
      case GateKind::Input: val[i] = f.reduce(point[g.value]); break;
      case GateKind::Const: val[i] = g.value; break;
      case GateKind::Add: {
        u64 s = 0;
        for (GateId ch : g.children) s = f.add(s, val[ch]);
        val[i] = s;
        break;
      }
      case GateKind::Mul: {
        u64 s = 1;
        for (GateId ch : g.children) s = f.mul(s, val[ch]);
        val[i] = s;
        break;
      }
    }
  }
  return val[c.output()];
}

namespace {

SparsePoly gate_poly(const Circuit& c, const Gate& g, const std::vector<SparsePoly>& polys, std::size_t cap) {
  switch (g.kind) {
    case GateKind::Input: return SparsePoly::variable(c.field(), c.num_vars(), static_cast<Var>(g.value));
    case GateKind::Const: return SparsePoly::constant(c.field(), c.num_vars(), g.value);
    case GateKind::Add: {
      SparsePoly s(c.field(), c.num_vars());
      for (GateId ch : g.children) s = s + polys[ch];
      if (s.size() > cap) throw CapExceeded("monomial cap of " + std::to_string(cap) + " exceeded");
      return s;
    }
    case GateKind::Mul: {
      SparsePoly s = SparsePoly::constant(c.field(), c.num_vars(), 1);
      for (GateId ch : g.children) s = s.mul_capped(polys[ch], cap);
      return s;
    }
  }
  return SparsePoly(c.field(), c.num_vars());
}

}  // namespace

std::vector<SparsePoly> expand_all_gates(const Circuit& c, std::size_t monomial_cap) {
  std::vector<SparsePoly> polys;
  polys.reserve(c.gate_count());
  for (const Gate& g : c.gates()) polys.push_back(gate_poly(c, g, polys, monomial_cap));
  return polys;
}

SparsePoly expand_to_sparse(const Circuit& c, std::size_t monomial_cap) {
  auto live = c.live_mask();
  std::vector<SparsePoly> polys(c.gate_count());
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (live[i]) polys[i] = gate_poly(c, c.gate(static_cast<GateId>(i)), polys, monomial_cap);
  }
  return polys[c.output()];
}

Circuit fold_constants(const Circuit& c) {
  const auto& f = c.field();
  Circuit out(c.name(), f, c.num_vars());
  auto live = c.live_mask();
  // remap[i]: new gate for old gate i; constant[i]: its value when it folded to a constant.
  std::vector<GateId> remap(c.gate_count(), 0);
  std::vector<std::optional<u64>> constant(c.gate_count());

  auto emit_const = [&](u64 v) -> GateId { return out.add_const(v); };

  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    switch (g.kind) {
      case GateKind::Input: remap[i] = out.add_input(static_cast<Var>(g.value)); break;
      case GateKind::Const: constant[i] = g.value; break;
      case GateKind::Add: {
        u64 acc = 0;
        std::vector<GateId> kids;
        for (GateId ch : g.children) {
          if (constant[ch]) {
            acc = f.add(acc, *constant[ch]);
          } else {
            kids.push_back(remap[ch]);
          }
        }
        if (kids.empty()) {
          constant[i] = acc;
        } else {
          if (acc != 0) kids.push_back(emit_const(acc));
          remap[i] = kids.size() == 1 ? kids[0] : out.add_add(std::move(kids));
        }
        break;
      }
      case GateKind::Mul: {
        u64 acc = 1;
        std::vector<GateId> kids;
        for (GateId ch : g.children) {
          if (constant[ch]) {
            acc = f.mul(acc, *constant[ch]);
          } else {
            kids.push_back(remap[ch]);
          }
        }
        if (acc == 0 || kids.empty()) {
          constant[i] = kids.empty() ? acc : 0;
        } else {
          if (acc != 1) kids.insert(kids.begin(), emit_const(acc));
          remap[i] = kids.size() == 1 ? kids[0] : out.add_mul(std::move(kids));
        }
        break;
      }
    }
  }
  GateId o = c.output();
  out.set_output(constant[o] ? emit_const(*constant[o]) : remap[o]);
  return out;
}

Homogenized homogenize(const Circuit& c) {
  const int top = std::max(0, c.degree());
  const auto& f = c.field();
  Circuit out(c.name(), f, c.num_vars());
  auto live = c.live_mask();
  using Comps = std::vector<std::optional<GateId>>;
  std::vector<Comps> comp(c.gate_count());

  auto sum_of = [&](std::vector<GateId> parts) -> std::optional<GateId> {
    if (parts.empty()) return std::nullopt;
    if (parts.size() == 1) return parts[0];
    return out.add_add(std::move(parts));
  };
  auto product = [&](const Comps& a, const Comps& b) {
    Comps r(top + 1);
    for (int k = 0; k <= top; ++k) {
      std::vector<GateId> parts;
      for (int i = 0; i <= k; ++i) {
        if (a[i] && b[k - i]) parts.push_back(out.add_mul({*a[i], *b[k - i]}));
      }
      r[k] = sum_of(std::move(parts));
    }
    return r;
  };

  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    Comps r(top + 1);
    switch (g.kind) {
      case GateKind::Input:
        if (top >= 1) r[1] = out.add_input(static_cast<Var>(g.value));
        break;
      case GateKind::Const:
        if (g.value != 0) r[0] = out.add_const(g.value);
        break;
      case GateKind::Add:
        for (int k = 0; k <= top; ++k) {
          std::vector<GateId> parts;
          for (GateId ch : g.children) {
            if (comp[ch][k]) parts.push_back(*comp[ch][k]);
          }
          r[k] = sum_of(std::move(parts));
        }
        break;
      case GateKind::Mul:
        r = comp[g.children[0]];
        for (std::size_t j = 1; j < g.children.size(); ++j) r = product(r, comp[g.children[j]]);
        break;
    }
    comp[i] = std::move(r);
  }

  Homogenized h;
  const Comps& oc = comp[c.output()];
  std::vector<GateId> parts;
  for (const auto& x : oc) {
    if (x) parts.push_back(*x);
  }
  if (parts.empty()) {
    out.set_output(out.add_const(0));
  } else {
    out.set_output(parts.size() == 1 ? parts[0] : out.add_add(parts));
  }
  h.components.assign(top + 1, std::nullopt);
  h.circuit = std::move(out);
  for (int k = 0; k <= top; ++k) h.components[k] = oc[k];
  return h;
}

Circuit homogenize_component(const Circuit& c, int k) {
  Homogenized h = homogenize(c);
  Circuit base = h.circuit;
  if (k < 0 || k >= static_cast<int>(h.components.size()) || !h.components[k]) {
    Circuit z(c.name(), c.field(), c.num_vars());
    z.set_output(z.add_const(0));
    return z;
  }
  base.set_output(*h.components[k]);
  return fold_constants(base);
}

namespace {

bool formally_homogeneous(const Circuit& c) {
  auto live = c.live_mask();
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gate(static_cast<GateId>(i));
    if (!live[i] || g.kind != GateKind::Add) continue;
    for (GateId ch : g.children) {
      if (c.gate(ch).formal_degree != g.formal_degree) return false;
    }
  }
  return true;
}

}  // namespace

Circuit binarize_left_heavy(const Circuit& c) {
  if (!formally_homogeneous(c)) throw PreconditionError("binarize_left_heavy requires a homogeneous circuit");
  Circuit out(c.name(), c.field(), c.num_vars());
  auto live = c.live_mask();
  std::vector<GateId> remap(c.gate_count(), 0);
  auto deg = [&](GateId g) { return out.gate(g).formal_degree; };
  auto mul2 = [&](GateId a, GateId b) {
    if (deg(a) < deg(b)) std::swap(a, b);
    return out.add_mul({a, b});
  };

  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gate(static_cast<GateId>(i));
    std::vector<GateId> kids;
    for (GateId ch : g.children) kids.push_back(remap[ch]);
    switch (g.kind) {
      case GateKind::Input: remap[i] = out.add_input(static_cast<Var>(g.value)); break;
      case GateKind::Const: remap[i] = out.add_const(g.value); break;
      case GateKind::Add: {
        GateId acc = kids[0];
        for (std::size_t j = 1; j < kids.size(); ++j) acc = out.add_add({acc, kids[j]});
        remap[i] = acc;
        break;
      }
      case GateKind::Mul: {
        // Repeatedly pair the two lowest-degree operands (ties by position).
        while (kids.size() > 1) {
          std::stable_sort(kids.begin(), kids.end(), [&](GateId a, GateId b) { return deg(a) < deg(b); });
          GateId m = mul2(kids[1], kids[0]);
          kids.erase(kids.begin(), kids.begin() + 2);
          kids.push_back(m);
        }
        remap[i] = kids[0];
        break;
      }
    }
  }
  out.set_output(remap[c.output()]);
  return out;
}

// ---------------------------------------------------------------------------
// Exchange format

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_u64(const std::string& s, u64& v) {
  if (s.empty()) return false;
  v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
    v = v * 10 + static_cast<u64>(ch - '0');
  }
  return true;
}

std::string strip_prefix(const std::string& tok, const char* prefix) {
  std::string p(prefix);
  if (tok.rfind(p, 0) != 0) return {};
  return tok.substr(p.size());
}

}  // namespace

Circuit parse_circuit(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  auto tokens_of = [](std::string line) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    // "gate g1=add g0" is accepted as well as "gate g1 = add g0".
    auto first = split_ws(line);
    if (first.empty() || first[0] != "gate") return first;
    std::string spaced;
    for (char ch : line) {
      if (ch == '=') {
        spaced += " = ";
      } else {
        spaced += ch;
      }
    }
    return split_ws(spaced);
  };

  // Pre-scan so that forward references and unknown ids get distinct messages.
  std::map<std::string, std::size_t> defined_at;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto t = tokens_of(lines[ln]);
    if (t.size() >= 2 && t[0] == "gate") defined_at.emplace(t[1], ln + 1);
  }

  std::optional<Circuit> c;
  std::map<std::string, GateId> ids;
  bool have_output = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    auto t = tokens_of(lines[ln]);
    if (t.empty()) continue;
    if (t[0] == "circuit") {
      if (c) throw ParseError(lineno, "duplicate circuit header");
      if (t.size() != 4) throw ParseError(lineno, "expected 'circuit <name> p=<modulus> nvars=<n>'");
      u64 p = 0, n = 0;
      if (!parse_u64(strip_prefix(t[2], "p="), p)) throw ParseError(lineno, "bad modulus '" + t[2] + "'");
      if (!parse_u64(strip_prefix(t[3], "nvars="), n)) throw ParseError(lineno, "bad nvars '" + t[3] + "'");
      if (!is_prime_u64(p)) throw ParseError(lineno, "modulus " + std::to_string(p) + " is not prime");
      c.emplace(t[1], PrimeField(p), static_cast<std::size_t>(n));
      continue;
    }
    if (!c) throw ParseError(lineno, "missing circuit header");
    if (t[0] == "output") {
      if (t.size() != 2) throw ParseError(lineno, "expected 'output <id>'");
      auto it = ids.find(t[1]);
      if (it == ids.end()) throw ParseError(lineno, "unknown gate id '" + t[1] + "'");
      if (have_output) throw ParseError(lineno, "duplicate output statement");
      c->set_output(it->second);
      have_output = true;
      continue;
    }
    if (t[0] != "gate") throw ParseError(lineno, "unknown statement '" + t[0] + "'");
    if (t.size() < 5 || t[2] != "=") throw ParseError(lineno, "expected 'gate <id> = <kind> ...'");
    const std::string& id = t[1];
    if (ids.count(id)) throw ParseError(lineno, "gate id '" + id + "' defined twice");
    const std::string& kind = t[3];
    GateId g = 0;
    if (kind == "var") {
      if (t.size() != 5) throw ParseError(lineno, "var takes one index");
      std::string idx = t[4];
      if (!idx.empty() && idx[0] == 'x') idx = idx.substr(1);
      u64 k = 0;
      if (!parse_u64(idx, k)) throw ParseError(lineno, "bad variable index '" + t[4] + "'");
      if (k >= c->num_vars()) throw ParseError(lineno, "variable index " + std::to_string(k) + " >= nvars");
      g = c->add_input(static_cast<Var>(k));
    } else if (kind == "const") {
      if (t.size() != 5) throw ParseError(lineno, "const takes one value");
      std::string v = t[4];
      bool negative = !v.empty() && v[0] == '-';
      if (negative) v = v.substr(1);
      u64 x = 0;
      if (!parse_u64(v, x)) throw ParseError(lineno, "bad constant '" + t[4] + "'");
      x = c->field().reduce(x);
      g = c->add_const(negative ? c->field().neg(x) : x);
    } else if (kind == "add" || kind == "mul") {
      std::vector<GateId> kids;
      for (std::size_t j = 4; j < t.size(); ++j) {
        auto it = ids.find(t[j]);
        if (it != ids.end()) {
          kids.push_back(it->second);
          continue;
        }
        if (t[j] == id) throw ParseError(lineno, "cyclic reference: gate '" + id + "' uses itself");
        auto later = defined_at.find(t[j]);
        if (later != defined_at.end()) {
          throw ParseError(lineno, "gate '" + t[j] + "' used before its definition on line " +
                                       std::to_string(later->second) + " (gates must be in topological order)");
        }
        throw ParseError(lineno, "unknown gate id '" + t[j] + "'");
      }
      g = kind == "add" ? c->add_add(std::move(kids)) : c->add_mul(std::move(kids));
    } else {
      throw ParseError(lineno, "unknown gate kind '" + kind + "'");
    }
    ids.emplace(id, g);
  }
  if (!c) throw ParseError(lines.size(), "missing circuit header");
  if (!have_output) throw ParseError(lines.size(), "missing output statement");
  return std::move(*c);
}

std::string serialize(const Circuit& c, const GateAnnotations& notes) {
  std::ostringstream os;
  os << "circuit " << c.name() << " p=" << c.field().modulus() << " nvars=" << c.num_vars() << "\n";
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    auto it = notes.find(static_cast<GateId>(i));
    if (it != notes.end()) {
      for (const auto& line : it->second) os << "# " << line << "\n";
    }
    const Gate& g = c.gate(static_cast<GateId>(i));
    os << "gate g" << i << " = ";
    switch (g.kind) {
      case GateKind::Input: os << "var " << g.value; break;
      case GateKind::Const: os << "const " << g.value; break;
      case GateKind::Add:
      case GateKind::Mul:
        os << (g.kind == GateKind::Add ? "add" : "mul");
        for (GateId ch : g.children) os << " g" << ch;
        break;
    }
    os << "\n";
  }
  if (c.has_output()) os << "output g" << c.output() << "\n";
  return os.str();
}

}  // namespace chasm
