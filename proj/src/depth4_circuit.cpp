#include "chasm/depth4_circuit.hpp"

#include <sstream>

#include "chasm/circuit.hpp"

namespace chasm {

int Summand::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.degree();
  return d;
}

void DepthFourCircuit::add_summand(Summand s) {
  if (s.factors.empty()) throw PreconditionError("summand needs at least one factor");
  for (const auto& f : s.factors) {
    if (f.is_zero()) throw PreconditionError("summand factors must be nonzero");
  }
  summands_.push_back(std::move(s));
}

u64 DepthFourCircuit::evaluate(std::span<const u64> point) const {
  if (point.size() != num_vars_) throw PreconditionError("point arity does not match depth-4 circuit");
  u64 acc = 0;
  for (const auto& s : summands_) {
    u64 prod = 1;
    for (const auto& f : s.factors) prod = field_.mul(prod, f.evaluate(point));
    acc = field_.add(acc, prod);
  }
  return acc;
}

SparsePoly DepthFourCircuit::expand(std::size_t monomial_cap) const {
  SparsePoly total(field_, num_vars_);
  for (const auto& s : summands_) {
    SparsePoly prod = SparsePoly::constant(field_, num_vars_, 1);
    for (const auto& f : s.factors) prod = prod.mul_capped(f, monomial_cap);
    total = total + prod;
    if (total.size() > monomial_cap) throw CapExceeded("monomial cap exceeded while expanding depth-4 circuit");
  }
  return total;
}

std::optional<std::string> DepthFourCircuit::validate() const {
  for (std::size_t i = 0; i < summands_.size(); ++i) {
    const auto& s = summands_[i];
    int sum = 0;
    for (std::size_t j = 0; j < s.factors.size(); ++j) {
      int deg = s.factors[j].degree();
      if (deg < 1 || deg > t_) {
        return "summand " + std::to_string(i) + " factor " + std::to_string(j) + " has degree " +
               std::to_string(deg) + " outside [1, " + std::to_string(t_) + "]";
      }
      if (homogeneous_ && !s.factors[j].is_homogeneous()) {
        return "summand " + std::to_string(i) + " factor " + std::to_string(j) + " is not homogeneous";
      }
      sum += deg;
    }
    if (homogeneous_ && sum != d_) {
      return "summand " + std::to_string(i) + " has degree " + std::to_string(sum) + ", expected " +
             std::to_string(d_);
    }
  }
  return std::nullopt;
}

std::string DepthFourCircuit::serialize() const {
  std::ostringstream os;
  os << "depth4 p=" << field_.modulus() << " nvars=" << num_vars_ << " d=" << d_ << " t=" << t_ << "\n";
  for (const auto& s : summands_) {
    os << "summand";
    for (const auto& f : s.factors) os << " (" << f.to_string() << ")";
    if (!s.provenance.empty()) {
      os << " #";
      for (const auto& p : s.provenance) os << " " << p;
    }
    os << "\n";
  }
  return os.str();
}

namespace {

bool header_field(const std::string& tok, const std::string& key, u64& out) {
  if (tok.rfind(key + "=", 0) != 0) return false;
  std::string v = tok.substr(key.size() + 1);
  if (v.empty()) return false;
  out = 0;
  for (char ch : v) {
    if (ch < '0' || ch > '9') return false;
    out = out * 10 + static_cast<u64>(ch - '0');
  }
  return true;
}

}  // namespace

DepthFourCircuit DepthFourCircuit::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<DepthFourCircuit> out;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    std::vector<std::string> prov;
    auto hash = body.find('#');
    if (hash != std::string::npos) {
      std::istringstream ps(body.substr(hash + 1));
      std::string tok;
      while (ps >> tok) prov.push_back(tok);
      body.resize(hash);
    }
    std::istringstream ls(body);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "depth4") {
      u64 p = 0, n = 0, d = 0, t = 0;
      std::string a, b, c, e;
      if (!(ls >> a >> b >> c >> e) || !header_field(a, "p", p) || !header_field(b, "nvars", n) ||
          !header_field(c, "d", d) || !header_field(e, "t", t)) {
        throw ParseError(lineno, "expected 'depth4 p=<p> nvars=<n> d=<d> t=<t>'");
      }
      if (!is_prime_u64(p)) throw ParseError(lineno, "modulus is not prime");
      out.emplace(PrimeField(p), n, static_cast<int>(d), static_cast<int>(t));
      continue;
    }
    if (!out) throw ParseError(lineno, "missing depth4 header");
    if (head != "summand") throw ParseError(lineno, "unknown statement '" + head + "'");
    Summand s;
    std::string rest = body.substr(body.find("summand") + 7);
    std::size_t i = 0;
    while (true) {
      auto open = rest.find('(', i);
      if (open == std::string::npos) break;
      auto close = rest.find(')', open);
      if (close == std::string::npos) throw ParseError(lineno, "unbalanced parenthesis");
      try {
        s.factors.push_back(SparsePoly::parse(rest.substr(open + 1, close - open - 1), out->field_, out->num_vars_));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(lineno, e.what());
      }
      i = close + 1;
    }
    s.provenance = std::move(prov);
    try {
      out->add_summand(std::move(s));
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!out) throw ParseError(lineno, "missing depth4 header");
  bool hom = true;
  for (const auto& s : out->summands_) {
    if (s.degree() != out->d_) hom = false;
    for (const auto& f : s.factors) hom = hom && f.is_homogeneous();
  }
  out->homogeneous_ = hom;
  return std::move(*out);
}

}  // namespace chasm
