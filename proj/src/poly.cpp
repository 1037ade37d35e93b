#include "chasm/poly.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace chasm {

Monomial Monomial::var(Var v, std::uint32_t e) {
  Monomial m;
  if (e > 0) {
    m.pairs_.emplace_back(v, e);
    m.degree_ = e;
  }
  return m;
}

Monomial Monomial::from_pairs(std::vector<std::pair<Var, std::uint32_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  Monomial m;
  for (const auto& [v, e] : pairs) {
    if (e == 0) continue;
    if (!m.pairs_.empty() && m.pairs_.back().first == v) {
      m.pairs_.back().second += e;
    } else {
      m.pairs_.emplace_back(v, e);
    }
    m.degree_ += e;
  }
  return m;
}

std::uint32_t Monomial::exponent(Var v) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::make_pair(v, std::uint32_t{0}));
  return (it != pairs_.end() && it->first == v) ? it->second : 0;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  r.pairs_.reserve(pairs_.size() + o.pairs_.size());
  auto a = pairs_.begin();
  auto b = o.pairs_.begin();
  while (a != pairs_.end() || b != o.pairs_.end()) {
    if (b == o.pairs_.end() || (a != pairs_.end() && a->first < b->first)) {
      r.pairs_.push_back(*a++);
    } else if (a == pairs_.end() || b->first < a->first) {
      r.pairs_.push_back(*b++);
    } else {
      r.pairs_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  r.degree_ = degree_ + o.degree_;
  return r;
}

bool Monomial::operator<(const Monomial& o) const {
  if (degree_ != o.degree_) return degree_ < o.degree_;
  return pairs_ < o.pairs_;
}

std::size_t Monomial::hash() const {
  std::size_t h = 0xcbf29ce484222325ull;
  for (const auto& [v, e] : pairs_) {
    h ^= (static_cast<std::size_t>(v) << 20) ^ e;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string Monomial::to_string() const {
  std::string s;
  for (const auto& [v, e] : pairs_) {
    if (!s.empty()) s += '*';
    s += 'x' + std::to_string(v);
    if (e > 1) s += '^' + std::to_string(e);
  }
  return s.empty() ? "1" : s;
}

SparsePoly SparsePoly::constant(PrimeField field, std::size_t num_vars, u64 c) {
  SparsePoly p(field, num_vars);
  c = field.reduce(c);
  if (c != 0) p.terms_.emplace_back(Monomial{}, c);
  return p;
}

SparsePoly SparsePoly::variable(PrimeField field, std::size_t num_vars, Var v) {
  SparsePoly p(field, num_vars);
  p.terms_.emplace_back(Monomial::var(v), 1);
  return p;
}

SparsePoly SparsePoly::from_terms(PrimeField field, std::size_t num_vars, std::vector<Term> terms) {
  SparsePoly p(field, num_vars);
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
  for (auto& t : terms) {
    u64 c = field.reduce(t.second);
    if (!p.terms_.empty() && p.terms_.back().first == t.first) {
      p.terms_.back().second = field.add(p.terms_.back().second, c);
    } else {
      p.terms_.emplace_back(std::move(t.first), c);
    }
  }
  std::erase_if(p.terms_, [](const Term& t) { return t.second == 0; });
  return p;
}

int SparsePoly::degree() const {
  return terms_.empty() ? -1 : static_cast<int>(terms_.back().first.degree());
}

bool SparsePoly::is_homogeneous() const {
  return terms_.empty() || terms_.front().first.degree() == terms_.back().first.degree();
}

u64 SparsePoly::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Monomial& x) { return t.first < x; });
  return (it != terms_.end() && it->first == m) ? it->second : 0;
}

SparsePoly SparsePoly::operator+(const SparsePoly& o) const {
  SparsePoly r(field_, std::max(num_vars_, o.num_vars_));
  r.terms_.reserve(terms_.size() + o.terms_.size());
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  while (a != terms_.end() || b != o.terms_.end()) {
    if (b == o.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      r.terms_.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      r.terms_.push_back(*b++);
    } else {
      u64 c = field_.add(a->second, b->second);
      if (c != 0) r.terms_.emplace_back(a->first, c);
      ++a;
      ++b;
    }
  }
  return r;
}

SparsePoly SparsePoly::operator-() const {
  SparsePoly r = *this;
  for (auto& t : r.terms_) t.second = field_.neg(t.second);
  return r;
}

SparsePoly SparsePoly::operator-(const SparsePoly& o) const { return *this + (-o); }

SparsePoly SparsePoly::scaled(u64 c) const {
  c = field_.reduce(c);
  SparsePoly r(field_, num_vars_);
  if (c == 0) return r;
  r.terms_ = terms_;
  for (auto& t : r.terms_) t.second = field_.mul(t.second, c);
  return r;
}

SparsePoly SparsePoly::mul_capped(const SparsePoly& o, std::size_t cap) const {
  SparsePoly r(field_, std::max(num_vars_, o.num_vars_));
  if (terms_.empty() || o.terms_.empty()) return r;
  if (terms_.size() == 1 && terms_[0].first.empty()) return o.scaled(terms_[0].second);
  if (o.terms_.size() == 1 && o.terms_[0].first.empty()) return scaled(o.terms_[0].second);
  std::unordered_map<Monomial, u64, MonomialHash> acc;
  acc.reserve(std::min(terms_.size() * o.terms_.size(), cap + 1));
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      auto [it, fresh] = acc.try_emplace(ma * mb, 0);
      it->second = field_.add(it->second, field_.mul(ca, cb));
      if (fresh && acc.size() > cap) {
        throw CapExceeded("monomial cap of " + std::to_string(cap) + " exceeded");
      }
    }
  }
  r.terms_.reserve(acc.size());
  for (auto& [m, c] : acc) {
    if (c != 0) r.terms_.emplace_back(m, c);
  }
  std::sort(r.terms_.begin(), r.terms_.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
  return r;
}

SparsePoly SparsePoly::operator*(const SparsePoly& o) const {
  return mul_capped(o, static_cast<std::size_t>(-1));
}

SparsePoly SparsePoly::homogeneous_component(int k) const {
  return filter([k](const Monomial& m) { return static_cast<int>(m.degree()) == k; });
}

SparsePoly SparsePoly::filter(const std::function<bool(const Monomial&)>& keep) const {
  SparsePoly r(field_, num_vars_);
  for (const auto& t : terms_) {
    if (keep(t.first)) r.terms_.push_back(t);
  }
  return r;
}

u64 SparsePoly::evaluate(std::span<const u64> point) const {
  u64 acc = 0;
  for (const auto& [m, c] : terms_) {
    u64 v = c;
    for (const auto& [x, e] : m.pairs()) {
      if (x >= point.size()) throw PreconditionError("evaluation point too short");
      v = field_.mul(v, field_.pow(point[x], e));
    }
    acc = field_.add(acc, v);
  }
  return acc;
}

std::string SparsePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    if (!s.empty()) s += " + ";
    const auto& [m, c] = *it;
    if (m.empty()) {
      s += std::to_string(c);
    } else if (c == 1) {
      s += m.to_string();
    } else {
      s += std::to_string(c) + '*' + m.to_string();
    }
  }
  return s;
}

namespace {

struct PolyLexer {
  std::string_view s;
  std::size_t i = 0;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool at_digit() {
    skip();
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
  }
  u64 number() {
    skip();
    if (!at_digit()) throw Error("expected number in polynomial near '" + std::string(s.substr(i)) + "'");
    u64 v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      v = v * 10 + static_cast<u64>(s[i] - '0');
      ++i;
    }
    return v;
  }
};

}  // namespace

SparsePoly SparsePoly::parse(std::string_view text, PrimeField field, std::size_t num_vars) {
  PolyLexer lx{text};
  std::vector<Term> terms;
  lx.skip();
  if (lx.i < text.size() && text.substr(lx.i) == "0") return SparsePoly(field, num_vars);
  for (;;) {
    bool negative = lx.eat('-');
    u64 coeff = 1;
    std::vector<std::pair<Var, std::uint32_t>> pairs;
    bool need_factor = true;
    while (need_factor) {
      if (lx.at_digit()) {
        coeff = field.mul(coeff, field.reduce(lx.number()));
      } else if (lx.eat('x')) {
        Var v = static_cast<Var>(lx.number());
        if (v >= num_vars) throw Error("variable x" + std::to_string(v) + " out of range");
        std::uint32_t e = 1;
        if (lx.eat('^')) e = static_cast<std::uint32_t>(lx.number());
        pairs.emplace_back(v, e);
      } else {
        throw Error("malformed polynomial term");
      }
      need_factor = lx.eat('*');
    }
    if (negative) coeff = field.neg(coeff);
    terms.emplace_back(Monomial::from_pairs(std::move(pairs)), coeff);
    lx.skip();
    if (lx.i >= text.size()) break;
    if (!lx.eat('+')) {
      if (lx.i < text.size() && text[lx.i] == '-') continue;
      throw Error("expected '+' in polynomial near '" + std::string(text.substr(lx.i)) + "'");
    }
  }
  return from_terms(field, num_vars, std::move(terms));
}

}  // namespace chasm
