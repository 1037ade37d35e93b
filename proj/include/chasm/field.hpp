#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chasm {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an operation's input was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A size cap (monomials, summands, search budget) was hit.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr u64 kMersenne61 = (u64{1} << 61) - 1;

/// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime_u64(u64 n);

/// Prime field Z/pZ for a 64-bit prime p. Elements are plain residues in [0, p).
class PrimeField {
 public:
  PrimeField() = default;
  explicit PrimeField(u64 p);

  u64 modulus() const { return p_; }

  u64 reduce(u64 x) const { return x % p_; }
  u64 from_signed(std::int64_t x) const;

  u64 add(u64 a, u64 b) const {
    u64 s = a + b;
    if (s >= p_ || s < a) s -= p_;
    return s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + (p_ - b); }
  u64 neg(u64 a) const { return a == 0 ? 0 : p_ - a; }
  u64 mul(u64 a, u64 b) const {
    u128 z = static_cast<u128>(a) * b;
    if (p_ == kMersenne61) {
      u64 lo = static_cast<u64>(z) & kMersenne61;
      u64 hi = static_cast<u64>(z >> 61);
      u64 s = lo + hi;
      return s >= kMersenne61 ? s - kMersenne61 : s;
    }
    return static_cast<u64>(z % p_);
  }
  u64 pow(u64 a, u64 e) const;
  /// Inverse via Fermat; throws on zero.
  u64 inv(u64 a) const;

  bool operator==(const PrimeField& o) const { return p_ == o.p_; }

 private:
  u64 p_ = kMersenne61;
};

/// Strong value type for a residue tagged with its modulus.
struct FieldElement {
  u64 value = 0;
  u64 modulus = kMersenne61;

  bool operator==(const FieldElement&) const = default;
};

}  // namespace chasm
