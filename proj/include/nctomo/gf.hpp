#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nctomo/error.hpp"

namespace nctomo {

/// Default primitive polynomial for GF(2^k), bit i = coefficient of x^i.
inline std::uint64_t default_polynomial(unsigned k) {
  static constexpr std::array<std::uint64_t, 33> table = {
      0x0,        0x3,        0x7,        0xB,        0x13,        0x25,       0x43,
      0x89,       0x11D,      0x211,      0x409,      0x805,       0x1053,     0x201B,
      0x4443,     0x8003,     0x1100B,    0x20009,    0x40081,     0x80027,    0x100009,
      0x200005,   0x400003,   0x800021,   0x1000087,  0x2000009,   0x4000047,  0x8000027,
      0x10000009, 0x20000005, 0x40800007, 0x80000009, 0x100400007};
  if (k < 1 || k > 32) throw DomainError("field exponent k must be in [1, 32], got " + std::to_string(k));
  return table[k];
}

namespace detail {

inline int poly_degree(std::uint64_t p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

inline std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m) {
  const int dm = poly_degree(m);
  for (int da = poly_degree(a); da >= dm; da = poly_degree(a)) a ^= m << (da - dm);
  return a;
}

// a*b mod m for polynomials of degree < deg(m) <= 32.
inline std::uint64_t poly_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  const int dm = poly_degree(m);
  const std::uint64_t top = std::uint64_t{1} << dm;
  std::uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & top) a ^= m;
  }
  return r;
}

inline std::uint64_t poly_gcd(std::uint64_t a, std::uint64_t b) {
  while (b) {
    a = poly_mod(a, b);
    std::swap(a, b);
  }
  return a;
}

}  // namespace detail

/// Irreducibility over GF(2): trial division for degree <= 16, Rabin's test above.
inline bool is_irreducible(std::uint64_t poly) {
  const int k = detail::poly_degree(poly);
  if (k < 1) return false;
  if (k == 1) return true;
  if (!(poly & 1)) return false;
  if (k <= 16) {
    for (std::uint64_t d = 2; detail::poly_degree(d) <= k / 2; ++d)
      if (detail::poly_mod(poly, d) == 0) return false;
    return true;
  }
  // Rabin: x^(2^k) == x mod f, and gcd(x^(2^(k/p)) - x, f) == 1 for each prime p | k.
  auto frobenius = [&](int times) {
    std::uint64_t x = 2;
    for (int i = 0; i < times; ++i) x = detail::poly_mulmod(x, x, poly);
    return x;
  };
  if (frobenius(k) != 2) return false;
  int n = k;
  for (int p = 2; p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    if (detail::poly_gcd(poly, frobenius(k / p) ^ 2) != 1) return false;
  }
  return true;
}

/// Arithmetic in GF(2^k), 1 <= k <= 32. Elements are integers < 2^k.
class GaloisField {
 public:
  explicit GaloisField(unsigned k) : GaloisField(k, default_polynomial(k)) {}

  GaloisField(unsigned k, std::uint64_t polynomial) : k_(k), poly_(polynomial) {
    if (k < 1 || k > 32) throw DomainError("field exponent k must be in [1, 32], got " + std::to_string(k));
    if (detail::poly_degree(polynomial) != static_cast<int>(k))
      throw DomainError("polynomial degree does not match k");
    if (!is_irreducible(polynomial)) throw DomainError("polynomial is not irreducible over GF(2)");
    if (k <= 16) build_tables();
  }

  unsigned k() const noexcept { return k_; }
  std::uint64_t polynomial() const noexcept { return poly_; }
  /// q = 2^k.
  std::uint64_t order() const noexcept { return std::uint64_t{1} << k_; }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    check(a);
    check(b);
    return a ^ b;
  }

  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    check(a);
    check(b);
    return mul_unchecked(a, b);
  }

  /// Hot-path multiply without range checks; operands must already be valid.
  std::uint32_t mul_unchecked(std::uint32_t a, std::uint32_t b) const noexcept {
    if (a == 0 || b == 0) return 0;
    if (tables_) {
      const auto& t = *tables_;
      return t.exp[t.log[a] + t.log[b]];
    }
    return static_cast<std::uint32_t>(detail::poly_mulmod(a, b, poly_));
  }

  std::uint32_t pow(std::uint32_t a, std::uint64_t n) const {
    check(a);
    std::uint32_t result = 1, base = a;
    while (n) {
      if (n & 1) result = mul_unchecked(result, base);
      base = mul_unchecked(base, base);
      n >>= 1;
    }
    return result;
  }

  std::uint32_t inv(std::uint32_t a) const {
    check(a);
    if (a == 0) throw DomainError("zero has no multiplicative inverse");
    return pow(a, order() - 2);
  }

 private:
  struct Tables {
    std::vector<std::uint32_t> exp;  // doubled so log[a] + log[b] indexes directly
    std::vector<std::uint32_t> log;
  };

  void check(std::uint32_t a) const {
    if (k_ < 32 && (std::uint64_t{a} >> k_) != 0)
      throw std::out_of_range("operand " + std::to_string(a) + " out of range for GF(2^" + std::to_string(k_) + ")");
  }

  void build_tables() {
    const std::uint32_t q1 = static_cast<std::uint32_t>(order() - 1);
    auto t = std::make_shared<Tables>();
    t->exp.assign(2 * std::size_t{q1}, 0);
    t->log.assign(order(), 0);
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < q1; ++i) {
      if (i > 0 && x == 1) return;  // x is not a generator: keep shift-and-reduce
      t->exp[i] = x;
      t->log[x] = i;
      x = static_cast<std::uint32_t>(detail::poly_mulmod(x, 2, poly_));
    }
    for (std::uint32_t i = 0; i < q1; ++i) t->exp[i + q1] = t->exp[i];
    tables_ = std::move(t);
  }

  unsigned k_;
  std::uint64_t poly_;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace nctomo
