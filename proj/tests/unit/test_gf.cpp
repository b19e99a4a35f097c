#include <gtest/gtest.h>

#include "nctomo/gf.hpp"

using namespace nctomo;

TEST(GaloisField, KnownProductInGf8) {
  const GaloisField f(3, 0b1011);
  EXPECT_EQ(f.mul(0b011, 0b011), 0b101u);
  EXPECT_EQ(f.mul(0b010, 0b100), 0b011u);  // x * x^2 = x^3 = x + 1
}

TEST(GaloisField, AxiomsExhaustiveSmallFields) {
  for (unsigned k = 1; k <= 5; ++k) {
    const GaloisField f(k);
    const auto q = static_cast<std::uint32_t>(f.order());
    for (std::uint32_t a = 0; a < q; ++a) {
      if (a) {
        EXPECT_EQ(f.mul(a, f.inv(a)), 1u) << "k=" << k << " a=" << a;
      }
      for (std::uint32_t b = 0; b < q; ++b)
        for (std::uint32_t c = 0; c < q; ++c) {
          ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
          ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
    }
  }
}

TEST(GaloisField, TableAndShiftReduceAgree) {
  // k = 16 uses log tables; the same multiplication done by hand must agree
  const GaloisField f(16);
  for (std::uint32_t a : {1u, 2u, 3u, 0x1234u, 0xffffu})
    for (std::uint32_t b : {1u, 7u, 0x8000u, 0xabcdu}) {
      std::uint64_t r = 0, x = a;
      for (std::uint32_t bb = b; bb; bb >>= 1) {
        if (bb & 1) r ^= x;
        x <<= 1;
        if (x >> 16) x ^= f.polynomial();
      }
      EXPECT_EQ(f.mul(a, b), r);
    }
}

TEST(GaloisField, LargeFieldWithoutTables) {
  const GaloisField f(20);
  for (std::uint32_t a : {1u, 5u, 0x12345u, 0xfffffu}) EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
}

TEST(GaloisField, RejectsBadInput) {
  EXPECT_THROW(GaloisField(0), DomainError);
  EXPECT_THROW(GaloisField(33), DomainError);
  EXPECT_THROW(GaloisField(3, 0b1001), DomainError);  // x^3 + 1 = (x + 1)(x^2 + x + 1)
  EXPECT_THROW(GaloisField(3, 0b111), DomainError);   // degree mismatch
  const GaloisField f(3);
  EXPECT_THROW(f.mul(8, 1), std::out_of_range);
  EXPECT_THROW(f.inv(0), DomainError);
}

TEST(GaloisField, IrreducibilityOfDefaults) {
  for (unsigned k = 1; k <= 32; ++k) EXPECT_TRUE(is_irreducible(default_polynomial(k))) << k;
  EXPECT_FALSE(is_irreducible(0b101));  // x^2 + 1 = (x + 1)^2
}
