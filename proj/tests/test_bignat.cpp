#include <doctest.h>

#include "cpt/bignat.hpp"
#include "cpt/rng.hpp"
#include "oracle.hpp"

using cpt::BigNat;

TEST_CASE("decimal round trip") {
  CHECK(BigNat::from_decimal("0").to_decimal() == "0");
  CHECK(BigNat::from_decimal("7").to_decimal() == "7");
  CHECK(BigNat::from_decimal("1000000000").to_decimal() == "1000000000");
  CHECK(BigNat::from_decimal("999999999999999999").to_decimal() == "999999999999999999");
  CHECK(BigNat::from_decimal("00042").to_decimal() == "42");
  CHECK(BigNat{1234567890123456789ull}.to_decimal() == "1234567890123456789");
}

TEST_CASE("digit count and zero") {
  CHECK(BigNat{}.is_zero());
  CHECK(BigNat::from_decimal("0").is_zero());
  CHECK(BigNat{}.digit_count() == 1);
  CHECK(BigNat::from_decimal("9").digit_count() == 1);
  CHECK(BigNat::from_decimal("10").digit_count() == 2);
  CHECK(BigNat::from_decimal("999999999").digit_count() == 9);
  CHECK(BigNat::from_decimal("1000000000").digit_count() == 10);
}

TEST_CASE("addition with carries across limbs") {
  auto sum = BigNat::from_decimal("999999999999999999") + BigNat::from_decimal("1");
  CHECK(sum.to_decimal() == "1000000000000000000");
  CHECK((BigNat{0} + BigNat{0}).to_decimal() == "0");
  CHECK((BigNat::from_decimal("705537514349043") + BigNat::from_decimal("5488395726938"))
            .to_decimal() == "711025910075981");
}

TEST_CASE("subtraction with borrows") {
  auto diff = BigNat::from_decimal("1000000000000000000") - BigNat::from_decimal("1");
  CHECK(diff.to_decimal() == "999999999999999999");
  CHECK((BigNat{5} - BigNat{5}).to_decimal() == "0");
  CHECK((BigNat::from_decimal("8488302") - BigNat::from_decimal("2456430")).to_decimal() ==
        "6031872");
}

TEST_CASE("multiplication") {
  CHECK((BigNat{0} * BigNat::from_decimal("123456")).to_decimal() == "0");
  CHECK((BigNat::from_decimal("38697082") * BigNat::from_decimal("4133991")).to_decimal() ==
        "159973388714262");
  CHECK((BigNat::from_decimal("999999999") * BigNat::from_decimal("999999999")).to_decimal() ==
        "999999998000000001");
}

TEST_CASE("comparisons") {
  CHECK(BigNat::from_decimal("100") == BigNat::from_decimal("100"));
  CHECK(BigNat::from_decimal("99") < BigNat::from_decimal("100"));
  CHECK(BigNat::from_decimal("100") <= BigNat::from_decimal("100"));
  CHECK_FALSE(BigNat::from_decimal("100") < BigNat::from_decimal("99"));
  CHECK(BigNat::from_decimal("999999999") < BigNat::from_decimal("1000000000"));
}

TEST_CASE("random cross-check against the digit-array oracle") {
  cpt::Rng rng(20260823);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t a = rng.uniform(0, 1'000'000'000'000'000ull);
    std::uint64_t b = rng.uniform(0, 1'000'000'000'000'000ull);
    std::string sa = std::to_string(a);
    std::string sb = std::to_string(b);
    CHECK((BigNat{a} + BigNat{b}).to_decimal() == cpt_oracle::add(sa, sb));
    if (a >= b) CHECK((BigNat{a} - BigNat{b} + BigNat{b}).to_decimal() == sa);
  }
  for (int i = 0; i < 50; ++i) {
    std::uint64_t a = rng.uniform(1, 100'000'000ull);
    std::uint64_t b = rng.uniform(1, 10'000'000ull);
    CHECK((BigNat{a} * BigNat{b}).to_decimal() ==
          cpt_oracle::multiply(std::to_string(a), std::to_string(b)));
  }
}
