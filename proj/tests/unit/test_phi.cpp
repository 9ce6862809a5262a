#include <cmath>
#include <random>

#include "core/log2_scalar.hpp"
#include "core/phi.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("phi sequence values") {
  CHECK(phi::phi_n(0) == 2.0);
  CHECK(phi::phi_n(1) == 4.0);
  CHECK(phi::phi_n(2) == 16.0);
  CHECK(phi::phi_n(3) == 256.0);
  CHECK(phi::phi_n(4) == 65536.0);
  CHECK(phi::log2_phi(10) == 1024.0);

  PhiSequence p5 = PhiSequence::at(5);
  CHECK(p5.log2_value == 32);
  REQUIRE(p5.float_value.has_value());
  CHECK(*p5.float_value == 4294967296.0);
  CHECK(p5.squared().log2_value == 64);

  PhiSequence p12 = PhiSequence::at(12);
  CHECK(p12.log2_value == 4096);
  CHECK(!p12.float_value.has_value());
}

TEST_CASE("collar coefficients match hand-expanded integers") {
  CHECK(phi::a_n(1) == 10.0);
  CHECK(phi::b_n(1) == -33.0);
  CHECK(phi::a_n(2) == 228.0);
  CHECK(phi::b_n(2) == -3522.0);
  CHECK(phi::a_n(3) == 65040.0);
  CHECK(phi::b_n(3) == -16617480.0);
  CHECK(phi::a_n_decimal(3) == "65040");
  CHECK(phi::b_n_decimal(3) == "-16617480");

  // a_n = x^4 - 2x^2 + x at x = phi_{n-1} is exactly representable through
  // n = 5; beyond that the correction terms drop below half an ulp of x^4,
  // so the nearest double is x^4 on both sides of the comparison.
  for (int n = 1; n <= phi::kFloatCoeffMax; ++n) {
    double x = phi::phi_n(n - 1);
    double direct = x * x * x * x - 2.0 * x * x + x;
    CHECK(phi::a_n(n) == direct);
    CHECK(doctest::Approx(phi::collar_slope_log(n).to_double()).epsilon(1e-12) == direct);
  }
}

TEST_CASE("collar continuity residuals vanish exactly in rational arithmetic") {
  for (int n = 1; n <= 8; ++n) {
    std::string residuals;
    CHECK(phi::collar_continuity_exact(n, &residuals));
    CAPTURE(n);
    CAPTURE(residuals);
  }
  // Deep levels still glue exactly; this is the reason for the integer backend.
  // The high-side residual reads phi_{n+1}, so the deepest checkable level is
  // kExactMax - 1.
  CHECK(phi::collar_continuity_exact(20));
  CHECK(phi::collar_continuity_exact(phi::kExactMax - 1));
}

TEST_CASE("derived level quantities") {
  // Plateau after collar 2 carries phi_3 - phi_2.
  CHECK(phi::plateau_value_log(2).to_double() == doctest::Approx(240.0).epsilon(1e-14));
  // Collar 2 midpoint value (phi_3 - phi_1) / 2 = 126.
  CHECK(phi::collar_midpoint_value_log(2).to_double() == doctest::Approx(126.0).epsilon(1e-14));
  // Collar entry value phi_2 - phi_1 = 12.
  CHECK(phi::collar_entry_value_log(2).to_double() == doctest::Approx(12.0).epsilon(1e-14));
  // phi_n^k in the log domain for indices far beyond doubles.
  CHECK(phi::phi_pow_log(12, -4.0).l2 == doctest::Approx(-4.0 * 4096.0));
}

TEST_CASE("LogScalar round trips and saturation") {
  CHECK(LogScalar::from_double(0.0).is_zero());
  CHECK(LogScalar::zero().to_double() == 0.0);
  CHECK(LogScalar::one().to_double() == 1.0);
  CHECK(LogScalar::from_double(-8.0).sign == -1);
  CHECK(LogScalar::from_double(-8.0).l2 == 3.0);
  CHECK(LogScalar::from_log2(100000.0).to_double() ==
        std::numeric_limits<double>::infinity());
  CHECK(LogScalar::from_log2(-100000.0).to_double() == 0.0);
  CHECK(LogScalar::from_log2(100000.0, -1).to_double() ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("LogScalar arithmetic agrees with doubles on random inputs") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> mag(-30.0, 30.0);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 2000; ++i) {
    double x = (coin(rng) ? 1.0 : -1.0) * std::exp2(mag(rng));
    double y = (coin(rng) ? 1.0 : -1.0) * std::exp2(mag(rng));
    LogScalar lx = LogScalar::from_double(x);
    LogScalar ly = LogScalar::from_double(y);
    CAPTURE(x);
    CAPTURE(y);
    CHECK((lx * ly).to_double() == doctest::Approx(x * y).epsilon(1e-12));
    CHECK((lx / ly).to_double() == doctest::Approx(x / y).epsilon(1e-12));
    double s = x + y;
    // Skip catastrophic cancellation: the type documents that contract.
    if (std::fabs(s) > 1e-6 * (std::fabs(x) + std::fabs(y)))
      CHECK((lx + ly).to_double() == doctest::Approx(s).epsilon(1e-9));
    CHECK(lx.compare(ly) == (x < y ? -1 : (x > y ? 1 : 0)));
    CHECK(lx.pow_abs(3.0).to_double() ==
          doctest::Approx(std::pow(std::fabs(x), 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("LogScalar handles exponents far outside double range") {
  LogScalar big = LogScalar::from_log2(1.0e6);
  LogScalar prod = big * big;
  CHECK(prod.l2 == doctest::Approx(2.0e6));
  // (big + big) / big == 2 exactly in the log domain.
  CHECK((big + big) / big > LogScalar::from_double(1.999999));
  CHECK((big - big).is_zero());
  CHECK(big.pow_abs(-2.0).l2 == doctest::Approx(-2.0e6));
}

TEST_CASE("log-domain helper identities") {
  for (double d : {-0.5, -2.0, -10.0, -40.0}) {
    CHECK(log2_one_plus_exp2(d) ==
          doctest::Approx(std::log2(1.0 + std::exp2(d))).epsilon(1e-14));
    CHECK(log2_one_minus_exp2(d) ==
          doctest::Approx(std::log2(1.0 - std::exp2(d))).epsilon(1e-14));
  }
  // Far tails where the naive form underflows to log2(1) = 0.
  CHECK(log2_one_plus_exp2(-100.0) ==
        doctest::Approx(std::exp2(-100.0) / std::log(2.0)).epsilon(1e-12));
  CHECK(log2_one_minus_exp2(-100.0) ==
        doctest::Approx(-std::exp2(-100.0) / std::log(2.0)).epsilon(1e-12));
}
