#include <cmath>

#include "core/errors.hpp"
#include "core/phi.hpp"
#include "core/source.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("anchored affine pieces avoid breakpoint cancellation") {
  // Collar 3 in raw slope*s + intercept form loses ~14 digits at s = 255.5;
  // the anchored form is exact at the anchor and first-order accurate off it.
  Piece p = Piece::affine_anchored(255.5, 256.5, phi::a_n(3), 255.5, 240.0);
  CHECK(p.start_value() == 240.0);
  CHECK(p.end_value() == doctest::Approx(240.0 + 65040.0).epsilon(1e-15));
  CHECK(p.eval(256.0) == doctest::Approx(240.0 + 0.5 * 65040.0).epsilon(1e-15));
}

TEST_CASE("staircase source evaluates the documented values") {
  PiecewiseSource f = build_example_d(8);
  REQUIRE(f.phi_meta().has_value());
  CHECK(f.phi_meta()->n_max == 8);
  CHECK(f.phi_meta()->n_explicit == 8);
  CHECK(f.coverage_lo() == 0.0);

  CHECK(f.eval(0.0) == 2.0);    // base piece
  CHECK(f.eval(3.0) == 2.0);
  CHECK(f.eval(3.75) == 4.5);   // collar 1: 10 s - 33
  CHECK(f.eval(4.5) == 12.0);   // plateau 1: phi_2 - phi_1
  CHECK(f.eval(10.0) == 12.0);
  CHECK(f.eval(16.0) == 126.0); // collar 2 midpoint: (phi_3 - phi_1) / 2
  CHECK(f.eval(100.0) == 240.0);  // plateau 2: phi_3 - phi_2
  // Collar 4 midpoint: (phi_5 - phi_3) / 2 = (2^32 - 256) / 2.
  CHECK(f.eval(65536.0) == doctest::Approx(2147483520.0).epsilon(1e-15));

  // The source never dips: it is bounded below by 2 everywhere sampled.
  for (double s : {0.0, 1.0, 3.6, 4.2, 8.0, 20.0, 300.0, 1e5, 1e30})
    CHECK(f.eval(s) >= 2.0);
}

TEST_CASE("staircase tail is a truncation, not a lie") {
  PiecewiseSource f = build_example_d(8);
  // Explicit pieces stop at phi_9; beyond that evaluation refuses instead
  // of silently repeating a constant.
  CHECK(f.coverage_hi() == doctest::Approx(std::exp2(512.0)).epsilon(1e-15));
  CHECK_THROWS_AS((void)f.eval(1e160), Error);
  CHECK_THROWS_AS((void)f.eval(-1.0), Error);  // below coverage
}

TEST_CASE("collars collapse onto breakpoints once narrower than one ulp") {
  PiecewiseSource f = build_example_d(8);
  // n = 6: phi_6 = 2^64; 2^64 - 0.5 rounds back to 2^64, so there is no
  // affine piece, only plateaus meeting at the breakpoint.
  double p6 = std::exp2(64.0);
  CHECK(f.eval(std::nextafter(p6, 0.0)) == doctest::Approx(p6 - std::exp2(32.0)).epsilon(1e-9));
  CHECK(f.eval(p6) == doctest::Approx(std::exp2(128.0) - p6).epsilon(1e-9));
}

TEST_CASE("lipschitz_on reports slopes and jumps") {
  PiecewiseSource f = build_example_d(4);
  auto rep = f.lipschitz_on(0.0, 4.0);
  CHECK(!rep.has_jump);
  CHECK(rep.bound == 10.0);  // collar 1 slope dominates
  auto flat = f.lipschitz_on(5.0, 15.0);
  CHECK(flat.bound == 0.0);

  PiecewiseSource g = make_linear_source(3.0, -1.0);
  CHECK(g.lipschitz_on(-10.0, 10.0).bound == 3.0);
}

TEST_CASE("source json round trip preserves evaluation") {
  for (const char* spec : {"example-d:6", "linear:2:1", "constant:3", "example-c"}) {
    PiecewiseSource f = source_from_spec(spec);
    PiecewiseSource g = PiecewiseSource::from_json(f.to_json());
    CHECK(g.name() == f.name());
    CHECK(g.pieces().size() == f.pieces().size());
    for (double s : {1.0, 2.5, 4.0, 17.0}) {
      if (s < f.coverage_lo()) continue;
      CHECK(g.eval(s) == f.eval(s));
    }
    CHECK(g.phi_meta().has_value() == f.phi_meta().has_value());
  }
}

TEST_CASE("source_from_spec rejects junk") {
  CHECK_THROWS_AS((void)source_from_spec("no-such-source"), Error);
  CHECK_THROWS_AS((void)source_from_spec(""), Error);
  CHECK_THROWS_AS((void)source_from_spec("{not json"), Error);
}

TEST_CASE("reciprocal integral closed forms") {
  // Constant piece: integral of 1/c.
  PiecewiseSource c2 = make_constant_source(2.0);
  CHECK(reciprocal_integral(c2, 0.0, 3.0).value == doctest::Approx(1.5).epsilon(1e-14));

  // Affine piece f = s: integral of 1/s = log ratio.
  PiecewiseSource lin = make_linear_source(1.0, 0.0);
  CHECK(reciprocal_integral(lin, 1.0, std::exp(1.0)).value ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Not positive on the range: refuse.
  CHECK_THROWS_AS((void)reciprocal_integral(lin, -1.0, 1.0), Error);

  // Analytic piece s^2 on [1, 2]: 1 - 1/2.
  PiecewiseSource sq = source_from_spec("s_squared");
  CHECK(reciprocal_integral(sq, 1.0, 2.0).value == doctest::Approx(0.5).epsilon(1e-10));
}
