#include <cmath>
#include <limits>

#include "core/blocks.hpp"
#include "core/errors.hpp"
#include "core/source.hpp"
#include "doctest.h"

using namespace blowup;

namespace {

// Independent direct-summation oracle for ||psi||_p^p over the first k
// tower blocks: sum of phi_n^p (phi_n^-4 - phi_n^-8).
double tower_lp_oracle(double p, int k) {
  double sum = 0.0;
  for (int n = 0; n < k; ++n) {
    double phin = std::exp2(std::exp2(n));
    sum += std::pow(phin, p) * (std::pow(phin, -4.0) - std::pow(phin, -8.0));
  }
  return sum;
}

}  // namespace

TEST_CASE("tower blocks tile (0, 1/16) with matching endpoints") {
  BlockFunction psi = build_example_d_blocks(8);
  REQUIRE(psi.gen.has_value());
  CHECK(psi.gen->n_max == 8);
  CHECK(psi.gen->n_explicit == 7);
  REQUIRE(psi.blocks.size() == 8);

  // Sorted ascending: deepest level first. Block n is [phi_n^-8, phi_n^-4).
  CHECK(psi.blocks.back().value == 2.0);
  CHECK(psi.blocks.back().lo == std::exp2(-8.0));
  CHECK(psi.blocks.back().hi == std::exp2(-4.0));
  CHECK(psi.blocks.front().lo == std::exp2(-1024.0));  // subnormal but exact

  // Adjacency is the tiling identity phi_{n+1}^-4 == phi_n^-8.
  for (std::size_t i = 0; i + 1 < psi.blocks.size(); ++i)
    CHECK(psi.blocks[i].hi == psi.blocks[i + 1].lo);

  // Values double-exponentiate: 2, 4, 16, 256, ...
  CHECK(psi.blocks[psi.blocks.size() - 2].value == 4.0);
  CHECK(psi.blocks[psi.blocks.size() - 3].value == 16.0);

  psi.validate();
}

TEST_CASE("validate rejects malformed block sets") {
  BlockFunction b;
  b.L = 1.0;
  b.blocks = {{0.2, 0.1, 1.0}};  // lo >= hi
  CHECK_THROWS_AS(b.validate(), Error);
  b.blocks = {{0.1, 0.3, 1.0}, {0.2, 0.4, 1.0}};  // overlap
  CHECK_THROWS_AS(b.validate(), Error);
  b.blocks = {{0.1, 0.2, -1.0}};  // negative value
  CHECK_THROWS_AS(b.validate(), Error);
  b.blocks = {{0.5, 1.5, 1.0}};  // beyond L
  CHECK_THROWS_AS(b.validate(), Error);
  b.blocks = {{0.1, 0.2, 1.0}, {0.3, 0.5, 2.0}};
  b.validate();
}

TEST_CASE("truncation at 16 collapses the unbounded tail into three blocks") {
  BlockFunction psi = build_example_d_blocks(8);
  BlockFunction cut = truncate(psi, 16.0);
  CHECK(!cut.gen.has_value());
  REQUIRE(cut.blocks.size() == 3);
  CHECK(cut.blocks[0].lo == 0.0);
  CHECK(cut.blocks[0].hi == std::exp2(-16.0));
  CHECK(cut.blocks[0].value == 16.0);
  CHECK(cut.blocks[1].lo == std::exp2(-16.0));
  CHECK(cut.blocks[1].hi == std::exp2(-8.0));
  CHECK(cut.blocks[1].value == 4.0);
  CHECK(cut.blocks[2].hi == std::exp2(-4.0));
  CHECK(cut.blocks[2].value == 2.0);
  cut.validate();

  // Truncating between levels merges every clipped block into one.
  BlockFunction low = truncate(psi, 3.0);
  REQUIRE(low.blocks.size() == 2);
  CHECK(low.blocks[0].value == 3.0);
  CHECK(low.blocks[0].lo == 0.0);
  CHECK(low.blocks[0].hi == std::exp2(-8.0));
  CHECK(low.blocks[1].value == 2.0);

  CHECK_THROWS_AS((void)truncate(psi, 0.0), Error);
  CHECK_THROWS_AS((void)truncate(psi, 1e300), Error);  // collapse needs M < 2^256
}

TEST_CASE("L^2 series certificate: convergent with the frozen partial sum") {
  BlockFunction psi = build_example_d_blocks(8);
  SeriesVerdict v = lp_norm_block(psi, 2.0, 4);
  CHECK(v.kind == SeriesKind::Convergent);
  REQUIRE(v.partial_sums.size() >= 4);
  CHECK(v.partial_sums[3] == doctest::Approx(0.30055230855906238).epsilon(1e-12));
  CHECK(v.partial_sums[3] == doctest::Approx(tower_lp_oracle(2.0, 4)).epsilon(1e-13));
  CHECK(v.sum_is_upper_bound);
  CHECK(v.sum >= v.partial_sums.back());
  CHECK(v.sum <= 0.300552309);  // the tail beyond 4 terms is ~1e-10
}

TEST_CASE("L^4 series certificate: divergent with term floor 1 - phi_n^-4") {
  BlockFunction psi = build_example_d_blocks(8);
  SeriesVerdict v = lp_norm_block(psi, 4.0, 6);
  CHECK(v.kind == SeriesKind::Divergent);
  CHECK(v.n0 == 0);
  CHECK(v.c >= 0.9374);  // term_0 = 15/16, snapped down by 1e-12
  CHECK(v.c <= 0.9375);
  REQUIRE(v.partial_sums.size() >= 3);
  CHECK(v.partial_sums[0] == doctest::Approx(15.0 / 16.0).epsilon(1e-14));
  CHECK(v.partial_sums[1] - v.partial_sums[0] ==
        doctest::Approx(255.0 / 256.0).epsilon(1e-14));
  CHECK(v.partial_sums[2] - v.partial_sums[1] ==
        doctest::Approx(1.0 - std::exp2(-16.0)).epsilon(1e-14));
}

TEST_CASE("L^1 and intermediate exponents stay convergent") {
  BlockFunction psi = build_example_d_blocks(8);
  for (double p : {1.0, 2.0, 3.0, 3.9}) {
    SeriesVerdict v = lp_norm_block(psi, p, 4);
    CAPTURE(p);
    CHECK(v.kind == SeriesKind::Convergent);
    CHECK(v.sum_is_upper_bound);
    CHECK(v.sum >= tower_lp_oracle(p, 6));
  }
  // Exactly p = 4 and above: divergent.
  CHECK(lp_norm_block(psi, 4.0, 4).kind == SeriesKind::Divergent);
  CHECK(lp_norm_block(psi, 7.0, 4).kind == SeriesKind::Divergent);
}

TEST_CASE("explicit block data sums exactly") {
  BlockFunction b;
  b.L = 1.0;
  b.blocks = {{0.0, 0.25, 2.0}, {0.5, 1.0, 3.0}};
  SeriesVerdict v = lp_norm_block(b, 2.0, 1);
  CHECK(v.kind == SeriesKind::Convergent);
  CHECK(v.sum == doctest::Approx(4.0 * 0.25 + 9.0 * 0.5).epsilon(1e-15));
  CHECK(!v.sum_is_upper_bound);  // exact, not an upper bound
}

TEST_CASE("evolution moves values, not intervals") {
  BlockFunction cut = truncate(build_example_d_blocks(8), 16.0);
  PiecewiseSource sq = source_from_spec("s_squared");

  // t = 0.01: every level is still alive; v = z / (1 - z t).
  EvolvedBlocks e = evolve_block(cut, sq, 0.01);
  CHECK(e.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(e.entries[i].lo == cut.blocks[i].lo);
    CHECK(e.entries[i].fate == BlockFate::Alive);
    double z = cut.blocks[i].value;
    CHECK(e.entries[i].value == doctest::Approx(z / (1.0 - z * 0.01)).epsilon(1e-8));
  }
  CHECK(e.marked_measure == 0.0);
  // Ambient zero data stays zero under f(0) = 0.
  CHECK(e.ambient.value == 0.0);
  CHECK(e.ambient_measure == doctest::Approx(1.0 - std::exp2(-4.0)).epsilon(1e-15));

  // t = 0.3: levels 16 and 4 have blown (T = 1/16, 1/4); level 2 (T = 1/2)
  // has not.
  EvolvedBlocks late = evolve_block(cut, sq, 0.3);
  CHECK(late.entries[0].fate == BlockFate::BlownUp);
  CHECK(late.entries[0].blowup_time == doctest::Approx(1.0 / 16.0).epsilon(1e-8));
  CHECK(late.entries[1].fate == BlockFate::BlownUp);
  CHECK(late.entries[2].fate == BlockFate::Alive);
  CHECK(late.marked_measure == doctest::Approx(std::exp2(-8.0)).epsilon(1e-15));
  CHECK(lp_norm_evolved(late, 2.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("generated data evolves with an honest out-of-range deep region") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource lin = make_linear_source(1.0, 0.0);  // u' = u
  EvolvedBlocks e = evolve_block(psi, lin, 0.5);
  REQUIRE(!e.entries.empty());
  CHECK(e.entries.front().fate == BlockFate::OutOfRange);
  CHECK(e.entries.front().lo == 0.0);
  // The explicit levels scale by e^t.
  CHECK(e.entries.back().value == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-8));
  CHECK_THROWS_AS((void)lp_norm_evolved(e, 2.0), Error);
}

TEST_CASE("certificate: t = 0 reduces to the data norm") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource fd = build_example_d(8);
  SeriesVerdict v = instantaneous_blowup_certificate(fd, psi, 0.0, 8);
  CHECK(v.kind == SeriesKind::Convergent);
  CHECK(v.sum <= 0.300552309);
}

TEST_CASE("certificate: pointwise blow-up dominates when the probe is finite") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource sq = source_from_spec("s_squared");
  SeriesVerdict v = instantaneous_blowup_certificate(sq, psi, 0.5, 8);
  CHECK(v.kind == SeriesKind::Divergent);
  CHECK(v.c == 1.0);  // a set of positive measure is at +inf: any floor works
  CHECK(v.note.find("measure") != std::string::npos);
}

TEST_CASE("certificate: growth floor for the staircase, c = t_eff^2 / 8 from n0 = 2") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource fd = build_example_d(8);
  for (double t : {0.01, 0.1, 0.5}) {
    SeriesVerdict v = instantaneous_blowup_certificate(fd, psi, t, 20);
    CAPTURE(t);
    CHECK(v.kind == SeriesKind::Divergent);
    CHECK(v.n0 == 2);
    CHECK(v.c == doctest::Approx(t * t / 8.0).epsilon(1e-15));
    CHECK(v.partial_sums.size() >= 19);
  }
  // Beyond t = 1/2 the floor freezes at t_eff = 1/2 (the collar-width margin).
  SeriesVerdict v2 = instantaneous_blowup_certificate(fd, psi, 2.0, 8);
  CHECK(v2.kind == SeriesKind::Divergent);
  CHECK(v2.c == doctest::Approx(0.5 * 0.5 / 8.0).epsilon(1e-15));
}

TEST_CASE("certificate: uniformly Lipschitz sources yield a convergent envelope") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource lin = make_linear_source(1.0, -1.0);  // f(u) = u - 1
  SeriesVerdict v = instantaneous_blowup_certificate(lin, psi, 1.0, 8);
  CHECK(v.kind == SeriesKind::Convergent);
  CHECK(v.sum_is_upper_bound);
  // e^t ||psi||_2 + (e^t - 1): with ||psi||_2 ~ 0.5482 the bound is ~3.2.
  double norm0 = std::sqrt(0.30055230855906238);
  double bound = std::exp(1.0) * norm0 + (std::exp(1.0) - 1.0);
  CHECK(std::sqrt(v.sum) == doctest::Approx(bound).epsilon(1e-4));
}

TEST_CASE("certificate: inconclusive when no tool applies") {
  BlockFunction psi = build_example_d_blocks(8);
  // u log u: no finite-time blow-up from z = 2, no uniform Lipschitz bound,
  // no staircase metadata, and the domain [1, inf) cannot hold ambient 0.
  PiecewiseSource ul = source_from_spec("s_log_s");
  SeriesVerdict v = instantaneous_blowup_certificate(ul, psi, 0.5, 8);
  CHECK(v.kind == SeriesKind::Inconclusive);
}

TEST_CASE("onset measure telescopes exactly for tower data") {
  BlockFunction psi = build_example_d_blocks(8);
  PiecewiseSource sq = source_from_spec("s_squared");

  // T(z) = 1/z: at t = 1/2 the blown set is { psi >= 2 } = all blocks.
  OnsetMeasure m = blowup_onset_measure(sq, psi, 0.5);
  CHECK(m.pointwise_blowup);
  CHECK(m.level == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m.measure == std::exp2(-4.0));  // exact telescoped tail

  // t = 1/16: level 16 = phi_2, tail measure phi_2^-4 = 2^-16.
  OnsetMeasure m2 = blowup_onset_measure(sq, psi, 1.0 / 16.0);
  CHECK(m2.level == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(m2.measure == std::exp2(-16.0));

  // t = 0.3: level 10/3 sits between phi_1 = 4's reach; blocks with value
  // >= 4 are the n >= 1 tail of measure phi_1^-4 = 2^-8.
  OnsetMeasure m3 = blowup_onset_measure(sq, psi, 0.3);
  CHECK(m3.measure == std::exp2(-8.0));

  // t past T(1): every positive value has blown; level clamps to 1.
  OnsetMeasure m4 = blowup_onset_measure(sq, psi, 2.0);
  CHECK(m4.level == 1.0);
  CHECK(m4.measure == std::exp2(-4.0));

  // A source with no pointwise blow-up marks nothing.
  OnsetMeasure none = blowup_onset_measure(build_example_d(8), psi, 0.5);
  CHECK(!none.pointwise_blowup);
  CHECK(none.measure == 0.0);
}

TEST_CASE("powerlaw norm closed form") {
  // ||v(t)||_p^p = 1 / (1 - r p e^t) for data x^-r under u' = u log u.
  PowerlawNorm n0 = powerlaw_norm_example_c(0.25, 2.0, 0.0);
  CHECK(!n0.blown);
  CHECK(n0.value == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(n0.blowup_time == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  PowerlawNorm n1 = powerlaw_norm_example_c(0.25, 2.0, 0.5);
  CHECK(!n1.blown);
  CHECK(n1.value == doctest::Approx(1.0 / (1.0 - 0.5 * std::exp(0.5))).epsilon(1e-14));

  PowerlawNorm n2 = powerlaw_norm_example_c(0.25, 2.0, 0.7);
  CHECK(n2.blown);  // ln 2 ~ 0.693 < 0.7

  // r p >= 1 means the data is not even in L^p at t = 0.
  CHECK_THROWS_AS((void)powerlaw_norm_example_c(0.5, 2.0, 0.0), Error);
}

TEST_CASE("block json round trip") {
  BlockFunction psi = build_example_d_blocks(6);
  BlockFunction back = BlockFunction::from_json(psi.to_json());
  CHECK(back.blocks.size() == psi.blocks.size());
  REQUIRE(back.gen.has_value());
  CHECK(back.gen->n_max == psi.gen->n_max);
  for (std::size_t i = 0; i < psi.blocks.size(); ++i) {
    CHECK(back.blocks[i].lo == psi.blocks[i].lo);
    CHECK(back.blocks[i].value == psi.blocks[i].value);
  }
  CHECK_THROWS_AS((void)blocks_from_spec("no-such-data"), Error);
}

TEST_CASE("tower term law in the log domain") {
  // |block_n| = phi_n^-4 - phi_n^-8.
  CHECK(tower_block_log2_measure(0) ==
        doctest::Approx(std::log2(1.0 / 16.0 - 1.0 / 256.0)).epsilon(1e-15));
  CHECK(tower_block_log2_measure(2) ==
        doctest::Approx(std::log2(std::exp2(-16.0) - std::exp2(-32.0))).epsilon(1e-15));
  // L^p term = phi_n^(p-4) (1 - phi_n^-4): p = 4 terms approach 1 from below.
  CHECK(tower_block_log2_term(4.0, 0) == doctest::Approx(std::log2(15.0 / 16.0)).epsilon(1e-15));
  CHECK(tower_block_log2_term(4.0, 30) == doctest::Approx(0.0).epsilon(1e-9));
  // Deep levels where nothing fits in doubles anymore.
  CHECK(tower_block_log2_term(2.0, 50) < -1e14);
  CHECK(tower_block_log2_term(5.0, 50) > 1e14);
}
