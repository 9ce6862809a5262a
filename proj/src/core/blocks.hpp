#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "core/kinetics.hpp"
#include "core/source.hpp"

namespace blowup {

/// Piecewise-constant nonnegative data on (0, L]: disjoint half-open blocks
/// [lo, hi) with constant values, zero off the blocks.
struct BlockFunction {
  struct Block {
    double lo, hi, value;
  };
  std::vector<Block> blocks;  // sorted by lo, pairwise disjoint
  double L = 1.0;

  /// Tower generator: logically, block n is [phi_n^-8, phi_n^-4) with value
  /// phi_n for every n; `blocks` materializes the float-representable ones.
  struct TowerGen {
    int n_max = 0;
    int n_explicit = 0;
  };
  std::optional<TowerGen> gen;

  void validate() const;
  nlohmann::json to_json() const;
  static BlockFunction from_json(const nlohmann::json& j);
};

/// Tower block data with value phi_n on [phi_n^-8, phi_n^-4). Blocks are
/// float-representable through n = 7 (the n = 7 lower endpoint is subnormal);
/// deeper levels live only in the generator.
BlockFunction build_example_d_blocks(int n_max);

/// Resolve a CLI-style data spec: "example-d[:n_max]", "@path/to/data.json",
/// or inline JSON starting with '{'.
BlockFunction blocks_from_spec(const std::string& spec);

/// Pointwise min(psi, M). For generated data the sub-float region near 0,
/// where every remaining level exceeds M, collapses into one explicit block
/// of value M; the result carries no generator. Requires finite M in
/// (0, 2^256) so the collapse is valid.
BlockFunction truncate(const BlockFunction& psi, double M);

/// log2 of |block_n| = phi_n^-4 - phi_n^-8 for the tower generator.
double tower_block_log2_measure(int n);
/// log2 of the L^p series term phi_n^p * |block_n|.
double tower_block_log2_term(double p, int n);

enum class SeriesKind { Convergent, Divergent, Inconclusive };

struct SeriesVerdict {
  SeriesKind kind = SeriesKind::Inconclusive;
  double sum = 0.0;  // Convergent: value, or a certified upper bound
  double err = 0.0;
  bool sum_is_upper_bound = false;
  int n0 = 0;      // Divergent: term_n >= c for all n >= n0
  double c = 0.0;
  std::vector<double> partial_sums;
  int terms = 0;
  std::string note;

  nlohmann::json to_json() const;
};

/// Sum of value_n^p * |block_n| with a three-way verdict. Explicit block
/// functions get the exact finite sum; generated ones are classified from
/// the tower term law (monotone terms for p >= 4, geometric ratios below).
SeriesVerdict lp_norm_block(const BlockFunction& psi, double p, int n_terms);

enum class BlockFate { Alive, BlownUp, OutOfRange };

struct EvolvedBlocks {
  struct Entry {
    double lo, hi;
    BlockFate fate = BlockFate::Alive;
    double value = 0.0;        // Alive
    double blowup_time = 0.0;  // BlownUp
  };
  std::vector<Entry> entries;
  /// The complementary region (0, L] minus the blocks carries data 0 and
  /// evolves too; its flow value and total measure live here.
  Entry ambient;
  double ambient_measure = 0.0;
  double t = 0.0;
  double marked_measure = 0.0;  // total length of blown-up blocks
  double L = 1.0;
};

/// Evolves each explicit block value along u' = f(u). Block intervals and
/// measures are untouched; only values move.
EvolvedBlocks evolve_block(const BlockFunction& psi, const PiecewiseSource& f, double t,
                           const IntegratorOptions& opts = {});

/// L^p norm to the p of evolved data; +inf when any block has blown up.
/// OutOfRange entries make the norm undecidable in doubles and raise.
double lp_norm_evolved(const EvolvedBlocks& e, double p);

/// Verdict on ||u(t)||_2^2 for data psi evolved along f. Divergent verdicts
/// carry an explicit (n0, c) term floor; Convergent ones a certified bound.
SeriesVerdict instantaneous_blowup_certificate(const PiecewiseSource& f,
                                               const BlockFunction& psi, double t, int n_probe);

struct OnsetMeasure {
  double measure = 0.0;
  bool pointwise_blowup = false;
  double level = 0.0;  // data threshold whose blow-up time equals t
};

/// Measure of { x : psi(x) >= level(t) } where level(t) solves T(level) = t;
/// for generated tower data the tail telescopes to phi_{n*}^-4 exactly.
OnsetMeasure blowup_onset_measure(const PiecewiseSource& f, const BlockFunction& psi, double t,
                                  double tol = 1e-12);

struct PowerlawNorm {
  bool blown = false;
  double value = 0.0;        // ||v(t)||_p^p when finite
  double blowup_time = 0.0;  // log(1/(r p)) regardless
};

/// Closed-form ||v(t)||_p^p = 1 / (1 - r p e^t) for v evolving from x^-r
/// on (0, 1] under u' = u log u.
PowerlawNorm powerlaw_norm_example_c(double r, double p, double t);

}  // namespace blowup
