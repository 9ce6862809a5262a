#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "core/analytic_registry.hpp"

namespace blowup {

enum class PieceKind { Constant, Affine, Analytic };

/// One half-open piece [lo, hi) of a reaction term. Affine pieces are
/// evaluated in anchored form value = anchor_value + slope * (s - anchor_s);
/// for tower collars this avoids the ~2^60 cancellation that the raw
/// slope*s + intercept form hits.
struct Piece {
  PieceKind kind = PieceKind::Constant;
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;                       // Constant
  double slope = 0.0, intercept = 0.0;      // Affine
  double anchor_s = 0.0, anchor_value = 0.0;
  const AnalyticFn* fn = nullptr;           // Analytic

  double eval(double s) const;
  /// Left limit of the value at hi; requires hi finite for non-constant pieces.
  double end_value() const;
  /// Value at the left endpoint lo.
  double start_value() const;

  static Piece constant(double lo, double hi, double value);
  static Piece affine(double lo, double hi, double slope, double intercept);
  static Piece affine_anchored(double lo, double hi, double slope, double anchor_s,
                               double anchor_value);
  static Piece analytic(double lo, double hi, const AnalyticFn* fn);
};

/// What the source means beyond the last explicit piece.
enum class TailRule {
  RepeatLastConstant,  // hold the final value; evaluation stays defined
  AnalyticExtension,   // construction continues by formula (tower sources)
  TruncationError,     // evaluation past coverage is an error
};

/// Marks a source as the tower staircase construction: explicit pieces are
/// a float-range truncation, and certificates may reason about levels up
/// to n_max through the log2-domain formulas.
struct PhiMeta {
  int n_max = 0;      // levels the construction logically carries
  int n_explicit = 0; // levels materialized as float pieces
};

class PiecewiseSource {
 public:
  PiecewiseSource(std::vector<Piece> pieces, TailRule tail,
                  std::optional<PhiMeta> phi = std::nullopt, std::string name = "");

  double eval(double s) const;
  double coverage_lo() const { return pieces_.front().lo; }
  double coverage_hi() const { return pieces_.back().hi; }
  /// Index of the piece containing s; pieces_.size() when s sits in the
  /// tail region (only meaningful for RepeatLastConstant).
  std::size_t piece_index(double s) const;

  struct LipschitzReport {
    double bound = 0.0;
    bool has_jump = false;
  };
  /// Best Lipschitz bound on the closed interval [lo, hi]. A value jump
  /// inside (lo, hi] makes the bound infinite and sets has_jump.
  LipschitzReport lipschitz_on(double lo, double hi) const;

  const std::vector<Piece>& pieces() const { return pieces_; }
  TailRule tail() const { return tail_; }
  const std::optional<PhiMeta>& phi_meta() const { return phi_; }
  const std::string& name() const { return name_; }
  /// Held value in the tail region under RepeatLastConstant.
  double tail_constant() const;

  nlohmann::json to_json() const;
  static PiecewiseSource from_json(const nlohmann::json& j);

 private:
  std::vector<Piece> pieces_;
  TailRule tail_;
  std::optional<PhiMeta> phi_;
  std::string name_;
};

/// ∫_a^b ds / f(s) with per-piece closed forms for constant and affine
/// pieces and adaptive quadrature for analytic ones. Errors if f is not
/// strictly positive on [a, b].
struct RecipIntegral {
  double value = 0.0;
  double err = 0.0;
};
RecipIntegral reciprocal_integral(const PiecewiseSource& f, double a, double b,
                                  double tol = 1e-10);
/// Same, restricted to one piece overlap; x0 < x1 within [p.lo, p.hi].
RecipIntegral reciprocal_piece_integral(const Piece& p, double x0, double x1, double tol);

/// u log u on [1, inf): power-law data flows to closed-form double
/// exponentials under this source.
PiecewiseSource build_example_c();
/// The staircase-with-ramps tower source: constant plateaus phi_{n+1} - phi_n
/// joined by affine collars of width 1 at each phi_n. Float pieces stop at
/// level min(n_max, 8); collars narrower than one ulp (n >= 6) collapse onto
/// the breakpoint.
PiecewiseSource build_example_d(int n_max);
PiecewiseSource make_constant_source(double c);
PiecewiseSource make_linear_source(double slope, double intercept);
/// Analytic registry function on [lo, inf).
PiecewiseSource make_analytic_source(const std::string& fn_name, double lo);
/// Resolve a CLI-style source spec: a builder name ("example-c",
/// "example-d[:n_max]", "s_squared", "linear[:a[:b]]", "zero", "exp_s",
/// "s_log_s") or "@path/to/source.json".
PiecewiseSource source_from_spec(const std::string& spec);

}  // namespace blowup
