#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "core/blocks.hpp"
#include "core/mesh.hpp"
#include "core/source.hpp"

namespace blowup {

/// IMEX theta scheme for u_t = u_xx + f(u) on (0, L) with Dirichlet ends:
/// diffusion weighted theta-implicitly, reaction explicit.
struct SolverConfig {
  double dt = 1e-4;
  double theta = 0.5;
  double horizon = 0.1;
  std::vector<double> norm_exponents = {1.0, 2.0};
  double record_dt = 0.0;  // <= 0: horizon / 256, floored at dt
  /// Sup threshold that stops the march and flags the run; blow-up is
  /// diagnosed against ODE envelopes, never by overflowing doubles.
  double overflow_guard = 1e12;
  long max_steps = 100000000;
};

struct NormTrace {
  std::vector<double> t;
  std::vector<double> exponents;
  std::vector<std::vector<double>> norms;  // norms[k][j] = ||u(t_j)||_{p_k}
  std::vector<double> sup;
};

struct RdResult {
  Mesh mesh;
  std::vector<double> u;  // nodal values at t_end, boundaries included
  double t_end = 0.0;
  long steps = 0;
  bool overflowed = false;
  double overflow_time = 0.0;
  /// Reaction arguments clamped up to coverage_lo (theta < 1 undershoots).
  long domain_clips = 0;
  NormTrace trace;
};

/// Averages psi over the dual cells of the interior nodes; boundaries get 0.
/// psi must be explicit (truncate generated data first).
std::vector<double> project_cell_averages(const BlockFunction& psi, const Mesh& mesh);

/// u0 holds nodal values including the two boundary entries.
RdResult rd_solve(const PiecewiseSource& f, const std::vector<double>& u0, const Mesh& mesh,
                  const SolverConfig& cfg);
/// Projects truncate(psi, truncation_M) and runs the march.
RdResult rd_solve_blocks(const PiecewiseSource& f, const BlockFunction& psi,
                         double truncation_M, const Mesh& mesh, const SolverConfig& cfg);

/// The spatially constant flow from sup u(0) is a supersolution; checks
/// sup u(t) stays below it along the recorded trace.
struct SupersolutionReport {
  bool ok = true;
  double max_excess = 0.0;
  struct Entry {
    double t, sup, envelope;
  };
  std::vector<Entry> entries;
};
SupersolutionReport supersolution_check(const PiecewiseSource& f, const RdResult& r,
                                        double tol = 1e-6);

struct LadderRung {
  double M = 0.0;
  double l2_t0 = 0.0, l2_end = 0.0, sup_end = 0.0;
  double l2_sup = 0.0;  // sup over the recorded trace of ||u||_2
  bool overflowed = false;
};
struct LadderReport {
  std::vector<LadderRung> rungs;
  bool nodewise_monotone = true;  // u_M <= u_M' at the horizon when M <= M'
  double max_monotonicity_violation = 0.0;
  bool norms_nondecreasing = true;  // ||u_M(t0)||_2 nondecreasing in M
  double t0 = 0.0, horizon = 0.0;

  nlohmann::json to_json() const;
};
/// Solves the truncated problems for each level in `levels` (ascending)
/// on one shared mesh and compares them: truncation is monotone, so the
/// fields and norms must be ordered.
LadderReport truncation_ladder(const PiecewiseSource& f, const BlockFunction& psi,
                               const std::vector<double>& levels, const Mesh& mesh,
                               const SolverConfig& cfg, double t0, int jobs = 1);

}  // namespace blowup
