#include "core/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/conditions.hpp"
#include "core/errors.hpp"
#include "core/log2_scalar.hpp"
#include "core/phi.hpp"

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
/// Deepest tower level whose block [phi_n^-8, phi_n^-4) has a representable
/// lower endpoint: 8 * 2^7 = 1024 <= 1074.
constexpr int kBlockFloatMax = 7;

const char* series_kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::Convergent:
      return "convergent";
    case SeriesKind::Divergent:
      return "divergent";
    case SeriesKind::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

double explicit_measure(const BlockFunction& psi) {
  double m = 0.0;
  for (const auto& b : psi.blocks) m += b.hi - b.lo;
  return m;
}

}  // namespace

void BlockFunction::validate() const {
  require(std::isfinite(L) && L > 0.0, Errc::invalid_argument, "block data: L must be positive");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    require(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi, Errc::invalid_argument,
            "block data: need lo < hi");
    require(b.lo >= 0.0 && b.hi <= L, Errc::invalid_argument,
            "block data: blocks must sit inside (0, L]");
    require(std::isfinite(b.value) && b.value >= 0.0, Errc::invalid_argument,
            "block data: values must be nonnegative");
    if (i + 1 < blocks.size())
      require(b.hi <= blocks[i + 1].lo, Errc::invalid_argument,
              "block data: blocks must be sorted and disjoint");
  }
  if (gen) {
    require(gen->n_explicit >= 0 && gen->n_explicit <= kBlockFloatMax, Errc::invalid_argument,
            "block data: generator n_explicit out of range");
    require(gen->n_max >= gen->n_explicit, Errc::invalid_argument,
            "block data: generator n_max below n_explicit");
    require(blocks.size() == static_cast<std::size_t>(gen->n_explicit) + 1,
            Errc::invalid_argument, "block data: generator expects blocks n = 0..n_explicit");
  }
}

nlohmann::json BlockFunction::to_json() const {
  nlohmann::json j;
  j["L"] = L;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : blocks) j["blocks"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"value", b.value}});
  if (gen) j["gen"] = {{"n_max", gen->n_max}, {"n_explicit", gen->n_explicit}};
  return j;
}

BlockFunction BlockFunction::from_json(const nlohmann::json& j) {
  BlockFunction out;
  try {
    out.L = j.at("L").get<double>();
    for (const auto& jb : j.at("blocks"))
      out.blocks.push_back({jb.at("lo").get<double>(), jb.at("hi").get<double>(),
                            jb.at("value").get<double>()});
    if (j.contains("gen"))
      out.gen = TowerGen{j["gen"].at("n_max").get<int>(), j["gen"].at("n_explicit").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::json, std::string("block data: ") + e.what());
  }
  out.validate();
  return out;
}

BlockFunction build_example_d_blocks(int n_max) {
  require(n_max >= 0 && n_max <= 40, Errc::invalid_argument,
          "tower blocks: n_max in [0, 40] required");
  BlockFunction psi;
  psi.L = 1.0;
  int n_expl = std::min(n_max, kBlockFloatMax);
  for (int n = n_expl; n >= 0; --n) {
    double e = std::exp2(n);
    psi.blocks.push_back({std::exp2(-8.0 * e), std::exp2(-4.0 * e), std::exp2(e)});
  }
  psi.gen = BlockFunction::TowerGen{n_max, n_expl};
  psi.validate();
  return psi;
}

BlockFunction blocks_from_spec(const std::string& spec) {
  require(!spec.empty(), Errc::invalid_argument, "block spec: empty");
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    require(in.good(), Errc::io, "block spec: cannot read " + spec.substr(1));
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::json, std::string("block spec: ") + e.what());
    }
    return BlockFunction::from_json(j);
  }
  if (spec[0] == '{') {
    try {
      return BlockFunction::from_json(nlohmann::json::parse(spec));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::json, std::string("block spec: ") + e.what());
    }
  }
  std::string name = spec;
  int n_max = 8;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    try {
      n_max = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      fail(Errc::invalid_argument, "block spec: bad level count in " + spec);
    }
  }
  require(name == "example-d", Errc::invalid_argument, "block spec: unknown builder " + name);
  return build_example_d_blocks(n_max);
}

BlockFunction truncate(const BlockFunction& psi, double M) {
  psi.validate();
  require(std::isfinite(M) && M > 0.0, Errc::invalid_argument,
          "truncate: finite M > 0 required");
  BlockFunction out;
  out.L = psi.L;
  if (!psi.gen) {
    out.blocks = psi.blocks;
    for (auto& b : out.blocks) b.value = std::min(b.value, M);
    out.validate();
    return out;
  }
  // Every generator level beyond the explicit ones carries value
  // phi_n >= phi_8 = 2^256, so for M below that the whole sub-float region
  // (0, phi_{n_expl}^-8) collapses onto the constant M.
  require(M < std::exp2(256.0), Errc::invalid_argument,
          "truncate: generated data needs M < 2^256 for the sub-float collapse");
  int n_expl = psi.gen->n_explicit;
  out.blocks.push_back({0.0, std::exp2(-8.0 * std::exp2(n_expl)), M});
  for (int n = n_expl; n >= 0; --n) {
    double e = std::exp2(n);
    out.blocks.push_back(
        {std::exp2(-8.0 * e), std::exp2(-4.0 * e), std::min(std::exp2(e), M)});
  }
  std::vector<BlockFunction::Block> merged;
  for (const auto& b : out.blocks) {
    if (!merged.empty() && merged.back().hi == b.lo && merged.back().value == b.value)
      merged.back().hi = b.hi;
    else
      merged.push_back(b);
  }
  out.blocks = std::move(merged);
  out.validate();
  return out;
}

double tower_block_log2_measure(int n) {
  require(n >= 0, Errc::invalid_argument, "tower measure: n >= 0 required");
  double e = 4.0 * std::exp2(n);
  return -e + log2_one_minus_exp2(-e);
}

double tower_block_log2_term(double p, int n) {
  return p * std::exp2(n) + tower_block_log2_measure(n);
}

SeriesVerdict lp_norm_block(const BlockFunction& psi, double p, int n_terms) {
  psi.validate();
  require(std::isfinite(p) && p >= 1.0, Errc::invalid_argument, "lp_norm: p >= 1 required");
  require(n_terms >= 1, Errc::invalid_argument, "lp_norm: n_terms >= 1 required");
  SeriesVerdict v;

  if (!psi.gen) {
    double sum = 0.0;
    for (const auto& b : psi.blocks) {
      sum += std::pow(b.value, p) * (b.hi - b.lo);
      v.partial_sums.push_back(sum);
    }
    v.kind = SeriesKind::Convergent;
    v.sum = sum;
    v.err = 4.0 * std::numeric_limits<double>::epsilon() * sum *
            static_cast<double>(psi.blocks.size() + 1);
    v.terms = static_cast<int>(psi.blocks.size());
    v.note = "exact finite sum over the explicit blocks";
    return v;
  }

  // Generated tower: term_n = phi_n^p |block_n| with
  // log2 term_n = (p - 4) 2^n + log2(1 - phi_n^-4).
  if (p >= 4.0) {
    // Both log2 summands are nondecreasing in n, so every term is at least
    // the first one.
    v.kind = SeriesKind::Divergent;
    v.n0 = 0;
    v.c = std::exp2(tower_block_log2_term(p, 0)) * (1.0 - 1e-12);
    v.sum = kInf;
    double run = 0.0;
    for (int n = 0; n < n_terms; ++n) {
      double l2 = tower_block_log2_term(p, n);
      if (l2 > 1020.0) break;
      run += std::exp2(l2);
      v.partial_sums.push_back(run);
    }
    v.terms = static_cast<int>(v.partial_sums.size());
    std::ostringstream os;
    os << "log2 term_n = (p - 4) 2^n + log2(1 - phi_n^-4) is nondecreasing for p >= 4; "
          "term_0 = "
       << std::exp2(tower_block_log2_term(p, 0)) << " floors every term";
    v.note = os.str();
    return v;
  }

  // p < 4: log-ratios (p - 4) 2^n + [log2(1 - phi_{n+1}^-4) - log2(1 - phi_n^-4)]
  // strictly decrease, so once a ratio drops below 1/2 the tail is geometric.
  int K = n_terms;
  auto log_ratio = [&](int n) {
    return tower_block_log2_term(p, n + 1) - tower_block_log2_term(p, n);
  };
  while (log_ratio(K - 1) > -1.0) ++K;
  double sum = 0.0;
  for (int n = 0; n < K; ++n) {
    sum += std::exp2(tower_block_log2_term(p, n));
    v.partial_sums.push_back(sum);
  }
  double r = std::exp2(log_ratio(K - 1));
  double tail = std::exp2(tower_block_log2_term(p, K - 1)) * r / (1.0 - r);
  v.kind = SeriesKind::Convergent;
  v.sum = sum + tail;
  v.err = tail + 8.0 * std::numeric_limits<double>::epsilon() * sum;
  v.sum_is_upper_bound = true;
  v.terms = K;
  std::ostringstream os;
  os << "terms summed through n = " << K - 1 << "; the decreasing log-ratio bounds the tail by "
     << tail;
  v.note = os.str();
  return v;
}

EvolvedBlocks evolve_block(const BlockFunction& psi, const PiecewiseSource& f, double t,
                           const IntegratorOptions& opts) {
  psi.validate();
  require(std::isfinite(t) && t >= 0.0, Errc::invalid_argument, "evolve: t >= 0 required");
  EvolvedBlocks out;
  out.t = t;
  out.L = psi.L;

  auto run = [&](double z0, double lo, double hi) {
    EvolvedBlocks::Entry e;
    e.lo = lo;
    e.hi = hi;
    try {
      FlowResult r = flow(f, z0, t, opts);
      if (r.status == FlowStatus::BlownUp) {
        e.fate = BlockFate::BlownUp;
        e.blowup_time = r.blowup_time;
      } else {
        e.fate = BlockFate::Alive;
        e.value = r.value;
      }
    } catch (const Error&) {
      e.fate = BlockFate::OutOfRange;
    }
    return e;
  };

  for (const auto& b : psi.blocks) {
    out.entries.push_back(run(b.value, b.lo, b.hi));
    if (out.entries.back().fate == BlockFate::BlownUp) out.marked_measure += b.hi - b.lo;
  }
  if (psi.gen) {
    // Generator levels beyond the explicit blocks hold values past the
    // double range; their region is reported, not evolved.
    EvolvedBlocks::Entry deep;
    deep.lo = 0.0;
    deep.hi = psi.blocks.empty() ? 0.0 : psi.blocks.front().lo;
    deep.fate = BlockFate::OutOfRange;
    if (deep.hi > deep.lo) out.entries.insert(out.entries.begin(), deep);
    out.ambient_measure = psi.L - std::exp2(-4.0);  // generator tiles (0, phi_0^-4)
  } else {
    out.ambient_measure = psi.L - explicit_measure(psi);
  }
  if (out.ambient_measure > 1e-12 * psi.L) {
    out.ambient = run(0.0, 0.0, 0.0);
    if (out.ambient.fate == BlockFate::BlownUp) out.marked_measure += out.ambient_measure;
  } else {
    out.ambient_measure = 0.0;
    out.ambient.fate = BlockFate::Alive;
    out.ambient.value = 0.0;
  }
  return out;
}

double lp_norm_evolved(const EvolvedBlocks& e, double p) {
  require(std::isfinite(p) && p >= 1.0, Errc::invalid_argument, "lp_norm: p >= 1 required");
  bool blown = false;
  double sum = 0.0;
  auto add = [&](const EvolvedBlocks::Entry& en, double measure) {
    switch (en.fate) {
      case BlockFate::OutOfRange:
        fail(Errc::range,
             "lp_norm: an evolved value left the double range; use the log2-domain "
             "certificates for this regime");
        break;
      case BlockFate::BlownUp:
        blown = true;
        break;
      case BlockFate::Alive:
        sum += std::pow(std::fabs(en.value), p) * measure;
        break;
    }
  };
  for (const auto& en : e.entries) add(en, en.hi - en.lo);
  add(e.ambient, e.ambient_measure);
  return blown ? kInf : sum;
}

namespace {

/// Smallest n >= 0 with phi_n >= level (relative snap 1e-9 keeps boundary
/// levels, e.g. phi_n exactly at the threshold, on the blown side).
int first_level_at_or_above(double level) {
  double l2 = std::log2(level * (1.0 - 1e-9));
  int n = 0;
  while (std::exp2(n) < l2) ++n;
  return n;
}

SeriesVerdict certificate_pointwise(const PiecewiseSource& f, double t, double probe_time,
                                    double tol) {
  SeriesVerdict v;
  int nstar = 0;
  double level = 2.0;
  if (probe_time > t) {
    double M = invert_blowup_time(f, t, tol);
    nstar = first_level_at_or_above(M);
    level = M;
  }
  v.kind = SeriesKind::Divergent;
  v.n0 = nstar;
  v.c = 1.0;
  v.sum = kInf;
  std::ostringstream os;
  os << "pointwise blow-up: every level n >= " << nstar << " has escape time T(phi_n) <= T("
     << level << ") <= " << t << ", so u(t) = infinity on measure 2^-(4*2^" << nstar
     << "); the term floor c is trivial";
  v.note = os.str();
  return v;
}

SeriesVerdict certificate_growth_floor(double t, int n_probe) {
  SeriesVerdict v;
  double t_eff = std::min(t, 0.5);
  double c = t_eff * t_eff / 8.0;

  // rho_n = (1 - 1/phi_n)^2 (1 - phi_n^-4) increases to 1; the per-block
  // floor is (t_eff^2/4) rho_n.
  auto rho_float = [](int n) {
    double x = std::exp2(-std::exp2(n));
    return (1.0 - x) * (1.0 - x) * (1.0 - std::exp2(-4.0 * std::exp2(n)));
  };
  int n0 = 1;
  while (rho_float(n0) < 0.75) ++n0;

  LogScalar one = LogScalar::one();
  LogScalar quarter_t2 = LogScalar::from_double(t_eff * t_eff / 4.0);
  LogScalar c_log = LogScalar::from_double(c);
  LogScalar rho_prev = LogScalar::zero();
  int n_hi = std::max(n_probe, 20);
  double run = 0.0;
  for (int n = n0; n <= n_hi; ++n) {
    LogScalar inv = phi::phi_pow_log(n, -1.0);
    LogScalar rho = (one - inv) * (one - inv) * (one - phi::phi_pow_log(n, -4.0));
    LogScalar floor = quarter_t2 * rho;
    if (floor.compare(c_log) <= 0 || rho.compare(rho_prev) < 0) {
      v.kind = SeriesKind::Inconclusive;
      v.note = "growth floor verification failed; this should be unreachable";
      return v;
    }
    rho_prev = rho;
    run += floor.to_double();
    v.partial_sums.push_back(run);
  }

  v.kind = SeriesKind::Divergent;
  v.n0 = n0;
  v.c = c;
  v.sum = kInf;
  v.terms = n_hi - n0 + 1;
  std::ostringstream os;
  os << "growth floor: on block n the flow satisfies u(x, t_eff) >= phi_n + (t_eff/2)"
        "(phi_{n+1} - phi_n) because f >= (phi_{n+1} - phi_n)/2 above phi_n, so "
        "term_n >= (t_eff^2/4) rho_n with rho_n = (1 - 1/phi_n)^2 (1 - phi_n^-4) "
        "nondecreasing; verified in the log2 domain for n = "
     << n0 << ".." << n_hi << " with margin >= 1.5 c, and rho_n -> 1 extends the floor to "
     << "every deeper level (t_eff = " << t_eff << ")";
  v.note = os.str();
  return v;
}

SeriesVerdict certificate_gronwall(const PiecewiseSource& f, const BlockFunction& psi, double t,
                                   int n_probe, double C) {
  SeriesVerdict base = lp_norm_block(psi, 2.0, std::max(n_probe, 8));
  SeriesVerdict v;
  if (base.kind != SeriesKind::Convergent) {
    v.kind = SeriesKind::Inconclusive;
    v.note = "data is not square integrable; the envelope bound needs ||psi||_2 < inf";
    return v;
  }
  // Trajectories start in [0, sup psi]; the bound needs f defined there and
  // no exit through a finite left edge of the coverage.
  double lo = f.coverage_lo();
  if (std::isfinite(lo) && (lo > 0.0 || f.eval(lo) < 0.0)) {
    v.kind = SeriesKind::Inconclusive;
    v.note = "the source domain does not hold the data range: flows from the ambient value 0 "
             "are undefined or exit the coverage leftward";
    return v;
  }
  double K0 = std::fabs(f.eval(0.0));
  double norm0 = std::sqrt(base.sum);
  double growth = C > 0.0 ? (std::exp(C * t) - 1.0) / C : t;
  double bound = std::exp(C * t) * norm0 + K0 * growth * std::sqrt(psi.L);
  if (!std::isfinite(bound)) {
    v.kind = SeriesKind::Inconclusive;
    v.note = "the envelope bound overflows at this horizon";
    return v;
  }
  v.kind = SeriesKind::Convergent;
  v.sum = bound * bound;
  v.err = 0.0;
  v.sum_is_upper_bound = true;
  v.terms = base.terms;
  std::ostringstream os;
  os << "no blow-up: |f(u)| <= " << K0 << " + " << C << " |u| everywhere on the data range, "
        "so ||u(t)||_2 <= e^{Ct} ||psi||_2 + K0 ((e^{Ct} - 1)/C) sqrt(L) = "
     << bound << " bounds the norm";
  v.note = os.str();
  return v;
}

}  // namespace

SeriesVerdict instantaneous_blowup_certificate(const PiecewiseSource& f,
                                               const BlockFunction& psi, double t, int n_probe) {
  psi.validate();
  require(std::isfinite(t) && t >= 0.0, Errc::invalid_argument, "certificate: t >= 0 required");
  require(n_probe >= 1, Errc::invalid_argument, "certificate: n_probe >= 1 required");

  if (t == 0.0) {
    SeriesVerdict v = lp_norm_block(psi, 2.0, std::max(n_probe, 8));
    v.note = "t = 0: ||u(0)||_2^2 = ||psi||_2^2; " + v.note;
    return v;
  }

  if (!psi.gen) {
    // Explicit data: evolve the finitely many values and sum.
    EvolvedBlocks e = evolve_block(psi, f, t);
    SeriesVerdict v;
    bool out_of_range = e.ambient.fate == BlockFate::OutOfRange;
    int first_blown = -1;
    for (std::size_t i = 0; i < e.entries.size(); ++i) {
      if (e.entries[i].fate == BlockFate::OutOfRange) out_of_range = true;
      if (e.entries[i].fate == BlockFate::BlownUp && first_blown < 0)
        first_blown = static_cast<int>(i);
    }
    if (first_blown >= 0 || e.ambient.fate == BlockFate::BlownUp) {
      v.kind = SeriesKind::Divergent;
      v.n0 = std::max(first_blown, 0);
      v.c = kInf;
      v.sum = kInf;
      std::ostringstream os;
      os << "a block value escaped in finite time <= " << t
         << "; its L2 mass at t is infinite (marked measure " << e.marked_measure << ")";
      v.note = os.str();
      return v;
    }
    if (out_of_range) {
      v.kind = SeriesKind::Inconclusive;
      v.note = "an evolved value left the double range without a blow-up certificate";
      return v;
    }
    v.kind = SeriesKind::Convergent;
    v.sum = lp_norm_evolved(e, 2.0);
    v.err = 8.0 * std::numeric_limits<double>::epsilon() * v.sum;
    v.terms = static_cast<int>(e.entries.size());
    double run = 0.0;
    for (const auto& en : e.entries) {
      run += en.value * en.value * (en.hi - en.lo);
      v.partial_sums.push_back(run);
    }
    if (e.ambient_measure > 0.0) {
      run += e.ambient.value * e.ambient.value * e.ambient_measure;
      v.partial_sums.push_back(run);
    }
    v.note = "exact evolved sum over the explicit blocks plus the ambient region";
    return v;
  }

  // Tower data. Classify the source from the lowest tower value phi_0 = 2.
  std::string classify_note;
  std::optional<BlowupTimeResult> probe;
  try {
    probe = blowup_time(f, 2.0, 1e-10);
  } catch (const Error& e) {
    classify_note = e.what();
  }

  if (probe && probe->verdict == BlowupVerdict::Finite)
    return certificate_pointwise(f, t, probe->time, 1e-10);

  if (f.phi_meta() && probe && probe->verdict == BlowupVerdict::Infinite)
    return certificate_growth_floor(t, n_probe);

  if (auto C = uniform_lipschitz_bound(f)) return certificate_gronwall(f, psi, t, n_probe, *C);

  SeriesVerdict v;
  v.kind = SeriesKind::Inconclusive;
  std::ostringstream os;
  os << "no certificate path applies: the source is neither finite-time blowing from data 2, "
        "a tower staircase, nor uniformly Lipschitz";
  if (!classify_note.empty()) os << " (classification: " << classify_note << ")";
  v.note = os.str();
  return v;
}

OnsetMeasure blowup_onset_measure(const PiecewiseSource& f, const BlockFunction& psi, double t,
                                  double tol) {
  psi.validate();
  require(std::isfinite(t) && t > 0.0, Errc::invalid_argument, "onset: t > 0 required");
  OnsetMeasure out;

  BlowupTimeResult base;
  try {
    base = blowup_time(f, 1.0, tol);
  } catch (const Error& e) {
    if (e.code() == Errc::positivity) {
      out.level = kInf;
      return out;  // flows from positive data never escape upward
    }
    throw;
  }
  if (base.verdict != BlowupVerdict::Finite) {
    out.level = kInf;
    return out;
  }

  double level = 1.0;
  if (t <= base.time) level = invert_blowup_time(f, t, tol);
  out.pointwise_blowup = true;
  out.level = level;
  double snap = level * (1.0 - 1e-9);

  if (psi.gen) {
    // The tail over levels n >= n* telescopes: sum (phi_n^-4 - phi_{n+1}^-4)
    // = phi_{n*}^-4 exactly.
    int nstar = first_level_at_or_above(level);
    out.measure = std::exp2(-4.0 * std::exp2(nstar));
    return out;
  }
  for (const auto& b : psi.blocks)
    if (b.value >= snap) out.measure += b.hi - b.lo;
  return out;
}

PowerlawNorm powerlaw_norm_example_c(double r, double p, double t) {
  require(std::isfinite(r) && r > 0.0, Errc::invalid_argument, "powerlaw: r > 0 required");
  require(std::isfinite(p) && p >= 1.0, Errc::invalid_argument, "powerlaw: p >= 1 required");
  require(std::isfinite(t) && t >= 0.0, Errc::invalid_argument, "powerlaw: t >= 0 required");
  double rp = r * p;
  require(rp < 1.0, Errc::domain, "powerlaw: x^-r lies in L^p on (0, 1] only for r p < 1");
  PowerlawNorm out;
  out.blowup_time = std::log(1.0 / rp);
  double g = rp * std::exp(t);
  if (g >= 1.0) {
    out.blown = true;
    out.value = kInf;
  } else {
    out.value = 1.0 / (1.0 - g);
  }
  return out;
}

nlohmann::json SeriesVerdict::to_json() const {
  nlohmann::json j;
  j["kind"] = series_kind_name(kind);
  j["sum"] = std::isfinite(sum) ? nlohmann::json(sum) : nlohmann::json();
  j["err"] = err;
  j["sum_is_upper_bound"] = sum_is_upper_bound;
  j["n0"] = n0;
  j["c"] = std::isfinite(c) ? nlohmann::json(c) : nlohmann::json();
  j["partial_sums"] = partial_sums;
  j["terms"] = terms;
  j["note"] = note;
  return j;
}

}  // namespace blowup
