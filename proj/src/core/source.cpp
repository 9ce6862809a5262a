#include "core/source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/errors.hpp"
#include "core/phi.hpp"
#include "core/quadrature.hpp"

namespace blowup {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double json_to_bound(const nlohmann::json& j, double inf_value) {
  if (j.is_null()) return inf_value;
  require(j.is_number(), Errc::json, "source json: interval bound must be number or null");
  return j.get<double>();
}

nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}
}  // namespace

double Piece::eval(double s) const {
  switch (kind) {
    case PieceKind::Constant:
      return value;
    case PieceKind::Affine:
      return anchor_value + slope * (s - anchor_s);
    case PieceKind::Analytic:
      return fn->value(s);
  }
  fail(Errc::internal, "Piece::eval: bad kind");
}

double Piece::end_value() const {
  if (kind == PieceKind::Constant) return value;
  require(std::isfinite(hi), Errc::domain, "Piece::end_value: unbounded piece");
  return eval(hi);
}

double Piece::start_value() const {
  if (kind == PieceKind::Constant) return value;
  require(std::isfinite(lo), Errc::domain, "Piece::start_value: unbounded piece");
  return eval(lo);
}

Piece Piece::constant(double lo, double hi, double value) {
  Piece p;
  p.kind = PieceKind::Constant;
  p.lo = lo;
  p.hi = hi;
  p.value = value;
  return p;
}

Piece Piece::affine(double lo, double hi, double slope, double intercept) {
  Piece p;
  p.kind = PieceKind::Affine;
  p.lo = lo;
  p.hi = hi;
  p.slope = slope;
  p.intercept = intercept;
  p.anchor_s = 0.0;
  p.anchor_value = intercept;
  return p;
}

Piece Piece::affine_anchored(double lo, double hi, double slope, double anchor_s,
                             double anchor_value) {
  Piece p;
  p.kind = PieceKind::Affine;
  p.lo = lo;
  p.hi = hi;
  p.slope = slope;
  p.anchor_s = anchor_s;
  p.anchor_value = anchor_value;
  p.intercept = anchor_value - slope * anchor_s;  // informational; anchor form is exact
  return p;
}

Piece Piece::analytic(double lo, double hi, const AnalyticFn* fn) {
  Piece p;
  p.kind = PieceKind::Analytic;
  p.lo = lo;
  p.hi = hi;
  p.fn = fn;
  return p;
}

PiecewiseSource::PiecewiseSource(std::vector<Piece> pieces, TailRule tail,
                                 std::optional<PhiMeta> phi, std::string name)
    : pieces_(std::move(pieces)), tail_(tail), phi_(phi), name_(std::move(name)) {
  require(!pieces_.empty(), Errc::invalid_argument, "source: needs at least one piece");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    require(p.lo < p.hi, Errc::invalid_argument, "source: piece needs lo < hi");
    require(!std::isnan(p.lo) && !std::isnan(p.hi), Errc::invalid_argument,
            "source: NaN piece bound");
    if (i + 1 < pieces_.size())
      require(std::isfinite(p.hi) && pieces_[i + 1].lo == p.hi, Errc::invalid_argument,
              "source: pieces must tile contiguously");
    switch (p.kind) {
      case PieceKind::Constant:
        require(std::isfinite(p.value), Errc::invalid_argument, "source: constant not finite");
        break;
      case PieceKind::Affine:
        require(std::isfinite(p.slope) && std::isfinite(p.anchor_value) &&
                    std::isfinite(p.anchor_s),
                Errc::invalid_argument, "source: affine coefficients not finite");
        break;
      case PieceKind::Analytic:
        require(p.fn != nullptr, Errc::invalid_argument, "source: unknown analytic function");
        require(p.lo >= p.fn->domain_lo, Errc::domain,
                "source: analytic piece starts below the function domain");
        break;
    }
  }
}

std::size_t PiecewiseSource::piece_index(double s) const {
  require(!std::isnan(s), Errc::domain, "source: NaN argument");
  require(s >= coverage_lo(), Errc::domain, "source: argument below coverage");
  if (s >= coverage_hi()) return pieces_.size();
  // Last piece whose lo is <= s.
  std::size_t lo = 0, hi = pieces_.size();
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (pieces_[mid].lo <= s)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double PiecewiseSource::tail_constant() const {
  require(tail_ == TailRule::RepeatLastConstant, Errc::internal,
          "source: tail constant undefined for this tail rule");
  return pieces_.back().end_value();
}

double PiecewiseSource::eval(double s) const {
  std::size_t idx = piece_index(s);
  if (idx == pieces_.size()) {
    switch (tail_) {
      case TailRule::RepeatLastConstant:
        return tail_constant();
      case TailRule::AnalyticExtension:
        fail(Errc::range,
             "source: argument beyond the float-representable region of the construction; "
             "use the log2-domain certificates instead");
      case TailRule::TruncationError:
        fail(Errc::range, "source: argument beyond truncated coverage");
    }
  }
  return pieces_[idx].eval(s);
}

PiecewiseSource::LipschitzReport PiecewiseSource::lipschitz_on(double lo, double hi) const {
  require(!std::isnan(lo) && !std::isnan(hi) && lo < hi, Errc::invalid_argument,
          "lipschitz_on: need lo < hi");
  require(lo >= coverage_lo(), Errc::domain, "lipschitz_on: interval below coverage");
  if (hi > coverage_hi())
    require(tail_ == TailRule::RepeatLastConstant, Errc::range,
            "lipschitz_on: interval beyond coverage");

  LipschitzReport rep;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    if (!(p.lo < hi && p.hi > lo)) continue;
    double c0 = std::max(lo, p.lo);
    double c1 = std::min(hi, p.hi);
    double slope = 0.0;
    switch (p.kind) {
      case PieceKind::Constant:
        break;
      case PieceKind::Affine:
        slope = std::fabs(p.slope);
        break;
      case PieceKind::Analytic:
        slope = p.fn->slope_bound(c0, c1);
        break;
    }
    rep.bound = std::max(rep.bound, slope);
    // Jump at the boundary into the next piece, if inside (lo, hi].
    if (i + 1 < pieces_.size() && p.hi > lo && p.hi <= hi) {
      double vl = p.end_value();
      double vr = pieces_[i + 1].start_value();
      double scale = std::max({1.0, std::fabs(vl), std::fabs(vr)});
      if (std::fabs(vl - vr) > 1e-12 * scale) {
        rep.has_jump = true;
        rep.bound = kInf;
      }
    }
  }
  return rep;
}

nlohmann::json PiecewiseSource::to_json() const {
  nlohmann::json pieces = nlohmann::json::array();
  for (const Piece& p : pieces_) {
    nlohmann::json pj;
    pj["lo"] = bound_to_json(p.lo);
    pj["hi"] = bound_to_json(p.hi);
    switch (p.kind) {
      case PieceKind::Constant:
        pj["kind"] = "constant";
        pj["value"] = p.value;
        break;
      case PieceKind::Affine:
        pj["kind"] = "affine";
        pj["slope"] = p.slope;
        pj["intercept"] = p.intercept;
        pj["anchor_s"] = p.anchor_s;
        pj["anchor_value"] = p.anchor_value;
        break;
      case PieceKind::Analytic:
        pj["kind"] = "analytic";
        pj["fn"] = p.fn->name;
        break;
    }
    pieces.push_back(pj);
  }
  nlohmann::json j;
  j["pieces"] = pieces;
  switch (tail_) {
    case TailRule::RepeatLastConstant:
      j["tail"] = "repeat_last_constant";
      break;
    case TailRule::AnalyticExtension:
      j["tail"] = "analytic_extension";
      break;
    case TailRule::TruncationError:
      j["tail"] = "truncation_error";
      break;
  }
  if (phi_) j["phi"] = {{"n_max", phi_->n_max}, {"n_explicit", phi_->n_explicit}};
  if (!name_.empty()) j["name"] = name_;
  return j;
}

PiecewiseSource PiecewiseSource::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("pieces") && j["pieces"].is_array(), Errc::json,
          "source json: missing pieces array");
  std::vector<Piece> pieces;
  for (const auto& pj : j["pieces"]) {
    require(pj.is_object() && pj.contains("kind"), Errc::json, "source json: bad piece");
    double lo = json_to_bound(pj.at("lo"), -kInf);
    double hi = json_to_bound(pj.at("hi"), kInf);
    std::string kind = pj.at("kind").get<std::string>();
    if (kind == "constant") {
      pieces.push_back(Piece::constant(lo, hi, pj.at("value").get<double>()));
    } else if (kind == "affine") {
      if (pj.contains("anchor_s"))
        pieces.push_back(Piece::affine_anchored(lo, hi, pj.at("slope").get<double>(),
                                                pj.at("anchor_s").get<double>(),
                                                pj.at("anchor_value").get<double>()));
      else
        pieces.push_back(
            Piece::affine(lo, hi, pj.at("slope").get<double>(), pj.at("intercept").get<double>()));
    } else if (kind == "analytic") {
      const AnalyticFn* fn = find_analytic(pj.at("fn").get<std::string>());
      require(fn != nullptr, Errc::json,
              "source json: unknown analytic function '" + pj.at("fn").get<std::string>() + "'");
      pieces.push_back(Piece::analytic(lo, hi, fn));
    } else {
      fail(Errc::json, "source json: unknown piece kind '" + kind + "'");
    }
  }
  TailRule tail = TailRule::TruncationError;
  if (j.contains("tail")) {
    std::string t = j["tail"].get<std::string>();
    if (t == "repeat_last_constant")
      tail = TailRule::RepeatLastConstant;
    else if (t == "analytic_extension")
      tail = TailRule::AnalyticExtension;
    else if (t == "truncation_error")
      tail = TailRule::TruncationError;
    else
      fail(Errc::json, "source json: unknown tail rule '" + t + "'");
  }
  std::optional<PhiMeta> phi;
  if (j.contains("phi"))
    phi = PhiMeta{j["phi"].at("n_max").get<int>(), j["phi"].at("n_explicit").get<int>()};
  std::string name = j.value("name", "");
  return PiecewiseSource(std::move(pieces), tail, phi, name);
}

RecipIntegral reciprocal_piece_integral(const Piece& p, double x0, double x1, double tol) {
  require(x0 >= p.lo && x1 <= p.hi && x0 <= x1, Errc::invalid_argument,
          "reciprocal_piece_integral: segment outside piece");
  if (x0 == x1) return {0.0, 0.0};
  switch (p.kind) {
    case PieceKind::Constant: {
      require(p.value > 0.0, Errc::positivity, "reciprocal integral: source not positive");
      double v = (x1 - x0) / p.value;
      return {v, 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(v)};
    }
    case PieceKind::Affine: {
      double v0 = p.eval(x0);
      double v1 = p.eval(x1);
      require(v0 > 0.0 && v1 > 0.0, Errc::positivity, "reciprocal integral: source not positive");
      if (p.slope == 0.0) {
        double v = (x1 - x0) / v0;
        return {v, 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(v)};
      }
      double v = std::log1p((v1 - v0) / v0) / p.slope;
      return {v, 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(v)};
    }
    case PieceKind::Analytic: {
      for (int k = 0; k <= 16; ++k) {
        double s = x0 + (x1 - x0) * (static_cast<double>(k) / 16.0);
        require(p.fn->value(s) > 0.0, Errc::positivity,
                "reciprocal integral: source not positive (sampled)");
      }
      QuadResult q = integrate_adaptive([&p](double s) { return 1.0 / p.fn->value(s); }, x0, x1,
                                        tol);
      return {q.value, q.err};
    }
  }
  fail(Errc::internal, "reciprocal_piece_integral: bad kind");
}

RecipIntegral reciprocal_integral(const PiecewiseSource& f, double a, double b, double tol) {
  require(!std::isnan(a) && !std::isnan(b) && a <= b, Errc::invalid_argument,
          "reciprocal_integral: need a <= b");
  require(std::isfinite(a) && std::isfinite(b), Errc::invalid_argument,
          "reciprocal_integral: bounds must be finite");
  require(a >= f.coverage_lo(), Errc::domain, "reciprocal_integral: below coverage");
  if (b > f.coverage_hi())
    require(f.tail() == TailRule::RepeatLastConstant, Errc::range,
            "reciprocal_integral: beyond coverage");
  if (a == b) return {0.0, 0.0};

  RecipIntegral total;
  double x = a;
  for (const Piece& p : f.pieces()) {
    if (!(p.lo < b && p.hi > x)) continue;
    double x1 = std::min(b, p.hi);
    RecipIntegral part = reciprocal_piece_integral(p, x, x1, tol);
    total.value += part.value;
    total.err += part.err;
    x = x1;
    if (x >= b) break;
  }
  if (x < b) {  // tail region under RepeatLastConstant
    double c = f.tail_constant();
    require(c > 0.0, Errc::positivity, "reciprocal integral: source not positive in tail");
    total.value += (b - x) / c;
  }
  return total;
}

PiecewiseSource build_example_c() {
  const AnalyticFn* fn = find_analytic("s_log_s");
  std::vector<Piece> pieces{Piece::analytic(1.0, kInf, fn)};
  return PiecewiseSource(std::move(pieces), TailRule::TruncationError, std::nullopt, "example-c");
}

PiecewiseSource build_example_d(int n_max) {
  require(n_max >= 1, Errc::invalid_argument, "build_example_d: n_max >= 1 required");
  require(n_max <= 40, Errc::invalid_argument, "build_example_d: n_max too large");
  const int n_expl = std::min(n_max, phi::kFloatCoeffMax);

  // Left boundary of collar n, or of plateau n when the collar is below
  // float resolution and has collapsed onto the breakpoint.
  auto level_start = [](int n) {
    double pn = phi::phi_n(n);
    return n <= phi::kFloatCollarMax ? pn - 0.5 : pn;
  };

  std::vector<Piece> pieces;
  pieces.push_back(Piece::constant(0.0, level_start(1), 2.0));
  for (int n = 1; n <= n_expl; ++n) {
    double plateau_lo = level_start(n);
    double plateau_value = phi::phi_n(n + 1) - phi::phi_n(n);
    if (n <= phi::kFloatCollarMax) {
      double pn = phi::phi_n(n);
      double entry = phi::phi_n(n) - phi::phi_n(n - 1);
      pieces.push_back(Piece::affine_anchored(pn - 0.5, pn + 0.5, phi::a_n(n), pn - 0.5, entry));
      plateau_lo = pn + 0.5;
    }
    double plateau_hi = level_start(n + 1);
    pieces.push_back(Piece::constant(plateau_lo, plateau_hi, plateau_value));
  }
  return PiecewiseSource(std::move(pieces), TailRule::AnalyticExtension,
                         PhiMeta{n_max, n_expl}, "example-d");
}

PiecewiseSource make_constant_source(double c) {
  std::vector<Piece> pieces{Piece::constant(-kInf, kInf, c)};
  return PiecewiseSource(std::move(pieces), TailRule::RepeatLastConstant, std::nullopt,
                         "constant");
}

PiecewiseSource make_linear_source(double slope, double intercept) {
  std::vector<Piece> pieces{Piece::affine(-kInf, kInf, slope, intercept)};
  return PiecewiseSource(std::move(pieces), TailRule::RepeatLastConstant, std::nullopt, "linear");
}

PiecewiseSource make_analytic_source(const std::string& fn_name, double lo) {
  const AnalyticFn* fn = find_analytic(fn_name);
  require(fn != nullptr, Errc::invalid_argument,
          "make_analytic_source: unknown function '" + fn_name + "'");
  std::vector<Piece> pieces{Piece::analytic(lo, kInf, fn)};
  return PiecewiseSource(std::move(pieces), TailRule::TruncationError, std::nullopt, fn_name);
}

PiecewiseSource source_from_spec(const std::string& spec) {
  require(!spec.empty(), Errc::invalid_argument, "source spec: empty");
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    require(in.good(), Errc::io, "source spec: cannot open '" + spec.substr(1) + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    require(!j.is_discarded(), Errc::json, "source spec: invalid json in file");
    return PiecewiseSource::from_json(j);
  }
  if (spec[0] == '{') {
    nlohmann::json j = nlohmann::json::parse(spec, nullptr, false);
    require(!j.is_discarded(), Errc::json, "source spec: invalid inline json");
    return PiecewiseSource::from_json(j);
  }
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  const std::string& head = parts[0];
  auto arg = [&parts](std::size_t i, double dflt) {
    return parts.size() > i ? std::stod(parts[i]) : dflt;
  };
  if (head == "example-c") return build_example_c();
  if (head == "example-d") return build_example_d(static_cast<int>(arg(1, 8)));
  if (head == "zero") return make_constant_source(0.0);
  if (head == "constant") return make_constant_source(arg(1, 1.0));
  if (head == "linear") return make_linear_source(arg(1, 1.0), arg(2, 0.0));
  if (head == "s_squared" || head == "exp_s") return make_analytic_source(head, -kInf);
  if (head == "s_log_s") return make_analytic_source(head, 1.0);
  fail(Errc::invalid_argument, "source spec: unknown source '" + spec + "'");
}

}  // namespace blowup
