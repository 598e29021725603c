#include "hitfield/curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace hitfield {

namespace {

constexpr double kSymTol = 1e-12;

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// First time at which p and q differ (value, left limit or terminal slope),
// or -1 if they agree everywhere.
double first_difference(const PiecewisePath& p, const PiecewisePath& q,
                        double tol) {
  std::vector<double> ts;
  for (const Knot& k : p.knots()) ts.push_back(k.t);
  for (const Knot& k : q.knots()) ts.push_back(k.t);
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    if (!close_rel(p.eval(t), q.eval(t), tol) ||
        !close_rel(p.eval_left(t), q.eval_left(t), tol)) {
      return t;
    }
  }
  if (!close_rel(p.terminal_slope(), q.terminal_slope(), tol)) {
    return std::max(p.last_knot_time(), q.last_knot_time());
  }
  return -1.0;
}

void require_positive_rho(const std::vector<double>& rho, int m) {
  if (static_cast<int>(rho.size()) != m) {
    throw PreconditionError("rho has the wrong length");
  }
  for (double r : rho) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw PreconditionError("the curve needs every rho_i > 0");
    }
  }
}

bool continuous_strictly_increasing(const PiecewisePath& p) {
  auto ks = p.knots();
  for (std::size_t k = 0; k < ks.size(); ++k) {
    if (ks[k].left != ks[k].right) return false;
    if (!(p.segment_slope(k) > 0.0)) return false;
  }
  return true;
}

}  // namespace

std::string SymmetryReport::describe() const {
  if (ok) return "off-diagonal columns are proportional";
  std::ostringstream os;
  os << "x_{" << i + 1 << "," << l + 1 << "}/rho_" << i + 1 << " != x_{"
     << j + 1 << "," << l + 1 << "}/rho_" << j + 1 << " at t = "
     << std::setprecision(17) << t;
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

SymmetryError::SymmetryError(SymmetryReport report)
    : PreconditionError("symmetry violated: " + report.describe()),
      report_(std::move(report)) {}

SymmetryReport check_symmetry(const Field& f, const std::vector<double>& rho) {
  require_positive_rho(rho, f.m());
  SymmetryReport rep;
  const int m = f.m();
  for (int l = 0; l < m; ++l) {
    int ref = l == 0 ? 1 : 0;
    if (ref >= m) continue;
    PiecewisePath base = scale(f(ref, l), 1.0 / rho[ref]);
    for (int i = ref + 1; i < m; ++i) {
      if (i == l) continue;
      double t = first_difference(base, scale(f(i, l), 1.0 / rho[i]), kSymTol);
      if (t >= 0.0) {
        rep.ok = false;
        rep.l = l;
        rep.i = ref;
        rep.j = i;
        rep.t = t;
        return rep;
      }
    }
  }
  return rep;
}

SymmetryReport check_symmetry(const BlockModel& model,
                              const std::vector<double>& rho) {
  require_positive_rho(rho, model.m());
  SymmetryReport rep;
  const int m = model.m();
  for (int l = 0; l < m; ++l) {
    int ref = l == 0 ? 1 : 0;
    if (ref >= m) continue;
    double nu = model.R(ref, l) / rho[ref];
    for (int i = ref + 1; i < m; ++i) {
      if (i == l) continue;
      if (!close_rel(model.R(i, l) / rho[i], nu, kSymTol)) {
        rep.ok = false;
        rep.l = l;
        rep.i = ref;
        rep.j = i;
        // The columns differ at every clock of type l; report the first.
        rep.t = 0.0;
        Factorization fk = factor_kernel(model.Q());
        rep.detail = fk.ok ? "R factors, but not with this rho"
                           : "R does not factor: " + fk.witness;
        return rep;
      }
    }
  }
  return rep;
}

std::vector<double> CurveBundle::gamma_at(double s) const {
  std::vector<double> v;
  for (const auto& g : gamma) v.push_back(g.eval(s));
  return v;
}

std::vector<PiecewisePath> build_xstar(const Field& f,
                                       const std::vector<double>& rho) {
  SymmetryReport rep = check_symmetry(f, rho);
  if (!rep.ok) throw SymmetryError(rep);
  const int m = f.m();
  std::vector<PiecewisePath> xs;
  for (int l = 0; l < m; ++l) {
    int ref = l == 0 ? 1 : 0;
    xs.push_back(ref < m ? scale(f(ref, l), 1.0 / rho[ref])
                         : PiecewisePath::constant(0.0));
  }
  return xs;
}

std::vector<PiecewisePath> build_g(const Field& f,
                                   const std::vector<double>& rho) {
  require_positive_rho(rho, f.m());
  std::vector<PiecewisePath> xs = build_xstar(f, rho);
  std::vector<PiecewisePath> g;
  for (int i = 0; i < f.m(); ++i) {
    const PiecewisePath& xii = f(i, i);
    if (xii.initial() != 0.0) {
      throw PreconditionError("x_ii(0) must be 0 (i = " + std::to_string(i + 1) + ")");
    }
    if (!classify(xii).no_negative_jumps) {
      throw PreconditionError("x_ii has a negative jump (i = " +
                              std::to_string(i + 1) + ")");
    }
    if (!(xii.segment_slope(0) < 0.0)) {
      throw PreconditionError("inf x_ii(t) < 0 for t > 0 fails (i = " +
                              std::to_string(i + 1) + ")");
    }
    if (!(xii.terminal_slope() < 0.0)) {
      throw PreconditionError("liminf x_ii = -inf fails (i = " +
                              std::to_string(i + 1) + ")");
    }
    PathClass xc = classify(xs[i]);
    if (!xc.nondecreasing || !xc.starts_at_zero) {
      throw PreconditionError("off-diagonal column " + std::to_string(i + 1) +
                              " is not nondecreasing from 0");
    }
    PiecewisePath gi = add(xs[i], scale(past_infimum(xii), -1.0 / rho[i]));
    if (!in_d0_upup(gi)) {
      throw InvariantViolation("g_" + std::to_string(i + 1) +
                               " left the increasing class");
    }
    g.push_back(std::move(gi));
  }
  return g;
}

KappaPair build_kappa(const std::vector<PiecewisePath>& g) {
  KappaPair kp;
  kp.f = PiecewisePath::constant(0.0);
  for (const auto& gi : g) kp.f = add(kp.f, generalized_inverse(gi));
  kp.kappa = generalized_inverse(kp.f);
  return kp;
}

std::vector<PiecewisePath> build_gamma(const std::vector<PiecewisePath>& g,
                                       const PiecewisePath& kappa) {
  std::vector<PiecewisePath> gamma;
  for (std::size_t i = 0; i < g.size(); ++i) {
    try {
      gamma.push_back(smooth_compose(generalized_inverse(g[i]), kappa));
    } catch (const CompatibilityError& e) {
      throw InvariantViolation("g_" + std::to_string(i + 1) +
                               "^{-1} and kappa are not compatible: " +
                               e.report().describe());
    }
  }
  return gamma;
}

CurveBundle build_curve(const Field& f, const std::vector<double>& rho) {
  CurveBundle b;
  b.rho = rho;
  b.xstar = build_xstar(f, rho);
  b.g = build_g(f, rho);
  for (const auto& gi : b.g) b.g_inv.push_back(generalized_inverse(gi));
  KappaPair kp = build_kappa(b.g);
  b.f = std::move(kp.f);
  b.kappa = std::move(kp.kappa);
  b.gamma = build_gamma(b.g, b.kappa);
  return b;
}

PiecewisePath composed_process(const Field& f,
                               const std::vector<PiecewisePath>& gamma, int i) {
  PiecewisePath c = PiecewisePath::constant(0.0);
  for (int j = 0; j < f.m(); ++j) c = add(c, compose(f(i, j), gamma[j]));
  return c;
}

LevelMaps::LevelMaps(const CurveBundle& bundle, const Field& f)
    : rho_(bundle.rho) {
  for (int i = 0; i < f.m(); ++i) {
    c_.push_back(composed_process(f, bundle.gamma, i));
    inf_.push_back(past_infimum(c_.back()));
  }
}

ExtTime LevelMaps::S(int i, double y) const {
  // At a jump level the target sits on a plateau of the infimum up to
  // rounding; the slack keeps S left-continuous there.
  double level = -rho_[i] * y;
  ExtTime hit = first_reach_below(inf_[i], level + 1e-12 * (1.0 + std::abs(level)));
  if (!hit.is_finite()) return hit;
  // Inside a descending stretch, move on to the exact crossing of the level.
  const PiecewisePath& p = inf_[i];
  double t = hit.value();
  double v = p.eval(t);
  std::size_t k = p.segment_index(t);
  double slope = p.segment_slope(k);
  if (v > level && slope < 0.0) {
    auto ks = p.knots();
    double end = k + 1 < ks.size() ? ks[k + 1].t : INFINITY;
    t = std::min(t + (v - level) / -slope, end);
  }
  return ExtTime::finite(t);
}

double s_of_y(const HittingProcess& hp, double y) {
  double s = 0.0;
  for (double t : hp.eval(y)) s += t;
  return s;
}

std::vector<EncodedComponent> encode_components(const CurveBundle& bundle,
                                                const Field& f) {
  const int m = f.m();
  std::vector<std::vector<Excursion>> plateaus;
  double scale_s = 1.0;
  for (int i = 0; i < m; ++i) {
    plateaus.push_back(infimum_plateaus(composed_process(f, bundle.gamma, i)));
    for (const auto& e : plateaus.back()) {
      if (std::isfinite(e.r)) scale_s = std::max(scale_s, e.r);
    }
  }
  const double tol = 1e-9 * scale_s;
  for (int i = 1; i < m; ++i) {
    bool same = plateaus[i].size() == plateaus[0].size();
    for (std::size_t p = 0; same && p < plateaus[0].size(); ++p) {
      const Excursion& a = plateaus[0][p];
      const Excursion& b = plateaus[i][p];
      same = std::abs(a.l - b.l) <= tol &&
             (a.r == b.r || std::abs(a.r - b.r) <= tol);
    }
    if (!same) {
      throw InvariantViolation("excursion intervals of C_1 and C_" +
                               std::to_string(i + 1) + " differ");
    }
  }
  std::vector<EncodedComponent> out;
  for (const Excursion& e : plateaus.empty() ? std::vector<Excursion>{}
                                              : plateaus[0]) {
    if (!std::isfinite(e.r)) break;
    EncodedComponent c{e, {}};
    for (int i = 0; i < m; ++i) {
      c.increment.push_back(bundle.gamma[i].eval(e.r) -
                            bundle.gamma[i].eval(e.l));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<PiecewisePath> curve_special_case(const Field& f,
                                              const std::vector<double>& rho) {
  const int m = f.m();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j && !continuous_strictly_increasing(f(i, j))) {
        throw PreconditionError("x_{" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) +
                                "} is not continuous and strictly increasing");
      }
    }
  }
  std::vector<PiecewisePath> g = build_g(f, rho);
  for (int i = 0; i < m; ++i) {
    if (!continuous_strictly_increasing(g[i])) {
      throw PreconditionError("g_" + std::to_string(i + 1) +
                              " is not a homeomorphism");
    }
  }
  PiecewisePath kappa = build_kappa(g).kappa;
  std::vector<PiecewisePath> gamma;
  for (const auto& gi : g) gamma.push_back(compose(generalized_inverse(gi), kappa));
  return gamma;
}

std::vector<double> curve_grid(const CurveBundle& bundle,
                               const PiecewisePath& c1, int fill) {
  std::vector<double> ts;
  auto add_knots = [&](const PiecewisePath& p) {
    auto ks = p.knots();
    for (std::size_t k = 0; k < ks.size(); ++k) {
      ts.push_back(ks[k].t);
      if (k + 1 < ks.size()) ts.push_back(0.5 * (ks[k].t + ks[k + 1].t));
    }
  };
  for (const auto& g : bundle.gamma) add_knots(g);
  add_knots(c1);
  double hi = 1.0;
  for (double t : ts) hi = std::max(hi, t);
  hi *= 1.25;
  for (int k = 0; k <= fill; ++k) ts.push_back(hi * k / fill);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

void write_curve_csv(std::ostream& os, const CurveBundle& bundle,
                     const PiecewisePath& c1, const std::vector<double>& grid) {
  os << "s";
  for (int i = 0; i < bundle.m(); ++i) os << ",gamma_" << i + 1;
  os << ",C_1\n";
  os << std::setprecision(17);
  for (double s : grid) {
    os << s;
    for (const auto& g : bundle.gamma) os << "," << g.eval(s);
    os << "," << c1.eval(s) << "\n";
  }
}

}  // namespace hitfield
