#include "hitfield/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hitfield {

namespace {

double rel_eps(double x) { return kKnotEps * std::max(1.0, std::abs(x)); }

bool nearly(double a, double b) {
  return std::abs(a - b) <=
         kKnotEps * std::max({1.0, std::abs(a), std::abs(b)});
}

void check_time(double t) {
  if (!(t >= 0.0) || std::isnan(t)) {
    throw DomainError("path evaluated at invalid time " + std::to_string(t));
  }
}

double value_scale(const PiecewisePath& p) {
  double s = 1.0;
  for (const Knot& k : p.knots()) {
    s = std::max({s, std::abs(k.left), std::abs(k.right)});
  }
  return s;
}

// Whether p increases on every left neighbourhood of s (s > 0). A segment
// whose rise is within the knot tolerance counts as flat: flat stretches of
// computed paths can pick up a few ulps of slope.
bool rises_into(const PiecewisePath& p, double s) {
  auto ks = p.knots();
  std::size_t idx = p.find_knot(s);
  if (idx == 0) return p.segment_slope(0) > 0.0;
  double from, to;
  if (idx != PiecewisePath::npos) {
    from = ks[idx - 1].right;
    to = ks[idx].left;
  } else {
    const Knot& a = ks[p.segment_index(s)];
    from = a.right;
    to = p.eval_left(s);
  }
  return to > from && !nearly(from, to);
}

void require_no_negative_jumps(const PiecewisePath& p, const char* op) {
  if (!classify(p).no_negative_jumps) {
    throw ClassError(std::string(op) + ": path has a negative jump");
  }
}

}  // namespace

double ExtTime::value() const {
  if (infinite_) throw DomainError("value() of an infinite time");
  return t_;
}

PiecewisePath PiecewisePath::from_knots(std::vector<Knot> knots,
                                        double terminal_slope) {
  return from_knots(std::move(knots), terminal_slope, 1.0);
}

PiecewisePath PiecewisePath::from_knots(std::vector<Knot> knots, double rise,
                                        double run) {
  if (knots.empty()) throw DomainError("path needs a knot at t = 0");
  if (!std::isfinite(rise) || !std::isfinite(run) || !(run > 0.0) ||
      !std::isfinite(rise / run)) {
    throw DomainError("terminal slope must be finite");
  }
  if (std::abs(knots.front().t) > kKnotEps) {
    throw DomainError("first knot must sit at t = 0");
  }
  knots.front().t = 0.0;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const Knot& kn = knots[k];
    if (!std::isfinite(kn.t) || !std::isfinite(kn.left) ||
        !std::isfinite(kn.right)) {
      throw DomainError("non-finite knot");
    }
    if (k > 0 && kn.t < knots[k - 1].t) {
      throw DomainError("knot times must be nondecreasing");
    }
  }
  PiecewisePath p;
  p.knots_ = std::move(knots);
  p.terminal_rise_ = rise;
  p.terminal_run_ = run;
  p.canonicalize();
  return p;
}

void PiecewisePath::canonicalize() {
  knots_.front().left = knots_.front().right;

  std::vector<Knot> merged;
  merged.reserve(knots_.size());
  merged.push_back(knots_.front());
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    const Knot& kn = knots_[k];
    if (kn.t - merged.back().t <= rel_eps(kn.t)) {
      merged.back().right = kn.right;
      if (merged.size() == 1) merged.back().left = kn.right;
    } else {
      merged.push_back(kn);
    }
  }
  for (Knot& kn : merged) {
    if (nearly(kn.left, kn.right)) kn.left = kn.right;
  }

  auto slope_between = [](const Knot& a, const Knot& b) {
    return (b.left - a.right) / (b.t - a.t);
  };
  std::vector<Knot> out;
  out.reserve(merged.size());
  out.push_back(merged.front());
  for (std::size_t k = 1; k < merged.size(); ++k) {
    const Knot& kn = merged[k];
    if (kn.left == kn.right) {
      double in = slope_between(out.back(), kn);
      double outs = k + 1 < merged.size() ? slope_between(kn, merged[k + 1])
                                          : terminal_slope();
      if (nearly(in, outs)) continue;
    }
    out.push_back(kn);
  }
  knots_ = std::move(out);
}

PiecewisePath PiecewisePath::constant(double c) {
  return from_knots({{0.0, c, c}}, 0.0);
}
PiecewisePath PiecewisePath::identity() { return drift(1.0); }
PiecewisePath PiecewisePath::drift(double slope) {
  return from_knots({{0.0, 0.0, 0.0}}, slope);
}
PiecewisePath PiecewisePath::step(double at, double size) {
  check_time(at);
  if (at == 0.0) return constant(size);
  return from_knots({{0.0, 0.0, 0.0}, {at, 0.0, size}}, 0.0);
}

std::size_t PiecewisePath::segment_index(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double v, const Knot& k) { return v < k.t; });
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double PiecewisePath::eval(double t) const {
  check_time(t);
  std::size_t k = segment_index(t);
  const Knot& a = knots_[k];
  if (k + 1 == knots_.size()) return a.right + terminal_slope() * (t - a.t);
  const Knot& b = knots_[k + 1];
  return a.right + (b.left - a.right) * ((t - a.t) / (b.t - a.t));
}

double PiecewisePath::eval_left(double t) const {
  check_time(t);
  if (t == 0.0) return knots_.front().right;
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                             [](const Knot& k, double v) { return k.t < v; });
  if (it != knots_.end() && it->t == t) return it->left;
  return eval(t);
}

double PiecewisePath::segment_slope(std::size_t k) const {
  if (k + 1 >= knots_.size()) return terminal_slope();
  return (knots_[k + 1].left - knots_[k].right) /
         (knots_[k + 1].t - knots_[k].t);
}

std::size_t PiecewisePath::find_knot(double t) const {
  double e = rel_eps(t);
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t - e,
                             [](const Knot& k, double v) { return k.t < v; });
  if (it != knots_.end() && std::abs(it->t - t) <= e) {
    return static_cast<std::size_t>(it - knots_.begin());
  }
  return npos;
}

double PiecewisePath::value_near(double t) const {
  std::size_t k = find_knot(t);
  return k == npos ? eval(t) : knots_[k].right;
}

double PiecewisePath::left_near(double t) const {
  std::size_t k = find_knot(t);
  return k == npos ? eval(std::max(t, 0.0)) : knots_[k].left;
}

bool PiecewisePath::approx_equal(const PiecewisePath& other,
                                 double tol) const {
  if (knots_.size() != other.knots_.size()) return false;
  if (std::abs(terminal_slope() - other.terminal_slope()) > tol) return false;
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    const Knot& a = knots_[k];
    const Knot& b = other.knots_[k];
    if (std::abs(a.t - b.t) > tol || std::abs(a.left - b.left) > tol ||
        std::abs(a.right - b.right) > tol) {
      return false;
    }
  }
  return true;
}

PathClass classify(const PiecewisePath& p) {
  PathClass c;
  double tol = kKnotEps * value_scale(p);
  auto ks = p.knots();
  c.no_negative_jumps = std::all_of(ks.begin(), ks.end(), [&](const Knot& k) {
    return k.right >= k.left - tol;
  });
  bool rising = p.terminal_slope() >= 0.0;
  for (std::size_t k = 0; rising && k + 1 < ks.size(); ++k) {
    rising = ks[k + 1].left >= ks[k].right - tol;
  }
  c.nondecreasing = c.no_negative_jumps && rising;
  c.starts_at_zero = std::abs(p.initial()) <= tol;
  c.strictly_increasing_unbounded = c.nondecreasing && c.starts_at_zero &&
                                    p.segment_slope(0) > 0.0 &&
                                    p.terminal_slope() > 0.0;
  return c;
}

MonotonePath::MonotonePath(PiecewisePath p)
    : path_(std::move(p)), class_(classify(path_)) {
  if (!class_.nondecreasing) throw ClassError("path is not nondecreasing");
}

PiecewisePath add(const PiecewisePath& p, const PiecewisePath& q) {
  std::vector<double> ts;
  ts.reserve(p.knots().size() + q.knots().size());
  for (const Knot& k : p.knots()) ts.push_back(k.t);
  for (const Knot& k : q.knots()) ts.push_back(k.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<Knot> out;
  out.reserve(ts.size());
  for (double t : ts) {
    out.push_back({t, p.eval_left(t) + q.eval_left(t), p.eval(t) + q.eval(t)});
  }
  return PiecewisePath::from_knots(std::move(out),
                                   p.terminal_slope() + q.terminal_slope());
}

PiecewisePath scale(const PiecewisePath& p, double c) {
  std::vector<Knot> out(p.knots().begin(), p.knots().end());
  for (Knot& k : out) {
    k.left *= c;
    k.right *= c;
  }
  return PiecewisePath::from_knots(std::move(out), c * p.terminal_rise(),
                                   p.terminal_run());
}

MonotonePath scale(const MonotonePath& p, double c) {
  if (c < 0.0) throw ClassError("negative scaling of a monotone path");
  return MonotonePath(scale(p.path(), c));
}

PiecewisePath past_infimum(const PiecewisePath& p) {
  require_no_negative_jumps(p, "past_infimum");
  auto ks = p.knots();
  double m = ks.front().right;
  std::vector<Knot> out{{0.0, m, m}};
  auto emit = [&](double t, double v) {
    if (t > out.back().t) out.push_back({t, v, v});
  };
  for (std::size_t k = 0; k < ks.size(); ++k) {
    const Knot& a = ks[k];
    m = std::min(m, a.left);
    double start = std::max(a.right, m);
    if (k + 1 == ks.size()) {
      double s = p.terminal_slope();
      if (s < 0.0) {
        emit(a.t + (start - m) / -s, m);
        return PiecewisePath::from_knots(std::move(out), s);
      }
      return PiecewisePath::from_knots(std::move(out), 0.0);
    }
    const Knot& b = ks[k + 1];
    if (b.left < m) {
      double cross = a.t + (m - a.right) * (b.t - a.t) / (b.left - a.right);
      if (a.right <= m) cross = a.t;
      emit(cross, m);
      m = b.left;
      emit(b.t, m);
    }
  }
  return PiecewisePath::from_knots(std::move(out), 0.0);
}

ExtTime first_reach(const PiecewisePath& p, double level, bool strict) {
  if (!classify(p).nondecreasing) {
    throw ClassError("first_reach: path is not nondecreasing");
  }
  auto hit = [&](double v) { return strict ? v > level : v >= level; };
  auto ks = p.knots();
  for (std::size_t k = 0; k < ks.size(); ++k) {
    const Knot& a = ks[k];
    if (hit(a.right)) return ExtTime::finite(a.t);
    if (k + 1 == ks.size()) {
      double s = p.terminal_slope();
      if (s > 0.0) return ExtTime::finite(a.t + (level - a.right) / s);
      return ExtTime::infinite();
    }
    const Knot& b = ks[k + 1];
    if (hit(b.left)) {
      double t = a.t + (level - a.right) * (b.t - a.t) / (b.left - a.right);
      return ExtTime::finite(std::clamp(t, a.t, b.t));
    }
  }
  return ExtTime::infinite();
}

ExtTime first_reach_below(const PiecewisePath& p, double level) {
  return first_reach(scale(p, -1.0), -level);
}

PiecewisePath generalized_inverse(const PiecewisePath& h) {
  if (!in_d0_upup(h)) {
    throw ClassError("generalized_inverse: path is not in D0-up-up");
  }
  // Walk the completed graph of h and swap coordinates: jumps become flats
  // and flats become jumps.
  std::vector<Knot> out{{0.0, 0.0, 0.0}};
  auto visit = [&](double x, double y) {
    if (x == out.back().t) {
      out.back().right = y;
    } else {
      out.push_back({x, y, y});
    }
  };
  auto ks = h.knots();
  for (std::size_t k = 1; k < ks.size(); ++k) {
    visit(ks[k].left, ks[k].t);
    visit(ks[k].right, ks[k].t);
  }
  return PiecewisePath::from_knots(std::move(out), h.terminal_run(),
                                   h.terminal_rise());
}

MonotonePath generalized_inverse(const MonotonePath& h) {
  return MonotonePath(generalized_inverse(h.path()));
}

PiecewisePath compose(const PiecewisePath& outer, const PiecewisePath& inner) {
  if (!classify(inner).nondecreasing) {
    throw ClassError("compose: inner path is not nondecreasing");
  }
  // Candidate times with, when known exactly, the inner value there.
  struct Cand {
    double s;
    bool exact;
    double u;
  };
  std::vector<Cand> cands;
  for (const Knot& k : inner.knots()) cands.push_back({k.t, false, 0.0});
  for (std::size_t j = 1; j < outer.knots().size(); ++j) {
    double u = outer.knots()[j].t;
    for (bool strict : {false, true}) {
      ExtTime s = first_reach(inner, u, strict);
      if (!s.is_finite()) continue;
      if (inner.find_knot(s.value()) == PiecewisePath::npos) {
        cands.push_back({s.value(), true, u});
      }
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.s < b.s; });

  std::vector<Knot> out;
  out.reserve(cands.size());
  for (const Cand& c : cands) {
    if (!out.empty() && c.s == out.back().t) continue;
    double v = c.exact ? c.u : inner.value_near(c.s);
    double right = outer.value_near(v);
    double left = right;
    if (c.s > 0.0) {
      double a = c.exact ? c.u : inner.left_near(c.s);
      left = rises_into(inner, c.s) ? outer.left_near(a) : outer.value_near(a);
    }
    out.push_back({c.s, left, right});
  }
  double ts = inner.terminal_slope() > 0.0
                  ? inner.terminal_slope() * outer.terminal_slope()
                  : 0.0;
  return PiecewisePath::from_knots(std::move(out), ts);
}

std::string CompatibilityReport::describe() const {
  std::ostringstream os;
  if (ok()) return "compatible";
  if (!h1) {
    os << "kappa passes a jump of g at a single point:";
    for (double u : h1_witnesses) os << " u=" << u;
  }
  if (!h2) {
    if (!h1) os << "; ";
    os << "g(kappa(s-)) != g(kappa(s)-) at a jump of kappa:";
    for (double s : h2_witnesses) os << " s=" << s;
  }
  return os.str();
}

CompatibilityError::CompatibilityError(CompatibilityReport report)
    : PreconditionError("incompatible pair for smooth composition: " +
                        report.describe()),
      report_(std::move(report)) {}

CompatibilityReport check_compatible(const PiecewisePath& g,
                                     const PiecewisePath& kappa) {
  PiecewisePath kinv = generalized_inverse(kappa);
  double gtol = 1e-9 * value_scale(g);
  CompatibilityReport r;
  for (const Knot& k : g.knots()) {
    if (k.right == k.left) continue;
    std::size_t idx = kinv.find_knot(k.t);
    if (idx == PiecewisePath::npos ||
        !(kinv.knots()[idx].right > kinv.knots()[idx].left)) {
      r.h1 = false;
      r.h1_witnesses.push_back(k.t);
    }
  }
  for (const Knot& k : kappa.knots()) {
    if (k.right == k.left) continue;
    if (std::abs(g.value_near(k.left) - g.left_near(k.right)) > gtol) {
      r.h2 = false;
      r.h2_witnesses.push_back(k.t);
    }
  }
  return r;
}

double smooth_compose_at(const PiecewisePath& g, const PiecewisePath& kappa,
                         const PiecewisePath& kappa_inverse, double s) {
  double u = kappa.eval(s);
  std::size_t idx = g.find_knot(u);
  if (idx == PiecewisePath::npos) return g.eval(u);
  const Knot& k = g.knots()[idx];
  if (k.right == k.left) return k.right;
  double lo = kappa_inverse.left_near(k.t);
  double hi = kappa_inverse.value_near(k.t);
  if (!(hi > lo)) return k.right;
  double frac = std::clamp((s - lo) / (hi - lo), 0.0, 1.0);
  return k.left + frac * (k.right - k.left);
}

PiecewisePath smooth_compose(const PiecewisePath& g,
                             const PiecewisePath& kappa) {
  if (!in_d0_upup(g) || !in_d0_upup(kappa)) {
    throw ClassError("smooth_compose: arguments must be in D0-up-up");
  }
  CompatibilityReport rep = check_compatible(g, kappa);
  if (!rep.ok()) throw CompatibilityError(std::move(rep));
  PiecewisePath kinv = generalized_inverse(kappa);

  std::vector<double> ss;
  for (const Knot& k : kappa.knots()) ss.push_back(k.t);
  for (const Knot& k : g.knots()) {
    ss.push_back(kinv.left_near(k.t));
    ss.push_back(kinv.value_near(k.t));
  }
  std::sort(ss.begin(), ss.end());
  ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  std::vector<Knot> out;
  out.reserve(ss.size());
  for (double s : ss) {
    double v = smooth_compose_at(g, kappa, kinv, s);
    out.push_back({s, v, v});
  }
  return PiecewisePath::from_knots(
      std::move(out), g.terminal_slope() * kappa.terminal_slope());
}

std::vector<Excursion> excursions(const PiecewisePath& p) {
  require_no_negative_jumps(p, "excursions");
  PiecewisePath d = p - past_infimum(p);
  double tol = kKnotEps * value_scale(p);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Closed pieces of {s : d(s-) = 0}, then excursions are the gaps.
  std::vector<Excursion> zeros{{0.0, 0.0}};
  auto add_zero = [&](double a, double b) {
    if (a <= zeros.back().r) {
      zeros.back().r = std::max(zeros.back().r, b);
    } else {
      zeros.push_back({a, b});
    }
  };
  auto ks = d.knots();
  for (std::size_t k = 0; k < ks.size(); ++k) {
    double a = ks[k].right;
    bool za = a <= tol;
    if (k + 1 == ks.size()) {
      if (za) add_zero(ks[k].t, d.terminal_slope() <= 0.0 ? inf : ks[k].t);
      break;
    }
    bool zb = ks[k + 1].left <= tol;
    if (za && zb) {
      add_zero(ks[k].t, ks[k + 1].t);
    } else if (za) {
      add_zero(ks[k].t, ks[k].t);
    } else if (zb) {
      add_zero(ks[k + 1].t, ks[k + 1].t);
    }
  }
  std::vector<Excursion> out;
  for (std::size_t z = 0; z + 1 < zeros.size(); ++z) {
    out.push_back({zeros[z].r, zeros[z + 1].l});
  }
  if (zeros.back().r != inf) out.push_back({zeros.back().r, inf});
  return out;
}

std::vector<double> ord_lengths(const PiecewisePath& p) {
  std::vector<double> ls;
  for (const Excursion& e : excursions(p)) ls.push_back(e.length());
  std::sort(ls.begin(), ls.end(), std::greater<>());
  return ls;
}

std::vector<Excursion> infimum_plateaus(const PiecewisePath& p) {
  PiecewisePath inf_path = past_infimum(p);
  double tol = kKnotEps * value_scale(p);
  auto ks = inf_path.knots();
  std::vector<Excursion> out;
  auto add_flat = [&](double a, double b) {
    if (!out.empty() && out.back().r == a) {
      out.back().r = b;
    } else {
      out.push_back({a, b});
    }
  };
  for (std::size_t k = 0; k < ks.size(); ++k) {
    if (k + 1 == ks.size()) {
      if (inf_path.terminal_slope() == 0.0) {
        add_flat(ks[k].t, std::numeric_limits<double>::infinity());
      }
      break;
    }
    if (std::abs(ks[k + 1].left - ks[k].right) <= tol) {
      add_flat(ks[k].t, ks[k + 1].t);
    }
  }
  return out;
}

PiecewisePath pure_jump_example() {
  return PiecewisePath::from_knots({{0.0, 0.0, 0.0},
                                    {0.2, 0.2, 0.25},
                                    {0.25, 0.25, 1.0 / 3.0},
                                    {1.0 / 3.0, 1.0 / 3.0, 0.5},
                                    {0.5, 0.5, 1.0},
                                    {2.0, 1.0, 2.0},
                                    {3.0, 2.0, 3.0},
                                    {4.0, 3.0, 4.0},
                                    {5.0, 4.0, 5.0},
                                    {6.0, 5.0, 6.0}},
                                   1.0);
}

}  // namespace hitfield
