#pragma once

// Exact algebra on piecewise-linear right-continuous functions on [0, inf).

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hitfield/errors.hpp"

namespace hitfield {

/// Knots closer than this (relative to max(1, |t|)) are merged; jumps and
/// slope changes smaller than this are treated as null.
inline constexpr double kKnotEps = 1e-12;

/// A time in [0, +inf]. Infinity is explicit, never a sentinel float.
class ExtTime {
 public:
  static ExtTime finite(double t) { return ExtTime(t, false); }
  static ExtTime infinite() { return ExtTime(0.0, true); }

  bool is_finite() const { return !infinite_; }
  /// Throws DomainError when infinite.
  double value() const;
  /// +inf as a double, for arithmetic that tolerates it (sorting, bounds).
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : t_;
  }

  friend bool operator==(const ExtTime&, const ExtTime&) = default;

 private:
  ExtTime(double t, bool inf) : t_(t), infinite_(inf) {}
  double t_;
  bool infinite_;
};

/// Breakpoint of a path: left limit and value at time t.
struct Knot {
  double t;
  double left;
  double right;

  friend bool operator==(const Knot&, const Knot&) = default;
};

/// Right-continuous piecewise-linear function on [0, inf) with finitely many
/// breakpoints. knots()[0] is always at t = 0 with left == right; between
/// consecutive knots the function is the straight line from the right value of
/// the first knot to the left value of the second; after the last knot it has
/// slope terminal_slope().
class PiecewisePath {
 public:
  /// The zero function.
  PiecewisePath() : knots_{{0.0, 0.0, 0.0}} {}

  /// Builds and canonicalizes. Knot times must be nondecreasing and >= 0; a
  /// missing knot at 0 is not allowed (the value at 0 must be given).
  static PiecewisePath from_knots(std::vector<Knot> knots,
                                  double terminal_slope);
  /// Same, with the terminal slope given as rise / run (run > 0). Keeping
  /// the pair lets the generalized inverse swap it without rounding.
  static PiecewisePath from_knots(std::vector<Knot> knots, double rise,
                                  double run);

  static PiecewisePath constant(double c);
  static PiecewisePath identity();
  /// t -> slope * t.
  static PiecewisePath drift(double slope);
  /// t -> size * 1[t >= at].
  static PiecewisePath step(double at, double size);

  double eval(double t) const;
  /// lim_{u -> t-} f(u); eval_left(0) == eval(0).
  double eval_left(double t) const;
  double jump_at(double t) const { return eval(t) - eval_left(t); }

  std::span<const Knot> knots() const { return knots_; }
  double terminal_slope() const { return terminal_rise_ / terminal_run_; }
  double terminal_rise() const { return terminal_rise_; }
  double terminal_run() const { return terminal_run_; }
  /// Slope on [t_k, t_{k+1}); the last index gives terminal_slope().
  double segment_slope(std::size_t k) const;
  /// Index of the knot within kKnotEps of t, or npos.
  std::size_t find_knot(double t) const;
  /// eval / eval_left that snap t to a knot within kKnotEps. Used where t
  /// comes out of arithmetic and is meant to sit exactly on a breakpoint.
  double value_near(double t) const;
  double left_near(double t) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Value at 0.
  double initial() const { return knots_.front().right; }
  double last_knot_time() const { return knots_.back().t; }

  /// Representation-level comparison with absolute tolerance on every number.
  bool approx_equal(const PiecewisePath& other, double tol) const;

  friend bool operator==(const PiecewisePath& a, const PiecewisePath& b) {
    return a.knots_ == b.knots_ && a.terminal_slope() == b.terminal_slope();
  }

  /// Index k of the segment [t_k, t_{k+1}) containing t.
  std::size_t segment_index(double t) const;

 private:
  void canonicalize();

  std::vector<Knot> knots_;
  double terminal_rise_ = 0.0;
  double terminal_run_ = 1.0;
};

struct PathClass {
  bool no_negative_jumps = false;   // D0+ without the f(0) = 0 requirement
  bool nondecreasing = false;       // D0-up without the f(0) = 0 requirement
  bool starts_at_zero = false;
  bool strictly_increasing_unbounded = false;  // D0-up-up
};

PathClass classify(const PiecewisePath& p);
inline bool in_d0_upup(const PiecewisePath& p) {
  return classify(p).strictly_increasing_unbounded;
}

/// A PiecewisePath known to be nondecreasing, with its class flags.
class MonotonePath {
 public:
  /// Throws ClassError unless p is nondecreasing.
  explicit MonotonePath(PiecewisePath p);

  const PiecewisePath& path() const { return path_; }
  const PathClass& path_class() const { return class_; }
  bool in_d0_upup() const { return class_.strictly_increasing_unbounded; }

  double eval(double t) const { return path_.eval(t); }
  double eval_left(double t) const { return path_.eval_left(t); }

 private:
  PiecewisePath path_;
  PathClass class_;
};

PiecewisePath add(const PiecewisePath& p, const PiecewisePath& q);
PiecewisePath scale(const PiecewisePath& p, double c);
/// Scaling that must stay inside the monotone class: throws ClassError on c < 0.
MonotonePath scale(const MonotonePath& p, double c);
inline PiecewisePath operator+(const PiecewisePath& p, const PiecewisePath& q) {
  return add(p, q);
}
inline PiecewisePath operator-(const PiecewisePath& p, const PiecewisePath& q) {
  return add(p, scale(q, -1.0));
}

/// t -> inf_{[0,t]} p. Requires no negative jumps; the result is continuous
/// and nonincreasing.
PiecewisePath past_infimum(const PiecewisePath& p);

/// inf{t >= 0 : p(t) >= level} (or > level when strict) for a nondecreasing p.
ExtTime first_reach(const PiecewisePath& nondecreasing, double level,
                    bool strict = false);
/// inf{t >= 0 : p(t) <= level} for a nonincreasing p.
ExtTime first_reach_below(const PiecewisePath& nonincreasing, double level);

/// Right-continuous generalized inverse s -> inf{u > 0 : h(u) > s}.
/// Requires h in D0-up-up.
PiecewisePath generalized_inverse(const PiecewisePath& h);
MonotonePath generalized_inverse(const MonotonePath& h);

/// Ordinary composition outer(inner(s)) for a nondecreasing inner path.
PiecewisePath compose(const PiecewisePath& outer, const PiecewisePath& inner);

struct CompatibilityReport {
  bool h1 = true;
  std::vector<double> h1_witnesses;  // jumps u of g with degenerate kappa^{-1}({u})
  bool h2 = true;
  std::vector<double> h2_witnesses;  // jumps s of kappa with g(kappa(s-)) != g(kappa(s)-)

  bool ok() const { return h1 && h2; }
  std::string describe() const;
};

CompatibilityReport check_compatible(const PiecewisePath& g,
                                     const PiecewisePath& kappa);

class CompatibilityError : public PreconditionError {
 public:
  explicit CompatibilityError(CompatibilityReport report);
  const CompatibilityReport& report() const { return report_; }

 private:
  CompatibilityReport report_;
};

/// g smoothly composed with kappa: g(kappa(s)) off the pull-backs of the
/// jumps of g, the linear spline from (kappa^{-1}(u-), g(u-)) to
/// (kappa^{-1}(u), g(u)) on each of them. Throws CompatibilityError.
PiecewisePath smooth_compose(const PiecewisePath& g, const PiecewisePath& kappa);

/// Pointwise form of smooth_compose, evaluated directly from the definition.
double smooth_compose_at(const PiecewisePath& g, const PiecewisePath& kappa,
                         const PiecewisePath& kappa_inverse, double s);

struct Excursion {
  double l;
  double r;  // +inf for a final excursion that never returns
  double length() const { return r - l; }
};

/// Excursions above the past infimum, chronological. Requires no negative
/// jumps.
std::vector<Excursion> excursions(const PiecewisePath& p);
/// Excursion lengths in nonincreasing order.
std::vector<double> ord_lengths(const PiecewisePath& p);

/// Maximal positive-length intervals on which the past infimum is constant.
/// Every excursion lies inside one plateau; r = +inf for a final plateau.
std::vector<Excursion> infimum_plateaus(const PiecewisePath& p);

/// The pure-jump function u -> sum_k (1/k) 1[1/(k+1) <= u < 1/k]
/// + sum_j j 1[j <= u < j+1], truncated to finitely many breakpoints: the
/// identity on [0, 1/5) and on [6, inf), exact on [1/5, 6). It is constant 1
/// on [1/2, 2), so ordinary composition with its inverse is not the identity.
PiecewisePath pure_jump_example();

}  // namespace hitfield
