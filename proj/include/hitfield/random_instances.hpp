#pragma once

// Random instances for property checks: monotone paths, paths without
// negative jumps, kernels and small models.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hitfield/block_model.hpp"
#include "hitfield/piecewise.hpp"

namespace hitfield::gen {


inline double unif(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

/// Random element of D0-up-up: up to 8 breakpoints, random jumps and flats,
/// positive first and terminal slopes.
inline PiecewisePath random_d0upup(Rng& rng) {
  int n = std::uniform_int_distribution<int>(0, 8)(rng);
  std::vector<Knot> ks{{0.0, 0.0, 0.0}};
  double t = 0.0, v = 0.0;
  for (int k = 0; k < n; ++k) {
    double dt = unif(rng, 0.05, 1.5);
    double slope = 0.0;
    if (k == 0 || unif(rng, 0, 1) < 0.7) slope = unif(rng, 0.1, 3.0);
    t += dt;
    v += slope * dt;
    double jump = unif(rng, 0, 1) < 0.5 ? unif(rng, 0.05, 2.0) : 0.0;
    ks.push_back({t, v, v + jump});
    v += jump;
  }
  return PiecewisePath::from_knots(std::move(ks), unif(rng, 0.1, 3.0));
}

/// Random path without negative jumps: signed drifts and upward jumps.
inline PiecewisePath random_no_negative_jumps(Rng& rng) {
  int n = std::uniform_int_distribution<int>(0, 10)(rng);
  std::vector<Knot> ks{{0.0, 0.0, 0.0}};
  double t = 0.0, v = 0.0;
  for (int k = 0; k < n; ++k) {
    double dt = unif(rng, 0.05, 1.5);
    double slope = unif(rng, -2.0, 1.0);
    t += dt;
    v += slope * dt;
    double jump = unif(rng, 0, 1) < 0.6 ? unif(rng, 0.05, 2.0) : 0.0;
    ks.push_back({t, v, v + jump});
    v += jump;
  }
  return PiecewisePath::from_knots(std::move(ks), unif(rng, -2.0, 0.5));
}

/// Sample points for sup-norm checks: every breakpoint, segment midpoints,
/// and a uniform fill reaching past the last breakpoint.
inline std::vector<double> grid_for(const std::vector<const PiecewisePath*>& ps,
                                    int fill = 200) {
  std::vector<double> g;
  double hi = 1.0;
  for (const PiecewisePath* p : ps) {
    auto ks = p->knots();
    for (std::size_t k = 0; k < ks.size(); ++k) {
      g.push_back(ks[k].t);
      if (k + 1 < ks.size()) g.push_back(0.5 * (ks[k].t + ks[k + 1].t));
    }
    hi = std::max(hi, ks.back().t);
  }
  hi *= 1.5;
  for (int i = 0; i <= fill; ++i) g.push_back(hi * i / fill);
  return g;
}

/// Random positive symmetric kernel with diagonal and off-diagonal entries
/// in [0.2, 2].
inline SquareMatrix random_kernel(Rng& rng, int m) {
  SquareMatrix q(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) q(i, j) = q(j, i) = unif(rng, 0.2, 2.0);
  }
  return q;
}

/// Random model with m types and between 1 and max_vertices vertices in
/// total; some types may be empty.
inline BlockModel random_model(Rng& rng, int m, int max_vertices) {
  int n = std::uniform_int_distribution<int>(1, max_vertices)(rng);
  std::vector<std::vector<double>> w(m);
  for (int v = 0; v < n; ++v) {
    int type = std::uniform_int_distribution<int>(0, m - 1)(rng);
    w[type].push_back(unif(rng, 0.2, 2.0));
  }
  for (auto& x : w) std::sort(x.begin(), x.end(), std::greater<>());
  return BlockModel(std::move(w), random_kernel(rng, m));
}


/// sup over the grid of |p - q|.
inline double sup_diff(const PiecewisePath& p, const PiecewisePath& q,
                       const std::vector<double>& grid) {
  double d = 0.0;
  for (double s : grid) d = std::max(d, std::abs(p.eval(s) - q.eval(s)));
  return d;
}

}  // namespace hitfield::gen
