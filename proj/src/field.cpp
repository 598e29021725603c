#include "hitfield/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace hitfield {

std::vector<int> ClockSet::order(int type) const {
  std::vector<int> idx(xi[type].size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return xi[type][a] < xi[type][b]; });
  return idx;
}

void ClockSet::validate(const BlockModel& model) const {
  if (static_cast<int>(xi.size()) != model.m()) {
    throw ModelError("clocks given for " + std::to_string(xi.size()) +
                     " types, model has " + std::to_string(model.m()));
  }
  for (int i = 0; i < model.m(); ++i) {
    if (xi[i].size() != model.weights(i).size()) {
      throw ModelError("type " + std::to_string(i + 1) + " has " +
                       std::to_string(model.weights(i).size()) +
                       " vertices but " + std::to_string(xi[i].size()) +
                       " clocks");
    }
    std::vector<double> c = xi[i];
    for (double x : c) {
      if (!std::isfinite(x) || !(x > 0.0)) {
        throw ModelError("clocks must be finite and > 0");
      }
    }
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw ModelError("clocks of type " + std::to_string(i + 1) +
                       " are not distinct");
    }
  }
}

ClockSet sample_clocks(const BlockModel& model, Rng& rng) {
  ClockSet c;
  c.xi.resize(model.m());
  for (int i = 0; i < model.m(); ++i) {
    const auto& w = model.weights(i);
    while (true) {
      c.xi[i].clear();
      for (double wl : w) c.xi[i].push_back(exponential(rng, wl));
      std::vector<double> s = c.xi[i];
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) == s.end()) break;
    }
  }
  return c;
}

Field::Field(int m, std::vector<PiecewisePath> paths)
    : m_(m), x_(std::move(paths)) {
  if (m <= 0 || x_.size() != static_cast<std::size_t>(m) * m) {
    throw PreconditionError("field needs m * m paths");
  }
}

std::vector<double> Field::column_jump_times(int j) const {
  std::set<double> ts;
  for (int i = 0; i < m_; ++i) {
    for (const Knot& k : (*this)(i, j).knots()) {
      if (k.right != k.left) ts.insert(k.t);
    }
  }
  return {ts.begin(), ts.end()};
}

Field build_field(const BlockModel& model, const ClockSet& clocks) {
  clocks.validate(model);
  const int m = model.m();
  std::vector<PiecewisePath> paths(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j) {
    double qjj = model.Q()(j, j);
    std::vector<std::pair<double, double>> jumps;  // (time, size)
    for (std::size_t l = 0; l < clocks.xi[j].size(); ++l) {
      jumps.emplace_back(clocks.xi[j][l] / qjj, model.weights(j)[l]);
    }
    std::sort(jumps.begin(), jumps.end());
    std::vector<Knot> diag{{0, 0, 0}};
    std::vector<Knot> mass{{0, 0, 0}};
    double cum = 0.0;
    for (const auto& [t, w] : jumps) {
      diag.push_back({t, cum - t, cum + w - t});
      mass.push_back({t, cum, cum + w});
      cum += w;
    }
    PiecewisePath steps = PiecewisePath::from_knots(mass, 0.0);
    for (int i = 0; i < m; ++i) {
      paths[i * m + j] = i == j ? PiecewisePath::from_knots(diag, -1.0)
                                : scale(steps, model.R(i, j));
    }
  }
  return Field(m, std::move(paths));
}

namespace {

void check_vector(const Field& f, const std::vector<double>& t) {
  if (static_cast<int>(t.size()) != f.m()) {
    throw DomainError("time vector has wrong length");
  }
}

}  // namespace

std::vector<double> field_eval(const Field& f, const std::vector<double>& t) {
  check_vector(f, t);
  std::vector<double> out(f.m(), 0.0);
  for (int i = 0; i < f.m(); ++i) {
    for (int j = 0; j < f.m(); ++j) out[i] += f(i, j).eval(t[j]);
  }
  return out;
}

std::vector<double> field_eval_left(const Field& f,
                                    const std::vector<double>& t) {
  check_vector(f, t);
  std::vector<double> out(f.m(), 0.0);
  for (int i = 0; i < f.m(); ++i) {
    for (int j = 0; j < f.m(); ++j) out[i] += f(i, j).eval_left(t[j]);
  }
  return out;
}

bool HitVector::all_finite() const {
  return std::all_of(t.begin(), t.end(),
                     [](const ExtTime& x) { return x.is_finite(); });
}

std::vector<double> HitVector::values() const {
  std::vector<double> v;
  for (const ExtTime& x : t) v.push_back(x.value());
  return v;
}

HitVector hitting_time(const Field& f, const std::vector<double>& rho,
                       double y) {
  const int m = f.m();
  validate_rho(rho, m);
  if (!std::isfinite(y) || y < 0.0) {
    throw DomainError("hitting level must be finite and >= 0");
  }
  std::vector<PiecewisePath> inf(m);
  std::size_t jump_count = 0;
  for (int i = 0; i < m; ++i) {
    inf[i] = past_infimum(f(i, i));
    for (int j = 0; j < m; ++j) {
      if (i != j && !classify(f(i, j)).nondecreasing) {
        throw ClassError("off-diagonal field paths must be nondecreasing");
      }
      jump_count += f(i, j).knots().size();
    }
  }
  // Pure-jump off-diagonals make the iteration stop after finitely many
  // sweeps; continuous ones converge geometrically.
  const int max_sweeps = static_cast<int>(jump_count) + 100000;
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  HitVector h;
  h.t.assign(m, ExtTime::finite(0.0));
  for (int i = 0; i < m; ++i) h.rho_zero.push_back(rho[i] == 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<ExtTime> next(m, ExtTime::finite(0.0));
    for (int i = 0; i < m; ++i) {
      double level = -rho[i] * y;
      for (int j = 0; j < m && level != neg_inf; ++j) {
        if (j == i) continue;
        const PiecewisePath& x = f(i, j);
        if (h.t[j].is_finite()) {
          level -= x.eval_left(h.t[j].value());
        } else if (x.terminal_slope() > 0.0) {
          level = neg_inf;
        } else {
          level -= x.knots().back().right;
        }
      }
      next[i] = level == neg_inf ? ExtTime::infinite()
                                 : first_reach_below(inf[i], level);
    }
    bool same = true;
    bool converged = true;
    for (int i = 0; i < m; ++i) {
      double a = h.t[i].as_double(), b = next[i].as_double();
      if (b < a) throw InvariantViolation("hitting-time iteration decreased");
      if (a != b) {
        same = false;
        if (!(std::isfinite(b) && b - a <= 1e-15 * (1.0 + b))) converged = false;
      }
    }
    h.t = std::move(next);
    h.sweeps = sweep;
    if (same || converged) return h;
  }
  throw InvariantViolation("hitting-time iteration did not settle");
}

std::vector<double> HittingProcess::eval(double y) const {
  std::vector<double> t(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) t[i] = rho[i] * y;
  for (std::size_t r = 0; r < levels.size() && levels[r] < y; ++r) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += jumps[r][i];
  }
  return t;
}

std::vector<double> HittingProcess::eval_right(double y) const {
  std::vector<double> t(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) t[i] = rho[i] * y;
  for (std::size_t r = 0; r < levels.size() && levels[r] <= y; ++r) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += jumps[r][i];
  }
  return t;
}

ExplorationTrace field_exploration(const BlockModel& model,
                                   const ClockSet& clocks,
                                   const std::vector<double>& rho) {
  const int m = model.m();
  validate_rho(rho, m);
  clocks.validate(model);
  const std::size_t n = model.vertex_count();
  auto clock = [&](std::size_t v) {
    Vertex x = model.vertex(v);
    return clocks.xi[x.type][x.rank];
  };
  auto window_time = [&](std::size_t v) {
    Vertex x = model.vertex(v);
    return clock(v) / model.Q()(x.type, x.type);
  };
  auto increment = [&](std::size_t v) {
    Vertex x = model.vertex(v);
    std::vector<double> d(m);
    for (int i = 0; i < m; ++i) d[i] = model.weight(x) * model.R(i, x.type);
    return d;
  };

  std::vector<bool> unexplored(n, true);
  std::vector<double> cursor(m, 0.0);  // S^R of the last discovered vertex
  std::vector<std::vector<double>> s_left, s_right;
  auto discover = [&](std::size_t v, const std::vector<double>& sl) {
    std::vector<double> sr = sl;
    auto d = increment(v);
    for (int i = 0; i < m; ++i) sr[i] += d[i];
    unexplored[v] = false;
    s_left.push_back(sl);
    s_right.push_back(sr);
    cursor = sr;
  };

  ExplorationTrace tr;
  std::size_t k = 0;
  while (true) {
    ExplorationStep step;
    if (k == tr.order.size()) {
      std::size_t root = n;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < n; ++v) {
        int i = model.vertex(v).type;
        if (!unexplored[v] || !(rho[i] > 0.0)) continue;
        double fv = (window_time(v) - cursor[i]) / rho[i];
        if (fv < best) {
          best = fv;
          root = v;
        }
      }
      if (root == n) break;
      std::vector<double> sl(m);
      for (int i = 0; i < m; ++i) sl[i] = cursor[i] + rho[i] * best;
      tr.order.push_back(root);
      discover(root, sl);
      tr.component_mass.emplace_back(m, 0.0);
      Vertex x = model.vertex(root);
      tr.component_mass.back()[x.type] += model.weight(x);
      tr.y.push_back(best);
      step.root = true;
      step.y = best;
    }
    std::size_t v = tr.order[k];
    step.k = static_cast<int>(k + 1);
    step.vertex = v;
    step.zeta = tr.zeta_inf();
    step.n_k = static_cast<int>(tr.order.size());
    step.s_left = s_left[k];
    step.s_right = s_right[k];

    std::vector<std::tuple<int, double, std::size_t>> kids;
    for (std::size_t u = 0; u < n; ++u) {
      if (!unexplored[u]) continue;
      int i = model.vertex(u).type;
      double tu = window_time(u);
      if (tu >= step.s_left[i] && tu < step.s_right[i]) {
        kids.emplace_back(i, clock(u), u);
      }
    }
    std::sort(kids.begin(), kids.end());
    for (const auto& [type, c, u] : kids) {
      tr.order.push_back(u);
      discover(u, cursor);
      step.children.push_back(u);
      tr.component_mass.back()[type] += model.weight(model.vertex(u));
    }
    step.chi = static_cast<int>(kids.size());
    tr.steps.push_back(std::move(step));
    ++k;
  }
  return tr;
}

HittingProcess hitting_process(const ExplorationTrace& trace,
                               const std::vector<double>& rho) {
  HittingProcess hp;
  hp.rho = rho;
  const std::size_t m = rho.size();
  double level = 0.0;
  std::vector<double> last_right;
  std::size_t comp = 0;
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const ExplorationStep& st = trace.steps[s];
    if (!st.root) continue;
    level += trace.y[comp++];
    // The component ends where the next root starts (or at the last step).
    std::size_t e = s + 1;
    while (e < trace.steps.size() && !trace.steps[e].root) ++e;
    // Vertices are discovered in processing order, so the last discovered
    // vertex of this component is the last step before the next root.
    const std::vector<double>& sr = trace.steps[e - 1].s_right;
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = sr[i] - st.s_left[i];
    hp.levels.push_back(level);
    hp.jumps.push_back(std::move(d));
  }
  return hp;
}

HittingProcess hitting_process(const BlockModel& model, const ClockSet& clocks,
                               const std::vector<double>& rho) {
  return hitting_process(field_exploration(model, clocks, rho), rho);
}

HittingProcess hitting_process_oracle(const Field& f,
                                      const std::vector<double>& rho) {
  const int m = f.m();
  validate_rho(rho, m);
  HittingProcess hp;
  hp.rho = rho;
  std::vector<std::vector<double>> col_jumps(m);
  for (int j = 0; j < m; ++j) col_jumps[j] = f.column_jump_times(j);

  double y0 = 0.0;
  std::vector<double> t(m, 0.0);  // T(y0+)
  while (true) {
    double next = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (!(rho[j] > 0.0)) continue;
      const auto& cj = col_jumps[j];
      double guard = t[j] + 1e-12 * (1.0 + t[j]);
      auto it = std::upper_bound(cj.begin(), cj.end(), guard);
      if (it == cj.end()) continue;
      next = std::min(next, y0 + (*it - t[j]) / rho[j]);
    }
    if (!std::isfinite(next)) break;
    double eps = 1e-9 * (1.0 + next);
    HitVector lo = hitting_time(f, rho, next - eps);
    HitVector hi = hitting_time(f, rho, next + eps);
    if (!lo.all_finite() || !hi.all_finite()) break;
    std::vector<double> left = lo.values(), right = hi.values();
    std::vector<double> d(m);
    double size = 0.0;
    for (int i = 0; i < m; ++i) {
      left[i] += rho[i] * eps;
      right[i] -= rho[i] * eps;
      d[i] = right[i] - left[i];
      size = std::max(size, d[i]);
    }
    if (size > 1e-9) {
      hp.levels.push_back(next);
      hp.jumps.push_back(std::move(d));
    }
    y0 = next;
    t = std::move(right);
  }
  return hp;
}

PiecewisePath rank_one_walk(const BlockModel& model, const ClockSet& clocks) {
  if (model.m() != 1) throw PreconditionError("rank-one walk needs m = 1");
  return build_field(model, clocks)(0, 0);
}

std::vector<RankOneJump> rank_one_encoding(const BlockModel& model,
                                           const ClockSet& clocks) {
  if (model.m() != 1) throw PreconditionError("rank-one walk needs m = 1");
  clocks.validate(model);
  // Direct construction: sort the jump times, walk the running minimum.
  double q = model.Q()(0, 0);
  std::vector<std::pair<double, double>> jumps;
  for (std::size_t l = 0; l < clocks.xi[0].size(); ++l) {
    jumps.emplace_back(clocks.xi[0][l] / q, model.weights(0)[l]);
  }
  std::sort(jumps.begin(), jumps.end());
  std::vector<RankOneJump> out;
  double cum = 0.0;         // total jump mass so far
  double low = 0.0;         // running minimum of the walk
  double start = 0.0;       // start of the current plateau
  double flat_until = 0.0;  // time the walk returns to `low`
  for (const auto& [t, w] : jumps) {
    if (out.empty() || t >= flat_until) {
      // The walk sits at its running minimum just before t.
      low = cum - t;
      start = t;
      out.push_back({-low, 0.0});
    }
    cum += w;
    flat_until = cum - low;
    out.back().size = flat_until - start;
  }
  return out;
}

}  // namespace hitfield
