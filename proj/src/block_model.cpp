#include "hitfield/block_model.hpp"

#include <algorithm>
#include <boost/pending/disjoint_sets.hpp>
#include <cmath>
#include <functional>
#include <numeric>

namespace hitfield {

SquareMatrix SquareMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  SquareMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw ModelError("kernel must be square");
    }
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> SquareMatrix::rows() const {
  std::vector<std::vector<double>> r(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
  }
  return r;
}

std::string Vertex::label() const {
  return std::to_string(rank + 1) + ":" + std::to_string(type + 1);
}

BlockModel::BlockModel(std::vector<std::vector<double>> weights, SquareMatrix q)
    : weights_(std::move(weights)), q_(std::move(q)) {
  const std::size_t m = weights_.size();
  if (m == 0) throw ModelError("model needs at least one type");
  if (q_.size() != m) {
    throw ModelError("kernel is " + std::to_string(q_.size()) + "x" +
                     std::to_string(q_.size()) + " but there are " +
                     std::to_string(m) + " weight vectors");
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double a = q_(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        throw ModelError("kernel entry Q[" + std::to_string(i + 1) + "][" +
                         std::to_string(j + 1) + "] must be finite and >= 0");
      }
      if (std::abs(a - q_(j, i)) > 1e-12) {
        throw ModelError("kernel is not symmetric at (" + std::to_string(i + 1) +
                         "," + std::to_string(j + 1) + ")");
      }
    }
    if (!(q_(i, i) > 0.0)) {
      throw ModelError("kernel diagonal Q[" + std::to_string(i + 1) + "][" +
                       std::to_string(i + 1) + "] must be > 0");
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto& w = weights_[i];
    for (double x : w) {
      if (!std::isfinite(x) || !(x > 0.0)) {
        throw ModelError("weights of type " + std::to_string(i + 1) +
                         " must be finite and > 0");
      }
    }
    if (!std::is_sorted(w.begin(), w.end(), std::greater<>())) {
      std::sort(w.begin(), w.end(), std::greater<>());
      warnings_.push_back("weights of type " + std::to_string(i + 1) +
                          " were not nonincreasing; sorted");
    }
  }
  r_ = SquareMatrix(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      r_(i, j) = i == j ? 1.0 : q_(i, j) / q_(i, i);
    }
  }
  offsets_.assign(1, 0);
  for (const auto& w : weights_) offsets_.push_back(offsets_.back() + w.size());
}

Vertex BlockModel::vertex(std::size_t index) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  int type = static_cast<int>(it - offsets_.begin()) - 1;
  return {type, static_cast<int>(index - offsets_[type])};
}

double BlockModel::edge_probability(const Vertex& a, const Vertex& b) const {
  return -std::expm1(-q_(a.type, b.type) * weight(a) * weight(b));
}

void Graph::add_edge(std::size_t u, std::size_t v) {
  if (u == v) return;
  if (u > v) std::swap(u, v);
  if (has_edge(u, v)) return;
  edges.insert(std::upper_bound(edges.begin(), edges.end(), std::pair{u, v}),
               {u, v});
  auto ins = [](std::vector<std::size_t>& a, std::size_t x) {
    a.insert(std::upper_bound(a.begin(), a.end(), x), x);
  };
  ins(adjacency[u], v);
  ins(adjacency[v], u);
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  return std::binary_search(adjacency[u].begin(), adjacency[u].end(), v);
}

Graph sample_graph(const BlockModel& model, Rng& rng) {
  Graph g;
  g.n = model.vertex_count();
  g.adjacency.resize(g.n);
  for (std::size_t u = 0; u < g.n; ++u) {
    Vertex a = model.vertex(u);
    for (std::size_t v = u + 1; v < g.n; ++v) {
      if (uniform01(rng) < model.edge_probability(a, model.vertex(v))) {
        g.edges.emplace_back(u, v);
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
      }
    }
  }
  for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
  return g;
}

Graph sample_graph(const BlockModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return sample_graph(model, rng);
}

double scaled_mass(const std::vector<double>& mass,
                   const std::vector<double>& rho, const SquareMatrix& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) s += rho[i] * q(i, i) * mass[i];
  return s;
}

std::vector<ComponentRecord> connected_components(const Graph& g,
                                                  const BlockModel& model) {
  boost::disjoint_sets_with_storage<> sets(g.n);
  for (std::size_t v = 0; v < g.n; ++v) sets.make_set(v);
  for (const auto& [u, v] : g.edges) sets.union_set(u, v);
  std::vector<ComponentRecord> out;
  std::vector<std::size_t> slot(g.n, g.n);
  for (std::size_t v = 0; v < g.n; ++v) {
    std::size_t r = sets.find_set(v);
    if (slot[r] == g.n) {
      slot[r] = out.size();
      out.push_back({{}, std::vector<double>(model.m(), 0.0)});
    }
    ComponentRecord& c = out[slot[r]];
    Vertex x = model.vertex(v);
    c.vertices.push_back(v);
    c.mass[x.type] += model.weight(x);
  }
  return out;
}

std::vector<std::size_t> size_biased_order(
    const std::vector<ComponentRecord>& comps, const std::vector<double>& rho,
    const SquareMatrix& q, Rng& rng) {
  std::vector<std::pair<double, std::size_t>> keys;
  for (std::size_t r = 0; r < comps.size(); ++r) {
    double s = scaled_mass(comps[r], rho, q);
    if (s > 0.0) keys.emplace_back(exponential(rng, s), r);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::size_t> out;
  for (const auto& k : keys) out.push_back(k.second);
  return out;
}

void validate_rho(const std::vector<double>& rho, int m) {
  if (static_cast<int>(rho.size()) != m) {
    throw ModelError("rho has length " + std::to_string(rho.size()) +
                     ", expected " + std::to_string(m));
  }
  bool any = false;
  for (double r : rho) {
    if (!std::isfinite(r) || r < 0.0) {
      throw ModelError("rho entries must be finite and >= 0");
    }
    any = any || r > 0.0;
  }
  if (!any) throw ModelError("rho must have a positive entry");
}

Factorization factor_kernel(const SquareMatrix& q) {
  const std::size_t m = q.size();
  Factorization f;
  if (m == 1) {
    f.ok = true;
    f.rho = {1.0};
    f.nu = {1.0};
    return f;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && !(q(i, j) > 0.0)) {
        f.witness = "Q[" + std::to_string(i + 1) + "][" +
                    std::to_string(j + 1) + "] is not positive";
        return f;
      }
    }
  }
  auto r = [&](std::size_t i, std::size_t j) { return q(i, j) / q(i, i); };
  f.rho.assign(m, 0.0);
  f.nu.assign(m, 0.0);
  if (m == 2) {
    f.rho = {1.0, 1.0};
    f.nu = {r(1, 0), r(0, 1)};
  } else if (m == 3) {
    for (std::size_t i = 0; i < 3; ++i) {
      std::size_t j = (i + 1) % 3, k = (i + 2) % 3;
      f.rho[i] = q(i, j) * q(i, k) / q(i, i);
      f.nu[i] = 1.0 / q(j, k);
    }
  } else {
    f.rho[0] = 1.0;
    for (std::size_t j = 1; j < m; ++j) f.nu[j] = r(0, j);
    f.rho[1] = r(1, 2) / f.nu[2];
    f.nu[0] = r(1, 0) / f.rho[1];
    for (std::size_t i = 2; i < m; ++i) f.rho[i] = r(i, 0) / f.nu[0];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      double e = std::abs(r(i, j) - f.rho[i] * f.nu[j]);
      if (e > f.residual) {
        f.residual = e;
        if (e > 1e-9) {
          f.witness = "R[" + std::to_string(i + 1) + "][" +
                      std::to_string(j + 1) + "] off by " + std::to_string(e);
        }
      }
    }
  }
  f.ok = f.residual <= 1e-9;
  if (!f.ok) {
    f.rho.clear();
    f.nu.clear();
  }
  return f;
}

QParametrization build_q_parametrization(const SquareMatrix& q,
                                         const std::vector<double>& rho,
                                         const std::vector<double>& nu) {
  QParametrization p;
  const std::size_t m = q.size();
  p.q0 = q(0, 0) * rho[0] / nu[0];
  for (std::size_t j = 0; j < m; ++j) {
    p.spread = std::max(p.spread, std::abs(q(j, j) * rho[j] / nu[j] - p.q0));
    p.q.push_back(q(j, j) / (nu[j] * nu[j]));
  }
  return p;
}

BlockModel normalize_kernel(const BlockModel& model) {
  const int m = model.m();
  std::vector<std::vector<double>> w = model.all_weights();
  SquareMatrix q(m);
  for (int i = 0; i < m; ++i) {
    double s = std::sqrt(model.Q()(i, i));
    for (double& x : w[i]) x *= s;
    for (int j = 0; j < m; ++j) {
      q(i, j) = i == j ? 1.0
                       : model.Q()(i, j) /
                             std::sqrt(model.Q()(i, i) * model.Q()(j, j));
    }
  }
  return BlockModel(std::move(w), std::move(q));
}

ExplorationTrace graph_exploration(const Graph& g, const BlockModel& model,
                                   const std::vector<double>& rho, Rng& rng) {
  validate_rho(rho, model.m());
  const std::size_t n = model.vertex_count();
  std::vector<bool> unexplored(n, true);
  auto vertex_mass = [&](std::size_t v) {
    Vertex x = model.vertex(v);
    return rho[x.type] * model.Q()(x.type, x.type) * model.weight(x);
  };
  ExplorationTrace tr;
  std::size_t k = 0;
  while (true) {
    ExplorationStep step;
    if (k == tr.order.size()) {
      double total = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (unexplored[v]) total += vertex_mass(v);
      }
      if (!(total > 0.0)) break;
      double y = exponential(rng, total);
      double u = uniform01(rng) * total;
      std::size_t root = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (!unexplored[v] || vertex_mass(v) == 0.0) continue;
        root = v;
        u -= vertex_mass(v);
        if (u < 0.0) break;
      }
      unexplored[root] = false;
      tr.order.push_back(root);
      tr.component_mass.emplace_back(model.m(), 0.0);
      Vertex x = model.vertex(root);
      tr.component_mass.back()[x.type] += model.weight(x);
      tr.y.push_back(y);
      step.root = true;
      step.y = y;
    }
    std::size_t v = tr.order[k];
    step.k = static_cast<int>(k + 1);
    step.vertex = v;
    step.zeta = tr.zeta_inf();
    step.n_k = static_cast<int>(tr.order.size());

    // Children by type, size-biased by weight within type.
    std::vector<std::tuple<int, double, std::size_t>> kids;
    for (std::size_t c : g.adjacency[v]) {
      if (!unexplored[c]) continue;
      unexplored[c] = false;
      Vertex x = model.vertex(c);
      kids.emplace_back(x.type, exponential(rng, model.weight(x)), c);
    }
    std::sort(kids.begin(), kids.end());
    for (const auto& [type, key, c] : kids) {
      tr.order.push_back(c);
      step.children.push_back(c);
      tr.component_mass.back()[type] += model.weight(model.vertex(c));
    }
    step.chi = static_cast<int>(kids.size());
    tr.steps.push_back(std::move(step));
    ++k;
  }
  return tr;
}

void write_edge_csv(std::ostream& os, const Graph& g, const BlockModel& model) {
  os << "source,target\n";
  for (const auto& [u, v] : g.edges) {
    os << model.vertex(u).label() << ',' << model.vertex(v).label() << '\n';
  }
}

}  // namespace hitfield
