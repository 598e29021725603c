#pragma once

// Degree-corrected stochastic block model: data, sampling, components,
// kernel factorization and the graph-side exploration.

#include <compare>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitfield/rng.hpp"

namespace hitfield {

/// Dense row-major square matrix; m is tiny so nothing fancier is needed.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : n_(n), a_(n * n, fill) {}
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  std::vector<std::vector<double>> rows() const;

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Vertex (l, i) with 0-based rank l within type i. Exported as "l:i" 1-based.
struct Vertex {
  int type = 0;
  int rank = 0;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
  std::string label() const;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BlockModel {
 public:
  /// Validates. Weight vectors that are not nonincreasing are sorted and a
  /// warning is recorded in warnings().
  BlockModel(std::vector<std::vector<double>> weights, SquareMatrix q);

  int m() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights(int type) const { return weights_[type]; }
  const std::vector<std::vector<double>>& all_weights() const { return weights_; }
  const SquareMatrix& Q() const { return q_; }
  /// R_ij = Q_ij / Q_ii.
  double R(int i, int j) const { return r_(i, j); }
  const SquareMatrix& R() const { return r_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::size_t vertex_count() const { return offsets_.back(); }
  /// Global index in (type, rank) order.
  std::size_t index(const Vertex& v) const { return offsets_[v.type] + v.rank; }
  Vertex vertex(std::size_t index) const;
  double weight(const Vertex& v) const { return weights_[v.type][v.rank]; }
  double edge_probability(const Vertex& a, const Vertex& b) const;

 private:
  std::vector<std::vector<double>> weights_;
  SquareMatrix q_;
  SquareMatrix r_;
  std::vector<std::size_t> offsets_;
  std::vector<std::string> warnings_;
};

/// Simple undirected graph on the model's vertices (global indices).
struct Graph {
  Graph() = default;
  explicit Graph(std::size_t vertices) : n(vertices), adjacency(vertices) {}

  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
  std::vector<std::vector<std::size_t>> adjacency;         // sorted

  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const;
};

/// Every pair {a, b} is an edge with probability 1 - exp(-Q w_a w_b),
/// independently. Deterministic given the stream.
Graph sample_graph(const BlockModel& model, Rng& rng);
Graph sample_graph(const BlockModel& model, std::uint64_t seed);

struct ComponentRecord {
  std::vector<std::size_t> vertices;  // global indices, ascending
  std::vector<double> mass;           // M_j: total weight of type j
};

double scaled_mass(const std::vector<double>& mass,
                   const std::vector<double>& rho, const SquareMatrix& q);
inline double scaled_mass(const ComponentRecord& c,
                          const std::vector<double>& rho,
                          const SquareMatrix& q) {
  return scaled_mass(c.mass, rho, q);
}

/// Components listed by smallest (type, rank) label.
std::vector<ComponentRecord> connected_components(const Graph& g,
                                                  const BlockModel& model);

/// Indices of the components in size-biased order: independent Exp keys
/// with rate equal to the scaled mass, ascending. Zero-mass components are
/// left out.
std::vector<std::size_t> size_biased_order(
    const std::vector<ComponentRecord>& comps, const std::vector<double>& rho,
    const SquareMatrix& q, Rng& rng);

/// Validates rho: finite, nonnegative, not all zero, length m.
void validate_rho(const std::vector<double>& rho, int m);

struct Factorization {
  bool ok = false;
  std::vector<double> rho;
  std::vector<double> nu;
  double residual = 0.0;  // max over i != j of |R_ij - rho_i nu_j|
  std::string witness;    // reason when !ok
};

/// Factor the off-diagonal part of R as R_ij = rho_i nu_j.
Factorization factor_kernel(const SquareMatrix& q);

struct QParametrization {
  double q0 = 0.0;
  std::vector<double> q;
  double spread = 0.0;  // max deviation of the per-index q0 candidates
};

/// Q_ij = q0 nu_i nu_j for i != j and Q_ii = q_i nu_i^2, given R_ij = rho_i nu_j.
QParametrization build_q_parametrization(const SquareMatrix& q,
                                         const std::vector<double>& rho,
                                         const std::vector<double>& nu);

/// Rescale to a unit-diagonal kernel: w' = sqrt(Q_ii) w, Q'_ij = Q_ij /
/// sqrt(Q_ii Q_jj). Edge probabilities are unchanged pair by pair.
BlockModel normalize_kernel(const BlockModel& model);

/// One step of an exploration: the vertex processed at step k.
struct ExplorationStep {
  int k = 0;  // 1-based
  bool root = false;
  std::size_t vertex = 0;
  int zeta = 0;  // components discovered so far
  int chi = 0;   // number of children
  int n_k = 0;   // N_k
  std::vector<std::size_t> children;  // in stack order
  double y = 0.0;                     // Y of the component, roots only
  std::vector<double> s_left;         // field exploration only
  std::vector<double> s_right;
};

struct ExplorationTrace {
  std::vector<std::size_t> order;  // discovery order
  std::vector<ExplorationStep> steps;
  std::vector<std::vector<double>> component_mass;  // discovery order
  std::vector<double> y;  // Y of each component, discovery order
  int zeta_inf() const { return static_cast<int>(component_mass.size()); }
};

/// Breadth-first graph exploration with scaled-mass root sampling and
/// size-biased child ordering within type.
ExplorationTrace graph_exploration(const Graph& g, const BlockModel& model,
                                   const std::vector<double>& rho, Rng& rng);

/// Edge list CSV with header "source,target" and vertex ids "l:i".
void write_edge_csv(std::ostream& os, const Graph& g, const BlockModel& model);

}  // namespace hitfield
