#pragma once

// The random field built from exponential clocks, the field-side exploration,
// and the minimal-solution hitting times T(y).

#include <vector>

#include "hitfield/block_model.hpp"
#include "hitfield/piecewise.hpp"

namespace hitfield {

/// xi[i][l]: clock of vertex (l, i), Exp(w_l^i).
struct ClockSet {
  std::vector<std::vector<double>> xi;

  /// Ranks of type-i vertices by increasing clock.
  std::vector<int> order(int type) const;
  /// Throws ModelError unless shapes match the model and clocks are positive,
  /// finite and distinct within each type.
  void validate(const BlockModel& model) const;
};

/// Ties within a type are redrawn.
ClockSet sample_clocks(const BlockModel& model, Rng& rng);

/// m x m matrix of paths x_ij.
class Field {
 public:
  Field() = default;
  /// Row-major list of m * m paths.
  Field(int m, std::vector<PiecewisePath> paths);

  int m() const { return m_; }
  const PiecewisePath& operator()(int i, int j) const { return x_[i * m_ + j]; }

  /// Sorted times at which some path of column j jumps.
  std::vector<double> column_jump_times(int j) const;

 private:
  int m_ = 0;
  std::vector<PiecewisePath> x_;
};

/// x_jj(t) = -t + sum_l w_l^j 1[xi_l^j / Q_jj <= t] and, for i != j,
/// x_ij(t) = R_ij sum_l w_l^j 1[xi_l^j / Q_jj <= t].
Field build_field(const BlockModel& model, const ClockSet& clocks);

/// x_i(t) = sum_j x_ij(t_j).
std::vector<double> field_eval(const Field& f, const std::vector<double>& t);
/// x_i(t-) = sum_j x_ij(t_j-), left limits taken column by column.
std::vector<double> field_eval_left(const Field& f, const std::vector<double>& t);

struct HitVector {
  std::vector<ExtTime> t;
  /// Coordinates with rho_i = 0: the equation there is imposed only through
  /// minimality, so the value is whatever the iteration settles on.
  std::vector<bool> rho_zero;
  int sweeps = 0;

  bool all_finite() const;
  /// Finite coordinates as doubles; throws DomainError if one is infinite.
  std::vector<double> values() const;
};

/// Component-wise minimal t with x(t-) = -rho y on finite coordinates, by
/// monotone iteration from t = 0.
HitVector hitting_time(const Field& f, const std::vector<double>& rho, double y);

/// Left-continuous staircase T(y) = rho y + sum over levels y_r < y of jumps.
struct HittingProcess {
  std::vector<double> rho;
  std::vector<double> levels;              // y_1 < y_2 < ...
  std::vector<std::vector<double>> jumps;  // jump vector at each level

  std::vector<double> eval(double y) const;
  /// T(y+).
  std::vector<double> eval_right(double y) const;
};

/// Field exploration: deterministic in (model, clocks, rho). Each step
/// records S^L and S^R of the processed vertex.
ExplorationTrace field_exploration(const BlockModel& model,
                                   const ClockSet& clocks,
                                   const std::vector<double>& rho);

/// Hitting process read off a field exploration: levels are the partial sums
/// of Y, jumps are S^R of a component's last vertex minus S^L of its root.
HittingProcess hitting_process(const BlockModel& model, const ClockSet& clocks,
                               const std::vector<double>& rho);
HittingProcess hitting_process(const ExplorationTrace& trace,
                               const std::vector<double>& rho);

/// Independent route: sweep y through the levels at which some coordinate
/// with rho_i > 0 reaches the next jump of its column, solving T by
/// hitting_time and reading each jump off T(y + eps) - rho eps - T(y).
HittingProcess hitting_process_oracle(const Field& f,
                                      const std::vector<double>& rho);

/// Single-type walk -t + sum_l w_l 1[xi_l / q <= t] with q = Q_11.
PiecewisePath rank_one_walk(const BlockModel& model, const ClockSet& clocks);

struct RankOneJump {
  double level;
  double size;
};

/// Jumps of the first-passage process of the single-type walk, read directly
/// off the plateaus of its past infimum.
std::vector<RankOneJump> rank_one_encoding(const BlockModel& model,
                                           const ClockSet& clocks);

}  // namespace hitfield
