#pragma once

// The curve gamma through the hitting-time field and the one-dimensional
// excursion representation built on it.

#include <ostream>
#include <string>
#include <vector>

#include "hitfield/block_model.hpp"
#include "hitfield/field.hpp"
#include "hitfield/piecewise.hpp"

namespace hitfield {

/// Outcome of the off-diagonal proportionality check x_il / rho_i = x_jl / rho_j.
struct SymmetryReport {
  bool ok = true;
  // Witness (0-based): column l, rows i and j, first time t where they differ.
  int l = -1, i = -1, j = -1;
  double t = 0.0;
  std::string detail;

  std::string describe() const;
};

/// Compares whole paths column by column (jump times and sizes, slopes).
SymmetryReport check_symmetry(const Field& f, const std::vector<double>& rho);
/// Kernel form: R_il / rho_i must not depend on i != l.
SymmetryReport check_symmetry(const BlockModel& model,
                              const std::vector<double>& rho);

class SymmetryError : public PreconditionError {
 public:
  explicit SymmetryError(SymmetryReport report);
  const SymmetryReport& report() const { return report_; }

 private:
  SymmetryReport report_;
};

struct CurveBundle {
  std::vector<double> rho;
  std::vector<PiecewisePath> xstar;  // common normalized off-diagonal per column
  std::vector<PiecewisePath> g;
  std::vector<PiecewisePath> g_inv;
  PiecewisePath f;      // sum of the g_i^{-1}
  PiecewisePath kappa;  // f^{-1}
  std::vector<PiecewisePath> gamma;

  int m() const { return static_cast<int>(g.size()); }
  std::vector<double> gamma_at(double s) const;
};

/// x_{*,l}: x_jl / rho_j for any j != l (the zero path when m = 1).
/// Throws SymmetryError if the columns are not proportional.
std::vector<PiecewisePath> build_xstar(const Field& f,
                                       const std::vector<double>& rho);

/// g_i = x_{*,i} - inf x_ii / rho_i. Requires rho > 0, x_ii dropping
/// immediately below 0 and tending to -inf, nondecreasing off-diagonals.
std::vector<PiecewisePath> build_g(const Field& f, const std::vector<double>& rho);

struct KappaPair {
  PiecewisePath f;
  PiecewisePath kappa;
};
KappaPair build_kappa(const std::vector<PiecewisePath>& g);

/// gamma_i = g_i^{-1} smoothly composed with kappa. A compatibility failure
/// here is a bug, reported as InvariantViolation.
std::vector<PiecewisePath> build_gamma(const std::vector<PiecewisePath>& g,
                                       const PiecewisePath& kappa);

/// All of the above.
CurveBundle build_curve(const Field& f, const std::vector<double>& rho);

/// s -> sum_j x_ij(gamma_j(s)).
PiecewisePath composed_process(const Field& f,
                               const std::vector<PiecewisePath>& gamma, int i);

/// S_i(y): first s at which the left limit of the composed process C_i
/// reaches -rho_i y. Built once from the past infima of all C_i.
class LevelMaps {
 public:
  LevelMaps(const CurveBundle& bundle, const Field& f);

  const PiecewisePath& composed(int i) const { return c_[i]; }
  ExtTime S(int i, double y) const;

 private:
  std::vector<double> rho_;
  std::vector<PiecewisePath> c_;
  std::vector<PiecewisePath> inf_;
};

/// s(y) = ||T(y)||_1 read off a hitting process.
double s_of_y(const HittingProcess& hp, double y);

struct EncodedComponent {
  Excursion excursion;
  std::vector<double> increment;  // gamma(r) - gamma(l)
};

/// Plateaus of the past infimum of C_1, cross-checked against every C_i,
/// with the curve increments across them. Chronological.
std::vector<EncodedComponent> encode_components(const CurveBundle& bundle,
                                                const Field& f);

/// Curve from ordinary inverses and composition. Requires every off-diagonal
/// to be continuous and strictly increasing, and every g_i a homeomorphism.
std::vector<PiecewisePath> curve_special_case(const Field& f,
                                              const std::vector<double>& rho);

/// Sample points: all breakpoints of the curve and of C_1, segment midpoints,
/// and a uniform fill to 1.25 times the last breakpoint.
std::vector<double> curve_grid(const CurveBundle& bundle,
                               const PiecewisePath& c1, int fill = 200);

/// CSV with header s,gamma_1,...,gamma_m,C_1.
void write_curve_csv(std::ostream& os, const CurveBundle& bundle,
                     const PiecewisePath& c1, const std::vector<double>& grid);

}  // namespace hitfield
