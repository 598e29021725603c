#pragma once

// Goodness-of-fit and two-sample tests used by the distributional checks.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hitfield {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
  int cells = 0;  // cells after pooling
  /// A category observed on one side has zero probability on the other.
  bool support_mismatch = false;
  std::string note;
};

/// Pearson chi-square of observed counts against cell probabilities.
/// Pooling: every cell with expected count < 5 goes into one pooled cell;
/// if that pool is still < 5 it absorbs the smallest remaining cell.
/// Throws PreconditionError if fewer than two cells remain.
TestResult chi_square(const std::vector<long>& observed,
                      const std::vector<double>& probs);

/// Keyed form; keys missing from `probs` with positive counts are a support
/// mismatch (p = 0).
TestResult chi_square(const std::map<std::string, long>& observed,
                      const std::map<std::string, double>& probs);

/// Chi-square homogeneity test for two samples of categorical counts,
/// pooling by the same rule on the combined expected counts.
TestResult chi_square_two_sample(const std::map<std::string, long>& a,
                                 const std::map<std::string, long>& b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// One-sample KS against a continuous cdf, asymptotic p-value with the
/// usual small-sample correction.
TestResult ks_one_sample(std::vector<double> sample,
                         const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace hitfield
