#include "hitfield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "hitfield/errors.hpp"

namespace hitfield {

namespace {

double chi2_survival(double stat, int dof) {
  if (stat <= 0.0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Cells as (observed, expected) pairs, pooled in place.
void pool(std::vector<std::pair<double, double>>& cells) {
  std::sort(cells.begin(), cells.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  std::pair<double, double> small{0.0, 0.0};
  std::vector<std::pair<double, double>> big;
  bool any_small = false;
  for (const auto& c : cells) {
    if (c.second < 5.0) {
      small.first += c.first;
      small.second += c.second;
      any_small = true;
    } else {
      big.push_back(c);
    }
  }
  if (any_small) {
    if (small.second < 5.0 && !big.empty()) {
      // Absorb the smallest large cell.
      small.first += big.front().first;
      small.second += big.front().second;
      big.erase(big.begin());
    }
    big.push_back(small);
  }
  cells = std::move(big);
}

TestResult pearson(std::vector<std::pair<double, double>> cells) {
  pool(cells);
  TestResult r;
  r.cells = static_cast<int>(cells.size());
  if (cells.size() < 2) {
    throw PreconditionError("chi-square needs at least two cells after pooling");
  }
  for (const auto& [o, e] : cells) r.statistic += (o - e) * (o - e) / e;
  r.dof = r.cells - 1;
  r.p_value = chi2_survival(r.statistic, r.dof);
  return r;
}

}  // namespace

TestResult chi_square(const std::vector<long>& observed,
                      const std::vector<double>& probs) {
  if (observed.size() != probs.size()) {
    throw PreconditionError("observed and expected differ in length");
  }
  double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<std::pair<double, double>> cells;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (probs[k] <= 0.0) {
      if (observed[k] > 0) {
        TestResult r;
        r.support_mismatch = true;
        r.p_value = 0.0;
        r.statistic = std::numeric_limits<double>::infinity();
        r.note = "count in a zero-probability cell";
        return r;
      }
      continue;
    }
    cells.emplace_back(static_cast<double>(observed[k]), n * probs[k]);
  }
  return pearson(std::move(cells));
}

TestResult chi_square(const std::map<std::string, long>& observed,
                      const std::map<std::string, double>& probs) {
  std::vector<long> o;
  std::vector<double> p;
  for (const auto& [key, prob] : probs) {
    auto it = observed.find(key);
    o.push_back(it == observed.end() ? 0 : it->second);
    p.push_back(prob);
  }
  for (const auto& [key, count] : observed) {
    if (count > 0 && !probs.count(key)) {
      TestResult r;
      r.support_mismatch = true;
      r.p_value = 0.0;
      r.statistic = std::numeric_limits<double>::infinity();
      r.note = "unexpected category " + key;
      return r;
    }
  }
  return chi_square(o, p);
}

TestResult chi_square_two_sample(const std::map<std::string, long>& a,
                                 const std::map<std::string, long>& b) {
  std::map<std::string, std::pair<double, double>> joint;
  double na = 0.0, nb = 0.0;
  for (const auto& [k, c] : a) {
    joint[k].first += c;
    na += c;
  }
  for (const auto& [k, c] : b) {
    joint[k].second += c;
    nb += c;
  }
  if (na <= 0.0 || nb <= 0.0) throw PreconditionError("empty sample");
  // Pool on the smaller of the two expected counts per category.
  struct Cell {
    double oa, ob, total;
  };
  std::vector<Cell> cells;
  for (const auto& [k, c] : joint) cells.push_back({c.first, c.second, c.first + c.second});
  std::sort(cells.begin(), cells.end(),
            [](const Cell& x, const Cell& y) { return x.total < y.total; });
  const double frac = std::min(na, nb) / (na + nb);
  std::vector<Cell> pooled;
  Cell small{0, 0, 0};
  for (const Cell& c : cells) {
    if (c.total * frac < 5.0) {
      small.oa += c.oa;
      small.ob += c.ob;
      small.total += c.total;
    } else {
      pooled.push_back(c);
    }
  }
  if (small.total > 0.0) {
    if (small.total * frac < 5.0 && !pooled.empty()) {
      small.oa += pooled.front().oa;
      small.ob += pooled.front().ob;
      small.total += pooled.front().total;
      pooled.erase(pooled.begin());
    }
    pooled.push_back(small);
  }
  TestResult r;
  r.cells = static_cast<int>(pooled.size());
  if (pooled.size() < 2) {
    throw PreconditionError("chi-square needs at least two cells after pooling");
  }
  for (const Cell& c : pooled) {
    double ea = c.total * na / (na + nb);
    double eb = c.total * nb / (na + nb);
    r.statistic += (c.oa - ea) * (c.oa - ea) / ea + (c.ob - eb) * (c.ob - eb) / eb;
  }
  r.dof = r.cells - 1;
  r.p_value = chi2_survival(r.statistic, r.dof);
  return r;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  // 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2); for small lambda use the
  // theta-function form, which converges fast there.
  if (lambda < 1.0) {
    const double pi = 3.14159265358979323846;
    double x = pi * pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k < 100; k += 2) {
      double term = std::exp(-static_cast<double>(k) * k * x);
      s += term;
      if (term < 1e-17) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> sample,
                         const std::function<double(double)>& cdf) {
  if (sample.empty()) throw PreconditionError("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    double f = cdf(sample[k]);
    d = std::max({d, (k + 1) / n - f, f - k / n});
  }
  TestResult r;
  r.statistic = d;
  double sn = std::sqrt(n);
  r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  TestResult r;
  r.statistic = d;
  double ne = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

}  // namespace hitfield
