#include <cmath>
#include <random>

#include "doctest.h"
#include "hitfield/errors.hpp"
#include "hitfield/stats.hpp"

using namespace hitfield;
using doctest::Approx;

TEST_CASE("chi-square goodness of fit") {
  auto exact = chi_square(std::vector<long>{25, 50, 25}, {0.25, 0.5, 0.25});
  CHECK(exact.statistic == 0.0);
  CHECK(exact.p_value == 1.0);
  CHECK(exact.dof == 2);

  // Two cells, one degree of freedom: (10^2 / 50) * 2 = 4.
  auto two = chi_square(std::vector<long>{60, 40}, {0.5, 0.5});
  CHECK(two.statistic == Approx(4.0));
  CHECK(two.p_value == Approx(0.04550026389635857).epsilon(1e-10));

  // Cells with expected count below 5 are pooled.
  auto pooled = chi_square(std::vector<long>{88, 7, 3, 2}, {0.9, 0.06, 0.02, 0.02});
  CHECK(pooled.cells == 2);
  CHECK(pooled.dof == 1);

  CHECK_THROWS_AS(chi_square(std::vector<long>{10}, {1.0}), PreconditionError);
  CHECK_THROWS_AS(chi_square(std::vector<long>{1, 1}, {0.5}), PreconditionError);

  auto mismatch = chi_square(std::vector<long>{50, 50, 1}, {0.5, 0.5, 0.0});
  CHECK(mismatch.support_mismatch);
  CHECK(mismatch.p_value == 0.0);

  std::map<std::string, long> obs{{"a", 30}, {"b", 70}, {"z", 1}};
  std::map<std::string, double> law{{"a", 0.3}, {"b", 0.7}};
  CHECK(chi_square(obs, law).support_mismatch);
  obs.erase("z");
  CHECK(chi_square(obs, law).statistic == Approx(0.0));
}

TEST_CASE("two-sample chi-square") {
  std::map<std::string, long> a{{"x", 300}, {"y", 700}};
  auto same = chi_square_two_sample(a, a);
  CHECK(same.statistic == Approx(0.0));
  CHECK(same.p_value == Approx(1.0));
  std::map<std::string, long> b{{"x", 700}, {"y", 300}};
  CHECK(chi_square_two_sample(a, b).p_value < 1e-12);
  // 2x2 table by hand: expected 500 everywhere, statistic 4 * 200^2 / 500.
  CHECK(chi_square_two_sample(a, b).statistic == Approx(320.0));
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_survival(1.0) == Approx(0.26999967167735456).epsilon(1e-12));
  CHECK(kolmogorov_survival(0.5) == Approx(0.9639452436648751).epsilon(1e-12));
  CHECK(kolmogorov_survival(1.5) == Approx(0.022217962616525127).epsilon(1e-12));
  CHECK(kolmogorov_survival(0.0) == 1.0);
  // Both series agree where they meet.
  CHECK(kolmogorov_survival(std::nextafter(1.0, 0.0)) ==
        Approx(kolmogorov_survival(1.0)).epsilon(1e-12));
}

TEST_CASE("Kolmogorov-Smirnov tests") {
  std::vector<double> xs{0.3, 0.1, 0.7, 0.9};
  auto same = ks_two_sample(xs, xs);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);

  std::vector<double> grid;
  for (int k = 0; k < 1000; ++k) grid.push_back((k + 0.5) / 1000.0);
  auto uni = ks_one_sample(grid, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(uni.statistic == Approx(0.0005));
  CHECK(uni.p_value == Approx(1.0));

  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e1(1.0), e2(2.0);
  std::vector<double> a, b;
  for (int k = 0; k < 5000; ++k) {
    a.push_back(e1(rng));
    b.push_back(e2(rng));
  }
  CHECK(ks_two_sample(a, b).p_value < 1e-10);
  auto fit = ks_one_sample(a, [](double x) { return -std::expm1(-x); });
  CHECK(fit.p_value > 0.001);
  CHECK_THROWS_AS(ks_two_sample({}, a), PreconditionError);
}
