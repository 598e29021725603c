#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "hitfield/field.hpp"

using namespace hitfield;
using doctest::Approx;

namespace {

BlockModel worked_model() {
  return BlockModel({{1.0}, {}},
                    SquareMatrix::from_rows({{1.0, 0.3}, {0.3, 1.0}}));
}

ClockSet worked_clocks() { return ClockSet{{{0.5}, {}}}; }

bool close(const std::vector<double>& a, const std::vector<double>& b,
           double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol * (1.0 + std::abs(b[i]))) return false;
  }
  return true;
}

bool same_process(const HittingProcess& a, const HittingProcess& b,
                  double tol) {
  if (a.levels.size() != b.levels.size()) return false;
  for (std::size_t r = 0; r < a.levels.size(); ++r) {
    if (std::abs(a.levels[r] - b.levels[r]) > tol * (1.0 + b.levels[r])) {
      return false;
    }
    if (!close(a.jumps[r], b.jumps[r], tol)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("worked instance: field paths") {
  BlockModel m = worked_model();
  Field f = build_field(m, worked_clocks());
  CHECK(f(0, 0).eval(0.4) == Approx(-0.4));
  CHECK(f(0, 0).eval(0.5) == Approx(0.5));
  CHECK(f(0, 0).eval_left(0.5) == Approx(-0.5));
  CHECK(f(0, 0).terminal_slope() == -1.0);
  CHECK(f(1, 0).eval(0.4) == 0.0);
  CHECK(f(1, 0).eval(0.5) == Approx(0.3));
  CHECK(f(1, 0).terminal_slope() == 0.0);
  CHECK(f(1, 1) == PiecewisePath::drift(-1.0));
  CHECK(f(0, 1) == PiecewisePath::constant(0.0));
  CHECK(f.column_jump_times(0) == std::vector<double>{0.5});
  CHECK(f.column_jump_times(1).empty());

  auto x = field_eval(f, {1.5, 0.8});
  CHECK(x[0] == Approx(-0.5));
  CHECK(x[1] == Approx(-0.5));
}

TEST_CASE("worked instance: hitting times and jumps") {
  BlockModel m = worked_model();
  Field f = build_field(m, worked_clocks());
  std::vector<double> rho{1.0, 1.0};

  auto t0 = hitting_time(f, rho, 0.0).values();
  CHECK(t0 == std::vector<double>{0.0, 0.0});
  auto t3 = hitting_time(f, rho, 0.3).values();
  CHECK(t3[0] == Approx(0.3));
  CHECK(t3[1] == Approx(0.3));
  auto t6 = hitting_time(f, rho, 0.6).values();
  CHECK(t6[0] == Approx(1.6));
  CHECK(t6[1] == Approx(0.9));

  HittingProcess oracle = hitting_process_oracle(f, rho);
  REQUIRE(oracle.levels.size() == 1);
  CHECK(oracle.levels[0] == Approx(0.5));
  CHECK(oracle.jumps[0][0] == Approx(1.0));
  CHECK(oracle.jumps[0][1] == Approx(0.3));

  ExplorationTrace tr = field_exploration(m, worked_clocks(), rho);
  REQUIRE(tr.steps.size() == 1);
  CHECK(tr.steps[0].root);
  CHECK(tr.y == std::vector<double>{0.5});
  CHECK(tr.steps[0].s_left == std::vector<double>{0.5, 0.5});
  CHECK(tr.steps[0].s_right[0] == Approx(1.5));
  CHECK(tr.steps[0].s_right[1] == Approx(0.8));

  HittingProcess hp = hitting_process(tr, rho);
  CHECK(same_process(hp, oracle, 1e-9));
  CHECK(hp.eval(0.5) == std::vector<double>{0.5, 0.5});
  CHECK(hp.eval_right(0.5)[0] == Approx(1.5));
  CHECK(hp.eval(0.6)[0] == Approx(1.6));
  CHECK(hp.eval(0.6)[1] == Approx(0.9));
}

TEST_CASE("empty type and degenerate models") {
  BlockModel m = worked_model();
  Field f = build_field(m, worked_clocks());
  HittingProcess hp = hitting_process(m, worked_clocks(), {1.0, 1.0});
  REQUIRE(hp.jumps.size() == 1);
  CHECK(hp.jumps[0][1] / hp.jumps[0][0] == Approx(m.R(1, 0)));

  BlockModel nobody({{}, {}}, SquareMatrix::from_rows({{1, 0.5}, {0.5, 1}}));
  ClockSet none{{{}, {}}};
  CHECK(hitting_process(nobody, none, {1.0, 1.0}).levels.empty());
  CHECK(hitting_process_oracle(build_field(nobody, none), {1.0, 1.0})
            .levels.empty());

  // Two type-1 vertices far apart: two separate components.
  BlockModel pair({{1.0, 1.0}}, SquareMatrix::from_rows({{1.0}}));
  ClockSet apart{{{0.5, 3.0}}};
  ExplorationTrace tr = field_exploration(pair, apart, {1.0});
  CHECK(tr.zeta_inf() == 2);
  ClockSet near{{{0.5, 1.0}}};
  CHECK(field_exploration(pair, near, {1.0}).zeta_inf() == 1);

  CHECK_THROWS_AS(ClockSet({{{0.5, 0.5}}}).validate(pair), ModelError);
  CHECK_THROWS_AS(ClockSet({{{0.5}}}).validate(pair), ModelError);
  CHECK_THROWS_AS(field_exploration(pair, apart, {0.0}), ModelError);
}

TEST_CASE("exploration jumps match the oracle on random instances") {
  testgen::Rng rng(2024);
  int checked = 0;
  for (int it = 0; it < 150; ++it) {
    int mm = 1 + it % 3;
    BlockModel m = testgen::random_model(rng, mm, 6);
    ClockSet c = sample_clocks(m, rng);
    std::vector<double> rho(mm);
    for (auto& r : rho) r = testgen::unif(rng, 0.3, 2.0);
    if (it % 5 == 0) {
      for (int i = 1; i < mm; ++i) rho[i] = 0.0;
    }
    Field f = build_field(m, c);
    ExplorationTrace tr = field_exploration(m, c, rho);
    HittingProcess ex = hitting_process(tr, rho);
    HittingProcess orc = hitting_process_oracle(f, rho);
    CAPTURE(it);
    CHECK(same_process(ex, orc, 1e-9));
    CHECK(ex.levels.size() <= m.vertex_count());
    ++checked;

    // Jump vector of each component equals R times its mass vector.
    for (std::size_t r = 0; r < ex.jumps.size(); ++r) {
      for (int i = 0; i < mm; ++i) {
        double expect = 0.0;
        for (int j = 0; j < mm; ++j) expect += m.R(i, j) * tr.component_mass[r][j];
        CHECK(ex.jumps[r][i] == Approx(expect).epsilon(1e-12));
      }
    }

    // T(y) solves the equation, is minimal and is monotone in y.
    std::vector<double> prev(mm, 0.0);
    for (double y = 0.0; y < 6.0; y += 0.37) {
      HitVector h = hitting_time(f, rho, y);
      if (!h.all_finite()) break;
      auto t = h.values();
      auto xl = field_eval_left(f, t);
      for (int i = 0; i < mm; ++i) {
        CHECK(t[i] >= prev[i]);
        if (rho[i] > 0.0) CHECK(xl[i] == Approx(-rho[i] * y).epsilon(1e-9));
      }
      auto staircase = ex.eval(y);
      CHECK(close(t, staircase, 1e-9));
      prev = t;
    }
  }
  CHECK(checked == 150);
}

TEST_CASE("hitting times are minimal") {
  // A smaller candidate in any coordinate would leave a level unreached.
  testgen::Rng rng(99);
  for (int it = 0; it < 100; ++it) {
    int mm = 1 + it % 3;
    BlockModel m = testgen::random_model(rng, mm, 5);
    ClockSet c = sample_clocks(m, rng);
    std::vector<double> rho(mm, 1.0);
    Field f = build_field(m, c);
    double y = testgen::unif(rng, 0.1, 3.0);
    HitVector h = hitting_time(f, rho, y);
    if (!h.all_finite()) continue;
    auto t = h.values();
    for (int i = 0; i < mm; ++i) {
      if (t[i] < 1e-6) continue;
      auto s = t;
      s[i] *= 1 - 1e-6;
      // Every candidate below the minimal one fails: inf over [0, s_i] of
      // x_ii plus the other columns at s stays above -rho_i y.
      double others = 0.0;
      for (int j = 0; j < mm; ++j) {
        if (j != i) others += f(i, j).eval_left(s[j]);
      }
      double inf_ii = past_infimum(f(i, i)).eval(s[i]);
      CHECK(inf_ii + others > -rho[i] * y - 1e-12);
    }
  }
}

TEST_CASE("rank-one case") {
  testgen::Rng rng(7);
  for (int it = 0; it < 200; ++it) {
    BlockModel m = testgen::random_model(rng, 1, 8);
    ClockSet c = sample_clocks(m, rng);
    auto direct = rank_one_encoding(m, c);
    HittingProcess hp = hitting_process(m, c, {1.0});
    REQUIRE(direct.size() == hp.levels.size());
    for (std::size_t r = 0; r < direct.size(); ++r) {
      CHECK(direct[r].level == Approx(hp.levels[r]).epsilon(1e-12));
      CHECK(direct[r].size == Approx(hp.jumps[r][0]).epsilon(1e-12));
    }
    PiecewisePath walk = rank_one_walk(m, c);
    CHECK(walk.terminal_slope() == -1.0);
  }

  // Two vertices merge with probability 1 - exp(-q w1 w2).
  BlockModel pair({{1.2, 0.7}}, SquareMatrix::from_rows({{0.9}}));
  const long n = 100000;
  long merged = 0;
  for (long s = 0; s < n; ++s) {
    Rng r(derive_seed(5, s));
    merged += rank_one_encoding(pair, sample_clocks(pair, r)).size() == 1;
  }
  double p = 1 - std::exp(-0.9 * 1.2 * 0.7);
  CHECK(std::abs(static_cast<double>(merged) / n - p) <=
        3 * std::sqrt(p * (1 - p) / n));
}
