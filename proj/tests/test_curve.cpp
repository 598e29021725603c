#include <cmath>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "hitfield/curve.hpp"

using namespace hitfield;
using doctest::Approx;

namespace {

BlockModel worked_model() {
  return BlockModel({{1.0}, {}},
                    SquareMatrix::from_rows({{1.0, 0.3}, {0.3, 1.0}}));
}

Field worked_field() { return build_field(worked_model(), ClockSet{{{0.5}, {}}}); }

PiecewisePath path(std::vector<Knot> ks, double slope) {
  return PiecewisePath::from_knots(std::move(ks), slope);
}

// Random model with a kernel whose off-diagonal part factors, and the
// matching rho.
struct CurveInstance {
  BlockModel model;
  std::vector<double> rho;
  ClockSet clocks;
};

CurveInstance random_curve_instance(testgen::Rng& rng, int m) {
  BlockModel model = testgen::random_model(rng, m, 6);
  Factorization fk = factor_kernel(model.Q());
  REQUIRE(fk.ok);
  ClockSet c = sample_clocks(model, rng);
  return {model, fk.rho, c};
}

}  // namespace

TEST_CASE("worked instance: g, kappa and gamma") {
  Field f = worked_field();
  std::vector<double> rho{1.0, 1.0};
  CurveBundle b = build_curve(f, rho);

  PiecewisePath g1 = path({{0, 0, 0}, {0.5, 0.5, 0.8}, {1.5, 0.8, 0.8}}, 1.0);
  CHECK(b.g[0].approx_equal(g1, 1e-12));
  CHECK(b.g[1] == PiecewisePath::identity());

  PiecewisePath kappa =
      path({{0, 0, 0}, {1, 0.5, 0.5}, {1.3, 0.8, 0.8}, {2.3, 0.8, 0.8}}, 0.5);
  CHECK(b.kappa.approx_equal(kappa, 1e-12));

  PiecewisePath gamma1 =
      path({{0, 0, 0}, {1, 0.5, 0.5}, {1.3, 0.5, 0.5}, {2.3, 1.5, 1.5}}, 0.5);
  CHECK(b.gamma[0].approx_equal(gamma1, 1e-12));
  CHECK(b.gamma[1].approx_equal(kappa, 1e-12));

  for (double s : {0.4, 1.15, 1.9, 3.0}) {
    auto g = b.gamma_at(s);
    CHECK(g[0] + g[1] == Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("worked instance: composed processes and encoding") {
  Field f = worked_field();
  std::vector<double> rho{1.0, 1.0};
  CurveBundle b = build_curve(f, rho);
  LevelMaps lm(b, f);

  const PiecewisePath& c1 = lm.composed(0);
  CHECK(c1.eval(0.6) == Approx(-0.3));
  CHECK(c1.eval_left(1.0) == Approx(-0.5));
  CHECK(c1.eval(1.0) == Approx(0.5));
  CHECK(c1.eval(1.3) == Approx(0.5));
  CHECK(c1.eval(2.0) == Approx(-0.2));
  CHECK(c1.eval(2.3) == Approx(-0.5));
  CHECK(c1.eval(3.3) == Approx(-1.0));
  auto ex = excursions(c1);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].l == Approx(1.0));
  CHECK(ex[0].r == Approx(2.3));

  const PiecewisePath& c2 = lm.composed(1);
  CHECK(c2.eval(1.3) == Approx(-0.5));
  CHECK(c2.eval(2.3) == Approx(-0.5));
  CHECK(c2.eval(2.5) < -0.5);

  CHECK(lm.S(0, 0.3).value() == Approx(0.6));
  CHECK(lm.S(1, 0.3).value() == Approx(0.6));
  CHECK(lm.S(0, 0.6).value() == Approx(2.5));
  CHECK(lm.S(1, 0.6).value() == Approx(2.5));

  HittingProcess hp = hitting_process(worked_model(), ClockSet{{{0.5}, {}}}, rho);
  CHECK(s_of_y(hp, 0.3) == Approx(0.6));
  CHECK(s_of_y(hp, 0.6) == Approx(2.5));

  auto enc = encode_components(b, f);
  REQUIRE(enc.size() == 1);
  CHECK(std::abs(enc[0].excursion.l - 1.0) <= 1e-12);
  CHECK(std::abs(enc[0].excursion.r - 2.3) <= 1e-12);
  CHECK(std::abs(enc[0].increment[0] - 1.0) <= 1e-12);
  CHECK(std::abs(enc[0].increment[1] - 0.3) <= 1e-12);
  CHECK(enc[0].excursion.length() ==
        Approx(enc[0].increment[0] + enc[0].increment[1]));
}

TEST_CASE("empty field gives pure drifts") {
  BlockModel m({{}, {}}, SquareMatrix::from_rows({{1, 0.5}, {0.5, 1}}));
  Field f = build_field(m, ClockSet{{{}, {}}});
  std::vector<double> rho{1.0, 2.0};
  CurveBundle b = build_curve(f, rho);
  LevelMaps lm(b, f);
  for (int i = 0; i < 2; ++i) {
    CHECK(classify(lm.composed(i)).nondecreasing == false);
    CHECK(excursions(lm.composed(i)).empty());
  }
  CHECK(encode_components(b, f).empty());
}

TEST_CASE("symmetry check") {
  testgen::Rng rng(31);
  for (int it = 0; it < 50; ++it) {
    BlockModel m2 = testgen::random_model(rng, 2, 5);
    std::vector<double> rho{testgen::unif(rng, 0.1, 3), testgen::unif(rng, 0.1, 3)};
    CHECK(check_symmetry(m2, rho).ok);
    ClockSet c = sample_clocks(m2, rng);
    CHECK(check_symmetry(build_field(m2, c), rho).ok);

    SquareMatrix q = testgen::random_kernel(rng, 3);
    BlockModel m3({{1.0}, {1.0}, {1.0}}, q);
    Factorization fk = factor_kernel(q);
    CHECK(check_symmetry(m3, fk.rho).ok);
    CHECK(check_symmetry(build_field(m3, ClockSet{{{0.4}, {0.9}, {1.7}}}), fk.rho)
              .ok);
    std::vector<double> other = fk.rho;
    other[0] *= 1.5;
    CHECK_FALSE(check_symmetry(m3, other).ok);
  }

  SquareMatrix q = SquareMatrix::from_rows({{2, 1, 1}, {1, 2, 1}, {1, 1, 2}});
  q(0, 1) += 1e-3;
  q(1, 0) += 1e-3;
  BlockModel bad({{1.0}, {1.0}, {1.0}}, q);
  SymmetryReport rep = check_symmetry(bad, {1.0, 1.0, 1.0});
  CHECK_FALSE(rep.ok);
  CHECK(rep.l >= 0);
  CHECK(rep.describe().find("rho") != std::string::npos);

  Field fb = build_field(bad, ClockSet{{{0.4}, {0.9}, {1.7}}});
  SymmetryReport frep = check_symmetry(fb, {1.0, 1.0, 1.0});
  CHECK_FALSE(frep.ok);
  CHECK(frep.t > 0.0);
  CHECK_THROWS_AS(build_curve(fb, {1.0, 1.0, 1.0}), SymmetryError);
  CHECK_THROWS_AS(build_curve(worked_field(), {1.0, 0.0}), PreconditionError);
}

TEST_CASE("curve invariants on random instances") {
  testgen::Rng rng(77);
  int instances = 0, components = 0;
  for (int it = 0; it < 120; ++it) {
    int mm = 1 + it % 3;
    CurveInstance ci = random_curve_instance(rng, mm);
    Field f = build_field(ci.model, ci.clocks);
    CurveBundle b = build_curve(f, ci.rho);
    LevelMaps lm(b, f);
    CAPTURE(it);
    ++instances;

    std::vector<double> grid = curve_grid(b, lm.composed(0), 1000);
    std::vector<double> prev(mm, 0.0);
    double prev_s = 0.0;
    for (double s : grid) {
      auto g = b.gamma_at(s);
      double norm = 0.0;
      for (int i = 0; i < mm; ++i) {
        norm += g[i];
        // 1-Lipschitz and nondecreasing.
        CHECK(g[i] - prev[i] >= -1e-12);
        CHECK(g[i] - prev[i] <= (s - prev_s) + 1e-9);
        // kappa(s) lies between g_i(gamma_i(s)-) and g_i(gamma_i(s)); gamma_i(s)
        // often sits on a jump of g_i, so snap.
        double k = b.kappa.eval(s);
        CHECK(b.g[i].left_near(g[i]) <= k + 1e-9 * (1 + k));
        CHECK(b.g[i].value_near(g[i]) >= k - 1e-9 * (1 + k));
      }
      CHECK(std::abs(norm - s) <= 1e-9 * (1 + s));
      prev = g;
      prev_s = s;
    }
    for (const auto& gi : b.gamma) {
      for (const Knot& k : gi.knots()) CHECK(k.left == Approx(k.right));
    }

    // gamma(||T(y)||_1) = T(y) around every jump level, and S_i = s.
    HittingProcess hp = hitting_process(ci.model, ci.clocks, ci.rho);
    std::vector<double> ys{0.0, 0.05};
    for (double lv : hp.levels) {
      for (double d : {-1e-6, 0.0, 1e-6}) ys.push_back(lv + d);
    }
    double top = hp.levels.empty() ? 1.0 : hp.levels.back() + 1.0;
    for (int k = 0; k <= 40; ++k) ys.push_back(top * k / 40.0);
    for (double y : ys) {
      if (y < 0) continue;
      auto t = hp.eval(y);
      double s = s_of_y(hp, y);
      auto g = b.gamma_at(s);
      for (int i = 0; i < mm; ++i) {
        CHECK(std::abs(g[i] - t[i]) <= 1e-9 * (1 + t[i]));
        CHECK(lm.S(i, y).value() == Approx(s).epsilon(1e-9));
      }
    }

    // Encoded increments are the jumps of T, in order.
    auto enc = encode_components(b, f);
    REQUIRE(enc.size() == hp.levels.size());
    for (std::size_t r = 0; r < enc.size(); ++r) {
      double len = 0.0;
      for (int i = 0; i < mm; ++i) {
        CHECK(std::abs(enc[r].increment[i] - hp.jumps[r][i]) <=
              1e-12 * (1 + hp.jumps[r][i]) * 10);
        len += hp.jumps[r][i];
      }
      CHECK(enc[r].excursion.length() == Approx(len).epsilon(1e-9));
      ++components;
    }
  }
  CHECK(instances == 120);
  CHECK(components > 100);
}

TEST_CASE("gamma through points with equal g-values") {
  // If g_i(t_i) are all equal and each g_i is continuous and strictly
  // increasing from the left at t_i, then gamma(||t||_1) = t.
  testgen::Rng rng(5);
  int hits = 0;
  for (int it = 0; it < 100; ++it) {
    int mm = 2 + it % 2;
    CurveInstance ci = random_curve_instance(rng, mm);
    Field f = build_field(ci.model, ci.clocks);
    CurveBundle b = build_curve(f, ci.rho);
    for (double u : {0.1, 0.7, 1.9, 4.0}) {
      std::vector<double> t;
      bool good = true;
      double norm = 0.0;
      for (int i = 0; i < mm; ++i) {
        double ti = b.g_inv[i].eval(u);
        // Continuous at ti, strictly increasing just before it, and hit.
        std::size_t k = b.g[i].segment_index(ti);
        bool on_knot = b.g[i].find_knot(ti) != PiecewisePath::npos;
        double slope_before =
            on_knot ? (k == 0 ? 0.0 : b.g[i].segment_slope(k - 1))
                    : b.g[i].segment_slope(k);
        good = good && std::abs(b.g[i].jump_at(ti)) < 1e-12 &&
               slope_before > 0.0 && std::abs(b.g[i].eval(ti) - u) < 1e-12;
        t.push_back(ti);
        norm += ti;
      }
      if (!good) continue;
      ++hits;
      auto g = b.gamma_at(norm);
      for (int i = 0; i < mm; ++i) CHECK(g[i] == Approx(t[i]).epsilon(1e-9));
    }
  }
  CHECK(hits > 50);
}

TEST_CASE("curve with an empty type and a long flat stretch") {
  // Type 1 has no vertices and gamma_3 parks on the jump of the heavy type-3
  // vertex for a long stretch of s; C_1 and C_2 must not dip below their past
  // infima there.
  BlockModel model({{}, {0.40085720868557806}, {1.8383275235404954, 0.32971265307154635}},
                   SquareMatrix::from_rows({{1.3986558427934113, 1.1571857128625167, 1.657135633728563},
                                            {1.1571857128625167, 1.4520363969636509, 0.52645597854419157},
                                            {1.657135633728563, 0.52645597854419157, 1.3814862151229321}}));
  ClockSet clocks{{{}, {0.76920904206529161}, {0.3043875792268097, 0.090778190788151233}}};
  Factorization fk = factor_kernel(model.Q());
  REQUIRE(fk.ok);
  Field f = build_field(model, clocks);
  CurveBundle b = build_curve(f, fk.rho);
  LevelMaps lm(b, f);
  HittingProcess hp = hitting_process(model, clocks, fk.rho);
  REQUIRE(hp.levels.size() == 1);
  for (double y : {0.1, 0.3, 0.8, 1.5}) {
    double s = s_of_y(hp, y);
    for (int i = 0; i < 3; ++i) CHECK(lm.S(i, y).value() == Approx(s).epsilon(1e-9));
  }
  auto enc = encode_components(b, f);
  REQUIRE(enc.size() == 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(enc[0].increment[i] - hp.jumps[0][i]) <= 1e-12 * (1 + hp.jumps[0][i]));
  }
}

TEST_CASE("special-case curve") {
  // x_ij = rho_i nu_j t off the diagonal, x_ii = -a_i t: g_i(t) = b_i t with
  // b_i = nu_i + a_i / rho_i and gamma_i(s) = s / (b_i sum_k 1/b_k).
  testgen::Rng rng(9);
  for (int it = 0; it < 100; ++it) {
    int mm = 1 + it % 3;
    std::vector<double> rho(mm), nu(mm), a(mm), bb(mm);
    for (int i = 0; i < mm; ++i) {
      rho[i] = testgen::unif(rng, 0.2, 2);
      nu[i] = testgen::unif(rng, 0.2, 2);
      a[i] = testgen::unif(rng, 0.2, 2);
      bb[i] = (mm > 1 ? nu[i] : 0.0) + a[i] / rho[i];
    }
    std::vector<PiecewisePath> paths;
    for (int i = 0; i < mm; ++i) {
      for (int j = 0; j < mm; ++j) {
        paths.push_back(PiecewisePath::drift(i == j ? -a[i] : rho[i] * nu[j]));
      }
    }
    Field f(mm, paths);
    double inv_sum = 0.0;
    for (double x : bb) inv_sum += 1.0 / x;
    auto sc = curve_special_case(f, rho);
    CurveBundle b = build_curve(f, rho);
    for (int i = 0; i < mm; ++i) {
      PiecewisePath expect = PiecewisePath::drift(1.0 / (bb[i] * inv_sum));
      CHECK(sc[i].approx_equal(expect, 1e-12));
      CHECK(b.gamma[i].approx_equal(expect, 1e-12));
    }
    if (mm == 1) CHECK(sc[0].approx_equal(PiecewisePath::identity(), 1e-12));
  }

  CHECK_THROWS_AS(curve_special_case(worked_field(), {1.0, 1.0}),
                  PreconditionError);
}

TEST_CASE("curve CSV export") {
  Field f = worked_field();
  CurveBundle b = build_curve(f, {1.0, 1.0});
  PiecewisePath c1 = composed_process(f, b.gamma, 0);
  std::ostringstream os;
  write_curve_csv(os, b, c1, {0.0, 1.0});
  CHECK(os.str() == "s,gamma_1,gamma_2,C_1\n0,0,0,0\n1,0.5,0.5,0.5\n");
}
