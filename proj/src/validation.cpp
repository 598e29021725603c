#include "hitfield/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "hitfield/random_instances.hpp"

namespace hitfield {

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.pass; });
}

Json suite_to_json(const SuiteReport& r) {
  Json checks = Json::array();
  for (const Check& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return {{"suite", r.suite}, {"pass", r.pass()}, {"checks", std::move(checks)}};
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Many cases folded into one check: worst error and the first failure.
class Tally {
 public:
  Tally(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void error(double err, const std::string& where) {
    ++cases_;
    worst_ = std::max(worst_, err);
    if (!(err <= tol_)) fail(where + ": error " + fmt(err));
  }
  void expect(bool ok, const std::string& where) {
    ++cases_;
    if (!ok) fail(where);
  }
  Check done() const {
    std::string d = std::to_string(cases_) + " cases";
    if (worst_ > 0.0) d += ", max error " + fmt(worst_);
    if (failures_ > 0) {
      d += ", " + std::to_string(failures_) + " failed; first: " + first_;
    }
    return {name_, failures_ == 0 && cases_ > 0, d};
  }

 private:
  void fail(const std::string& what) {
    if (failures_++ == 0) first_ = what;
  }

  std::string name_;
  double tol_;
  int cases_ = 0;
  int failures_ = 0;
  double worst_ = 0.0;
  std::string first_;
};

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

double vec_err(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, rel(a[i], b[i]));
  return e;
}

std::string at(const char* what, int it) {
  return std::string(what) + " " + std::to_string(it);
}


struct EncodingTallies {
  Tally oracle{"exploration jumps equal the monotone-iteration jumps", 1e-12};
  Tally rm{"jumps equal R M of the discovered components", 1e-12};
  Tally count{"jump count at most the vertex count", 0.0};

  void report(std::vector<Check>& out) const {
    for (const Tally* t : {&oracle, &rm, &count}) out.push_back(t->done());
  }
};

void encoding_cases(EncodingTallies& t, const BlockModel& model,
                    const ClockSet& clocks, const std::vector<double>& rho,
                    const std::string& where) {
  ExplorationTrace tr = field_exploration(model, clocks, rho);
  HittingProcess hp = hitting_process(tr, rho);
  HittingProcess hq = hitting_process_oracle(build_field(model, clocks), rho);
  t.oracle.expect(hp.levels.size() == hq.levels.size(), where + ": jump count");
  for (std::size_t r = 0; r < std::min(hp.levels.size(), hq.levels.size()); ++r) {
    t.oracle.error(std::max(rel(hp.levels[r], hq.levels[r]), vec_err(hp.jumps[r], hq.jumps[r])),
                   where);
  }
  t.rm.expect(hp.levels.size() == tr.component_mass.size(), where + ": component count");
  for (std::size_t r = 0; r < std::min(hp.levels.size(), tr.component_mass.size()); ++r) {
    t.rm.error(vec_err(hp.jumps[r], encode_mass(model, tr.component_mass[r])), where);
  }
  t.count.expect(hp.levels.size() <= model.vertex_count(), where);
}

struct CurveTallies {
  Tally increments{"curve increments equal the jumps", 1e-12};
  Tally lengths{"excursion lengths equal |R M|_1", 1e-9};
  Tally p3{"|gamma(s)|_1 = s", 1e-9};
  Tally p4{"kappa(s) lies in [g_i(gamma_i(s)-), g_i(gamma_i(s))]", 1e-9};
  Tally lipschitz{"gamma_i nondecreasing and 1-Lipschitz", 1e-9};
  Tally t611{"gamma(|T(y)|_1) = T(y) around every jump level", 1e-9};
  Tally level_maps{"S_1 = ... = S_m = s", 1e-9};

  void report(std::vector<Check>& out) const {
    for (const Tally* t : {&increments, &lengths, &p3, &p4, &lipschitz, &t611, &level_maps}) {
      out.push_back(t->done());
    }
  }
};

void curve_cases(CurveTallies& t, const BlockModel& model, const ClockSet& clocks,
                 const std::vector<double>& rho, const std::string& where) {
  const int m = model.m();
  Field f = build_field(model, clocks);
  CurveBundle b = build_curve(f, rho);
  LevelMaps lm(b, f);
  HittingProcess hp = hitting_process(model, clocks, rho);
  auto enc = encode_components(b, f);
  t.increments.expect(enc.size() == hp.levels.size(), where + ": excursion count");
  for (std::size_t r = 0; r < std::min(enc.size(), hp.levels.size()); ++r) {
    t.increments.error(vec_err(enc[r].increment, hp.jumps[r]), where);
    double len = 0.0;
    for (double x : hp.jumps[r]) len += x;
    t.lengths.error(rel(enc[r].excursion.length(), len), where);
  }

  std::vector<double> prev(m, 0.0);
  double prev_s = 0.0;
  for (double s : curve_grid(b, lm.composed(0), 1000)) {
    auto g = b.gamma_at(s);
    double norm = 0.0;
    double k = b.kappa.eval(s);
    for (int i = 0; i < m; ++i) {
      norm += g[i];
      // gamma_i(s) often sits on a jump of g_i, so snap to its knots.
      t.p4.error(std::max({0.0, b.g[i].left_near(g[i]) - k, k - b.g[i].value_near(g[i])}) /
                     (1.0 + std::abs(k)),
                 where);
      t.lipschitz.error(std::max({0.0, prev[i] - g[i], g[i] - prev[i] - (s - prev_s)}), where);
    }
    t.p3.error(rel(norm, s), where);
    prev = g;
    prev_s = s;
  }

  std::vector<double> ys{0.0};
  for (double lv : hp.levels) {
    for (double d : {-1e-6, 0.0, 1e-6}) ys.push_back(std::max(0.0, lv + d));
  }
  double top = hp.levels.empty() ? 1.0 : hp.levels.back() + 1.0;
  for (int k = 1; k <= 20; ++k) ys.push_back(top * k / 20.0);
  for (double y : ys) {
    auto tv = hp.eval(y);
    double s = s_of_y(hp, y);
    t.t611.error(vec_err(b.gamma_at(s), tv), where);
    for (int i = 0; i < m; ++i) {
      ExtTime si = lm.S(i, y);
      t.level_maps.error(si.is_finite() ? rel(si.value(), s) : INFINITY, where);
    }
  }
}

}  // namespace

std::vector<Check> check_encoding(const BlockModel& model, const ClockSet& clocks,
                                  const std::vector<double>& rho) {
  EncodingTallies t;
  encoding_cases(t, model, clocks, rho, "instance");
  std::vector<Check> out;
  t.report(out);
  return out;
}

std::vector<Check> check_curve(const BlockModel& model, const ClockSet& clocks,
                               const std::vector<double>& rho) {
  CurveTallies t;
  curve_cases(t, model, clocks, rho, "instance");
  std::vector<Check> out;
  t.report(out);
  return out;
}

SuiteReport validate_functions(const SuiteOptions& opt) {
  const int n = opt.instances > 0 ? opt.instances : 1000;
  SuiteReport rep{"functions", {}};

  PiecewisePath ge = pure_jump_example();
  PiecewisePath ge_inv = generalized_inverse(ge);
  double plain = compose(ge, ge_inv).eval(1.0);
  double smooth = smooth_compose(ge, ge_inv).eval(1.0);
  rep.checks.push_back({"g_e composed with its inverse at 1 is 2",
                        plain == 2.0, "value " + fmt(plain)});
  rep.checks.push_back({"g_e smoothly composed with its inverse at 1 is 1",
                        std::abs(smooth - 1.0) <= 1e-12, "value " + fmt(smooth)});

  Rng rng(derive_seed(opt.seed, 1));
  Tally involution("inverse of the inverse is exact", 0.0);
  Tally inequalities("inverse inequalities at breakpoints and random points", 1e-9);
  Tally identity("g smoothly composed with g^-1 is the identity", 1e-9);
  for (int it = 0; it < n; ++it) {
    PiecewisePath h = gen::random_d0upup(rng);
    PiecewisePath hinv = generalized_inverse(h);
    involution.expect(generalized_inverse(hinv) == h, at("function", it));

    std::vector<double> us;
    for (const Knot& k : h.knots()) us.push_back(k.t);
    double hi = h.last_knot_time() + 1.0;
    for (int i = 0; i < 100; ++i) us.push_back(gen::unif(rng, 0.0, hi));
    for (double u : us) {
      if (h.segment_slope(h.segment_index(u)) > 0.0) {
        inequalities.error(std::abs(hinv.value_near(h.value_near(u)) - u), at("function", it));
      }
      inequalities.error(std::max(0.0, u - hinv.value_near(h.left_near(u))), at("function", it));
      inequalities.error(std::max(0.0, hinv.left_near(h.value_near(u)) - u), at("function", it));
    }

    auto grid = gen::grid_for({&h, &hinv}, 200);
    identity.error(gen::sup_diff(smooth_compose(h, hinv), PiecewisePath::identity(), grid),
                   at("function", it));
    identity.error(gen::sup_diff(smooth_compose(hinv, h), PiecewisePath::identity(), grid),
                   at("function", it));
  }
  rep.checks.push_back(involution.done());
  rep.checks.push_back(inequalities.done());
  rep.checks.push_back(identity.done());

  Tally continuity("smooth compositions are continuous", 1e-12);
  Tally sandwich("sandwich inequality", 1e-9);
  Tally additivity("additivity over compatible pairs", 1e-9);
  for (int it = 0; it < n; ++it) {
    PiecewisePath h1 = generalized_inverse(gen::random_d0upup(rng));
    PiecewisePath h2 = generalized_inverse(gen::random_d0upup(rng));
    PiecewisePath kappa = generalized_inverse(h1 + h2);
    PiecewisePath s1 = scale(h1, gen::unif(rng, 0.1, 3.0));
    PiecewisePath s2 = scale(h2, gen::unif(rng, 0.1, 3.0));
    PiecewisePath c1 = smooth_compose(s1, kappa);
    PiecewisePath c2 = smooth_compose(s2, kappa);
    for (const PiecewisePath* c : {&c1, &c2}) {
      for (const Knot& k : c->knots()) {
        continuity.error(std::abs(k.right - k.left), at("pair", it));
      }
    }
    auto grid = gen::grid_for({&kappa, &c1, &c2}, 1000);
    for (double s : grid) {
      double u = kappa.eval(s);
      double v = c1.eval(s);
      sandwich.error(std::max({0.0, s1.left_near(u) - v, v - s1.value_near(u)}),
                     at("pair", it));
    }
    PiecewisePath sum = s1 + s2;
    if (check_compatible(sum, kappa).ok()) {
      additivity.error(gen::sup_diff(smooth_compose(sum, kappa), c1 + c2, grid),
                       at("pair", it));
    }
  }
  rep.checks.push_back(continuity.done());
  rep.checks.push_back(sandwich.done());
  rep.checks.push_back(additivity.done());

  Tally endpoints("excursions end on the past infimum", 1e-12);
  for (int it = 0; it < n; ++it) {
    PiecewisePath p = gen::random_no_negative_jumps(rng);
    PiecewisePath d = p - past_infimum(p);
    for (const Excursion& e : excursions(p)) {
      if (std::isfinite(e.r)) endpoints.error(std::abs(d.left_near(e.r)), at("path", it));
    }
  }
  rep.checks.push_back(endpoints.done());
  return rep;
}

SuiteReport validate_pathwise(const SuiteOptions& opt) {
  const int n = opt.instances > 0 ? opt.instances : 100;
  SuiteReport rep{"pathwise", {}};

  {
    // Two types, one type-1 vertex with clock 0.5, R_21 = 0.3.
    BlockModel model({{1.0}, {}}, SquareMatrix::from_rows({{1.0, 0.3}, {0.3, 1.0}}));
    ClockSet clocks{{{0.5}, {}}};
    std::vector<double> rho{1.0, 1.0};
    Field f = build_field(model, clocks);
    Tally w("worked instance", 1e-12);
    w.error(vec_err(hitting_time(f, rho, 0.3).values(), {0.3, 0.3}), "T(0.3)");
    w.error(vec_err(hitting_time(f, rho, 0.6).values(), {1.6, 0.9}), "T(0.6)");
    HittingProcess hp = hitting_process(model, clocks, rho);
    w.expect(hp.levels.size() == 1, "one jump");
    if (hp.levels.size() == 1) {
      w.error(rel(hp.levels[0], 0.5), "jump level");
      w.error(vec_err(hp.jumps[0], {1.0, 0.3}), "jump size");
    }
    CurveBundle b = build_curve(f, rho);
    auto ex = excursions(composed_process(f, b.gamma, 0));
    w.expect(ex.size() == 1, "one excursion of C_1");
    if (ex.size() == 1) w.error(vec_err({ex[0].l, ex[0].r}, {1.0, 2.3}), "excursion");
    auto enc = encode_components(b, f);
    w.expect(enc.size() == 1, "one encoded component");
    if (enc.size() == 1) w.error(vec_err(enc[0].increment, {1.0, 0.3}), "increment");
    rep.checks.push_back(w.done());
  }

  Rng rng(derive_seed(opt.seed, 2));
  EncodingTallies et;
  CurveTallies ct;
  for (int it = 0; it < n; ++it) {
    const int m = 1 + it % 3;
    BlockModel model = gen::random_model(rng, m, 6);
    Factorization fk = factor_kernel(model.Q());
    ClockSet clocks = sample_clocks(model, rng);
    const std::string where = at("instance", it);

    // A generic rho as well, some coordinates possibly zero.
    std::vector<double> rho_any(m);
    for (double& r : rho_any) r = gen::unif(rng, 0.0, 1.0) < 0.2 ? 0.0 : gen::unif(rng, 0.2, 2.0);
    if (*std::max_element(rho_any.begin(), rho_any.end()) == 0.0) rho_any[0] = 1.0;
    encoding_cases(et, model, clocks, fk.rho, where);
    encoding_cases(et, model, clocks, rho_any, where);
    curve_cases(ct, model, clocks, fk.rho, where);
  }
  et.report(rep.checks);
  ct.report(rep.checks);

  Tally three("m = 3 factorization reproduces R", 1e-12);
  Tally four("random m = 4 kernels are rejected", 0.0);
  for (int it = 0; it < n; ++it) {
    SquareMatrix q = gen::random_kernel(rng, 3);
    Factorization fk = factor_kernel(q);
    three.expect(fk.ok, at("kernel", it));
    if (fk.ok) {
      double e = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (i != j) e = std::max(e, std::abs(q(i, j) / q(i, i) - fk.rho[i] * fk.nu[j]));
        }
      }
      three.error(e, at("kernel", it));
    }
    four.expect(!factor_kernel(gen::random_kernel(rng, 4)).ok, at("kernel", it));
  }
  rep.checks.push_back(three.done());
  rep.checks.push_back(four.done());
  return rep;
}

namespace {

struct Fixture {
  std::string name;
  BlockModel model;
  std::vector<double> rho;
  bool component_law = true;  // off for a repeated model
};

std::vector<Fixture> distribution_fixtures() {
  SquareMatrix pair = SquareMatrix::from_rows({{1.0, 0.5}, {0.5, 1.0}});
  return {
      {"two types, one vertex each", BlockModel({{1.0}, {1.0}}, pair), {1.0, 1.0}},
      {"two types, rho = e_1", BlockModel({{1.0}, {1.0}}, pair), {1.0, 0.0}, false},
      {"one type, three vertices",
       BlockModel({{1.2, 0.8, 0.5}}, SquareMatrix::from_rows({{1.0}})), {1.0}},
      {"two types, four vertices",
       BlockModel({{1.0, 0.6}, {0.9, 0.4}},
                  SquareMatrix::from_rows({{0.8, 0.5}, {0.5, 1.2}})),
       {1.0, 0.5}},
  };
}

Check stat_check(const std::string& name, const TestResult& r, double alpha) {
  std::string d = "p = " + fmt(r.p_value) + ", statistic " + fmt(r.statistic);
  if (r.dof > 0) d += ", dof " + std::to_string(r.dof);
  if (r.support_mismatch) d += ", " + r.note;
  return {name, !r.support_mismatch && r.p_value > alpha, d};
}

}  // namespace

SuiteReport validate_distributional(const SuiteOptions& opt) {
  if (opt.test != "all" && opt.test != "chi-square" && opt.test != "ks") {
    throw PreconditionError("unknown test '" + opt.test + "'");
  }
  const bool chi = opt.test != "ks";
  const bool ks = opt.test != "chi-square";
  SuiteReport rep{"distributional", {}};
  std::uint64_t stream = 0;
  for (const Fixture& fx : distribution_fixtures()) {
    PartitionDistribution exact = exact_partition_distribution(fx.model);
    Law law = component_law(fx.model, exact);
    const std::string tag = " [" + fx.name + "]";
    // Streams are numbered the same whichever checks are selected.
    if (fx.component_law) {
      for (Sampler s : {Sampler::graph, Sampler::field}) {
        McConfig cfg{opt.replications, derive_seed(opt.seed, stream++), opt.jobs};
        if (!chi) continue;
        Counts counts = mc_component_counts(fx.model, s, cfg);
        rep.checks.push_back(stat_check(
            std::string(s == Sampler::graph ? "graph" : "field-exploration") +
                " components match the exact law" + tag,
            chi_square(counts, law), opt.alpha));
      }
    }
    McConfig cfg{opt.replications, derive_seed(opt.seed, stream++), opt.jobs};
    EncodingReport er = compare_encoding_laws(fx.model, fx.rho, cfg);
    if (ks) rep.checks.push_back(stat_check("Y_1 is exponential" + tag, er.first_y, opt.alpha));
    if (!chi) continue;
    rep.checks.push_back(stat_check("first jump matches the size-biased law" + tag,
                                    er.delta_first, opt.alpha));
    rep.checks.push_back(stat_check("jump sequence matches the size-biased law" + tag,
                                    er.delta_sequence, opt.alpha));
    rep.checks.push_back(stat_check("graph size-biased sequence matches its exact law" + tag,
                                    er.graph_sequence, opt.alpha));
    rep.checks.push_back(stat_check("field and graph sequences agree" + tag,
                                    er.two_sample, opt.alpha));
  }
  if (chi && opt.calibration_runs > 0) {
    for (const Fixture& fx : distribution_fixtures()) {
      if (!fx.component_law) continue;
      Calibration cal = calibrate_graph_oracle(fx.model, opt.replications,
                                               derive_seed(opt.seed, stream++),
                                               opt.calibration_runs, opt.alpha, opt.jobs);
      rep.checks.push_back({"graph sampler rejection rate is nominal [" + fx.name + "]",
                            cal.pass(),
                            std::to_string(cal.rejections) + " of " +
                                std::to_string(cal.runs) + " runs rejected at alpha " +
                                fmt(cal.alpha) + ", allowed " + std::to_string(cal.allowed)});
    }
  }
  return rep;
}

SuiteReport run_suite(const std::string& suite, const SuiteOptions& opt) {
  if (suite == "functions") return validate_functions(opt);
  if (suite == "pathwise") return validate_pathwise(opt);
  if (suite == "distributional") return validate_distributional(opt);
  throw PreconditionError("unknown suite '" + suite +
                          "' (expected functions, pathwise or distributional)");
}

}  // namespace hitfield
