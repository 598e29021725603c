#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "hitfield/montecarlo.hpp"

using namespace hitfield;
using doctest::Approx;

namespace {

BlockModel pair_model() {
  return BlockModel({{1.0}, {1.0}},
                    SquareMatrix::from_rows({{1.0, 0.5}, {0.5, 1.0}}));
}

bool same_distribution(const PartitionDistribution& a,
                       const PartitionDistribution& b, double tol) {
  if (a.prob.size() != b.prob.size()) return false;
  for (const auto& [part, p] : a.prob) {
    auto it = b.prob.find(part);
    if (it == b.prob.end() || std::abs(it->second - p) > tol) {
      MESSAGE("differ by " << (it == b.prob.end() ? 1.0 : it->second - p));
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("exact partition distribution") {
  auto d = exact_partition_distribution(pair_model());
  REQUIRE(d.prob.size() == 2);
  Partition together{{0, 1}}, apart{{0}, {1}};
  CHECK(d.prob.at(together) == Approx(0.3934693402873666).epsilon(1e-14));
  CHECK(d.prob.at(apart) == Approx(0.6065306597126334).epsilon(1e-14));

  BlockModel single({{2.0}}, SquareMatrix::from_rows({{1.0}}));
  auto s = exact_partition_distribution(single);
  REQUIRE(s.prob.size() == 1);
  CHECK(s.prob.begin()->second == 1.0);

  BlockModel big({std::vector<double>(9, 1.0)}, SquareMatrix::from_rows({{1.0}}));
  CHECK_THROWS_AS(exact_partition_distribution(big), PreconditionError);
}

TEST_CASE("enumeration and recursion agree") {
  testgen::Rng rng(4);
  for (int it = 0; it < 40; ++it) {
    BlockModel m = testgen::random_model(rng, 1 + it % 3, 6);
    auto serial = exact_partition_distribution_serial(m);
    auto parallel = exact_partition_distribution(m);
    auto rec = partition_distribution_recursive(m);
    CHECK(serial.total() == Approx(1.0).epsilon(1e-12));
    CHECK(rec.total() == Approx(1.0).epsilon(1e-12));
    CHECK(same_distribution(serial, parallel, 1e-14));
    CHECK(same_distribution(serial, rec, 1e-12));
  }
  // Bell(7) = 877 partitions, all realizable. The enumeration adds 2^21
  // terms, so the two routes agree only to about 1e-11 here.
  BlockModel seven({std::vector<double>(7, 0.8)}, SquareMatrix::from_rows({{1.0}}));
  CHECK(partition_distribution_recursive(seven).prob.size() == 877);
  CHECK(same_distribution(exact_partition_distribution(seven),
                          partition_distribution_recursive(seven), 1e-10));
}

TEST_CASE("serial and parallel samplers give identical counts") {
  BlockModel m({{1.0, 0.5}, {0.8}}, SquareMatrix::from_rows({{1.0, 0.7}, {0.7, 1.3}}));
  McConfig cfg{2000, 42, 0};
  for (Sampler s : {Sampler::graph, Sampler::field}) {
    CHECK(mc_component_counts(m, s, cfg) == mc_component_counts_serial(m, s, cfg));
  }
  std::vector<double> rho{1.0, 0.5};
  auto par = mc_delta_sequences(m, rho, cfg);
  auto ser = mc_delta_sequences_serial(m, rho, cfg);
  CHECK(par.sequences == ser.sequences);
  CHECK(par.first == ser.first);
  CHECK(par.first_y == ser.first_y);
}

TEST_CASE("component laws by Monte Carlo") {
  BlockModel m = pair_model();
  Law law = component_law(m, exact_partition_distribution(m));
  REQUIRE(law.size() == 2);
  McConfig cfg{100000, 2024, 0};
  CHECK(chi_square(mc_component_counts(m, Sampler::graph, cfg), law).p_value > 0.001);
  CHECK(chi_square(mc_component_counts(m, Sampler::field, cfg), law).p_value > 0.001);

  // No cross edges and almost no inner ones: all singletons.
  BlockModel sparse({{1.0, 1.0}, {1.0}},
                    SquareMatrix::from_rows({{1e-9, 0.0}, {0.0, 1e-9}}));
  auto counts = mc_component_counts(sparse, Sampler::graph, {10000, 3, 0});
  CHECK(counts.size() == 1);
  CHECK(counts.begin()->first == "{(0,1);(1,0);(1,0)}");
}

TEST_CASE("size-biased sequence law") {
  BlockModel m = pair_model();
  auto d = exact_partition_distribution(m);
  Law seq = size_biased_sequence_law(m, {1.0, 1.0}, d);
  double total = 0.0;
  for (const auto& [k, p] : seq) total += p;
  CHECK(total == Approx(1.0).epsilon(1e-14));
  Law first = first_element_law(seq);
  // R (1,0) = (1, 0.5), R (0,1) = (0.5, 1), R (1,1) = (1.5, 1.5).
  REQUIRE(first.size() == 3);
  double apart = std::exp(-0.5);
  CHECK(first.at("(1,0.5)") == Approx(apart / 2));
  CHECK(first.at("(0.5,1)") == Approx(apart / 2));
  CHECK(first.at("(1.5,1.5)") == Approx(1 - apart));

  // rho = e_1 hides components without type-1 mass.
  Law e1 = size_biased_sequence_law(m, {1.0, 0.0}, d);
  for (const auto& [k, p] : e1) CHECK(k.find("(0.5,1)") == std::string::npos);
  auto samples = mc_delta_sequences(m, {1.0, 0.0}, {5000, 8, 0});
  for (const auto& [k, c] : samples.sequences) CHECK(e1.count(k) == 1);
}

TEST_CASE("encoding laws agree on small fixtures") {
  BlockModel m = pair_model();
  EncodingReport rep = compare_encoding_laws(m, {1.0, 1.0}, {100000, 11, 0});
  CHECK(rep.pass(0.001));
  CHECK(rep.delta_first.cells == 3);

  // Single type: the size-biased reordering of the rank-one components.
  BlockModel r1({{1.2, 0.8, 0.5}}, SquareMatrix::from_rows({{1.0}}));
  CHECK(compare_encoding_laws(r1, {1.0}, {100000, 12, 0}).pass(0.001));
}

TEST_CASE("calibration") {
  Calibration cal = calibrate_graph_oracle(pair_model(), 10000, 99, 100, 0.001);
  CHECK(cal.runs == 100);
  CHECK(cal.allowed == 2);
  CHECK(cal.pass());
}
