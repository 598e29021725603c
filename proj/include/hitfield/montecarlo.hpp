#pragma once

// Exact component laws of tiny models and Monte Carlo estimators for the
// equality-in-law checks. Replications run in parallel over disjoint seed
// streams; each *_serial function is the single-threaded reference and
// returns identical counts.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hitfield/block_model.hpp"
#include "hitfield/stats.hpp"

namespace hitfield {

inline constexpr std::size_t kMaxExactVertices = 8;

/// Set partition of the vertex set: blocks ascending, ordered by first element.
using Partition = std::vector<std::vector<std::size_t>>;

struct PartitionDistribution {
  std::map<Partition, double> prob;
  double total() const;
};

/// Sums over all 2^{#pairs} edge configurations.
PartitionDistribution exact_partition_distribution(const BlockModel& model);
PartitionDistribution exact_partition_distribution_serial(const BlockModel& model);

/// Independent route: P(partition) = prod over blocks of P(block connected)
/// times prod over cross pairs of (1 - p), with connectivity probabilities
/// from the usual subset recursion.
PartitionDistribution partition_distribution_recursive(const BlockModel& model);

/// Law keyed by category strings.
using Law = std::map<std::string, double>;
using Counts = std::map<std::string, long>;

/// Canonical key of a multiset of per-type mass vectors.
std::string mass_multiset_key(std::vector<std::vector<double>> masses);
/// Key of an ordered sequence of vectors; "none" when empty.
std::string sequence_key(const std::vector<std::vector<double>>& seq);

/// Law of the mass multiset of the components.
Law component_law(const BlockModel& model, const PartitionDistribution& d);

enum class Sampler { graph, field };

struct McConfig {
  long replications = 100000;
  std::uint64_t seed = 1;
  int jobs = 0;  // 0: OpenMP default
};

/// Mass-multiset counts from sampled graphs or from field explorations
/// (rho = 1 so that every vertex is explored).
Counts mc_component_counts(const BlockModel& model, Sampler sampler,
                           const McConfig& cfg);
Counts mc_component_counts_serial(const BlockModel& model, Sampler sampler,
                                  const McConfig& cfg);

/// R M for a mass vector M.
std::vector<double> encode_mass(const BlockModel& model,
                                const std::vector<double>& mass);

/// Exact laws of the size-biased R M sequence and of its first element.
Law size_biased_sequence_law(const BlockModel& model,
                             const std::vector<double>& rho,
                             const PartitionDistribution& d);
Law first_element_law(const Law& sequence_law);

struct EncodingSamples {
  Counts sequences;
  Counts first;
  std::vector<double> first_y;  // field side only
};

/// Chronological jump sequences of the hitting process, from field
/// explorations.
EncodingSamples mc_delta_sequences(const BlockModel& model,
                                   const std::vector<double>& rho,
                                   const McConfig& cfg);
EncodingSamples mc_delta_sequences_serial(const BlockModel& model,
                                          const std::vector<double>& rho,
                                          const McConfig& cfg);
/// Size-biased R M sequences from sampled graphs.
EncodingSamples mc_size_biased_sequences(const BlockModel& model,
                                         const std::vector<double>& rho,
                                         const McConfig& cfg);

/// Rate of the first Y: sum_i rho_i Q_ii sum_l w_l^i.
double first_y_rate(const BlockModel& model, const std::vector<double>& rho);

struct EncodingReport {
  TestResult delta_first;     // field first jump vs exact law
  TestResult delta_sequence;  // field jump sequence vs exact law
  TestResult graph_sequence;  // graph size-biased sequence vs exact law
  TestResult two_sample;      // field vs graph sequences
  TestResult first_y;         // KS against Exp(first_y_rate)
  bool pass(double alpha) const;
};

/// Needs at most kMaxExactVertices vertices. The graph side draws from a
/// seed stream derived from cfg.seed, disjoint from the field side.
EncodingReport compare_encoding_laws(const BlockModel& model,
                                     const std::vector<double>& rho,
                                     const McConfig& cfg);

struct Calibration {
  int runs = 0;
  int rejections = 0;
  double alpha = 0.0;
  /// Rejection count allowed for the run count: the smallest k with
  /// P(Binomial(runs, alpha) > k) < 1e-3.
  int allowed = 0;
  bool pass() const { return rejections <= allowed; }
};

/// Graph sampler against the exact component law across `runs` seeds.
Calibration calibrate_graph_oracle(const BlockModel& model, long replications,
                                   std::uint64_t base_seed, int runs,
                                   double alpha, int jobs = 0);

}  // namespace hitfield
