#include "hitfield/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "hitfield/errors.hpp"
#include "hitfield/field.hpp"

namespace hitfield {

namespace {

// Vertex pairs u < v in global order with their edge probabilities.
struct PairTable {
  std::size_t n = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> p;
};

PairTable pair_table(const BlockModel& model) {
  PairTable t;
  t.n = model.vertex_count();
  if (t.n > kMaxExactVertices) {
    throw PreconditionError("exact enumeration supports at most 8 vertices");
  }
  for (std::size_t u = 0; u < t.n; ++u) {
    for (std::size_t v = u + 1; v < t.n; ++v) {
      t.pairs.emplace_back(static_cast<int>(u), static_cast<int>(v));
      t.p.push_back(model.edge_probability(model.vertex(u), model.vertex(v)));
    }
  }
  return t;
}

// Partition packed as 4-bit block labels, labels in order of first use.
using Packed = std::uint32_t;

Packed pack_components(std::size_t n, const std::uint8_t* adj) {
  Packed out = 0;
  unsigned seen = 0;
  unsigned label = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (seen >> v & 1u) continue;
    unsigned comp = 1u << v, frontier = comp;
    while (frontier) {
      unsigned next = 0;
      for (std::size_t u = 0; u < n; ++u) {
        if (frontier >> u & 1u) next |= adj[u];
      }
      frontier = next & ~comp;
      comp |= next;
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (comp >> u & 1u) out |= static_cast<Packed>(label) << (4 * u);
    }
    seen |= comp;
    ++label;
  }
  return out;
}

Partition unpack(std::size_t n, Packed packed) {
  Partition part;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t label = packed >> (4 * v) & 0xFu;
    if (label >= part.size()) part.resize(label + 1);
    part[label].push_back(v);
  }
  return part;
}

// Weight of every configuration as a product of two half tables.
struct HalfTables {
  std::size_t lo_bits = 0;
  std::vector<double> lo, hi;
};

HalfTables half_tables(const PairTable& t) {
  HalfTables h;
  const std::size_t np = t.pairs.size();
  h.lo_bits = np / 2;
  auto build = [&](std::size_t first, std::size_t count) {
    std::vector<double> w(std::size_t{1} << count, 1.0);
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
      for (std::size_t b = 0; b < count; ++b) {
        double pe = t.p[first + b];
        w[mask] *= (mask >> b & 1u) ? pe : 1.0 - pe;
      }
    }
    return w;
  };
  h.lo = build(0, h.lo_bits);
  h.hi = build(h.lo_bits, np - h.lo_bits);
  return h;
}

void accumulate_range(const PairTable& t, const HalfTables& h,
                      std::uint64_t begin, std::uint64_t end,
                      std::map<Packed, double>& out) {
  const std::uint64_t lo_mask = (std::uint64_t{1} << h.lo_bits) - 1;
  for (std::uint64_t mask = begin; mask < end; ++mask) {
    std::uint8_t adj[kMaxExactVertices] = {};
    for (std::size_t b = 0; b < t.pairs.size(); ++b) {
      if (mask >> b & 1u) {
        auto [u, v] = t.pairs[b];
        adj[u] |= static_cast<std::uint8_t>(1u << v);
        adj[v] |= static_cast<std::uint8_t>(1u << u);
      }
    }
    double w = h.lo[mask & lo_mask] * h.hi[mask >> h.lo_bits];
    out[pack_components(t.n, adj)] += w;
  }
}

PartitionDistribution finish(std::size_t n, const std::map<Packed, double>& m) {
  PartitionDistribution d;
  for (const auto& [packed, p] : m) d.prob[unpack(n, packed)] += p;
  return d;
}

std::string vec_key(const std::vector<double>& v) {
  std::string s = "(";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Nine significant digits absorb summation-order rounding; negative
    // zero is folded into zero.
    std::snprintf(buf, sizeof buf, "%.9g", v[i] == 0.0 ? 0.0 : v[i]);
    if (i) s += ",";
    s += buf;
  }
  return s + ")";
}

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

std::vector<std::vector<double>> graph_masses(const BlockModel& model, Rng& rng) {
  Graph g = sample_graph(model, rng);
  std::vector<std::vector<double>> out;
  for (auto& c : connected_components(g, model)) out.push_back(std::move(c.mass));
  return out;
}

std::vector<std::vector<double>> field_masses(const BlockModel& model, Rng& rng) {
  ClockSet c = sample_clocks(model, rng);
  std::vector<double> ones(model.m(), 1.0);
  return field_exploration(model, c, ones).component_mass;
}

std::string component_sample(const BlockModel& model, Sampler s, Rng& rng) {
  return mass_multiset_key(s == Sampler::graph ? graph_masses(model, rng)
                                               : field_masses(model, rng));
}

void merge(Counts& into, const Counts& from) {
  for (const auto& [k, c] : from) into[k] += c;
}

// One replication of each encoding sampler.
struct EncodingDraw {
  std::string sequence;
  std::string first;
  double y = std::numeric_limits<double>::quiet_NaN();
};

EncodingDraw delta_draw(const BlockModel& model, const std::vector<double>& rho,
                        Rng& rng) {
  ClockSet c = sample_clocks(model, rng);
  ExplorationTrace tr = field_exploration(model, c, rho);
  HittingProcess hp = hitting_process(tr, rho);
  EncodingDraw d;
  d.sequence = sequence_key(hp.jumps);
  d.first = hp.jumps.empty() ? "none" : sequence_key({hp.jumps.front()});
  if (!tr.y.empty()) d.y = tr.y.front();
  return d;
}

EncodingDraw graph_draw(const BlockModel& model, const std::vector<double>& rho,
                        Rng& rng) {
  Graph g = sample_graph(model, rng);
  auto comps = connected_components(g, model);
  auto order = size_biased_order(comps, rho, model.Q(), rng);
  std::vector<std::vector<double>> seq;
  for (std::size_t k : order) seq.push_back(encode_mass(model, comps[k].mass));
  EncodingDraw d;
  d.sequence = sequence_key(seq);
  d.first = seq.empty() ? "none" : sequence_key({seq.front()});
  return d;
}

template <class Draw>
EncodingSamples run_encoding(const McConfig& cfg, bool parallel, Draw draw) {
  EncodingSamples out;
  std::vector<double> ys(cfg.replications, std::numeric_limits<double>::quiet_NaN());
  if (parallel) {
#pragma omp parallel num_threads(thread_count(cfg.jobs))
    {
      Counts seq, first;
#pragma omp for schedule(static)
      for (long r = 0; r < cfg.replications; ++r) {
        Rng rng(derive_seed(cfg.seed, r));
        EncodingDraw d = draw(rng);
        ++seq[d.sequence];
        ++first[d.first];
        ys[r] = d.y;
      }
#pragma omp critical
      {
        merge(out.sequences, seq);
        merge(out.first, first);
      }
    }
  } else {
    for (long r = 0; r < cfg.replications; ++r) {
      Rng rng(derive_seed(cfg.seed, r));
      EncodingDraw d = draw(rng);
      ++out.sequences[d.sequence];
      ++out.first[d.first];
      ys[r] = d.y;
    }
  }
  for (double y : ys) {
    if (!std::isnan(y)) out.first_y.push_back(y);
  }
  return out;
}

// Goodness of fit that tolerates a law concentrated on one category.
TestResult fit(const Counts& observed, const Law& law) {
  if (law.size() == 1) {
    TestResult r;
    r.cells = 1;
    for (const auto& [k, c] : observed) {
      if (c > 0 && !law.count(k)) {
        r.support_mismatch = true;
        r.p_value = 0.0;
        r.note = "unexpected category " + k;
        return r;
      }
    }
    r.note = "single category";
    return r;
  }
  return chi_square(observed, law);
}

}  // namespace

double PartitionDistribution::total() const {
  double s = 0.0;
  for (const auto& [part, p] : prob) s += p;
  return s;
}

PartitionDistribution exact_partition_distribution_serial(const BlockModel& model) {
  PairTable t = pair_table(model);
  HalfTables h = half_tables(t);
  std::map<Packed, double> acc;
  accumulate_range(t, h, 0, std::uint64_t{1} << t.pairs.size(), acc);
  return finish(t.n, acc);
}

PartitionDistribution exact_partition_distribution(const BlockModel& model) {
  PairTable t = pair_table(model);
  HalfTables h = half_tables(t);
  const std::uint64_t total = std::uint64_t{1} << t.pairs.size();
  const std::uint64_t chunk = 1 << 12;
  const std::int64_t chunks = static_cast<std::int64_t>((total + chunk - 1) / chunk);
  std::map<Packed, double> acc;
#pragma omp parallel
  {
    std::map<Packed, double> local;
#pragma omp for schedule(dynamic)
    for (std::int64_t c = 0; c < chunks; ++c) {
      std::uint64_t b = static_cast<std::uint64_t>(c) * chunk;
      accumulate_range(t, h, b, std::min(total, b + chunk), local);
    }
#pragma omp critical
    for (const auto& [k, p] : local) acc[k] += p;
  }
  return finish(t.n, acc);
}

PartitionDistribution partition_distribution_recursive(const BlockModel& model) {
  PairTable t = pair_table(model);
  const std::size_t n = t.n;
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 1.0));
  for (std::size_t k = 0; k < t.pairs.size(); ++k) {
    auto [u, v] = t.pairs[k];
    q[u][v] = q[v][u] = 1.0 - t.p[k];
  }
  auto cut = [&](unsigned a, unsigned b) {
    double r = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!(a >> u & 1u)) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (b >> v & 1u) r *= q[u][v];
      }
    }
    return r;
  };
  // conn[S]: probability that the induced subgraph on S is connected.
  const unsigned full = (1u << n) - 1;
  std::vector<double> conn(full + 1, 0.0);
  for (unsigned s = 1; s <= full; ++s) {
    unsigned low = s & (~s + 1);
    if (s == low) {
      conn[s] = 1.0;
      continue;
    }
    double disconnected = 0.0;
    unsigned rest = s & ~low;
    // Proper subsets T of S containing the lowest element.
    for (unsigned sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      unsigned tset = sub | low;
      disconnected += conn[tset] * cut(tset, s & ~tset);
      if (sub == 0) break;
    }
    conn[s] = 1.0 - disconnected;
  }
  PartitionDistribution d;
  std::vector<unsigned> blocks;
  auto rec = [&](auto&& self, unsigned remaining) -> void {
    if (remaining == 0) {
      double p = 1.0;
      for (std::size_t a = 0; a < blocks.size(); ++a) {
        p *= conn[blocks[a]];
        for (std::size_t b = a + 1; b < blocks.size(); ++b) {
          p *= cut(blocks[a], blocks[b]);
        }
      }
      Partition part;
      for (unsigned b : blocks) {
        std::vector<std::size_t> block;
        for (std::size_t v = 0; v < n; ++v) {
          if (b >> v & 1u) block.push_back(v);
        }
        part.push_back(std::move(block));
      }
      d.prob[part] = p;
      return;
    }
    unsigned low = remaining & (~remaining + 1);
    unsigned rest = remaining & ~low;
    for (unsigned sub = rest;; sub = (sub - 1) & rest) {
      blocks.push_back(sub | low);
      self(self, remaining & ~(sub | low));
      blocks.pop_back();
      if (sub == 0) break;
    }
  };
  rec(rec, full);
  return d;
}

std::string mass_multiset_key(std::vector<std::vector<double>> masses) {
  std::vector<std::string> keys;
  for (const auto& m : masses) keys.push_back(vec_key(m));
  std::sort(keys.begin(), keys.end());
  std::string s = "{";
  for (std::size_t k = 0; k < keys.size(); ++k) s += (k ? ";" : "") + keys[k];
  return s + "}";
}

std::string sequence_key(const std::vector<std::vector<double>>& seq) {
  if (seq.empty()) return "none";
  std::string s;
  for (std::size_t k = 0; k < seq.size(); ++k) s += (k ? ">" : "") + vec_key(seq[k]);
  return s;
}

namespace {

std::vector<std::vector<double>> block_masses(const BlockModel& model,
                                              const Partition& part) {
  std::vector<std::vector<double>> out;
  for (const auto& block : part) {
    std::vector<double> m(model.m(), 0.0);
    for (std::size_t v : block) {
      Vertex x = model.vertex(v);
      m[x.type] += model.weight(x);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

Law component_law(const BlockModel& model, const PartitionDistribution& d) {
  Law law;
  for (const auto& [part, p] : d.prob) {
    law[mass_multiset_key(block_masses(model, part))] += p;
  }
  return law;
}

Counts mc_component_counts_serial(const BlockModel& model, Sampler sampler,
                                  const McConfig& cfg) {
  Counts out;
  for (long r = 0; r < cfg.replications; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    ++out[component_sample(model, sampler, rng)];
  }
  return out;
}

Counts mc_component_counts(const BlockModel& model, Sampler sampler,
                           const McConfig& cfg) {
  Counts out;
#pragma omp parallel num_threads(thread_count(cfg.jobs))
  {
    Counts local;
#pragma omp for schedule(static)
    for (long r = 0; r < cfg.replications; ++r) {
      Rng rng(derive_seed(cfg.seed, r));
      ++local[component_sample(model, sampler, rng)];
    }
#pragma omp critical
    merge(out, local);
  }
  return out;
}

std::vector<double> encode_mass(const BlockModel& model,
                                const std::vector<double>& mass) {
  std::vector<double> d(model.m(), 0.0);
  for (int i = 0; i < model.m(); ++i) {
    for (int j = 0; j < model.m(); ++j) d[i] += model.R(i, j) * mass[j];
  }
  return d;
}

Law size_biased_sequence_law(const BlockModel& model,
                             const std::vector<double>& rho,
                             const PartitionDistribution& d) {
  validate_rho(rho, model.m());
  Law law;
  for (const auto& [part, p] : d.prob) {
    std::vector<std::vector<double>> enc;
    std::vector<double> w;
    for (const auto& m : block_masses(model, part)) {
      double s = scaled_mass(m, rho, model.Q());
      if (s > 0.0) {
        enc.push_back(encode_mass(model, m));
        w.push_back(s);
      }
    }
    std::vector<std::vector<double>> prefix;
    std::vector<bool> used(w.size(), false);
    auto rec = [&](auto&& self, double prob, double remaining) -> void {
      if (prefix.size() == w.size()) {
        law[sequence_key(prefix)] += prob;
        return;
      }
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (used[k]) continue;
        used[k] = true;
        prefix.push_back(enc[k]);
        self(self, prob * w[k] / remaining, remaining - w[k]);
        prefix.pop_back();
        used[k] = false;
      }
    };
    rec(rec, p, std::accumulate(w.begin(), w.end(), 0.0));
  }
  return law;
}

Law first_element_law(const Law& sequence_law) {
  Law out;
  for (const auto& [key, p] : sequence_law) {
    out[key.substr(0, key.find('>'))] += p;
  }
  return out;
}

EncodingSamples mc_delta_sequences(const BlockModel& model,
                                   const std::vector<double>& rho,
                                   const McConfig& cfg) {
  return run_encoding(cfg, true,
                      [&](Rng& rng) { return delta_draw(model, rho, rng); });
}

EncodingSamples mc_delta_sequences_serial(const BlockModel& model,
                                          const std::vector<double>& rho,
                                          const McConfig& cfg) {
  return run_encoding(cfg, false,
                      [&](Rng& rng) { return delta_draw(model, rho, rng); });
}

EncodingSamples mc_size_biased_sequences(const BlockModel& model,
                                         const std::vector<double>& rho,
                                         const McConfig& cfg) {
  return run_encoding(cfg, true,
                      [&](Rng& rng) { return graph_draw(model, rho, rng); });
}

double first_y_rate(const BlockModel& model, const std::vector<double>& rho) {
  double rate = 0.0;
  for (int i = 0; i < model.m(); ++i) {
    for (double w : model.weights(i)) rate += rho[i] * model.Q()(i, i) * w;
  }
  return rate;
}

bool EncodingReport::pass(double alpha) const {
  for (const TestResult* t :
       {&delta_first, &delta_sequence, &graph_sequence, &two_sample, &first_y}) {
    if (t->support_mismatch || t->p_value <= alpha) return false;
  }
  return true;
}

EncodingReport compare_encoding_laws(const BlockModel& model,
                                     const std::vector<double>& rho,
                                     const McConfig& cfg) {
  validate_rho(rho, model.m());
  PartitionDistribution exact = partition_distribution_recursive(model);
  Law seq_law = size_biased_sequence_law(model, rho, exact);
  Law first_law = first_element_law(seq_law);

  EncodingSamples field = mc_delta_sequences(model, rho, cfg);
  McConfig gcfg = cfg;
  gcfg.seed = derive_seed(cfg.seed, ~std::uint64_t{0});
  EncodingSamples graph = mc_size_biased_sequences(model, rho, gcfg);

  EncodingReport rep;
  rep.delta_first = fit(field.first, first_law);
  rep.delta_sequence = fit(field.sequences, seq_law);
  rep.graph_sequence = fit(graph.sequences, seq_law);
  if (field.sequences.size() + graph.sequences.size() > 2 ||
      field.sequences.begin()->first != graph.sequences.begin()->first) {
    rep.two_sample = chi_square_two_sample(field.sequences, graph.sequences);
  } else {
    rep.two_sample.note = "single category";
  }
  if (field.first_y.empty()) {
    throw PreconditionError("no component is visible for this rho");
  }
  const double rate = first_y_rate(model, rho);
  rep.first_y = ks_one_sample(field.first_y, [rate](double y) {
    return y <= 0.0 ? 0.0 : -std::expm1(-rate * y);
  });
  return rep;
}

Calibration calibrate_graph_oracle(const BlockModel& model, long replications,
                                   std::uint64_t base_seed, int runs,
                                   double alpha, int jobs) {
  Law law = component_law(model, partition_distribution_recursive(model));
  Calibration cal;
  cal.runs = runs;
  cal.alpha = alpha;
  // Binomial tail: allowed = min k with P(X > k) < 1e-3.
  double pmf = std::pow(1.0 - alpha, runs), cdf = pmf;
  int k = 0;
  while (1.0 - cdf >= 1e-3 && k < runs) {
    pmf *= (runs - k) / static_cast<double>(k + 1) * alpha / (1.0 - alpha);
    ++k;
    cdf += pmf;
  }
  cal.allowed = k;
  for (int r = 0; r < runs; ++r) {
    McConfig cfg{replications, derive_seed(base_seed, r), jobs};
    TestResult t = fit(mc_component_counts(model, Sampler::graph, cfg), law);
    if (t.support_mismatch || t.p_value <= alpha) ++cal.rejections;
  }
  return cal;
}

}  // namespace hitfield
