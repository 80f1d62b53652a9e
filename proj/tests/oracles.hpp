// Test-only reference implementations: deliberately naive linear scans and
// exhaustive enumerations, kept independent of the library's fast paths.
#ifndef CEP_TESTS_ORACLES_HPP
#define CEP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "cep/conformal.hpp"
#include "cep/energy.hpp"
#include "cep/graph.hpp"

namespace oracle {

// Counting p-value: scan every record and count matches with >= ties, then
// clamp to the floor rule (configured epsilon, else 1/(n+1), else 1e-4).
inline double p_value_scan(const std::vector<cep::CalibrationRecord>& records, cep::Level level,
                           int event_class, int label, double query, std::string_view exclude,
                           std::optional<double> epsilon) {
  std::size_t total = 0, count = 0;
  for (const cep::CalibrationRecord& r : records) {
    if (r.level != level) continue;
    if (level == cep::Level::event) {
      if (r.label != label) continue;
    } else {
      if (r.event_class != event_class || r.label != label) continue;
    }
    if (!exclude.empty() && r.source_id == exclude) continue;
    ++total;
    if (r.nonconformity >= query) ++count;
  }
  const double floor = epsilon ? *epsilon : (total ? 1.0 / double(total + 1) : 1e-4);
  if (total == 0) return floor;
  const double p = double(count) / double(total);
  return p < floor ? floor : p;
}

// Regularized energy by plain left-to-right accumulation.
inline double energy_scan(const cep::GraphInstance& g, const cep::EnergyParams& params,
                          const cep::Assignment& a, const cep::InstancePValues& pv) {
  const int c = a.event_class;
  double e = 0.0;
  for (int i = 0; i < g.node_count(); ++i) {
    const int y = a.node_labels[i];
    e += params.w_node[c][y] * g.node_potentials[i][y];
    e -= params.lambda_node * std::log(pv.node[i][c][y]);
  }
  for (int k = 0; k < g.edge_count(); ++k) {
    const int y = a.edge_labels[k];
    e += params.w_edge[c][y] * g.edge_potentials[k][y];
    e -= params.lambda_edge * std::log(pv.edge[k][c][y]);
  }
  if (params.mode == cep::Mode::cern2) {
    e += params.w_event[c] * (*g.event_potential)[c];
    e -= params.lambda_event * std::log((*pv.event)[c]);
  }
  return e;
}

struct EnumResult {
  cep::Assignment assignment;
  double energy = 0.0;
};

// Exhaustive minimization over every (c, Y) configuration, visited in
// lexicographic order with strict improvement (so ties keep the smallest).
inline EnumResult enumerate_min(const cep::GraphInstance& g, const cep::EnergyParams& params,
                                const cep::InstancePValues& pv) {
  const int node_labels = params.node_labels();
  const int edge_labels = params.edge_labels();
  EnumResult best;
  bool have = false;

  cep::Assignment a;
  a.node_labels.assign(g.node_count(), 0);
  a.edge_labels.assign(g.edge_count(), 0);

  auto advance = [](std::vector<int>& digits, int base) {
    for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
      if (++digits[i] < base) return true;
      digits[i] = 0;
    }
    return false;
  };

  for (int c = 0; c < params.event_classes(); ++c) {
    a.event_class = c;
    std::fill(a.node_labels.begin(), a.node_labels.end(), 0);
    do {
      std::fill(a.edge_labels.begin(), a.edge_labels.end(), 0);
      do {
        const double e = energy_scan(g, params, a, pv);
        if (!have || e < best.energy) {
          have = true;
          best.energy = e;
          best.assignment = a;
        }
      } while (advance(a.edge_labels, edge_labels));
    } while (advance(a.node_labels, node_labels));
  }
  return best;
}

inline double chi2_df4_cdf(double x) {
  return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / 2.0) * (1.0 + x / 2.0);
}

// Two-sided Kolmogorov-Smirnov distance against a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(std::abs((i + 1) / n - f), std::abs(f - i / n)));
  }
  return d;
}

}  // namespace oracle

namespace testutil {

// Seeded draws built on raw mt19937_64 output only, so every platform
// produces the same fixtures.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

  std::vector<double> simplex(int dim) {
    std::vector<double> row(dim);
    double sum = 0.0;
    for (double& v : row) {
      v = -std::log(1.0 - uniform());
      sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
  }

 private:
  std::mt19937_64 engine_;
};

inline cep::CalibrationStore random_store(Rng& rng, const cep::LabelSpace& space, int max_records,
                                          std::optional<double> epsilon = std::nullopt) {
  cep::CalibrationStore store(space, epsilon);
  const int n = rng.below(max_records + 1);
  for (int i = 0; i < n; ++i) {
    cep::CalibrationRecord r;
    const int which = rng.below(3);
    r.level = which == 0 ? cep::Level::node : which == 1 ? cep::Level::edge : cep::Level::event;
    r.event_class = rng.below(space.event_classes);
    r.label = r.level == cep::Level::event ? r.event_class : rng.below(space.label_count(r.level));
    r.nonconformity = rng.uniform();
    r.source_id = "src-" + std::to_string(rng.below(std::max(1, n / 4)));
    store.add(r);
  }
  store.seal();
  return store;
}

inline cep::GraphInstance random_instance(Rng& rng, const cep::LabelSpace& space, int max_nodes,
                                          int max_edges, bool with_event = true,
                                          bool with_truth = true) {
  cep::GraphInstance g;
  g.id = "rand-" + std::to_string(rng.below(1 << 20));
  const int nodes = 1 + rng.below(max_nodes);
  for (int i = 0; i < nodes; ++i) g.node_potentials.push_back(rng.simplex(space.node_labels));
  if (nodes >= 2) {
    const int edges = rng.below(max_edges + 1);
    for (int k = 0; k < edges; ++k) {
      const int i = rng.below(nodes);
      int j = rng.below(nodes - 1);
      if (j >= i) ++j;
      g.edges.push_back({i, j});
      g.edge_potentials.push_back(rng.simplex(space.edge_labels));
    }
  }
  if (with_event) g.event_potential = rng.simplex(space.event_classes);
  if (with_truth) {
    cep::Truth truth;
    truth.event_class = rng.below(space.event_classes);
    std::vector<int> nl(nodes), el(g.edge_count());
    for (int& y : nl) y = rng.below(space.node_labels);
    for (int& y : el) y = rng.below(space.edge_labels);
    truth.node_labels = std::move(nl);
    truth.edge_labels = std::move(el);
    g.truth = std::move(truth);
  }
  return g;
}

inline cep::EnergyParams random_params(Rng& rng, const cep::LabelSpace& space, cep::Mode mode,
                                       double weight_scale = 2.0, double lambda_max = 1.0) {
  cep::EnergyParams params = cep::EnergyParams::zeros(space, mode);
  for (auto& row : params.w_node)
    for (double& w : row) w = rng.uniform(-weight_scale, weight_scale);
  for (auto& row : params.w_edge)
    for (double& w : row) w = rng.uniform(-weight_scale, weight_scale);
  for (double& w : params.w_event) w = rng.uniform(-weight_scale, weight_scale);
  params.lambda_node = rng.uniform(0.0, lambda_max);
  params.lambda_edge = rng.uniform(0.0, lambda_max);
  params.lambda_event = rng.uniform(0.0, lambda_max);
  return params;
}

}  // namespace testutil

#endif
