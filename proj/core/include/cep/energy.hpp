#ifndef CEP_ENERGY_HPP
#define CEP_ENERGY_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cep/conformal.hpp"
#include "cep/graph.hpp"
#include "cep/types.hpp"

namespace cep {

/// Weights and confidence multipliers of the energy evaluation.
///
/// The energy of (c, Y) is
///   sum_i w_node[c][y_i] * psi_i[y_i] + sum_(i,j) w_edge[c][y_ij] * psi_ij[y_ij]
/// plus w_event[c] * psi[c] in cern2 mode; the regularized energy subtracts
/// lambda_node * sum_i log p_i(c, y_i), lambda_edge * sum log p_ij(c, y_ij),
/// and (cern2 only) lambda_event * log p(c). In cern1 mode w_event and
/// lambda_event are ignored entirely.
struct EnergyParams {
  Mode mode = Mode::cern2;
  std::vector<std::vector<double>> w_node;  // C x |Y^V|
  std::vector<std::vector<double>> w_edge;  // C x |Y^E|
  std::vector<double> w_event;              // C
  double lambda_node = 0.0;
  double lambda_edge = 0.0;
  double lambda_event = 0.0;

  int event_classes() const { return static_cast<int>(w_node.size()); }
  int node_labels() const { return w_node.empty() ? 0 : static_cast<int>(w_node[0].size()); }
  int edge_labels() const { return w_edge.empty() ? 0 : static_cast<int>(w_edge[0].size()); }
  LabelSpace space() const { return {node_labels(), edge_labels(), event_classes()}; }

  /// Zero-initialized weights for a label space.
  static EnergyParams zeros(const LabelSpace& space, Mode mode);

  void validate() const;  // rectangular matrices, matching C, lambdas >= 0
  bool operator==(const EnergyParams&) const = default;
};

/// Per-instance p-value tables, one table per node and edge row plus the
/// per-class event p-values: the confidence inputs to the energy evaluation.
struct InstancePValues {
  std::vector<std::vector<std::vector<double>>> node;  // [node][c][y]
  std::vector<std::vector<std::vector<double>>> edge;  // [edge][c][y]
  std::optional<std::vector<double>> event;            // [c]; present iff the instance has an event row
  std::size_t empty_categories = 0;                    // calibration categories that came up empty
};

/// Tabulates p-values for every (row, event class, label) of the instance.
/// Pass exclude_source = instance.id for leave-one-out evaluation on
/// training scenes.
InstancePValues compute_p_values(const CalibrationStore& store, const GraphInstance& instance,
                                 std::string_view exclude_source = {});

double raw_energy(const GraphInstance& instance, const EnergyParams& params,
                  const Assignment& assignment);

double regularized_energy(const GraphInstance& instance, const EnergyParams& params,
                          const Assignment& assignment, const InstancePValues& p_values);

/// Sums of potentials and log p-values grouped by assigned label. Dotting
/// psi_* with a weight row and scaling log_p_* sums by the multipliers
/// reproduces the regularized energy (up to the event terms, which are
/// scalars read directly from the instance).
struct AggregateVectors {
  std::vector<double> psi_node;    // |Y^V|
  std::vector<double> psi_edge;    // |Y^E|
  std::vector<double> log_p_node;  // |Y^V|, sums of log p
  std::vector<double> log_p_edge;  // |Y^E|
};

AggregateVectors aggregate_vectors(const GraphInstance& instance, const Assignment& assignment,
                                   const InstancePValues& p_values);

EnergyParams load_params(const std::string& path);
void save_params(const std::string& path, const EnergyParams& params);
EnergyParams parse_params_json(const std::string& text);
std::string params_to_json(const EnergyParams& params);

}  // namespace cep

#endif
