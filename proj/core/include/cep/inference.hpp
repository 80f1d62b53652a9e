#ifndef CEP_INFERENCE_HPP
#define CEP_INFERENCE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "cep/energy.hpp"

namespace cep {

/// An inferred configuration with its scores. regularized_energy and
/// confidence_statistic are evaluated with the params given at inference
/// time, whatever the regime optimized; confidence_statistic is
/// -sum(log p) over the chosen node/edge (and, in cern2 mode, event)
/// hypotheses, i.e. the Fisher combined statistic halved.
struct Prediction {
  std::string instance_id;
  Regime regime = Regime::confidence_energy;
  Assignment assignment;
  double raw_energy = 0.0;
  double regularized_energy = 0.0;
  double confidence_statistic = 0.0;
};

/// Minimizes the objective of the chosen regime exactly. The regularized
/// energy has no terms coupling two nodes or two edges once the event class
/// is fixed, so each per-class minimum decomposes into independent per-row
/// argmins; the event class with the smallest total wins. Ties break toward
/// the lowest index at every level.
Prediction infer(const GraphInstance& instance, const EnergyParams& params,
                 const InstancePValues& p_values, Regime regime);
Prediction infer(const GraphInstance& instance, const EnergyParams& params,
                 const CalibrationStore& store, Regime regime,
                 std::string_view exclude_source = {});

/// The strongest wrong-event competitor used by the hinge loss: node/edge
/// labels frozen to the per-row softmax argmax, event class the minimizer of
/// the regularized energy over c != truth_event.
Prediction most_violated(const GraphInstance& instance, const EnergyParams& params,
                         const InstancePValues& p_values, int truth_event);
Prediction most_violated(const GraphInstance& instance, const EnergyParams& params,
                         const CalibrationStore& store, int truth_event,
                         std::string_view exclude_source = {});

/// Per-row softmax argmax labels (the frozen competitor labels).
Assignment softmax_labels(const GraphInstance& instance);

std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> parse_predictions_json(const std::string& text);
std::string predictions_to_json(const std::vector<Prediction>& predictions);

}  // namespace cep

#endif
