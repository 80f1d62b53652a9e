#ifndef CEP_LEARNING_HPP
#define CEP_LEARNING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cep/inference.hpp"

namespace cep {

struct TrainConfig {
  double learning_rate = 1e-3;  // useful range roughly 1e-6 .. 1e-3
  double decay = 0.9;           // running average of squared gradients
  int batch_size = 8;
  int max_iterations = 1000;
  bool train_lambdas = false;
  std::uint64_t seed = 0;
  double lambda_floor = 0.0;  // projection bound when lambdas are trained

  void validate() const;
};

/// Subgradient with the same shape as the trainable part of EnergyParams.
struct ParamGradient {
  std::vector<std::vector<double>> w_node;
  std::vector<std::vector<double>> w_edge;
  std::vector<double> w_event;
  double lambda_node = 0.0;
  double lambda_edge = 0.0;
  double lambda_event = 0.0;

  static ParamGradient zeros_like(const EnergyParams& params);
};

/// Margin hinge against the most violated wrong-event configuration:
/// max(0, E~(truth side) - E~(most violated) + 1). The truth side uses the
/// annotated node/edge labels where present and the frozen softmax labels
/// otherwise; p-values must be leave-one-out for training scenes.
double hinge_loss(const GraphInstance& instance, const EnergyParams& params,
                  const InstancePValues& p_values);
double hinge_loss(const GraphInstance& instance, const EnergyParams& params,
                  const CalibrationStore& store);

/// Subgradient of hinge_loss: zero on the flat branch, otherwise the
/// difference of aggregate feature vectors between the truth-side and
/// most-violated configurations. Lambda entries are filled only when
/// train_lambdas is set.
ParamGradient loss_subgradient(const GraphInstance& instance, const EnergyParams& params,
                               const InstancePValues& p_values, bool train_lambdas);
ParamGradient loss_subgradient(const GraphInstance& instance, const EnergyParams& params,
                               const CalibrationStore& store, bool train_lambdas);

struct TrainResult {
  EnergyParams params;
  std::vector<double> loss_trace;  // mean batch loss per iteration
};

/// Mini-batch subgradient descent with per-parameter adaptive step sizes
/// (running average of squared gradients, step = lr * g / sqrt(avg + 1e-8)).
/// Batch order is reshuffled every epoch from the seeded stream, so traces
/// are reproducible. Trained lambdas are projected to >= lambda_floor.
TrainResult train(std::span<const GraphInstance> instances, const EnergyParams& params_init,
                  const CalibrationStore& store, const TrainConfig& config);

void save_trace_csv(const std::string& path, const std::vector<double>& loss_trace,
                    double learning_rate);

}  // namespace cep

#endif
