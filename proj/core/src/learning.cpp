#include "cep/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cep/numeric.hpp"
#include "cep/rng.hpp"

namespace cep {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("decay must be in (0, 1)");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
  if (lambda_floor < 0.0) throw std::invalid_argument("lambda_floor must be nonnegative");
}

ParamGradient ParamGradient::zeros_like(const EnergyParams& params) {
  ParamGradient g;
  g.w_node.assign(params.event_classes(), std::vector<double>(params.node_labels(), 0.0));
  g.w_edge.assign(params.event_classes(), std::vector<double>(params.edge_labels(), 0.0));
  g.w_event.assign(params.event_classes(), 0.0);
  return g;
}

namespace {

// Truth-side configuration: annotated labels where present, frozen softmax
// argmax labels otherwise; the truth event class always.
Assignment truth_side(const GraphInstance& instance) {
  if (!instance.truth) {
    throw std::logic_error("instance " + instance.id + " has no ground truth");
  }
  Assignment a = softmax_labels(instance);
  a.event_class = instance.truth->event_class;
  if (instance.truth->node_labels) a.node_labels = *instance.truth->node_labels;
  if (instance.truth->edge_labels) a.edge_labels = *instance.truth->edge_labels;
  return a;
}

struct HingeParts {
  double loss = 0.0;
  Assignment truth;
  Assignment violated;
};

HingeParts hinge_parts(const GraphInstance& instance, const EnergyParams& params,
                       const InstancePValues& p_values) {
  HingeParts parts;
  parts.truth = truth_side(instance);
  Prediction violated = most_violated(instance, params, p_values, parts.truth.event_class);
  const double truth_energy = regularized_energy(instance, params, parts.truth, p_values);
  // the margin indicator is 1: the violated event class differs by construction
  parts.loss = std::max(0.0, truth_energy - violated.regularized_energy + 1.0);
  parts.violated = std::move(violated.assignment);
  return parts;
}

}  // namespace

double hinge_loss(const GraphInstance& instance, const EnergyParams& params,
                  const InstancePValues& p_values) {
  return hinge_parts(instance, params, p_values).loss;
}

double hinge_loss(const GraphInstance& instance, const EnergyParams& params,
                  const CalibrationStore& store) {
  return hinge_loss(instance, params, compute_p_values(store, instance, instance.id));
}

ParamGradient loss_subgradient(const GraphInstance& instance, const EnergyParams& params,
                               const InstancePValues& p_values, bool train_lambdas) {
  ParamGradient grad = ParamGradient::zeros_like(params);
  const HingeParts parts = hinge_parts(instance, params, p_values);
  if (parts.loss <= 0.0) return grad;

  const AggregateVectors truth_agg = aggregate_vectors(instance, parts.truth, p_values);
  const AggregateVectors viol_agg = aggregate_vectors(instance, parts.violated, p_values);
  const int c_truth = parts.truth.event_class;
  const int c_viol = parts.violated.event_class;

  for (int y = 0; y < params.node_labels(); ++y) {
    grad.w_node[c_truth][y] += truth_agg.psi_node[y];
    grad.w_node[c_viol][y] -= viol_agg.psi_node[y];
  }
  for (int y = 0; y < params.edge_labels(); ++y) {
    grad.w_edge[c_truth][y] += truth_agg.psi_edge[y];
    grad.w_edge[c_viol][y] -= viol_agg.psi_edge[y];
  }
  if (params.mode == Mode::cern2) {
    grad.w_event[c_truth] += (*instance.event_potential)[c_truth];
    grad.w_event[c_viol] -= (*instance.event_potential)[c_viol];
  }

  if (train_lambdas) {
    grad.lambda_node = -(pairwise_sum(truth_agg.log_p_node) - pairwise_sum(viol_agg.log_p_node));
    grad.lambda_edge = -(pairwise_sum(truth_agg.log_p_edge) - pairwise_sum(viol_agg.log_p_edge));
    if (params.mode == Mode::cern2) {
      grad.lambda_event =
          -(std::log((*p_values.event)[c_truth]) - std::log((*p_values.event)[c_viol]));
    }
  }
  return grad;
}

ParamGradient loss_subgradient(const GraphInstance& instance, const EnergyParams& params,
                               const CalibrationStore& store, bool train_lambdas) {
  return loss_subgradient(instance, params, compute_p_values(store, instance, instance.id),
                          train_lambdas);
}

namespace {

// Combines per-instance gradients in index order by repeated halving, so the
// result is independent of how a parallel evaluation might have been batched.
ParamGradient combine_mean(std::vector<ParamGradient> grads) {
  const std::size_t n = grads.size();
  std::size_t count = n;
  while (count > 1) {
    const std::size_t half = (count + 1) / 2;
    for (std::size_t i = 0; i + half < count; ++i) {
      ParamGradient& a = grads[i];
      const ParamGradient& b = grads[i + half];
      for (std::size_t c = 0; c < a.w_node.size(); ++c) {
        for (std::size_t y = 0; y < a.w_node[c].size(); ++y) a.w_node[c][y] += b.w_node[c][y];
        for (std::size_t y = 0; y < a.w_edge[c].size(); ++y) a.w_edge[c][y] += b.w_edge[c][y];
        a.w_event[c] += b.w_event[c];
      }
      a.lambda_node += b.lambda_node;
      a.lambda_edge += b.lambda_edge;
      a.lambda_event += b.lambda_event;
    }
    count = half;
  }
  ParamGradient mean = std::move(grads[0]);
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& row : mean.w_node)
    for (double& v : row) v *= inv;
  for (auto& row : mean.w_edge)
    for (double& v : row) v *= inv;
  for (double& v : mean.w_event) v *= inv;
  mean.lambda_node *= inv;
  mean.lambda_edge *= inv;
  mean.lambda_event *= inv;
  return mean;
}

struct AdaptiveState {
  ParamGradient sq_avg;
  double decay;
  double lr;

  void step_entry(double& param, double& avg, double grad) const {
    avg = decay * avg + (1.0 - decay) * grad * grad;
    param -= lr * grad / std::sqrt(avg + 1e-8);
  }
};

}  // namespace

TrainResult train(std::span<const GraphInstance> instances, const EnergyParams& params_init,
                  const CalibrationStore& store, const TrainConfig& config) {
  config.validate();
  params_init.validate();
  if (instances.empty()) throw std::invalid_argument("train: empty instance list");
  for (const GraphInstance& g : instances) {
    if (!g.truth) throw std::invalid_argument("train: instance " + g.id + " has no ground truth");
  }

  // leave-one-out p-values are parameter independent, compute them once
  std::vector<InstancePValues> p_values;
  p_values.reserve(instances.size());
  for (const GraphInstance& g : instances) {
    p_values.push_back(compute_p_values(store, g, g.id));
  }

  TrainResult result;
  result.params = params_init;
  result.loss_trace.reserve(config.max_iterations);

  AdaptiveState state;
  state.sq_avg = ParamGradient::zeros_like(params_init);
  state.decay = config.decay;
  state.lr = config.learning_rate;

  RandomStream stream(config.seed);
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();  // force a shuffle on the first iteration

  std::vector<ParamGradient> batch_grads;
  std::vector<double> batch_losses;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (cursor >= order.size()) {
      stream.shuffle(order);
      cursor = 0;
    }
    const std::size_t batch_end = std::min(cursor + config.batch_size, order.size());

    batch_grads.clear();
    batch_losses.clear();
    for (std::size_t b = cursor; b < batch_end; ++b) {
      const std::size_t idx = order[b];
      batch_grads.push_back(
          loss_subgradient(instances[idx], result.params, p_values[idx], config.train_lambdas));
      batch_losses.push_back(hinge_loss(instances[idx], result.params, p_values[idx]));
    }
    cursor = batch_end;

    result.loss_trace.push_back(pairwise_sum(batch_losses) /
                                static_cast<double>(batch_losses.size()));

    ParamGradient mean = combine_mean(std::move(batch_grads));
    EnergyParams& p = result.params;
    for (int c = 0; c < p.event_classes(); ++c) {
      for (int y = 0; y < p.node_labels(); ++y) {
        state.step_entry(p.w_node[c][y], state.sq_avg.w_node[c][y], mean.w_node[c][y]);
      }
      for (int y = 0; y < p.edge_labels(); ++y) {
        state.step_entry(p.w_edge[c][y], state.sq_avg.w_edge[c][y], mean.w_edge[c][y]);
      }
      if (p.mode == Mode::cern2) {
        state.step_entry(p.w_event[c], state.sq_avg.w_event[c], mean.w_event[c]);
      }
    }
    if (config.train_lambdas) {
      state.step_entry(p.lambda_node, state.sq_avg.lambda_node, mean.lambda_node);
      state.step_entry(p.lambda_edge, state.sq_avg.lambda_edge, mean.lambda_edge);
      if (p.mode == Mode::cern2) {
        state.step_entry(p.lambda_event, state.sq_avg.lambda_event, mean.lambda_event);
      }
      p.lambda_node = std::max(config.lambda_floor, p.lambda_node);
      p.lambda_edge = std::max(config.lambda_floor, p.lambda_edge);
      p.lambda_event = std::max(config.lambda_floor, p.lambda_event);
    }
  }
  return result;
}

void save_trace_csv(const std::string& path, const std::vector<double>& loss_trace,
                    double learning_rate) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "iteration,mean_loss,learning_rate\n";
  for (std::size_t i = 0; i < loss_trace.size(); ++i) {
    out << i << ',' << format_double(loss_trace[i]) << ',' << format_double(learning_rate) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cep
