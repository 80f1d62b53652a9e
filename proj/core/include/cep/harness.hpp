#ifndef CEP_HARNESS_HPP
#define CEP_HARNESS_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cep/inference.hpp"

namespace cep {

/// Synthetic scenario generator. Events are compositions of individual
/// actions: each event class draws node labels from its confusion row, edge
/// labels follow deterministically from the incident node labels, and every
/// potential row is a signal_strength mixture of the one-hot truth with a
/// random simplex point.
struct GeneratorConfig {
  int event_classes = 5;
  int node_labels = 6;
  int edge_labels = 8;
  int min_nodes = 4;
  int max_nodes = 10;
  double edge_density = 0.5;
  double signal_strength = 0.7;
  std::vector<std::vector<double>> confusion;  // C x node_labels; empty selects the default
  std::uint64_t seed = 0;
  // Fixed p-value floor for the generated store. A shared floor keeps every
  // non-conforming hypothesis at the same penalty, whatever the category
  // size; set to std::nullopt for per-category 1/(n+1) floors.
  std::optional<double> epsilon = 1e-3;

  /// Peaked-but-overlapping default: each event concentrates on its own
  /// action and its two neighbours, with mass everywhere.
  static std::vector<std::vector<double>> default_confusion(int event_classes, int node_labels);

  std::vector<std::vector<double>> resolved_confusion() const;
  LabelSpace space() const { return {node_labels, edge_labels, event_classes}; }
  void validate() const;
};

/// Truth edge label induced by the incident node labels.
int induced_edge_label(int node_label_i, int node_label_j, int edge_labels);

struct GeneratedSet {
  std::vector<GraphInstance> instances;    // evaluation split
  std::vector<GraphInstance> calibration;  // disjoint calibration split
  CalibrationStore store;                  // sealed, built from the calibration split
};

GeneratedSet generate(const GeneratorConfig& config, int n_instances, int n_calibration);

/// Builds a sealed store from ground-truth-label nonconformities of the given
/// instances (all of which must carry truth with node/edge labels).
CalibrationStore build_store(std::span<const GraphInstance> instances, const LabelSpace& space,
                             std::optional<double> epsilon = std::nullopt);

/// Potential-space corruption: with probability q a row is mixed with weight
/// `severity` toward a one-hot row at a uniformly drawn wrong label. In cern2
/// mode the event row is recomputed from the corrupted node rows through the
/// confusion map, so event evidence degrades with its inputs.
struct CorruptionConfig {
  double probability = 0.0;  // q, per node/edge row
  double severity = 0.5;     // mixing coefficient toward the adversarial row
  std::uint64_t seed = 0;
  Mode mode = Mode::cern2;
  std::vector<std::vector<double>> confusion;  // for the event recompute; empty selects the default
};

GraphInstance corrupt(const GraphInstance& instance, const CorruptionConfig& config);

struct Metrics {
  double mca = 0.0;   // fraction of correct event classes
  double mpca = 0.0;  // unweighted mean of per-class accuracies
};

/// Event-class accuracy of predictions against instance truths, matched by
/// position (ids must agree). Classes absent from the truths are excluded
/// from the MPCA mean.
Metrics evaluate(std::span<const Prediction> predictions, std::span<const GraphInstance> truths);

struct LabelMetrics {
  double node_accuracy = 0.0;
  double edge_accuracy = 0.0;
};

/// Optional node/edge label scoring (ignores instances without annotated labels).
LabelMetrics evaluate_labels(std::span<const Prediction> predictions,
                             std::span<const GraphInstance> truths);

struct SweepConfig {
  double severity = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
  Mode mode = Mode::cern2;
  std::vector<std::vector<double>> confusion;  // empty selects the default
};

struct SweepRow {
  double q = 0.0;
  Regime regime = Regime::confidence_energy;
  Metrics metrics;
  double drop_mca = 0.0;   // baseline (q = 0) MCA minus this row's MCA
  double drop_mpca = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;           // grid-major, regime-minor
  std::map<Regime, Metrics> baseline;   // uncorrupted metrics per regime
  std::vector<double> q_grid;
  SweepConfig config;
  std::size_t instance_count = 0;
};

/// Corrupts a fresh copy of every instance per grid point (one derived
/// stream per (q, instance)), runs all three regimes on the same corrupted
/// copy, and reports accuracy and its drop relative to q = 0.
SweepReport robustness_sweep(std::span<const GraphInstance> instances,
                             const std::map<Regime, EnergyParams>& params_by_regime,
                             const CalibrationStore& store, std::span<const double> q_grid,
                             const SweepConfig& config);

/// Discriminative weights derived from the confusion map, used when no
/// trained parameters are supplied: w_node[c][y] tracks how typical action y
/// is under event c, w_edge follows the induced edge-label distribution, and
/// every lambda defaults to 1.
EnergyParams default_sweep_params(const GeneratorConfig& config, Mode mode);

std::string sweep_csv(const SweepReport& report);
void save_sweep_csv(const std::string& path, const SweepReport& report);
std::string sweep_summary_json(const SweepReport& report);
void save_sweep_summary(const std::string& path, const SweepReport& report);

GeneratorConfig parse_generator_config_json(const std::string& text);
std::string generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig load_generator_config(const std::string& path);
void save_generator_config(const std::string& path, const GeneratorConfig& config);

}  // namespace cep

#endif
