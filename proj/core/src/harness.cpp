#include "cep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cep/numeric.hpp"
#include "cep/parallel.hpp"
#include "cep/rng.hpp"
#include "json.hpp"

namespace cep {

std::vector<std::vector<double>> GeneratorConfig::default_confusion(int event_classes,
                                                                    int node_labels) {
  if (event_classes <= 0 || node_labels < 2) {
    throw std::invalid_argument("default confusion needs at least 2 node labels");
  }
  // Each event composes three actions (overlapping with its neighbours) and
  // never exhibits the others. The structural zeros matter: they are what
  // makes out-of-support hypotheses land in empty calibration categories.
  std::vector<std::vector<double>> confusion(event_classes,
                                             std::vector<double>(node_labels, 0.0));
  for (int c = 0; c < event_classes; ++c) {
    if (node_labels == 2) {
      confusion[c][c % 2] = 0.7;
      confusion[c][(c + 1) % 2] = 0.3;
      continue;
    }
    confusion[c][c % node_labels] = 0.5;
    confusion[c][(c + 1) % node_labels] = 0.3;
    confusion[c][(c + 2) % node_labels] = 0.2;
  }
  return confusion;
}

std::vector<std::vector<double>> GeneratorConfig::resolved_confusion() const {
  if (confusion.empty()) return default_confusion(event_classes, node_labels);
  if (static_cast<int>(confusion.size()) != event_classes) {
    throw std::invalid_argument("confusion map must have one row per event class");
  }
  std::vector<std::vector<double>> out;
  out.reserve(confusion.size());
  for (const auto& row : confusion) {
    if (static_cast<int>(row.size()) != node_labels) {
      throw std::invalid_argument("confusion rows must have one entry per node label");
    }
    out.push_back(normalized(row));
  }
  return out;
}

void GeneratorConfig::validate() const {
  space().validate();
  if (min_nodes < 1 || max_nodes < min_nodes) {
    throw std::invalid_argument("node count range must satisfy 1 <= min <= max");
  }
  if (edge_density < 0.0 || edge_density > 1.0) {
    throw std::invalid_argument("edge density must be in [0, 1]");
  }
  if (!(signal_strength > 0.0 && signal_strength <= 1.0)) {
    throw std::invalid_argument("signal strength must be in (0, 1]");
  }
  resolved_confusion();
}

int induced_edge_label(int node_label_i, int node_label_j, int edge_labels) {
  return (node_label_i + node_label_j) % edge_labels;
}

namespace {

std::vector<double> mixed_row(double signal, int hot, std::size_t dim, RandomStream& stream) {
  std::vector<double> noise = stream.simplex_point(dim);
  std::vector<double> row(dim);
  for (std::size_t y = 0; y < dim; ++y) {
    row[y] = (1.0 - signal) * noise[y] + (y == static_cast<std::size_t>(hot) ? signal : 0.0);
  }
  return normalized(row);
}

std::string padded_id(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05d", prefix, index);
  return buf;
}

GraphInstance generate_instance(const GeneratorConfig& config,
                                const std::vector<std::vector<double>>& confusion,
                                const std::string& id, RandomStream& stream) {
  GraphInstance g;
  g.id = id;
  const int c = stream.index(config.event_classes);
  const int n_nodes = config.min_nodes + stream.index(config.max_nodes - config.min_nodes + 1);

  Truth truth;
  truth.event_class = c;
  std::vector<int> node_labels(n_nodes);
  for (int i = 0; i < n_nodes; ++i) node_labels[i] = stream.categorical(confusion[c]);

  std::vector<int> edge_labels;
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      if (stream.uniform01() < config.edge_density) {
        g.edges.push_back({i, j});
        edge_labels.push_back(induced_edge_label(node_labels[i], node_labels[j], config.edge_labels));
      }
    }
  }

  for (int i = 0; i < n_nodes; ++i) {
    g.node_potentials.push_back(
        mixed_row(config.signal_strength, node_labels[i], config.node_labels, stream));
  }
  for (int label : edge_labels) {
    g.edge_potentials.push_back(mixed_row(config.signal_strength, label, config.edge_labels, stream));
  }
  g.event_potential = mixed_row(config.signal_strength, c, config.event_classes, stream);

  truth.node_labels = std::move(node_labels);
  truth.edge_labels = std::move(edge_labels);
  g.truth = std::move(truth);
  return g;
}

}  // namespace

CalibrationStore build_store(std::span<const GraphInstance> instances, const LabelSpace& space,
                             std::optional<double> epsilon) {
  CalibrationStore store(space, epsilon);
  for (const GraphInstance& g : instances) {
    if (!g.truth) {
      throw std::invalid_argument("calibration instance " + g.id + " has no ground truth");
    }
    const int c = g.truth->event_class;
    if (g.truth->node_labels) {
      for (int i = 0; i < g.node_count(); ++i) {
        const int y = (*g.truth->node_labels)[i];
        store.add({Level::node, c, y, nonconformity(g.node_potentials[i], y), g.id});
      }
    }
    if (g.truth->edge_labels) {
      for (int k = 0; k < g.edge_count(); ++k) {
        const int y = (*g.truth->edge_labels)[k];
        store.add({Level::edge, c, y, nonconformity(g.edge_potentials[k], y), g.id});
      }
    }
    if (g.event_potential) {
      store.add({Level::event, c, c, nonconformity(*g.event_potential, c), g.id});
    }
  }
  store.seal();
  return store;
}

GeneratedSet generate(const GeneratorConfig& config, int n_instances, int n_calibration) {
  config.validate();
  if (n_instances < 0 || n_calibration < 0) {
    throw std::invalid_argument("instance counts must be nonnegative");
  }
  const auto confusion = config.resolved_confusion();

  GeneratedSet out{.instances = {}, .calibration = {}, .store = CalibrationStore(config.space())};
  out.instances.reserve(n_instances);
  for (int k = 0; k < n_instances; ++k) {
    RandomStream stream(derive_seed(config.seed, {0, static_cast<std::uint64_t>(k)}));
    out.instances.push_back(generate_instance(config, confusion, padded_id("eval", k), stream));
  }
  out.calibration.reserve(n_calibration);
  for (int k = 0; k < n_calibration; ++k) {
    RandomStream stream(derive_seed(config.seed, {1, static_cast<std::uint64_t>(k)}));
    out.calibration.push_back(generate_instance(config, confusion, padded_id("cal", k), stream));
  }
  out.store = build_store(out.calibration, config.space(), config.epsilon);
  return out;
}

namespace {

std::vector<std::vector<double>> corruption_confusion(const CorruptionConfig& config,
                                                      int event_classes, int node_labels) {
  if (config.confusion.empty()) {
    return GeneratorConfig::default_confusion(event_classes, node_labels);
  }
  if (static_cast<int>(config.confusion.size()) != event_classes ||
      static_cast<int>(config.confusion[0].size()) != node_labels) {
    throw std::invalid_argument("corruption confusion map does not match the instance shapes");
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : config.confusion) out.push_back(normalized(row));
  return out;
}

void corrupt_row(std::vector<double>& row, int reference_label, double severity,
                 RandomStream& stream) {
  const int labels = static_cast<int>(row.size());
  if (labels < 2) return;
  int wrong = stream.index(labels - 1);
  if (wrong >= reference_label) ++wrong;  // uniform over labels != reference
  for (int y = 0; y < labels; ++y) {
    row[y] = (1.0 - severity) * row[y] + (y == wrong ? severity : 0.0);
  }
  row = normalized(row);
}

}  // namespace

GraphInstance corrupt(const GraphInstance& instance, const CorruptionConfig& config) {
  if (config.probability < 0.0 || config.probability > 1.0) {
    throw std::invalid_argument("corruption probability must be in [0, 1]");
  }
  if (config.severity < 0.0 || config.severity > 1.0) {
    throw std::invalid_argument("corruption severity must be in [0, 1]");
  }
  GraphInstance out = instance;
  if (config.probability == 0.0 || config.severity == 0.0) return out;

  RandomStream stream(config.seed);
  for (int i = 0; i < out.node_count(); ++i) {
    if (stream.uniform01() < config.probability) {
      const int ref = (out.truth && out.truth->node_labels) ? (*out.truth->node_labels)[i]
                                                            : argmax(out.node_potentials[i]);
      corrupt_row(out.node_potentials[i], ref, config.severity, stream);
    }
  }
  for (int k = 0; k < out.edge_count(); ++k) {
    if (stream.uniform01() < config.probability) {
      const int ref = (out.truth && out.truth->edge_labels) ? (*out.truth->edge_labels)[k]
                                                            : argmax(out.edge_potentials[k]);
      corrupt_row(out.edge_potentials[k], ref, config.severity, stream);
    }
  }

  if (config.mode == Mode::cern2 && out.event_potential && out.node_count() > 0) {
    // event evidence is a function of its inputs: mean corrupted node row
    // pushed through the confusion map, renormalized
    const int classes = static_cast<int>(out.event_potential->size());
    const int node_labels = static_cast<int>(out.node_potentials[0].size());
    const auto confusion = corruption_confusion(config, classes, node_labels);

    std::vector<double> mean(node_labels, 0.0);
    for (const auto& row : out.node_potentials) {
      for (int y = 0; y < node_labels; ++y) mean[y] += row[y];
    }
    for (double& v : mean) v /= out.node_count();

    std::vector<double> evidence(classes, 0.0);
    for (int c = 0; c < classes; ++c) {
      for (int y = 0; y < node_labels; ++y) evidence[c] += confusion[c][y] * mean[y];
    }
    out.event_potential = normalized(evidence);
  }
  return out;
}

Metrics evaluate(std::span<const Prediction> predictions, std::span<const GraphInstance> truths) {
  if (predictions.empty() || predictions.size() != truths.size()) {
    throw std::invalid_argument("evaluate: prediction and truth lists must be nonempty and equal length");
  }
  std::map<int, int> per_class_total, per_class_correct;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const GraphInstance& g = truths[i];
    if (!g.truth) throw std::invalid_argument("evaluate: instance " + g.id + " has no ground truth");
    if (!predictions[i].instance_id.empty() && predictions[i].instance_id != g.id) {
      throw std::invalid_argument("evaluate: prediction " + predictions[i].instance_id +
                                  " does not line up with instance " + g.id);
    }
    const int truth_class = g.truth->event_class;
    ++per_class_total[truth_class];
    if (predictions[i].assignment.event_class == truth_class) {
      ++correct;
      ++per_class_correct[truth_class];
    }
  }
  Metrics m;
  m.mca = static_cast<double>(correct) / static_cast<double>(predictions.size());
  double sum = 0.0;
  for (const auto& [cls, total] : per_class_total) {
    sum += static_cast<double>(per_class_correct[cls]) / static_cast<double>(total);
  }
  m.mpca = sum / static_cast<double>(per_class_total.size());
  return m;
}

LabelMetrics evaluate_labels(std::span<const Prediction> predictions,
                             std::span<const GraphInstance> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("evaluate_labels: length mismatch");
  }
  std::size_t node_total = 0, node_correct = 0, edge_total = 0, edge_correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const GraphInstance& g = truths[i];
    if (!g.truth) continue;
    if (g.truth->node_labels) {
      for (int k = 0; k < g.node_count(); ++k) {
        ++node_total;
        if (predictions[i].assignment.node_labels[k] == (*g.truth->node_labels)[k]) ++node_correct;
      }
    }
    if (g.truth->edge_labels) {
      for (int k = 0; k < g.edge_count(); ++k) {
        ++edge_total;
        if (predictions[i].assignment.edge_labels[k] == (*g.truth->edge_labels)[k]) ++edge_correct;
      }
    }
  }
  if (node_total == 0 && edge_total == 0) {
    throw std::invalid_argument("evaluate_labels: no annotated node or edge labels");
  }
  LabelMetrics m;
  m.node_accuracy = node_total ? static_cast<double>(node_correct) / node_total : 0.0;
  m.edge_accuracy = edge_total ? static_cast<double>(edge_correct) / edge_total : 0.0;
  return m;
}

namespace {

constexpr Regime kSweepRegimes[] = {Regime::softmax_only, Regime::energy_only,
                                    Regime::confidence_energy};

std::vector<Prediction> infer_all(std::span<const GraphInstance> instances,
                                  const std::map<Regime, EnergyParams>& params_by_regime,
                                  const CalibrationStore& store, Regime regime, int threads) {
  std::vector<Prediction> predictions(instances.size());
  const EnergyParams& params = params_by_regime.at(regime);
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    try {
      predictions[i] = infer(instances[i], params, store, regime);
    } catch (const std::exception& e) {
      throw std::runtime_error("instance " + instances[i].id + ": " + e.what());
    }
  });
  return predictions;
}

}  // namespace

SweepReport robustness_sweep(std::span<const GraphInstance> instances,
                             const std::map<Regime, EnergyParams>& params_by_regime,
                             const CalibrationStore& store, std::span<const double> q_grid,
                             const SweepConfig& config) {
  if (instances.empty()) throw std::invalid_argument("sweep: no instances");
  if (q_grid.empty()) throw std::invalid_argument("sweep: empty q grid");
  if (config.mode != Mode::cern2) {
    throw std::invalid_argument("sweep: the three-regime comparison needs cern2 mode");
  }
  for (Regime regime : kSweepRegimes) {
    if (!params_by_regime.count(regime)) {
      throw std::invalid_argument("sweep: missing params for regime " +
                                  std::string(to_string(regime)));
    }
  }
  for (const GraphInstance& g : instances) {
    if (!g.truth) throw std::invalid_argument("sweep: instance " + g.id + " has no ground truth");
  }

  SweepReport report;
  report.q_grid.assign(q_grid.begin(), q_grid.end());
  report.config = config;
  report.instance_count = instances.size();

  for (Regime regime : kSweepRegimes) {
    auto predictions = infer_all(instances, params_by_regime, store, regime, config.threads);
    report.baseline[regime] = evaluate(predictions, instances);
  }

  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    const double q = q_grid[qi];
    std::vector<GraphInstance> corrupted(instances.size());
    parallel_for(instances.size(), config.threads, [&](std::size_t i) {
      CorruptionConfig item;
      item.probability = q;
      item.severity = config.severity;
      item.seed = derive_seed(config.seed, {qi, i});
      item.mode = config.mode;
      item.confusion = config.confusion;
      try {
        corrupted[i] = corrupt(instances[i], item);
      } catch (const std::exception& e) {
        throw std::runtime_error("instance " + instances[i].id + ": " + e.what());
      }
    });

    for (Regime regime : kSweepRegimes) {
      auto predictions = infer_all(corrupted, params_by_regime, store, regime, config.threads);
      SweepRow row;
      row.q = q;
      row.regime = regime;
      row.metrics = evaluate(predictions, instances);
      row.drop_mca = report.baseline[regime].mca - row.metrics.mca;
      row.drop_mpca = report.baseline[regime].mpca - row.metrics.mpca;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

EnergyParams default_sweep_params(const GeneratorConfig& config, Mode mode) {
  config.validate();
  const auto confusion = config.resolved_confusion();
  const int classes = config.event_classes;

  EnergyParams params = EnergyParams::zeros(config.space(), mode);
  params.lambda_node = 1.0;
  params.lambda_edge = 1.0;
  params.lambda_event = 1.0;

  for (int c = 0; c < classes; ++c) {
    for (int y = 0; y < config.node_labels; ++y) {
      params.w_node[c][y] = -confusion[c][y];
    }
    // induced edge-label distribution under event c, assuming independent
    // node labels from the confusion row
    for (int y1 = 0; y1 < config.node_labels; ++y1) {
      for (int y2 = 0; y2 < config.node_labels; ++y2) {
        const int e = induced_edge_label(y1, y2, config.edge_labels);
        params.w_edge[c][e] -= confusion[c][y1] * confusion[c][y2];
      }
    }
    params.w_event[c] = -3.0;
  }
  return params;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "q,regime,mca,mpca,drop_mca,drop_mpca\n";
  for (const SweepRow& row : report.rows) {
    out << format_double(row.q) << ',' << to_string(row.regime) << ','
        << format_double(row.metrics.mca) << ',' << format_double(row.metrics.mpca) << ','
        << format_double(row.drop_mca) << ',' << format_double(row.drop_mpca) << '\n';
  }
  return out.str();
}

void save_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << sweep_csv(report);
  if (!out) throw DataError("write failed: " + path);
}

std::string sweep_summary_json(const SweepReport& report) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["instances"] = report.instance_count;
  j["q_grid"] = report.q_grid;
  j["severity"] = report.config.severity;
  j["seed"] = report.config.seed;
  j["threads"] = report.config.threads;
  j["mode"] = std::string(to_string(report.config.mode));
  if (!report.config.confusion.empty()) j["confusion"] = report.config.confusion;
  nlohmann::json baseline;
  for (const auto& [regime, metrics] : report.baseline) {
    baseline[std::string(to_string(regime))] = {{"mca", metrics.mca}, {"mpca", metrics.mpca}};
  }
  j["baseline"] = std::move(baseline);
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : report.rows) {
    rows.push_back({{"q", row.q},
                    {"regime", std::string(to_string(row.regime))},
                    {"mca", row.metrics.mca},
                    {"mpca", row.metrics.mpca},
                    {"drop_mca", row.drop_mca},
                    {"drop_mpca", row.drop_mpca}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

void save_sweep_summary(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << sweep_summary_json(report);
  if (!out) throw DataError("write failed: " + path);
}

GeneratorConfig parse_generator_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("generator config: ") + e.what());
  }
  GeneratorConfig config;
  try {
    config.event_classes = j.value("event_classes", config.event_classes);
    config.node_labels = j.value("node_labels", config.node_labels);
    config.edge_labels = j.value("edge_labels", config.edge_labels);
    config.min_nodes = j.value("min_nodes", config.min_nodes);
    config.max_nodes = j.value("max_nodes", config.max_nodes);
    config.edge_density = j.value("edge_density", config.edge_density);
    config.signal_strength = j.value("signal_strength", config.signal_strength);
    config.seed = j.value("seed", config.seed);
    if (j.contains("epsilon")) {
      if (j.at("epsilon").is_null()) config.epsilon = std::nullopt;
      else config.epsilon = j.at("epsilon").get<double>();
    }
    if (j.contains("confusion")) {
      config.confusion = j.at("confusion").get<std::vector<std::vector<double>>>();
    }
    config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("generator config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("generator config: ") + e.what());
  }
  return config;
}

std::string generator_config_to_json(const GeneratorConfig& config) {
  nlohmann::json j;
  j["event_classes"] = config.event_classes;
  j["node_labels"] = config.node_labels;
  j["edge_labels"] = config.edge_labels;
  j["min_nodes"] = config.min_nodes;
  j["max_nodes"] = config.max_nodes;
  j["edge_density"] = config.edge_density;
  j["signal_strength"] = config.signal_strength;
  j["seed"] = config.seed;
  if (config.epsilon) j["epsilon"] = *config.epsilon;
  else j["epsilon"] = nullptr;
  j["confusion"] = config.resolved_confusion();
  return j.dump(2) + "\n";
}

GeneratorConfig load_generator_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_generator_config_json(buf.str());
}

void save_generator_config(const std::string& path, const GeneratorConfig& config) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << generator_config_to_json(config);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cep
