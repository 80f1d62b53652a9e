#include "cep/inference.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cep/numeric.hpp"
#include "json.hpp"

namespace cep {

namespace {

// -sum(log p) over the hypotheses chosen by `assignment`; event level
// included in cern2 mode only.
double confidence_penalty(const GraphInstance& instance, const InstancePValues& p_values,
                          const Assignment& assignment, Mode mode) {
  const int c = assignment.event_class;
  std::vector<double> logs;
  logs.reserve(instance.node_count() + instance.edge_count());
  for (int i = 0; i < instance.node_count(); ++i) {
    logs.push_back(std::log(p_values.node[i][c][assignment.node_labels[i]]));
  }
  for (int k = 0; k < instance.edge_count(); ++k) {
    logs.push_back(std::log(p_values.edge[k][c][assignment.edge_labels[k]]));
  }
  double penalty = -pairwise_sum(logs);
  if (mode == Mode::cern2) {
    penalty -= std::log((*p_values.event)[c]);
  }
  return penalty;
}

Prediction finish(const GraphInstance& instance, const EnergyParams& params,
                  const InstancePValues& p_values, Assignment assignment, Regime regime) {
  Prediction pred;
  pred.instance_id = instance.id;
  pred.regime = regime;
  pred.raw_energy = raw_energy(instance, params, assignment);
  pred.regularized_energy = regularized_energy(instance, params, assignment, p_values);
  pred.confidence_statistic = confidence_penalty(instance, p_values, assignment, params.mode);
  pred.assignment = std::move(assignment);
  return pred;
}

void check_tables(const GraphInstance& instance, const EnergyParams& params,
                  const InstancePValues& p_values) {
  if (static_cast<int>(p_values.node.size()) != instance.node_count() ||
      static_cast<int>(p_values.edge.size()) != instance.edge_count()) {
    throw std::invalid_argument("p-value tables do not match instance " + instance.id);
  }
  if (params.mode == Mode::cern2 && instance.event_potential && !p_values.event) {
    throw std::invalid_argument("missing event p-values for instance " + instance.id);
  }
}

// Exact per-class decomposition. With lambda_scale = 0 this minimizes the
// raw energy; with lambda_scale = 1, the regularized energy.
Assignment minimize_decomposed(const GraphInstance& instance, const EnergyParams& params,
                               const InstancePValues& p_values, double lambda_scale) {
  const int classes = params.event_classes();
  const double lambda_node = lambda_scale * params.lambda_node;
  const double lambda_edge = lambda_scale * params.lambda_edge;
  const double lambda_event = lambda_scale * params.lambda_event;

  Assignment best;
  double best_total = 0.0;
  bool have_best = false;

  std::vector<int> node_pick(instance.node_count());
  std::vector<int> edge_pick(instance.edge_count());
  std::vector<double> terms;

  for (int c = 0; c < classes; ++c) {
    terms.clear();
    for (int i = 0; i < instance.node_count(); ++i) {
      const auto& psi = instance.node_potentials[i];
      const auto& pv = p_values.node[i][c];
      int pick = 0;
      double pick_value = 0.0;
      for (int y = 0; y < static_cast<int>(psi.size()); ++y) {
        const double value = params.w_node[c][y] * psi[y] - lambda_node * std::log(pv[y]);
        if (y == 0 || value < pick_value) {
          pick = y;
          pick_value = value;
        }
      }
      node_pick[i] = pick;
      terms.push_back(pick_value);
    }
    double total = pairwise_sum(terms);

    terms.clear();
    for (int k = 0; k < instance.edge_count(); ++k) {
      const auto& psi = instance.edge_potentials[k];
      const auto& pv = p_values.edge[k][c];
      int pick = 0;
      double pick_value = 0.0;
      for (int y = 0; y < static_cast<int>(psi.size()); ++y) {
        const double value = params.w_edge[c][y] * psi[y] - lambda_edge * std::log(pv[y]);
        if (y == 0 || value < pick_value) {
          pick = y;
          pick_value = value;
        }
      }
      edge_pick[k] = pick;
      terms.push_back(pick_value);
    }
    total += pairwise_sum(terms);

    if (params.mode == Mode::cern2) {
      total += params.w_event[c] * (*instance.event_potential)[c];
      total -= lambda_event * std::log((*p_values.event)[c]);
    }

    if (!have_best || total < best_total) {
      have_best = true;
      best_total = total;
      best.event_class = c;
      best.node_labels = node_pick;
      best.edge_labels = edge_pick;
    }
  }
  return best;
}

}  // namespace

Assignment softmax_labels(const GraphInstance& instance) {
  Assignment labels;
  labels.node_labels.reserve(instance.node_count());
  for (const auto& row : instance.node_potentials) labels.node_labels.push_back(argmax(row));
  labels.edge_labels.reserve(instance.edge_count());
  for (const auto& row : instance.edge_potentials) labels.edge_labels.push_back(argmax(row));
  return labels;
}

Prediction infer(const GraphInstance& instance, const EnergyParams& params,
                 const InstancePValues& p_values, Regime regime) {
  params.validate();
  check_tables(instance, params, p_values);
  if (params.mode == Mode::cern2 && !instance.event_potential) {
    throw std::logic_error("cern2 inference requires an event potential on instance " + instance.id);
  }

  Assignment assignment;
  switch (regime) {
    case Regime::softmax_only: {
      if (params.mode != Mode::cern2 || !instance.event_potential) {
        throw std::logic_error("softmax regime needs an event potential (cern2 mode) on instance " +
                               instance.id);
      }
      assignment = softmax_labels(instance);
      assignment.event_class = argmax(*instance.event_potential);
      break;
    }
    case Regime::energy_only:
      assignment = minimize_decomposed(instance, params, p_values, 0.0);
      break;
    case Regime::confidence_energy:
      assignment = minimize_decomposed(instance, params, p_values, 1.0);
      break;
  }
  return finish(instance, params, p_values, std::move(assignment), regime);
}

Prediction infer(const GraphInstance& instance, const EnergyParams& params,
                 const CalibrationStore& store, Regime regime, std::string_view exclude_source) {
  return infer(instance, params, compute_p_values(store, instance, exclude_source), regime);
}

Prediction most_violated(const GraphInstance& instance, const EnergyParams& params,
                         const InstancePValues& p_values, int truth_event) {
  params.validate();
  check_tables(instance, params, p_values);
  const int classes = params.event_classes();
  if (classes < 2) {
    throw std::invalid_argument("most_violated needs at least two event classes");
  }
  if (truth_event < 0 || truth_event >= classes) {
    throw std::invalid_argument("truth event class " + std::to_string(truth_event) +
                                " out of range");
  }

  Assignment candidate = softmax_labels(instance);
  int best_class = -1;
  double best_energy = 0.0;
  for (int c = 0; c < classes; ++c) {
    if (c == truth_event) continue;
    candidate.event_class = c;
    const double energy = regularized_energy(instance, params, candidate, p_values);
    if (best_class < 0 || energy < best_energy) {
      best_class = c;
      best_energy = energy;
    }
  }
  candidate.event_class = best_class;
  return finish(instance, params, p_values, std::move(candidate), Regime::confidence_energy);
}

Prediction most_violated(const GraphInstance& instance, const EnergyParams& params,
                         const CalibrationStore& store, int truth_event,
                         std::string_view exclude_source) {
  return most_violated(instance, params, compute_p_values(store, instance, exclude_source),
                       truth_event);
}

namespace {

using nlohmann::json;

}  // namespace

std::string predictions_to_json(const std::vector<Prediction>& predictions) {
  // The regime is a property of the run, not the artifact; it is echoed in
  // the run manifest so that files from different regimes stay comparable.
  json arr = json::array();
  for (const Prediction& p : predictions) {
    json j;
    j["instance_id"] = p.instance_id;
    j["event_class"] = p.assignment.event_class;
    j["node_labels"] = p.assignment.node_labels;
    j["edge_labels"] = p.assignment.edge_labels;
    j["raw_energy"] = p.raw_energy;
    j["regularized_energy"] = p.regularized_energy;
    j["confidence_statistic"] = p.confidence_statistic;
    arr.push_back(std::move(j));
  }
  json doc;
  doc["predictions"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<Prediction> parse_predictions_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("predictions: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("predictions") || !doc["predictions"].is_array()) {
    throw DataError("predictions: expected an object with a 'predictions' array");
  }
  std::vector<Prediction> out;
  try {
    for (const json& j : doc["predictions"]) {
      Prediction p;
      p.instance_id = j.at("instance_id").get<std::string>();
      p.assignment.event_class = j.at("event_class").get<int>();
      p.assignment.node_labels = j.at("node_labels").get<std::vector<int>>();
      p.assignment.edge_labels = j.at("edge_labels").get<std::vector<int>>();
      p.raw_energy = j.at("raw_energy").get<double>();
      p.regularized_energy = j.at("regularized_energy").get<double>();
      p.confidence_statistic = j.at("confidence_statistic").get<double>();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("predictions: ") + e.what());
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions_json(buf.str());
}

void save_predictions(const std::string& path, const std::vector<Prediction>& predictions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << predictions_to_json(predictions);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cep
