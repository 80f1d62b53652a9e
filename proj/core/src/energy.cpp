#include "cep/energy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cep/numeric.hpp"
#include "json.hpp"

namespace cep {

EnergyParams EnergyParams::zeros(const LabelSpace& space, Mode mode) {
  space.validate();
  EnergyParams params;
  params.mode = mode;
  params.w_node.assign(space.event_classes, std::vector<double>(space.node_labels, 0.0));
  params.w_edge.assign(space.event_classes, std::vector<double>(space.edge_labels, 0.0));
  params.w_event.assign(space.event_classes, 0.0);
  return params;
}

void EnergyParams::validate() const {
  const int classes = event_classes();
  if (classes <= 0) throw std::invalid_argument("params: no event classes");
  if (static_cast<int>(w_edge.size()) != classes || static_cast<int>(w_event.size()) != classes) {
    throw std::invalid_argument("params: weight blocks disagree on the number of event classes");
  }
  for (const auto& row : w_node) {
    if (static_cast<int>(row.size()) != node_labels()) {
      throw std::invalid_argument("params: w_node is not rectangular");
    }
  }
  for (const auto& row : w_edge) {
    if (static_cast<int>(row.size()) != edge_labels()) {
      throw std::invalid_argument("params: w_edge is not rectangular");
    }
  }
  if (node_labels() <= 0 || edge_labels() <= 0) {
    throw std::invalid_argument("params: empty label set");
  }
  if (lambda_node < 0.0 || lambda_edge < 0.0 || lambda_event < 0.0) {
    throw std::invalid_argument("params: lambda multipliers must be nonnegative");
  }
}

InstancePValues compute_p_values(const CalibrationStore& store, const GraphInstance& instance,
                                 std::string_view exclude_source) {
  InstancePValues out;
  out.node.reserve(instance.node_potentials.size());
  for (const auto& row : instance.node_potentials) {
    out.node.push_back(store.p_value_table(Level::node, row, exclude_source, &out.empty_categories));
  }
  out.edge.reserve(instance.edge_potentials.size());
  for (const auto& row : instance.edge_potentials) {
    out.edge.push_back(store.p_value_table(Level::edge, row, exclude_source, &out.empty_categories));
  }
  if (instance.event_potential) {
    const auto& row = *instance.event_potential;
    std::vector<double> event(row.size());
    for (int c = 0; c < static_cast<int>(row.size()); ++c) {
      bool empty = false;
      event[c] = store.p_value(Level::event, c, c, nonconformity(row, c), exclude_source, &empty);
      if (empty) ++out.empty_categories;
    }
    out.event = std::move(event);
  }
  return out;
}

namespace {

void check_compatible(const GraphInstance& instance, const EnergyParams& params,
                      const Assignment& assignment) {
  params.validate();
  check_assignment(instance, assignment);
  if (assignment.event_class >= params.event_classes()) {
    throw std::invalid_argument("assignment event class out of range for params");
  }
  if (instance.node_count() > 0 &&
      static_cast<int>(instance.node_potentials[0].size()) != params.node_labels()) {
    throw std::invalid_argument("instance node rows do not match params label count");
  }
  if (instance.edge_count() > 0 &&
      static_cast<int>(instance.edge_potentials[0].size()) != params.edge_labels()) {
    throw std::invalid_argument("instance edge rows do not match params label count");
  }
  if (params.mode == Mode::cern2 && !instance.event_potential) {
    throw std::logic_error("cern2 energy requires an event potential on instance " + instance.id);
  }
}

double safe_log_p(double p) {
  if (p <= 0.0) {
    throw std::invalid_argument("p-value " + format_double(p) + " is not positive");
  }
  return std::log(p);
}

}  // namespace

double raw_energy(const GraphInstance& instance, const EnergyParams& params,
                  const Assignment& assignment) {
  check_compatible(instance, params, assignment);
  const int c = assignment.event_class;

  std::vector<double> terms;
  terms.reserve(instance.node_count());
  for (int i = 0; i < instance.node_count(); ++i) {
    const int y = assignment.node_labels[i];
    terms.push_back(params.w_node[c][y] * instance.node_potentials[i][y]);
  }
  double energy = pairwise_sum(terms);

  terms.clear();
  for (int k = 0; k < instance.edge_count(); ++k) {
    const int y = assignment.edge_labels[k];
    terms.push_back(params.w_edge[c][y] * instance.edge_potentials[k][y]);
  }
  energy += pairwise_sum(terms);

  if (params.mode == Mode::cern2) {
    energy += params.w_event[c] * (*instance.event_potential)[c];
  }
  return energy;
}

double regularized_energy(const GraphInstance& instance, const EnergyParams& params,
                          const Assignment& assignment, const InstancePValues& p_values) {
  double energy = raw_energy(instance, params, assignment);
  const int c = assignment.event_class;

  if (static_cast<int>(p_values.node.size()) != instance.node_count() ||
      static_cast<int>(p_values.edge.size()) != instance.edge_count()) {
    throw std::invalid_argument("p-value tables do not match instance " + instance.id);
  }

  std::vector<double> logs;
  logs.reserve(instance.node_count());
  for (int i = 0; i < instance.node_count(); ++i) {
    logs.push_back(safe_log_p(p_values.node[i][c][assignment.node_labels[i]]));
  }
  energy -= params.lambda_node * pairwise_sum(logs);

  logs.clear();
  for (int k = 0; k < instance.edge_count(); ++k) {
    logs.push_back(safe_log_p(p_values.edge[k][c][assignment.edge_labels[k]]));
  }
  energy -= params.lambda_edge * pairwise_sum(logs);

  if (params.mode == Mode::cern2) {
    if (!p_values.event) {
      throw std::invalid_argument("cern2 regularized energy needs event p-values on instance " +
                                  instance.id);
    }
    energy -= params.lambda_event * safe_log_p((*p_values.event)[c]);
  }
  return energy;
}

AggregateVectors aggregate_vectors(const GraphInstance& instance, const Assignment& assignment,
                                   const InstancePValues& p_values) {
  check_assignment(instance, assignment);
  const int c = assignment.event_class;
  const int node_labels =
      instance.node_count() > 0 ? static_cast<int>(instance.node_potentials[0].size())
                                : (p_values.node.empty() ? 0 : static_cast<int>(p_values.node[0][0].size()));
  const int edge_labels =
      instance.edge_count() > 0 ? static_cast<int>(instance.edge_potentials[0].size()) : 0;

  AggregateVectors agg;
  agg.psi_node.assign(node_labels, 0.0);
  agg.log_p_node.assign(node_labels, 0.0);
  agg.psi_edge.assign(edge_labels, 0.0);
  agg.log_p_edge.assign(edge_labels, 0.0);

  // per-label term lists so the sums are pairwise like the direct evaluation
  std::vector<std::vector<double>> psi_terms(node_labels), log_terms(node_labels);
  for (int i = 0; i < instance.node_count(); ++i) {
    const int y = assignment.node_labels[i];
    psi_terms[y].push_back(instance.node_potentials[i][y]);
    log_terms[y].push_back(safe_log_p(p_values.node[i][c][y]));
  }
  for (int y = 0; y < node_labels; ++y) {
    agg.psi_node[y] = pairwise_sum(psi_terms[y]);
    agg.log_p_node[y] = pairwise_sum(log_terms[y]);
  }

  psi_terms.assign(edge_labels, {});
  log_terms.assign(edge_labels, {});
  for (int k = 0; k < instance.edge_count(); ++k) {
    const int y = assignment.edge_labels[k];
    psi_terms[y].push_back(instance.edge_potentials[k][y]);
    log_terms[y].push_back(safe_log_p(p_values.edge[k][c][y]));
  }
  for (int y = 0; y < edge_labels; ++y) {
    agg.psi_edge[y] = pairwise_sum(psi_terms[y]);
    agg.log_p_edge[y] = pairwise_sum(log_terms[y]);
  }
  return agg;
}

namespace {

using nlohmann::json;

}  // namespace

EnergyParams parse_params_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("params: ") + e.what());
  }
  EnergyParams params;
  try {
    params.mode = parse_mode(j.at("mode").get<std::string>());
    const int classes = j.at("event_classes").get<int>();
    const int node_labels = j.at("node_labels").get<int>();
    const int edge_labels = j.at("edge_labels").get<int>();
    params.w_node = j.at("w_node").get<std::vector<std::vector<double>>>();
    params.w_edge = j.at("w_edge").get<std::vector<std::vector<double>>>();
    params.w_event = j.at("w_event").get<std::vector<double>>();
    params.lambda_node = j.at("lambda_node").get<double>();
    params.lambda_edge = j.at("lambda_edge").get<double>();
    params.lambda_event = j.at("lambda_event").get<double>();

    if (params.event_classes() != classes || params.node_labels() != node_labels ||
        params.edge_labels() != edge_labels) {
      throw DataError("params: matrix shapes disagree with the declared dimensions");
    }
    params.validate();
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(std::string("params: ") + e.what());
  }
  return params;
}

std::string params_to_json(const EnergyParams& params) {
  json j;
  j["mode"] = std::string(to_string(params.mode));
  j["event_classes"] = params.event_classes();
  j["node_labels"] = params.node_labels();
  j["edge_labels"] = params.edge_labels();
  j["w_node"] = params.w_node;
  j["w_edge"] = params.w_edge;
  j["w_event"] = params.w_event;
  j["lambda_node"] = params.lambda_node;
  j["lambda_edge"] = params.lambda_edge;
  j["lambda_event"] = params.lambda_event;
  return j.dump(2) + "\n";
}

EnergyParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params_json(buf.str());
}

void save_params(const std::string& path, const EnergyParams& params) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << params_to_json(params);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cep
