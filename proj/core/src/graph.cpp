#include "cep/graph.hpp"

#include <fstream>
#include <sstream>

#include "cep/numeric.hpp"
#include "json.hpp"

namespace cep {

namespace {

void check_rows(const std::vector<std::vector<double>>& rows, const char* what,
                const std::string& id) {
  std::size_t width = rows.empty() ? 0 : rows[0].size();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != width) {
      throw std::invalid_argument("instance " + id + ": " + what + " row " + std::to_string(k) +
                                  " has width " + std::to_string(rows[k].size()) + ", expected " +
                                  std::to_string(width));
    }
    try {
      check_probability_row(rows[k]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("instance " + id + ": " + what + " row " + std::to_string(k) +
                                  ": " + e.what());
    }
  }
}

void check_labels(const std::vector<int>& labels, std::size_t expected_count, int label_count,
                  const char* what, const std::string& id) {
  if (labels.size() != expected_count) {
    throw std::invalid_argument("instance " + id + ": truth has " + std::to_string(labels.size()) +
                                " " + what + " labels, expected " + std::to_string(expected_count));
  }
  for (int y : labels) {
    if (y < 0 || y >= label_count) {
      throw std::invalid_argument("instance " + id + ": truth " + what + " label " +
                                  std::to_string(y) + " out of range [0, " +
                                  std::to_string(label_count) + ")");
    }
  }
}

}  // namespace

void GraphInstance::validate() const {
  check_rows(node_potentials, "node", id);
  check_rows(edge_potentials, "edge", id);
  if (event_potential) {
    try {
      check_probability_row(*event_potential);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("instance " + id + ": event row: " + e.what());
    }
  }
  if (edges.size() != edge_potentials.size()) {
    throw std::invalid_argument("instance " + id + ": " + std::to_string(edges.size()) +
                                " edges but " + std::to_string(edge_potentials.size()) +
                                " edge rows");
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.i == e.j || e.i < 0 || e.j < 0 || e.i >= node_count() || e.j >= node_count()) {
      throw std::invalid_argument("instance " + id + ": edge " + std::to_string(k) + " (" +
                                  std::to_string(e.i) + ", " + std::to_string(e.j) +
                                  ") is not a pair of distinct node indices");
    }
  }
  if (truth) {
    if (truth->node_labels && !node_potentials.empty()) {
      check_labels(*truth->node_labels, node_potentials.size(),
                   static_cast<int>(node_potentials[0].size()), "node", id);
    }
    if (truth->edge_labels && !edge_potentials.empty()) {
      check_labels(*truth->edge_labels, edge_potentials.size(),
                   static_cast<int>(edge_potentials[0].size()), "edge", id);
    }
    if (event_potential &&
        (truth->event_class < 0 || truth->event_class >= static_cast<int>(event_potential->size()))) {
      throw std::invalid_argument("instance " + id + ": truth event class " +
                                  std::to_string(truth->event_class) + " out of range");
    }
    if (truth->event_class < 0) {
      throw std::invalid_argument("instance " + id + ": negative truth event class");
    }
  }
}

void GraphInstance::validate(const LabelSpace& space) const {
  validate();
  if (!node_potentials.empty() &&
      static_cast<int>(node_potentials[0].size()) != space.node_labels) {
    throw std::invalid_argument("instance " + id + ": node rows have width " +
                                std::to_string(node_potentials[0].size()) + ", expected " +
                                std::to_string(space.node_labels));
  }
  if (!edge_potentials.empty() &&
      static_cast<int>(edge_potentials[0].size()) != space.edge_labels) {
    throw std::invalid_argument("instance " + id + ": edge rows have width " +
                                std::to_string(edge_potentials[0].size()) + ", expected " +
                                std::to_string(space.edge_labels));
  }
  if (event_potential && static_cast<int>(event_potential->size()) != space.event_classes) {
    throw std::invalid_argument("instance " + id + ": event row has width " +
                                std::to_string(event_potential->size()) + ", expected " +
                                std::to_string(space.event_classes));
  }
  if (truth && truth->event_class >= space.event_classes) {
    throw std::invalid_argument("instance " + id + ": truth event class " +
                                std::to_string(truth->event_class) + " out of range [0, " +
                                std::to_string(space.event_classes) + ")");
  }
}

void check_assignment(const GraphInstance& instance, const Assignment& assignment) {
  if (static_cast<int>(assignment.node_labels.size()) != instance.node_count() ||
      static_cast<int>(assignment.edge_labels.size()) != instance.edge_count()) {
    throw std::invalid_argument("assignment shape does not match instance " + instance.id);
  }
  for (int i = 0; i < instance.node_count(); ++i) {
    const int y = assignment.node_labels[i];
    if (y < 0 || y >= static_cast<int>(instance.node_potentials[i].size())) {
      throw std::invalid_argument("assignment node label out of range on instance " + instance.id);
    }
  }
  for (int k = 0; k < instance.edge_count(); ++k) {
    const int y = assignment.edge_labels[k];
    if (y < 0 || y >= static_cast<int>(instance.edge_potentials[k].size())) {
      throw std::invalid_argument("assignment edge label out of range on instance " + instance.id);
    }
  }
  if (assignment.event_class < 0) {
    throw std::invalid_argument("assignment event class out of range on instance " + instance.id);
  }
  if (instance.event_potential &&
      assignment.event_class >= static_cast<int>(instance.event_potential->size())) {
    throw std::invalid_argument("assignment event class out of range on instance " + instance.id);
  }
}

namespace {

using nlohmann::json;

json instance_to_json(const GraphInstance& g) {
  json j;
  j["id"] = g.id;
  j["node_potentials"] = g.node_potentials;
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.i, e.j});
  j["edges"] = std::move(edges);
  j["edge_potentials"] = g.edge_potentials;
  if (g.event_potential) j["event_potential"] = *g.event_potential;
  if (g.truth) {
    json t;
    t["event_class"] = g.truth->event_class;
    if (g.truth->node_labels) t["node_labels"] = *g.truth->node_labels;
    if (g.truth->edge_labels) t["edge_labels"] = *g.truth->edge_labels;
    j["truth"] = std::move(t);
  }
  return j;
}

GraphInstance instance_from_json(const json& j) {
  GraphInstance g;
  g.id = j.at("id").get<std::string>();
  g.node_potentials = j.at("node_potentials").get<std::vector<std::vector<double>>>();
  for (const json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw DataError("instance " + g.id + ": edge entries must be [i, j] pairs");
    }
    g.edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  g.edge_potentials = j.at("edge_potentials").get<std::vector<std::vector<double>>>();
  if (j.contains("event_potential")) {
    g.event_potential = j.at("event_potential").get<std::vector<double>>();
  }
  if (j.contains("truth")) {
    const json& t = j.at("truth");
    Truth truth;
    truth.event_class = t.at("event_class").get<int>();
    if (t.contains("node_labels")) truth.node_labels = t.at("node_labels").get<std::vector<int>>();
    if (t.contains("edge_labels")) truth.edge_labels = t.at("edge_labels").get<std::vector<int>>();
    g.truth = std::move(truth);
  }
  return g;
}

}  // namespace

std::vector<GraphInstance> parse_instances_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("instances: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("instances") || !doc["instances"].is_array()) {
    throw DataError("instances: expected an object with an 'instances' array");
  }
  std::vector<GraphInstance> out;
  out.reserve(doc["instances"].size());
  try {
    for (const json& j : doc["instances"]) out.push_back(instance_from_json(j));
  } catch (const json::exception& e) {
    throw DataError(std::string("instances: ") + e.what());
  }
  for (const GraphInstance& g : out) {
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  return out;
}

std::string instances_to_json(const std::vector<GraphInstance>& instances) {
  json doc;
  json arr = json::array();
  for (const GraphInstance& g : instances) arr.push_back(instance_to_json(g));
  doc["instances"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<GraphInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instances_json(buf.str());
}

void save_instances(const std::string& path, const std::vector<GraphInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << instances_to_json(instances);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cep
