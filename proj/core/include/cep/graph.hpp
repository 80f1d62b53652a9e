#ifndef CEP_GRAPH_HPP
#define CEP_GRAPH_HPP

#include <optional>
#include <string>
#include <vector>

#include "cep/conformal.hpp"
#include "cep/types.hpp"

namespace cep {

struct Edge {
  int i = 0;
  int j = 0;
  bool operator==(const Edge&) const = default;
};

/// Ground-truth labels for a scene. The event class is always present;
/// node/edge labels may be absent (they are treated as latent downstream).
struct Truth {
  int event_class = 0;
  std::optional<std::vector<int>> node_labels;
  std::optional<std::vector<int>> edge_labels;
  bool operator==(const Truth&) const = default;
};

/// One scene: class-probability rows for its nodes and edges, an optional
/// event-level row, and optional ground truth. Rows stand in for upstream
/// softmax outputs and are supplied as data.
struct GraphInstance {
  std::string id;
  std::vector<std::vector<double>> node_potentials;
  std::vector<Edge> edges;  // edges[k] pairs with edge_potentials[k]
  std::vector<std::vector<double>> edge_potentials;
  std::optional<std::vector<double>> event_potential;
  std::optional<Truth> truth;

  int node_count() const { return static_cast<int>(node_potentials.size()); }
  int edge_count() const { return static_cast<int>(edge_potentials.size()); }

  /// Structural checks: normalized rows, consistent row widths, well-formed
  /// edges, truth labels in range for this instance's rows.
  void validate() const;
  /// validate() plus row widths and the truth event class checked against a
  /// label space.
  void validate(const LabelSpace& space) const;

  bool operator==(const GraphInstance&) const = default;
};

/// A full configuration (c, Y): one event class, one label per node and edge.
struct Assignment {
  int event_class = 0;
  std::vector<int> node_labels;
  std::vector<int> edge_labels;
  bool operator==(const Assignment&) const = default;
};

void check_assignment(const GraphInstance& instance, const Assignment& assignment);

std::vector<GraphInstance> load_instances(const std::string& path);
void save_instances(const std::string& path, const std::vector<GraphInstance>& instances);
std::vector<GraphInstance> parse_instances_json(const std::string& text);
std::string instances_to_json(const std::vector<GraphInstance>& instances);

}  // namespace cep

#endif
