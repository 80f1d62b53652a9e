#ifndef CEP_CONFORMAL_HPP
#define CEP_CONFORMAL_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cep/types.hpp"

namespace cep {

/// Label-set sizes shared by a calibration store and the instances it scores.
struct LabelSpace {
  int node_labels = 0;   // |Y^V|
  int edge_labels = 0;   // |Y^E|
  int event_classes = 0; // C

  int label_count(Level level) const;
  void validate() const;
  bool operator==(const LabelSpace&) const = default;
};

/// One calibration example: the nonconformity of a ground-truth label drawn
/// from a training scene, filed under its event class.
struct CalibrationRecord {
  Level level = Level::node;
  int event_class = 0;
  int label = 0;
  double nonconformity = 0.0;
  std::string source_id;

  bool operator==(const CalibrationRecord&) const = default;
};

/// Nonconformity of predicting `label` from a softmax row: 1 - row[label].
/// The row must be normalized within 1e-6.
double nonconformity(std::span<const double> softmax_row, int label);

/// Fisher's combined statistic -2 * sum(log p). Zero for an empty list; any
/// p <= 0 is an invalid argument (a missing floor clamp upstream).
double fisher_statistic(std::span<const double> p_values);

/// Calibration records grouped by (level, event_class, label). Event-level
/// categories are keyed by the predicted class alone (conditioning class and
/// label coincide there), so event records must carry event_class == label.
///
/// Build single-threaded with add(), then seal(). A sealed store is
/// immutable and all queries are const and safe for concurrent readers.
class CalibrationStore {
 public:
  explicit CalibrationStore(LabelSpace space, std::optional<double> epsilon = std::nullopt);

  void add(const CalibrationRecord& record);
  void seal();
  bool sealed() const { return sealed_; }

  const LabelSpace& space() const { return space_; }
  std::optional<double> epsilon_override() const { return epsilon_; }

  /// p-value floor for a category with `group_size` usable records. Defaults
  /// to 1/(group_size+1), the conformal smoothing convention, and to 1e-4
  /// for empty categories; a configured epsilon overrides both.
  double floor_for(std::size_t group_size) const;

  std::size_t size() const { return records_.size(); }
  const std::vector<CalibrationRecord>& records() const { return records_; }
  std::size_t group_size(Level level, int event_class, int label) const;

  /// Fraction of records in the (level, event_class, label) category -- after
  /// dropping records whose source_id equals exclude_source -- whose stored
  /// nonconformity is >= the query value (ties count). Clamped below by
  /// floor_for(). An empty category yields the floor and, when
  /// `empty_category` is non-null, sets the flag instead of failing.
  double p_value(Level level, int event_class, int label, double nonconformity,
                 std::string_view exclude_source = {},
                 bool* empty_category = nullptr) const;

  /// (event_class, label) table of p-values for one softmax row; entry (c, y)
  /// equals p_value(level, c, y, nonconformity(row, y)). Empty categories are
  /// tallied into `empty_categories` (when non-null) rather than aborting.
  std::vector<std::vector<double>> p_value_table(Level level,
                                                 std::span<const double> softmax_row,
                                                 std::string_view exclude_source = {},
                                                 std::size_t* empty_categories = nullptr) const;

  /// Line-delimited text: a header with the label-set sizes and epsilon, then
  /// one tab-separated record per line.
  void save(std::ostream& out) const;
  static CalibrationStore load(std::istream& in);

  bool operator==(const CalibrationStore& other) const;

 private:
  struct Group {
    std::vector<double> sorted_nonconformity;
    std::map<std::string, std::vector<double>, std::less<>> by_source;
  };

  const Group& group_at(Level level, int event_class, int label) const;
  Group& group_at(Level level, int event_class, int label);
  void check_category(Level level, int event_class, int label) const;

  LabelSpace space_;
  std::optional<double> epsilon_;
  bool sealed_ = false;
  std::vector<CalibrationRecord> records_;
  std::vector<Group> node_groups_;   // event_class * |Y^V| + label
  std::vector<Group> edge_groups_;   // event_class * |Y^E| + label
  std::vector<Group> event_groups_;  // class
};

void save_store(const std::string& path, const CalibrationStore& store);
CalibrationStore load_store(const std::string& path);

}  // namespace cep

#endif
