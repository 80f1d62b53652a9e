#include "cep/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cep/numeric.hpp"

namespace cep {

int LabelSpace::label_count(Level level) const {
  switch (level) {
    case Level::node: return node_labels;
    case Level::edge: return edge_labels;
    case Level::event: return event_classes;
  }
  throw std::invalid_argument("unknown level");
}

void LabelSpace::validate() const {
  if (node_labels <= 0 || edge_labels <= 0 || event_classes <= 0) {
    throw std::invalid_argument("label space sizes must be positive");
  }
}

double nonconformity(std::span<const double> softmax_row, int label) {
  check_probability_row(softmax_row);
  if (label < 0 || label >= static_cast<int>(softmax_row.size())) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range for row of size " +
                                std::to_string(softmax_row.size()));
  }
  return 1.0 - softmax_row[label];
}

double fisher_statistic(std::span<const double> p_values) {
  double sum = 0.0;
  for (double p : p_values) {
    if (p <= 0.0) {
      throw std::invalid_argument("fisher_statistic requires p > 0, got " + format_double(p));
    }
    sum += std::log(p);
  }
  return -2.0 * sum;
}

CalibrationStore::CalibrationStore(LabelSpace space, std::optional<double> epsilon)
    : space_(space), epsilon_(epsilon) {
  space_.validate();
  if (epsilon_ && (*epsilon_ < 0.0 || *epsilon_ > 1.0)) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  node_groups_.resize(static_cast<std::size_t>(space_.event_classes) * space_.node_labels);
  edge_groups_.resize(static_cast<std::size_t>(space_.event_classes) * space_.edge_labels);
  event_groups_.resize(space_.event_classes);
}

void CalibrationStore::check_category(Level level, int event_class, int label) const {
  if (event_class < 0 || event_class >= space_.event_classes) {
    throw std::invalid_argument("event class " + std::to_string(event_class) + " out of range [0, " +
                                std::to_string(space_.event_classes) + ")");
  }
  const int labels = space_.label_count(level);
  if (label < 0 || label >= labels) {
    throw std::invalid_argument(std::string(to_string(level)) + " label " + std::to_string(label) +
                                " out of range [0, " + std::to_string(labels) + ")");
  }
}

CalibrationStore::Group& CalibrationStore::group_at(Level level, int event_class, int label) {
  return const_cast<Group&>(static_cast<const CalibrationStore*>(this)->group_at(level, event_class, label));
}

const CalibrationStore::Group& CalibrationStore::group_at(Level level, int event_class, int label) const {
  check_category(level, event_class, label);
  switch (level) {
    case Level::node:
      return node_groups_[static_cast<std::size_t>(event_class) * space_.node_labels + label];
    case Level::edge:
      return edge_groups_[static_cast<std::size_t>(event_class) * space_.edge_labels + label];
    case Level::event:
      // keyed by the predicted class; callers pass event_class == label
      return event_groups_[label];
  }
  throw std::invalid_argument("unknown level");
}

void CalibrationStore::add(const CalibrationRecord& record) {
  if (sealed_) throw std::logic_error("cannot add to a sealed calibration store");
  check_category(record.level, record.event_class, record.label);
  if (record.level == Level::event && record.event_class != record.label) {
    throw std::invalid_argument("event-level record must have event_class == label");
  }
  if (!(record.nonconformity >= 0.0 && record.nonconformity <= 1.0)) {
    throw std::invalid_argument("nonconformity " + format_double(record.nonconformity) +
                                " outside [0, 1]");
  }
  records_.push_back(record);
  Group& group = group_at(record.level, record.event_class, record.label);
  group.sorted_nonconformity.push_back(record.nonconformity);
  group.by_source[record.source_id].push_back(record.nonconformity);
}

void CalibrationStore::seal() {
  if (sealed_) return;
  for (auto* groups : {&node_groups_, &edge_groups_, &event_groups_}) {
    for (Group& g : *groups) {
      std::sort(g.sorted_nonconformity.begin(), g.sorted_nonconformity.end());
    }
  }
  sealed_ = true;
}

double CalibrationStore::floor_for(std::size_t group_size) const {
  if (epsilon_) return *epsilon_;
  if (group_size == 0) return 1e-4;
  return 1.0 / static_cast<double>(group_size + 1);
}

std::size_t CalibrationStore::group_size(Level level, int event_class, int label) const {
  return group_at(level, event_class, label).sorted_nonconformity.size();
}

double CalibrationStore::p_value(Level level, int event_class, int label, double nonconformity,
                                 std::string_view exclude_source, bool* empty_category) const {
  if (!sealed_) throw std::logic_error("calibration store must be sealed before queries");
  if (!(nonconformity >= 0.0 && nonconformity <= 1.0)) {
    throw std::invalid_argument("query nonconformity " + format_double(nonconformity) +
                                " outside [0, 1]");
  }
  const Group& group = group_at(level, event_class, label);
  const auto& sorted = group.sorted_nonconformity;

  // records >= query; exact comparisons, ties count
  std::size_t count = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), nonconformity);
  std::size_t total = sorted.size();

  if (!exclude_source.empty()) {
    auto it = group.by_source.find(exclude_source);
    if (it != group.by_source.end()) {
      total -= it->second.size();
      for (double v : it->second) {
        if (v >= nonconformity) --count;
      }
    }
  }

  if (total == 0) {
    if (empty_category) *empty_category = true;
    return floor_for(0);
  }
  const double ratio = static_cast<double>(count) / static_cast<double>(total);
  const double floor = floor_for(total);
  return ratio < floor ? floor : ratio;
}

std::vector<std::vector<double>> CalibrationStore::p_value_table(Level level,
                                                                 std::span<const double> softmax_row,
                                                                 std::string_view exclude_source,
                                                                 std::size_t* empty_categories) const {
  const int labels = space_.label_count(level);
  if (static_cast<int>(softmax_row.size()) != labels) {
    throw std::invalid_argument("softmax row has " + std::to_string(softmax_row.size()) +
                                " entries, expected " + std::to_string(labels));
  }
  std::vector<double> alphas(labels);
  for (int y = 0; y < labels; ++y) alphas[y] = nonconformity(softmax_row, y);

  std::vector<std::vector<double>> table(space_.event_classes, std::vector<double>(labels));
  for (int c = 0; c < space_.event_classes; ++c) {
    for (int y = 0; y < labels; ++y) {
      bool empty = false;
      table[c][y] = p_value(level, c, y, alphas[y], exclude_source, &empty);
      if (empty && empty_categories) ++*empty_categories;
    }
  }
  return table;
}

void CalibrationStore::save(std::ostream& out) const {
  out << "node_labels=" << space_.node_labels << '\t' << "edge_labels=" << space_.edge_labels
      << '\t' << "event_classes=" << space_.event_classes << '\t' << "epsilon="
      << (epsilon_ ? format_double_full(*epsilon_) : std::string("auto")) << '\n';
  for (const CalibrationRecord& r : records_) {
    out << to_string(r.level) << '\t' << r.event_class << '\t' << r.label << '\t'
        << format_double_full(r.nonconformity) << '\t' << r.source_id << '\n';
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string header_value(const std::string& field, std::string_view key, int line_no) {
  const std::size_t eq = field.find('=');
  if (eq == std::string::npos || field.substr(0, eq) != key) {
    throw DataError("store line " + std::to_string(line_no) + ": expected '" + std::string(key) +
                    "=...', got '" + field + "'");
  }
  return field.substr(eq + 1);
}

int parse_int(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError("store line " + std::to_string(line_no) + ": not an integer: '" + text + "'");
  }
}

}  // namespace

CalibrationStore CalibrationStore::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("store line 1: missing header");
  auto fields = split_tabs(line);
  if (fields.size() != 4) {
    throw DataError("store line 1: expected 4 header fields, got " + std::to_string(fields.size()));
  }
  LabelSpace space;
  space.node_labels = parse_int(header_value(fields[0], "node_labels", 1), 1);
  space.edge_labels = parse_int(header_value(fields[1], "edge_labels", 1), 1);
  space.event_classes = parse_int(header_value(fields[2], "event_classes", 1), 1);
  const std::string eps = header_value(fields[3], "epsilon", 1);

  std::optional<double> epsilon;
  if (eps != "auto") epsilon = parse_double(eps);

  CalibrationStore store(space, epsilon);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fields = split_tabs(line);
    if (fields.size() != 5) {
      throw DataError("store line " + std::to_string(line_no) + ": expected 5 fields, got " +
                      std::to_string(fields.size()));
    }
    CalibrationRecord record;
    try {
      record.level = parse_level(fields[0]);
      record.event_class = parse_int(fields[1], line_no);
      record.label = parse_int(fields[2], line_no);
      record.nonconformity = parse_double(fields[3]);
      record.source_id = fields[4];
      store.add(record);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  store.seal();
  return store;
}

bool CalibrationStore::operator==(const CalibrationStore& other) const {
  return space_ == other.space_ && epsilon_ == other.epsilon_ && records_ == other.records_;
}

void save_store(const std::string& path, const CalibrationStore& store) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  store.save(out);
  if (!out) throw DataError("write failed: " + path);
}

CalibrationStore load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  return CalibrationStore::load(in);
}

}  // namespace cep
