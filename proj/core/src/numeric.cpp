#include "cep/numeric.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "cep/types.hpp"

namespace cep {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 64) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void check_probability_row(std::span<const double> row, double tolerance) {
  if (row.empty()) throw std::invalid_argument("probability row is empty");
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("probability row has negative entry " + format_double(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw std::invalid_argument("probability row sums to " + format_double(sum) +
                                ", expected 1 within " + format_double(tolerance));
  }
}

int argmax(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("argmax of empty row");
  int best = 0;
  for (int i = 1; i < static_cast<int>(row.size()); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string format_double_full(double value) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 16);
  if (ec != std::errc()) throw std::runtime_error("format_double_full failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> normalized(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  if (!(sum > 0.0)) throw std::invalid_argument("cannot normalize row with sum " + format_double(sum));
  std::vector<double> out(row.begin(), row.end());
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace cep
