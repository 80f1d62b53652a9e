#ifndef CEP_NUMERIC_HPP
#define CEP_NUMERIC_HPP

#include <span>
#include <string>
#include <vector>

namespace cep {

/// Pairwise (cascade) summation. Sequences of at most 64 terms are summed
/// left to right, longer ones are split recursively, so results do not depend
/// on how callers batch their work.
double pairwise_sum(std::span<const double> values);

/// Throws std::invalid_argument naming the offending sum unless every entry
/// is nonnegative and the row sums to 1 within `tolerance`.
void check_probability_row(std::span<const double> row, double tolerance = 1e-6);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const double> row);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Scientific notation with 17 significant digits; round-trips exactly and
/// is locale independent.
std::string format_double_full(double value);

/// Locale-independent parse; throws cep::DataError on trailing garbage.
double parse_double(std::string_view text);

std::vector<double> normalized(std::span<const double> row);

}  // namespace cep

#endif
