#ifndef CEP_TYPES_HPP
#define CEP_TYPES_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cep {

inline constexpr std::string_view kVersion = "0.1.0";

/// Semantic level of a hypothesis: an individual node, a pairwise edge, or
/// the scene-level event.
enum class Level { node, edge, event };

/// Energy variants. cern1 scores node and edge hypotheses only; cern2 adds an
/// event-level potential and its confidence term.
enum class Mode { cern1, cern2 };

/// Inference regimes. softmax_only reads the per-row argmax, energy_only
/// minimizes the raw energy, confidence_energy minimizes the regularized
/// energy (raw energy plus log p-value penalties).
enum class Regime { softmax_only, energy_only, confidence_energy };

/// Malformed or inconsistent external data (files, wire formats). The CLI
/// maps this to exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Level level);
std::string_view to_string(Mode mode);
std::string_view to_string(Regime regime);

Level parse_level(std::string_view text);
Mode parse_mode(std::string_view text);
Regime parse_regime(std::string_view text);

}  // namespace cep

#endif
