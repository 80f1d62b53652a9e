#include "cep/types.hpp"

namespace cep {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::node: return "node";
    case Level::edge: return "edge";
    case Level::event: return "event";
  }
  throw std::invalid_argument("unknown level");
}

std::string_view to_string(Mode mode) {
  return mode == Mode::cern1 ? "cern1" : "cern2";
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::softmax_only: return "softmax";
    case Regime::energy_only: return "energy";
    case Regime::confidence_energy: return "confidence-energy";
  }
  throw std::invalid_argument("unknown regime");
}

Level parse_level(std::string_view text) {
  if (text == "node") return Level::node;
  if (text == "edge") return Level::edge;
  if (text == "event") return Level::event;
  throw std::invalid_argument("unknown level: " + std::string(text));
}

Mode parse_mode(std::string_view text) {
  if (text == "cern1") return Mode::cern1;
  if (text == "cern2") return Mode::cern2;
  throw std::invalid_argument("unknown mode: " + std::string(text));
}

Regime parse_regime(std::string_view text) {
  if (text == "softmax") return Regime::softmax_only;
  if (text == "energy") return Regime::energy_only;
  if (text == "confidence-energy") return Regime::confidence_energy;
  throw std::invalid_argument("unknown regime: " + std::string(text));
}

}  // namespace cep
