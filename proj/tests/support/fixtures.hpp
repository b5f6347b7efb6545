#pragma once

// Worked examples shared by the unit and acceptance tests.

#include <array>
#include <vector>

#include "gbi/elicitation.hpp"

namespace gbi::testing {

// Other-Predictions: bit 0 FA-Precip, bit 1 NWS-Precip, bit 2 Others-Precip.
// Keys in canonical order with their joint values.
inline const std::vector<std::pair<VarMask, double>> kOtherPredictions = {
    {0b001, 0.45}, {0b010, 0.55}, {0b011, 0.35}, {0b100, 0.65},
    {0b101, 0.45}, {0b110, 0.55}, {0b111, 0.35},
};
inline const std::array<double, 8> kOtherPredictionsAtoms = {0.35, 0, 0, 0, 0, 0.10, 0.20, 0.35};

// Folk-Predictions: bit 0 Moon-Haze, bit 1 Bunions-Ache, bit 2 Folk-Precip.
// The last three are entered as Pr(Folk-Precip | given).
struct Entry {
  VarMask key;
  VarMask given;  // 0 for a joint entry
  double value;
};
inline const std::vector<Entry> kFolkPredictions = {
    {0b001, 0, 0.65},     {0b010, 0, 0.45},     {0b011, 0, 0.30},     {0b100, 0, 0.55},
    {0b101, 0b001, 0.60}, {0b110, 0b010, 0.85}, {0b111, 0b011, 0.99},
};
inline const std::array<double, 8> kFolkPredictionsAtoms = {0.1255, 0.2570, 0.0645, 0.0030,
                                                            0.0745, 0.0930, 0.0855, 0.2970};

inline ElicitationState elicit_other_predictions() {
  ElicitationState s(LegShape{3, {}});
  for (const auto& [key, value] : kOtherPredictions) s = accept_constraint(s, key, value);
  return s;
}

inline ElicitationState elicit_folk_predictions() {
  ElicitationState s(LegShape{3, {}});
  for (const auto& e : kFolkPredictions) {
    s = e.given == 0 ? accept_constraint(s, e.key, e.value)
                     : accept_constraint(s, e.key, ConditionalEntry{e.given, e.value});
  }
  return s;
}

}  // namespace gbi::testing
