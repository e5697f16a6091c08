#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace sw {

// Benchmark scenario columns, in report order.
enum class Scenario { kTurn = 0, kCrossing, kDetour, kProximity, kCrowd, kOther };

inline constexpr std::array<Scenario, 6> kAllScenarios = {Scenario::kTurn,      Scenario::kCrossing,
                                                          Scenario::kDetour,    Scenario::kProximity,
                                                          Scenario::kCrowd,     Scenario::kOther};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kTurn: return "turn";
    case Scenario::kCrossing: return "crossing";
    case Scenario::kDetour: return "detour";
    case Scenario::kProximity: return "proximity";
    case Scenario::kCrowd: return "crowd";
    case Scenario::kOther: return "other";
  }
  return "other";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (name == scenario_name(s)) return s;
  }
  return std::nullopt;
}

}  // namespace sw
