#pragma once

// Built-in scenarios: one per experiment of the measurement study.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfraud/engine.hpp"

namespace vfraud {

inline constexpr std::uint64_t kDefaultBaseSeed = 1;

/// The 13 named scenarios, in a fixed order.
std::vector<Scenario> catalog();

std::vector<std::string> scenario_names(const std::vector<Scenario>& scenarios);

/// Throws UnknownScenario listing the available names.
const Scenario& find_scenario(const std::vector<Scenario>& scenarios, std::string_view name);

/// Re-derives seeds from `base_seed` and/or changes the repeat count.
Scenario with_overrides(Scenario s, std::optional<std::uint64_t> base_seed, std::optional<int> repeats);

/// Resolves "all" or a list of names against `scenarios`.
std::vector<Scenario> select_scenarios(const std::vector<Scenario>& scenarios,
                                       const std::vector<std::string>& names);

}  // namespace vfraud
