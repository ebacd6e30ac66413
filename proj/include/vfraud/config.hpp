#pragma once

// Scenario config files: a `# vfraud-scenarios v1` header line followed by
// a JSON document {"scenarios": [...]}. Key paths mirror the Scenario
// fields; see README for the schema.

#include <filesystem>
#include <string>
#include <vector>

#include "vfraud/engine.hpp"

namespace vfraud {

inline constexpr std::string_view kScenariosHeader = "# vfraud-scenarios v1";

/// Parses a config text. Entries whose name matches one of `defaults`
/// start from that scenario and override only the keys present; other
/// entries start from an empty scenario. Throws Format or Validation.
std::vector<Scenario> parse_scenarios(std::string_view text, const std::vector<Scenario>& defaults);
std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const std::vector<Scenario>& defaults);

/// Full serialization; parse_scenarios(dump_scenarios(x), {}) == x.
std::string dump_scenarios(const std::vector<Scenario>& scenarios);

/// `defaults` with every config scenario replacing or appended by name.
std::vector<Scenario> merge_scenarios(std::vector<Scenario> defaults, const std::vector<Scenario>& overrides);

}  // namespace vfraud
