#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ftvs::cli {

/// Expands batch inputs into scenario files. A directory contributes its
/// `*.toml` entries; an argument with `*`, `?` or `[` in its final component
/// is matched against that directory; anything else must name a file.
/// The result is sorted and free of duplicates. Throws ConfigError when an
/// input matches nothing.
std::vector<std::filesystem::path> expand_scenario_inputs(const std::vector<std::string>& inputs);

}  // namespace ftvs::cli
