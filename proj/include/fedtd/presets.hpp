#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fedtd/harness.hpp"

namespace fedtd {

// Figure identifiers accepted by `repro`.
const std::vector<std::string>& figure_ids();

// Run-sets reproducing one figure. Each entry sweeps a single dimension and
// is written to its own results/<name>/ directory.
std::vector<ExperimentConfig> figure_preset(std::string_view figure_id);

}  // namespace fedtd
