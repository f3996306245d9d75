#pragma once

#include <filesystem>

#include "json.hpp"

#include "slab/montecarlo.hpp"

namespace slab {

/// Parses the documented experiment-config schema (schema_version 1).
/// Unknown schema versions and malformed fields raise invalid_dims with a
/// message naming the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json summary_to_json(const ExperimentSummary& summary);
nlohmann::json config_to_json(const ExperimentConfig& config);

} // namespace slab
