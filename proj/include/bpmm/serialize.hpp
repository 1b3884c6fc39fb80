#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bpmm/sim.hpp"

namespace bpmm {

using Json = nlohmann::json;

/// Drop document: radio constants, nodes, directed links with their scalar
/// channel summary, optional fading matrices (interleaved re/im, row-major)
/// and flows. Capacities are written for reference and recomputed on load.
Json topology_to_json(const Topology& topo, bool include_fading = true);
Topology topology_from_json(const Json& doc);

std::string dump_topology(const Topology& topo, bool include_fading = true);
Topology load_topology(const std::filesystem::path& path);

Json summary_to_json(const SummaryMetrics& m);

/// Overlays the keys present in `doc` onto `cfg`; unknown keys are errors.
void apply_config(const Json& doc, SimConfig& cfg);
Json config_to_json(const SimConfig& cfg);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bpmm
