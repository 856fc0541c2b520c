#pragma once

#include <nlohmann/json_fwd.hpp>

#include "lfray/grid.hpp"
#include "lfray/tracer.hpp"

// JSON scene-config ingestion and machine-readable report payloads. Parsing
// throws SchemaError with the offending field path in the message.

namespace lfray {

using Json = nlohmann::json;

SceneConfig scene_from_json(const Json& j);
Json scene_to_json(const SceneConfig& scene);

// Grid options live in the scene file's "grid" section.
GridScene grid_from_scene(const SceneConfig& scene, const Json& scene_json);

// FNV-1a hash of the canonical scene echo.
std::string scene_hash(const Json& canonical_scene);

Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j, int expect_size, const std::string& path);

Json snell_outcome_to_json(const SnellOutcome& out);
Json incident_data_to_json(const IncidentData& inc);
Json trace_event_to_json(const TraceEvent& ev);
Json trajectory_to_json(const Trajectory& traj);
Json criticality_to_json(const CriticalityReport& rep);
Json convergence_to_json(const ConvergenceTable& table);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

// Self-contained SVG of a 2D coordinate projection: trajectory polylines, the
// interface zero set sampled in the projection plane, and cone glyphs at the
// interface events.
std::string trajectory_svg(const SceneConfig& scene, const std::vector<Trajectory>& trajs,
                           int proj_x, int proj_y);

}  // namespace lfray
