#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetnet/glv.hpp"
#include "hetnet/local_maps.hpp"
#include "hetnet/measure.hpp"
#include "hetnet/network.hpp"

namespace hetnet {

// Reads and parses a JSON file; parse failures and unreadable paths become
// ConfigError with the parser diagnostics in the message.
nlohmann::json load_json_file(const std::string& path);

// Network spec document:
//   { "schema_version": 1,
//     "equilibria": [ {"label", "expanding": [..], "contracting": [..]} ],
//     "connections": [ {"source", "target", "index"} ],
//     "principal_length": N*,
//     "transition_maps": [ {"source", "M": [[..]], "G": [[..]]} ] }   (optional)
NetworkSpec network_from_json(const nlohmann::json& j);

// Per-edge explicit global maps, aligned with the principal sequence of
// `net`; entries stay empty for edges the document does not configure.
std::vector<std::optional<TransitionMap>> transition_maps_from_json(const nlohmann::json& j,
                                                                    const NetworkSpec& net);

// GLV config document:
//   { "schema_version": 1, "dim": n, "growth": [..],
//     "interaction": [[..]], "labels": [..],            (labels optional)
//     "connections": [..],                              (optional, explicit)
//     "experiment": { "eps", "delta", "n", "t_max", "seed",
//                     "box": {"lo": [..], "hi": [..]},
//                     "workers", "box_scale", "rel_tol", "abs_tol",
//                     "max_step" } }                    (trailing keys optional)
GLVSystem glv_from_json(const nlohmann::json& j);
std::vector<ConnectionSpec> connections_from_json(const nlohmann::json& j);
ChannelParams channel_params_from_json(const nlohmann::json& j, int dim);

std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

// Hash of the canonical (sorted-key) dump of a config document.
std::string config_hash(const nlohmann::json& config);
// Hash of the network's structural content: labels, eigenvalue lists,
// connections, principal length. Artifacts from different networks never
// share a fingerprint (up to hash collisions).
std::string network_fingerprint(const NetworkSpec& net);

// Shortest exact decimal form of a double (%.17g trimmed by round-trip).
std::string fmt_double(double v);

std::string measure_csv(const std::vector<MeasureEstimate>& rows);
std::string omega_csv(const OmegaOrbit& orbit);
std::string trajectory_csv(const Trajectory& traj);
std::string section_points_csv(const std::vector<InSectionPoint>& points);

nlohmann::json network_to_json(const NetworkSpec& net);
nlohmann::json to_json(const ValidationReport& rep);
nlohmann::json to_json(const MeasureEstimate& est);
nlohmann::json to_json(const ScalingStudy& study);
nlohmann::json to_json(const OmegaOrbit& orbit);
nlohmann::json to_json(const Itinerary& it);
nlohmann::json to_json(const ChannelReport& rep);
nlohmann::json to_json(const PerturbationReport& rep);
nlohmann::json to_json(const CheckResult& check);
nlohmann::json to_json(const StabilityVerdict& verdict);

}  // namespace hetnet
