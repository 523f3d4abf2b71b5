#pragma once

#include "nodalfreq/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace nodalfreq {

// JSON network documents:
//
//   {
//     "omega0": 314.159...,                        (optional, default 100*pi)
//     "buses": [
//       {"id": "1", "kind": "generator",
//        "generator": {"inertia": 12, "damping": 1.5, "droop": 18, "turbine_time": 7}},
//       {"id": "5", "kind": "load", "load_power": 0.5},
//       {"id": "9", "kind": "passive"}
//     ],
//     "branches": [{"from": "1", "to": "5", "x": 0.1}]
//   }
//
// The order of "buses" is authoritative for the generator / network partition.
// Parsing only checks the document shape; call validate_network() for the rest.

PowerNetwork parse_network(std::string_view json_text);
PowerNetwork load_network(const std::filesystem::path& path);

std::string serialize_network(const PowerNetwork& net);
void save_network(const PowerNetwork& net, const std::filesystem::path& path);

}  // namespace nodalfreq
