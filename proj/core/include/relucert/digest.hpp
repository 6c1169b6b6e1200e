#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "relucert/box.hpp"
#include "relucert/network.hpp"

namespace relucert {

/// Hex-encoded SHA-256. Inputs are canonically serialized first (sorted
/// keys, compact separators, shortest round-trip number formatting), so
/// digests are stable across platforms and file formatting.
std::string sha256_hex(const std::string& bytes);

std::string canonical_dump(const nlohmann::json& doc);

std::string network_digest(const Network& net);
std::string problem_digest(const Network& net, const Box& d_in,
                           const Box& d_out);

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& doc, const std::string& where);

}  // namespace relucert
