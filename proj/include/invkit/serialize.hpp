#pragma once

#include <json.hpp>

#include "invkit/physics.hpp"

namespace invkit {

/// {"shape": [...], "values": [...]} for real tensors.
nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

/// Exact serialization of ξ, tagged with the descriptor under "type". The
/// compressed-sensing matrix is stored through its seed.
nlohmann::json physics_params_to_json(const PhysicsParams& params);
PhysicsParams physics_params_from_json(const nlohmann::json& j);

nlohmann::json noise_to_json(const NoiseModel& noise);
NoiseModel noise_from_json(const nlohmann::json& j);

} // namespace invkit
