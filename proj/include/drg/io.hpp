#pragma once

#include <json.hpp>

#include "drg/engine.hpp"

namespace drg {

using json = nlohmann::json;

// Hex helpers for seeds and digests.
std::string bytes_to_hex(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> hex_to_bytes(const std::string& hex);

// --- distributions and moments ------------------------------------------

json to_json(const Permutation& p);
Permutation permutation_from_json(const json& j);

json to_json(const LGridDistribution& d);
LGridDistribution lgrid_from_json(const json& j);

json to_json(const MixtureDistribution& d);
MixtureDistribution mixture_from_json(const json& j);

json to_json(const QuadraticMatrix& q);
QuadraticMatrix quadratic_from_json(const json& j);

// --- strategies and reports ----------------------------------------------

json to_json(const Strategy& s);
Strategy strategy_from_json(const json& j);

json to_json(const GapEstimate& g);
json to_json(const SearchOutcome& o);
json to_json(const StepRecord& r);
json to_json(const ProtocolReport& r);

// --- engine config and checkpoints ---------------------------------------

// Strict parse: unknown fields are rejected, the seed is a hex string,
// missing optional fields take the documented defaults.
EngineConfig config_from_json(const json& j);
json to_json(const EngineConfig& c);

// Stable hash of the canonical config serialization.
std::uint64_t config_hash(const EngineConfig& c);

json checkpoint_to_json(const EngineState& st, const EngineConfig& c);
// Restores state; verifies the embedded config hash against `c`.
EngineState checkpoint_from_json(const json& j, const EngineConfig& c);
// Reads the config embedded in a checkpoint.
EngineConfig checkpoint_config(const json& j);

}  // namespace drg
