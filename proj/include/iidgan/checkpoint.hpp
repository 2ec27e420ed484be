#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "iidgan/adam.hpp"
#include "iidgan/mlp.hpp"

namespace iidgan {

/// {"layers":[{"rows","cols","weight":[row-major],"bias","activation"}, ...]}
/// LeakyReLU layers also carry "slope". Doubles are written with
/// round-trip precision, so save/load is bit-exact.
nlohmann::json mlp_to_json(const Mlp& net);

/// Validates the schema and throws CheckpointError on any violation.
Mlp mlp_from_json(const nlohmann::json& doc);

nlohmann::json adam_to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& doc, const Mlp& net);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Throws CheckpointError if the file is missing or not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace iidgan
