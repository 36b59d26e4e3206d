#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "courtsketch/json_io.hpp"
#include "courtsketch/nn.hpp"
#include "courtsketch/optimizer.hpp"

namespace courtsketch {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct OptimizerSnapshot {
  AdamState generator;
  AdamState critic;
};

/// On disk: 8-byte magic "CSKCKPT\0", u32 version, u64 header length, a JSON
/// header (model config, counters, seed, tensor directory), then every tensor
/// as little-endian IEEE-754 doubles in column-major order.
struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  ModelParams params;
  std::optional<OptimizerSnapshot> optimizer;
  Json metadata = Json::object();
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

/// Atomic: writes a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Short content hash identifying the parameters, counters and config.
std::string checkpoint_id(const Checkpoint& ckpt);

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);

}  // namespace courtsketch
