#pragma once

#include <cstdint>
#include <filesystem>

#include "hsgp/model.hpp"

namespace hsgp {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};

/// JSON document: format_version, task, dims, seed, parameter_order and the
/// tensors as nested row arrays. Doubles are written in shortest round-trip
/// form (at most 17 significant digits), so a save/load cycle is exact.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hsgp
