#ifndef CSCD_CHECKPOINT_HPP
#define CSCD_CHECKPOINT_HPP

#include "cscd/trainer.hpp"

#include <json.hpp>

#include <filesystem>

namespace cscd {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults.
TrainConfig config_from_json(const nlohmann::json& j);
/// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const TrainConfig& config);

/// Versioned JSON container: format tag, version, model kind, config and its
/// hash, dataset fingerprint, epoch, best validation AUC, and every parameter
/// as {name, role, rows, cols, values}. Doubles are written with 17
/// significant digits, so reloading reproduces values exactly.
nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Writes atomically (temporary file + rename).
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws IoError when unreadable, ConfigError when malformed or of another version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Writes `contents` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace cscd

#endif
