#pragma once

#include <filesystem>

#include "vprmon/mlp.hpp"

namespace vprmon {

/// Model file layout (all integers little-endian):
///   magic "VPRM" | u32 file version (1) | u32 catalogue version
///   | u32 layer count | per layer: u32 rows, u32 cols,
///     rows*cols f32 weights (row-major), rows f32 biases
///   | input_dim f32 means | input_dim f32 std-devs
///   | f64 decision threshold | f64 alpha used | u32 CRC32 trailer
///
/// The CRC covers every preceding byte. Loading verifies magic, version,
/// and checksum before constructing anything, so a truncated or
/// corrupted file never yields a partial model.
void save_model(const MlpModel& model, const std::filesystem::path& path);

MlpModel load_model(const std::filesystem::path& path);

}  // namespace vprmon
