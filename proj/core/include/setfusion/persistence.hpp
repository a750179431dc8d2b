#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "setfusion/metric_learning.hpp"

namespace setfusion {

inline constexpr int kModelFormatVersion = 1;

/// Dense float64 array of rank 1..3, row-major (last index fastest).
struct ArrayFile {
  std::array<std::uint32_t, 3> dims{1, 1, 1};
  std::uint8_t rank = 1;
  std::vector<double> values;
};

/// 16-byte header: 'S' 'F' 'A' rank(u8), then three little-endian u32 dims
/// (unused dims are 1); followed by little-endian float64 payload.
void write_array_file(const std::filesystem::path& path, const ArrayFile& array);
ArrayFile read_array_file(const std::filesystem::path& path);

/// CRC-32 (zlib polynomial) of a whole file.
std::uint32_t file_crc32(const std::filesystem::path& path);

/// Writes model.meta plus one .bin file per array into `dir` (created if needed).
void save_model(const ModelState& model, const std::filesystem::path& dir);

/// Throws IoError, FormatVersionMismatch or ChecksumMismatch.
ModelState load_model(const std::filesystem::path& dir);

}  // namespace setfusion
