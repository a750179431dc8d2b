#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "setfusion/set_model.hpp"

namespace setfusion {

struct ManifestEntry {
  std::string set_id;
  std::string label;
  std::filesystem::path path;  ///< as written; relative paths resolve against the manifest directory
};

/// CSV with header `set_id,label,path`.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  Index feature_dim = 0;  ///< known after load_dataset
};

DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// Set file: d rows x n columns of comma-separated numbers, no header.
Matrix read_set_file(const std::filesystem::path& path);
void write_set_file(const std::filesystem::path& path, const Matrix& features);

/// Loads every entry, checking uniform dimension and at least two samples per set.
std::vector<ImageSet> load_dataset(const std::filesystem::path& manifest_path);

/// Writes sets/<set_id>.csv plus manifest.csv under `dir`; returns the manifest path.
std::filesystem::path save_dataset(std::span<const ImageSet> sets, const std::filesystem::path& dir);

struct SyntheticSpec {
  int classes = 3;
  int sets_per_class = 6;
  int dim = 10;
  int samples_per_set = 40;
  double class_separation = 5.0;
  std::uint64_t seed = 42;
};

/// Class centres ~ separation * N(0, I_d) (so of norm about separation * sqrt(d)),
/// set means jittered around them by N(0, I_d), samples drawn from a per-set
/// random SPD covariance. Deterministic in the seed.
std::vector<ImageSet> generate_synthetic(const SyntheticSpec& spec);

}  // namespace setfusion
