#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "setfusion/classifier.hpp"
#include "setfusion/dataset.hpp"
#include "setfusion/error.hpp"
#include "setfusion/experiment.hpp"
#include "setfusion/persistence.hpp"

using namespace setfusion;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("setfusion_persist_" + name);
  fs::remove_all(dir);
  return dir;
}

struct Fixture {
  std::vector<ImageSet> sets;
  std::vector<ImageSet> gallery;
  std::vector<ImageSet> probes;
  ModelState model;
};

Fixture trained() {
  Fixture f;
  f.sets = generate_synthetic(SyntheticSpec{});
  const Split split = make_splits(f.sets, 1, 3, 7).front();
  for (std::size_t i : split.train) f.gallery.push_back(f.sets[i]);
  for (std::size_t i : split.test) f.probes.push_back(f.sets[i]);
  TrainConfig cfg;
  cfg.q = 3;
  cfg.outer_iters = 6;
  cfg.normalize_kernels = true;
  f.model = fit_model(f.gallery, cfg);
  return f;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(ArrayFile, RoundTrip) {
  const fs::path dir = scratch_dir("array");
  fs::create_directories(dir);
  ArrayFile a;
  a.rank = 3;
  a.dims = {2, 3, 4};
  for (int i = 0; i < 24; ++i) a.values.push_back(i * 0.1 - 1e-310);
  write_array_file(dir / "a.bin", a);
  const ArrayFile b = read_array_file(dir / "a.bin");
  EXPECT_EQ(b.rank, 3);
  EXPECT_EQ(b.dims, a.dims);
  EXPECT_EQ(b.values, a.values);
  EXPECT_EQ(fs::file_size(dir / "a.bin"), 16u + 24u * 8u);
}

TEST(Model, RoundTripGivesIdenticalPredictions) {
  const Fixture f = trained();
  const fs::path dir = scratch_dir("model");
  save_model(f.model, dir);
  const ModelState back = load_model(dir);
  EXPECT_EQ(back.transform, f.model.transform);
  EXPECT_EQ(back.class_names, f.model.class_names);
  for (std::size_t i = 0; i < 5; ++i) {
    const Prediction a = predict(f.probes[i], f.model);
    const Prediction b = predict(f.probes[i], back);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.distances, b.distances);
  }
  const fs::path again = scratch_dir("model_again");
  save_model(back, again);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(slurp(entry.path()), slurp(again / entry.path().filename())) << entry.path().filename();
  }
}

TEST(Model, CorruptedArrayIsDetected) {
  const Fixture f = trained();
  const fs::path dir = scratch_dir("corrupt");
  save_model(f.model, dir);
  {
    std::fstream io(dir / "transform.bin", std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(40);
    io.put('\x7f');
  }
  try {
    load_model(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ChecksumMismatch);
  }
}

TEST(Model, VersionBumpIsRejected) {
  const Fixture f = trained();
  const fs::path dir = scratch_dir("version");
  save_model(f.model, dir);
  std::string meta = slurp(dir / "model.meta");
  const std::string key = "format_version=" + std::to_string(kModelFormatVersion);
  const auto pos = meta.find(key);
  ASSERT_NE(pos, std::string::npos);
  meta.replace(pos, key.size(), "format_version=" + std::to_string(kModelFormatVersion + 1));
  {
    std::ofstream out(dir / "model.meta", std::ios::binary | std::ios::trunc);
    out << meta;
  }
  try {
    load_model(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatVersionMismatch);
  }
}
