#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "setfusion/dataset.hpp"
#include "setfusion/error.hpp"
#include "setfusion/experiment.hpp"

using namespace setfusion;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("setfusion_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Dataset, ManifestRoundTrip) {
  const fs::path dir = scratch_dir("roundtrip");
  Matrix a(2, 3), b(2, 2);
  a << 0.1, -2.5, 1e-300, 3.0, 4.0, 1.0 / 3.0;
  b << 7.0, 8.0, 9.0, 10.0;
  const std::vector<ImageSet> sets{{a, "cat", "first"}, {b, "dog", "second"}};
  const fs::path manifest = save_dataset(sets, dir);
  const std::vector<ImageSet> back = load_dataset(manifest);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].features, a);
  EXPECT_EQ(back[1].features, b);
  EXPECT_EQ(back[0].label, "cat");
  EXPECT_EQ(back[1].set_id, "second");
  EXPECT_EQ(read_manifest(manifest).entries.size(), 2u);
}

TEST(Dataset, ParseErrorNamesLocation) {
  const fs::path dir = scratch_dir("parse");
  {
    std::ofstream out(dir / "bad.csv");
    out << "1,2,3\n4,x5,6\n";
  }
  try {
    read_set_file(dir / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("bad.csv:2"), std::string::npos) << e.what();
  }
}

TEST(Dataset, DimensionMismatchAcrossSets) {
  const fs::path dir = scratch_dir("dims");
  const std::vector<ImageSet> sets{{Matrix::Ones(2, 3), "a", "s1"}, {Matrix::Ones(3, 3), "b", "s2"}};
  const fs::path manifest = save_dataset(sets, dir);
  try {
    load_dataset(manifest);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Synthetic, DeterministicAndShaped) {
  SyntheticSpec spec;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.size(), 18u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].dim(), 10);
    EXPECT_EQ(a[i].size(), 40);
  }
  spec.seed = 43;
  EXPECT_NE(generate_synthetic(spec)[0].features, a[0].features);
}

TEST(Synthetic, RejectsBadSpec) {
  SyntheticSpec spec;
  spec.samples_per_set = 1;
  try {
    generate_synthetic(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadSpec);
  }
}

TEST(Splits, PartitionEachClass) {
  const auto sets = generate_synthetic(SyntheticSpec{});
  const auto splits = make_splits(sets, 4, 3, 1);
  ASSERT_EQ(splits.size(), 4u);
  for (const Split& s : splits) {
    EXPECT_EQ(s.train.size(), 9u);
    EXPECT_EQ(s.test.size(), 9u);
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  }
  EXPECT_NE(splits[0].train, splits[1].train);
  try {
    make_splits(sets, 1, 6, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSetsPerClass);
  }
}
