#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "setfusion/dataset.hpp"
#include "setfusion/experiment.hpp"

using namespace setfusion;
namespace fs = std::filesystem;

namespace {

std::vector<ImageSet> two_class_data() {
  SyntheticSpec spec;
  spec.classes = 2;
  spec.sets_per_class = 4;
  spec.dim = 6;
  spec.samples_per_set = 15;
  return generate_synthetic(spec);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.q = 3;
  cfg.outer_iters = 4;
  return cfg;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST(Experiment, SingleSplitReport) {
  const auto sets = two_class_data();
  SplitProtocol protocol;
  protocol.splits = 1;
  protocol.train_per_class = 2;
  const ExperimentReport r = run_experiment(sets, quick_config(), protocol);
  ASSERT_EQ(r.combined.splits.size(), 1u);
  const SplitResult& s = r.combined.splits.front();
  EXPECT_EQ(s.n_train, 4u);
  EXPECT_EQ(s.n_test, 4u);
  EXPECT_EQ(static_cast<int>(s.objective_trace.size()), s.iterations);
  EXPECT_GE(s.accuracy, 0.0);
  EXPECT_LE(s.accuracy, 1.0);
  EXPECT_TRUE(r.ablation.empty());
}

TEST(Experiment, AblationAndSweepShapes) {
  const auto sets = two_class_data();
  SplitProtocol protocol;
  protocol.splits = 2;
  protocol.train_per_class = 2;
  protocol.ablation = true;
  protocol.target_dim_sweep = {5, 10, 25, 50};
  const ExperimentReport r = run_experiment(sets, quick_config(), protocol);
  ASSERT_EQ(r.ablation.size(), 4u);
  EXPECT_EQ(r.ablation[0].name, "cov");
  EXPECT_EQ(r.ablation[1].name, "subspace");
  EXPECT_EQ(r.ablation[2].name, "gauss");
  EXPECT_EQ(r.ablation[3].name, "combined");
  ASSERT_EQ(r.sweep.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.sweep[i].target_dim, protocol.target_dim_sweep[i]);
    EXPECT_EQ(r.sweep[i].splits.size(), 2u);
  }

  const fs::path dir = fs::temp_directory_path() / "setfusion_experiment";
  fs::create_directories(dir);
  write_report_csv(r, dir / "report.csv");
  write_traces_csv(r, dir / "traces.csv");
  // header + (combined + 3 single-descriptor + 4 sweep) variants x (2 splits + mean + std)
  EXPECT_EQ(line_count(dir / "report.csv"), 1u + 8u * 4u);
  EXPECT_GT(line_count(dir / "traces.csv"), 1u);
  EXPECT_FALSE(format_summary(r).empty());
}

TEST(Experiment, ParallelSplitsMatchSerial) {
  const auto sets = two_class_data();
  const auto splits = make_splits(sets, 3, 2, 5);
  const VariantReport serial = evaluate_variant(sets, splits, quick_config(), "combined", false);
  const VariantReport parallel = evaluate_variant(sets, splits, quick_config(), "combined", true);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(serial.splits[i].accuracy, parallel.splits[i].accuracy);
    EXPECT_EQ(serial.splits[i].objective_trace, parallel.splits[i].objective_trace);
  }
}
