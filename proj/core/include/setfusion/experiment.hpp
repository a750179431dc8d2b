#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "setfusion/config.hpp"
#include "setfusion/set_model.hpp"

namespace setfusion {

struct SplitProtocol {
  int splits = 10;
  int train_per_class = 3;
  bool ablation = false;                ///< also run each descriptor alone
  std::vector<int> target_dim_sweep;    ///< extra combined runs, one per d_w
  bool parallel_splits = false;
};

/// Gallery/probe partition of one split, as indices into the data set.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class, a seeded shuffle; the first train_per_class sets go to the gallery.
/// Throws InsufficientSetsPerClass when a class cannot leave a probe behind.
std::vector<Split> make_splits(std::span<const ImageSet> sets, int splits, int train_per_class, std::uint64_t seed);

struct SplitResult {
  int split = 0;
  double accuracy = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
  int iterations = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<double> objective_trace;
};

struct VariantReport {
  std::string name;  ///< "combined", "cov", "subspace", "gauss" or "dw=<n>"
  std::vector<KernelId> descriptors;
  int target_dim = 0;
  std::vector<SplitResult> splits;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct ExperimentReport {
  TrainConfig config;
  SplitProtocol protocol;
  VariantReport combined;
  std::vector<VariantReport> ablation;  ///< cov, subspace, gauss, combined when requested
  std::vector<VariantReport> sweep;
};

/// Runs one variant over precomputed splits.
VariantReport evaluate_variant(std::span<const ImageSet> sets, std::span<const Split> splits, const TrainConfig& cfg,
                               std::string name, bool parallel);

ExperimentReport run_experiment(std::span<const ImageSet> sets, const TrainConfig& cfg, const SplitProtocol& protocol);

/// Accuracy table (one row per variant and split, plus mean/std rows).
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);
/// Objective value per outer iteration, per variant and split.
void write_traces_csv(const ExperimentReport& report, const std::filesystem::path& path);
std::string format_summary(const ExperimentReport& report);

}  // namespace setfusion
