#include "setfusion/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "setfusion/classifier.hpp"
#include "setfusion/error.hpp"
#include "setfusion/metric_learning.hpp"

namespace setfusion {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t split_seed(std::uint64_t seed, int split) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split), 0x5eedu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

SplitResult run_split(std::span<const ImageSet> sets, const Split& split, const TrainConfig& cfg, int index) {
  std::vector<ImageSet> gallery;
  for (std::size_t i : split.train) gallery.push_back(sets[i]);

  SplitResult result;
  result.split = index;
  result.n_train = split.train.size();
  result.n_test = split.test.size();

  const auto t0 = Clock::now();
  const ModelState model = fit_model(gallery, cfg);
  result.train_seconds = seconds_since(t0);
  result.iterations = model.iterations;
  result.objective_trace = model.objective_trace;

  const auto t1 = Clock::now();
  std::size_t correct = 0;
  for (std::size_t i : split.test) {
    if (predict(sets[i], model).label == sets[i].label) ++correct;
  }
  result.eval_seconds = seconds_since(t1);
  result.accuracy = split.test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(split.test.size());
  return result;
}

void summarize(VariantReport& v) {
  const double n = static_cast<double>(v.splits.size());
  if (v.splits.empty()) return;
  double sum = 0.0;
  for (const SplitResult& s : v.splits) sum += s.accuracy;
  v.mean_accuracy = sum / n;
  double ss = 0.0;
  for (const SplitResult& s : v.splits) ss += (s.accuracy - v.mean_accuracy) * (s.accuracy - v.mean_accuracy);
  v.std_accuracy = v.splits.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

std::vector<const VariantReport*> all_variants(const ExperimentReport& report) {
  std::vector<const VariantReport*> out{&report.combined};
  for (const VariantReport& v : report.ablation) {
    if (v.name != report.combined.name) out.push_back(&v);
  }
  for (const VariantReport& v : report.sweep) out.push_back(&v);
  return out;
}

}  // namespace

std::vector<Split> make_splits(std::span<const ImageSet> sets, int splits, int train_per_class, std::uint64_t seed) {
  if (splits < 1) fail(ErrorCode::InvalidConfig, "need at least one split");
  if (train_per_class < 1) fail(ErrorCode::InvalidConfig, "need at least one training set per class");

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < sets.size(); ++i) by_class[sets[i].label].push_back(i);
  if (by_class.size() < 2) fail(ErrorCode::SingleClassGallery, "data set has fewer than two classes");
  for (const auto& [label, members] : by_class) {
    if (static_cast<int>(members.size()) <= train_per_class) {
      std::ostringstream os;
      os << "class '" << label << "' has " << members.size() << " sets; need more than " << train_per_class;
      fail(ErrorCode::InsufficientSetsPerClass, os.str());
    }
  }

  std::vector<Split> out;
  for (int s = 0; s < splits; ++s) {
    std::mt19937_64 rng(split_seed(seed, s));
    Split split;
    for (const auto& [label, members] : by_class) {
      std::vector<std::size_t> order = members;
      std::shuffle(order.begin(), order.end(), rng);
      split.train.insert(split.train.end(), order.begin(), order.begin() + train_per_class);
      split.test.insert(split.test.end(), order.begin() + train_per_class, order.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    out.push_back(std::move(split));
  }
  return out;
}

VariantReport evaluate_variant(std::span<const ImageSet> sets, std::span<const Split> splits, const TrainConfig& cfg,
                               std::string name, bool parallel) {
  VariantReport v;
  v.name = std::move(name);
  v.descriptors = cfg.descriptors;
  v.target_dim = cfg.target_dim;
  if (parallel) {
    std::vector<std::future<SplitResult>> jobs;
    for (std::size_t s = 0; s < splits.size(); ++s) {
      jobs.push_back(std::async(std::launch::async, [&, s] { return run_split(sets, splits[s], cfg, static_cast<int>(s)); }));
    }
    for (auto& j : jobs) v.splits.push_back(j.get());
  } else {
    for (std::size_t s = 0; s < splits.size(); ++s) v.splits.push_back(run_split(sets, splits[s], cfg, static_cast<int>(s)));
  }
  summarize(v);
  spdlog::info("{}: mean accuracy {:.4f} +/- {:.4f} over {} splits", v.name, v.mean_accuracy, v.std_accuracy, v.splits.size());
  return v;
}

ExperimentReport run_experiment(std::span<const ImageSet> sets, const TrainConfig& cfg, const SplitProtocol& protocol) {
  cfg.validate();
  const std::vector<Split> splits = make_splits(sets, protocol.splits, protocol.train_per_class, cfg.seed);

  ExperimentReport report;
  report.config = cfg;
  report.protocol = protocol;
  report.combined = evaluate_variant(sets, splits, cfg, "combined", protocol.parallel_splits);

  if (protocol.ablation) {
    for (KernelId id : kAllKernels) {
      TrainConfig single = cfg;
      single.descriptors = {id};
      report.ablation.push_back(
          evaluate_variant(sets, splits, single, std::string(descriptor_name(id)), protocol.parallel_splits));
    }
    report.ablation.push_back(report.combined);
  }
  for (int dw : protocol.target_dim_sweep) {
    TrainConfig swept = cfg;
    swept.target_dim = dw;
    report.sweep.push_back(evaluate_variant(sets, splits, swept, "dw=" + std::to_string(dw), protocol.parallel_splits));
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write report " + path.string());
  out << "variant,descriptors,target_dim,split,accuracy,train_seconds,eval_seconds,iterations,final_objective\n";
  out << std::setprecision(10);
  for (const VariantReport* v : all_variants(report)) {
    const std::string desc = format_descriptor_list(v->descriptors);
    for (const SplitResult& s : v->splits) {
      out << v->name << ",\"" << desc << "\"," << v->target_dim << ',' << s.split << ',' << s.accuracy << ','
          << s.train_seconds << ',' << s.eval_seconds << ',' << s.iterations << ','
          << (s.objective_trace.empty() ? 0.0 : s.objective_trace.back()) << '\n';
    }
    out << v->name << ",\"" << desc << "\"," << v->target_dim << ",mean," << v->mean_accuracy << ",,,,\n";
    out << v->name << ",\"" << desc << "\"," << v->target_dim << ",std," << v->std_accuracy << ",,,,\n";
  }
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

void write_traces_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write traces " + path.string());
  out << "variant,split,iteration,objective\n" << std::setprecision(12);
  for (const VariantReport* v : all_variants(report)) {
    for (const SplitResult& s : v->splits) {
      for (std::size_t it = 0; it < s.objective_trace.size(); ++it) {
        out << v->name << ',' << s.split << ',' << it + 1 << ',' << s.objective_trace[it] << '\n';
      }
    }
  }
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

std::string format_summary(const ExperimentReport& report) {
  std::ostringstream os;
  const TrainConfig& c = report.config;
  os << "config: q=" << c.q << " alpha=" << c.alpha << " dw=" << c.target_dim << " gamma=" << c.gamma
     << " iters=" << c.outer_iters << " itr-iters=" << c.itr_iters << " eps=" << c.eps << " seed=" << c.seed
     << " descriptors=" << format_descriptor_list(c.descriptors)
     << " normalize-kernels=" << (c.normalize_kernels ? "on" : "off") << '\n';
  os << "protocol: splits=" << report.protocol.splits << " train-per-class=" << report.protocol.train_per_class << '\n';
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(12) << "variant" << std::right << std::setw(10) << "mean" << std::setw(10) << "std"
     << std::setw(12) << "train[s]" << '\n';
  auto row = [&](const VariantReport& v) {
    double train = 0.0;
    for (const SplitResult& s : v.splits) train += s.train_seconds;
    os << std::left << std::setw(12) << v.name << std::right << std::setw(10) << v.mean_accuracy << std::setw(10)
       << v.std_accuracy << std::setw(12) << train << '\n';
  };
  if (report.ablation.empty()) {
    row(report.combined);
  } else {
    for (const VariantReport& v : report.ablation) row(v);
  }
  for (const VariantReport& v : report.sweep) row(v);
  return os.str();
}

}  // namespace setfusion
