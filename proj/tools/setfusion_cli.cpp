// Command-line front end: synth, train, eval, predict, ablate.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "setfusion/classifier.hpp"
#include "setfusion/dataset.hpp"
#include "setfusion/error.hpp"
#include "setfusion/experiment.hpp"
#include "setfusion/metric_learning.hpp"
#include "setfusion/persistence.hpp"

namespace fs = std::filesystem;
using namespace setfusion;

namespace {

struct TrainFlags {
  TrainConfig cfg;
  std::string descriptors = "cov,subspace,gauss";
  std::string normalize = "off";

  void attach(CLI::App* app) {
    app->add_option("--q", cfg.q, "Subspace dimension (capped at min(d, n))")->capture_default_str();
    app->add_option("--alpha", cfg.alpha, "Covariance ridge divisor")->capture_default_str();
    app->add_option("--dw", cfg.target_dim, "Target dimension of the learned subspace")->capture_default_str();
    app->add_option("--gamma", cfg.gamma, "Gating learning rate")->capture_default_str();
    app->add_option("--iters", cfg.outer_iters, "Outer iterations")->capture_default_str();
    app->add_option("--itr-iters", cfg.itr_iters, "Trace-ratio iterations")->capture_default_str();
    app->add_option("--eps", cfg.eps, "Convergence tolerance")->capture_default_str();
    app->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app->add_option("--descriptors", descriptors, "Comma list of cov,subspace,gauss")->capture_default_str();
    app->add_option("--normalize-kernels", normalize, "Trace-normalize Gram matrices")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
  }

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.descriptors = parse_descriptor_list(descriptors);
    out.normalize_kernels = normalize == "on";
    out.validate();
    return out;
  }
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidConfig, "bad integer list '" + s + "'");
    }
  }
  return out;
}

void print_report(const ExperimentReport& report, const std::string& report_path) {
  std::cout << format_summary(report);
  if (!report_path.empty()) {
    write_report_csv(report, report_path);
    write_traces_csv(report, fs::path(report_path).replace_extension(".traces.csv"));
    std::cout << "report written to " << report_path << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-set classification with fused Riemannian kernels and learned gating"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  // synth
  SyntheticSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic data set with a manifest");
  synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
  synth_cmd->add_option("--sets-per-class", synth.sets_per_class)->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
  synth_cmd->add_option("--samples", synth.samples_per_set)->capture_default_str();
  synth_cmd->add_option("--separation", synth.class_separation)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  // train
  TrainFlags train_flags;
  std::string train_manifest, train_out;
  auto* train_cmd = app.add_subcommand("train", "Train on every set of a manifest and save the model");
  train_cmd->add_option("--manifest", train_manifest)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Model directory")->required();
  train_flags.attach(train_cmd);

  // eval
  TrainFlags eval_flags;
  std::string eval_manifest, eval_report, eval_sweep;
  int eval_splits = 10, eval_train_per_class = 3;
  bool eval_parallel = false;
  auto* eval_cmd = app.add_subcommand("eval", "Repeated random gallery/probe splits");
  eval_cmd->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--splits", eval_splits)->capture_default_str();
  eval_cmd->add_option("--train-per-class", eval_train_per_class)->capture_default_str();
  eval_cmd->add_option("--report", eval_report, "CSV report path");
  eval_cmd->add_option("--dw-sweep", eval_sweep, "Comma list of target dimensions to sweep");
  eval_cmd->add_flag("--parallel-splits", eval_parallel);
  eval_flags.attach(eval_cmd);

  // predict
  std::string predict_model, predict_set;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one set file with a saved model");
  predict_cmd->add_option("--model", predict_model)->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--set", predict_set)->required()->check(CLI::ExistingFile);

  // ablate
  TrainFlags ablate_flags;
  std::string ablate_manifest, ablate_report;
  int ablate_splits = 10, ablate_train_per_class = 3;
  bool ablate_parallel = false;
  auto* ablate_cmd = app.add_subcommand("ablate", "Per-descriptor and combined accuracy table");
  ablate_cmd->add_option("--manifest", ablate_manifest)->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--splits", ablate_splits)->capture_default_str();
  ablate_cmd->add_option("--train-per-class", ablate_train_per_class)->capture_default_str();
  ablate_cmd->add_option("--report", ablate_report, "CSV report path");
  ablate_cmd->add_flag("--parallel-splits", ablate_parallel);
  ablate_flags.attach(ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("setfusion"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*synth_cmd) {
      const auto sets = generate_synthetic(synth);
      const fs::path manifest = save_dataset(sets, synth_out);
      std::cout << "wrote " << sets.size() << " sets to " << manifest.string() << '\n';
    } else if (*train_cmd) {
      const TrainConfig cfg = train_flags.resolve();
      const auto sets = load_dataset(train_manifest);
      const ModelState model = fit_model(sets, cfg);
      save_model(model, train_out);
      std::cout << "trained on " << sets.size() << " sets, " << model.iterations << " iterations, final objective "
                << (model.objective_trace.empty() ? 0.0 : model.objective_trace.back()) << '\n'
                << "model saved to " << train_out << '\n';
    } else if (*eval_cmd) {
      SplitProtocol protocol;
      protocol.splits = eval_splits;
      protocol.train_per_class = eval_train_per_class;
      protocol.target_dim_sweep = parse_int_list(eval_sweep);
      protocol.parallel_splits = eval_parallel;
      const TrainConfig cfg = eval_flags.resolve();
      const auto sets = load_dataset(eval_manifest);
      print_report(run_experiment(sets, cfg, protocol), eval_report);
    } else if (*predict_cmd) {
      const ModelState model = load_model(predict_model);
      const Matrix features = read_set_file(predict_set);
      const ImageSet probe{features, "", fs::path(predict_set).stem().string()};
      const Prediction p = predict(probe, model);
      std::cout << "label: " << p.label << '\n';
      std::vector<Index> order(static_cast<std::size_t>(p.distances.size()));
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p.distances(a) < p.distances(b); });
      const std::size_t top = std::min<std::size_t>(5, order.size());
      for (std::size_t r = 0; r < top; ++r) {
        const auto& g = model.gallery[static_cast<std::size_t>(order[r])];
        std::printf("%zu %s %s %.10g\n", r + 1, g.set_id.c_str(), g.label.c_str(), p.distances(order[r]));
      }
    } else if (*ablate_cmd) {
      SplitProtocol protocol;
      protocol.splits = ablate_splits;
      protocol.train_per_class = ablate_train_per_class;
      protocol.ablation = true;
      protocol.parallel_splits = ablate_parallel;
      const TrainConfig cfg = ablate_flags.resolve();
      const auto sets = load_dataset(ablate_manifest);
      print_report(run_experiment(sets, cfg, protocol), ablate_report);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
