#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace setfusion {

/// Manifold descriptor families; the numeric value is the fixed slot index q.
enum class KernelId : int { LogEuclidean = 1, Projection = 2, GaussianEmbedded = 3 };

inline constexpr KernelId kAllKernels[] = {KernelId::LogEuclidean, KernelId::Projection,
                                           KernelId::GaussianEmbedded};

/// Short names used on the command line and in model files: cov, subspace, gauss.
std::string_view descriptor_name(KernelId id) noexcept;
KernelId parse_descriptor(std::string_view name);
/// Parses a comma-separated list such as "cov,gauss"; order is normalized to slot order.
std::vector<KernelId> parse_descriptor_list(std::string_view list);
std::string format_descriptor_list(const std::vector<KernelId>& ids);

struct TrainConfig {
  int q = 10;               ///< subspace dimension, capped at min(d, n_min) per gallery
  double alpha = 1000.0;    ///< covariance ridge divisor
  int target_dim = 25;      ///< d_w, clamped to the effective dimension
  double gamma = 1e-4;      ///< gating learning rate
  int outer_iters = 20;     ///< B
  int itr_iters = 30;       ///< R
  double eps = 1e-5;        ///< convergence tolerance for both loops
  std::uint64_t seed = 0;
  bool normalize_kernels = false;
  std::vector<KernelId> descriptors{kAllKernels[0], kAllKernels[1], kAllKernels[2]};

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

}  // namespace setfusion
