#include "setfusion/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {

std::string_view descriptor_name(KernelId id) noexcept {
  switch (id) {
    case KernelId::LogEuclidean: return "cov";
    case KernelId::Projection: return "subspace";
    case KernelId::GaussianEmbedded: return "gauss";
  }
  return "?";
}

KernelId parse_descriptor(std::string_view name) {
  for (KernelId id : kAllKernels) {
    if (descriptor_name(id) == name) return id;
  }
  fail(ErrorCode::InvalidConfig, "unknown descriptor '" + std::string(name) + "' (expected cov, subspace or gauss)");
}

std::vector<KernelId> parse_descriptor_list(std::string_view list) {
  std::vector<KernelId> ids;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view token = list.substr(start, comma - start);
    if (!token.empty()) {
      const KernelId id = parse_descriptor(token);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    start = comma + 1;
  }
  if (ids.empty()) fail(ErrorCode::InvalidConfig, "descriptor list is empty");
  std::sort(ids.begin(), ids.end(), [](KernelId a, KernelId b) { return static_cast<int>(a) < static_cast<int>(b); });
  return ids;
}

std::string format_descriptor_list(const std::vector<KernelId>& ids) {
  std::string out;
  for (KernelId id : ids) {
    if (!out.empty()) out += ',';
    out += descriptor_name(id);
  }
  return out;
}

void TrainConfig::validate() const {
  std::ostringstream problems;
  if (q < 1) problems << " q must be >= 1;";
  if (!(alpha > 0.0)) problems << " alpha must be positive;";
  if (target_dim < 1) problems << " target dimension must be >= 1;";
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) problems << " gamma must be finite and >= 0;";
  if (outer_iters < 1) problems << " outer iterations must be >= 1;";
  if (itr_iters < 1) problems << " trace-ratio iterations must be >= 1;";
  if (!(eps >= 0.0)) problems << " eps must be >= 0;";
  if (descriptors.empty()) problems << " at least one descriptor must be enabled;";
  const std::string msg = problems.str();
  if (!msg.empty()) fail(ErrorCode::InvalidConfig, "invalid training configuration:" + msg);
}

}  // namespace setfusion
