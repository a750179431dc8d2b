#pragma once

#include <string>
#include <vector>

#include "setfusion/metric_learning.hpp"

namespace setfusion {

struct Prediction {
  std::string label;
  int label_index = -1;
  Vector distances;     ///< distance to every gallery set
  Index nearest_index = -1;
};

/// Cross-kernel vectors of one probe against the gallery and its gate values.
struct ProbeEncoding {
  std::vector<Vector> kernel_columns;  ///< K^q_{.te}, one per bank kernel
  Vector weights;                      ///< xi_q(te)
};

ProbeEncoding encode_probe(const DescriptorTriple& probe, const ModelState& model);

/// sum_q xi_q(te) xi_q(i) ||E^T (K^q_{.te} - K^q_{.i})||^2.
double set_distance(const ProbeEncoding& probe, const ModelState& model, Index i);
double set_distance(const DescriptorTriple& probe, const ModelState& model, Index i);

/// Nearest gallery set by set_distance; ties go to the lowest index.
Prediction predict(const DescriptorTriple& probe, const ModelState& model);
Prediction predict(const ImageSet& probe, const ModelState& model);

}  // namespace setfusion
