#include "setfusion/classifier.hpp"

#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {

ProbeEncoding encode_probe(const DescriptorTriple& probe, const ModelState& model) {
  if (model.gallery_features.size() != model.bank.size()) {
    fail(ErrorCode::ShapeMismatch, "model has no gallery attached");
  }
  if (!model.gallery.empty() && probe.dim() != model.gallery.front().dim()) {
    std::ostringstream os;
    os << "probe dimension " << probe.dim() << " does not match gallery dimension " << model.gallery.front().dim();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  ProbeEncoding enc;
  for (std::size_t q = 0; q < model.bank.size(); ++q) {
    const KernelMatrix& km = model.bank.kernels[q];
    enc.kernel_columns.push_back(
        cross_kernel_vector(kernel_feature(probe, km.id), model.gallery_features[q], km.id, km.scale));
  }
  enc.weights = gating_weights_for(enc.kernel_columns, model.gating);
  return enc;
}

double set_distance(const ProbeEncoding& probe, const ModelState& model, Index i) {
  if (i < 0 || i >= model.n_train()) {
    std::ostringstream os;
    os << "gallery index " << i << " outside [0, " << model.n_train() << ")";
    fail(ErrorCode::IndexOutOfRange, os.str());
  }
  double d = 0.0;
  for (std::size_t q = 0; q < model.bank.size(); ++q) {
    const Vector diff = probe.kernel_columns[q] - model.bank.gram(q).col(i);
    const double projected = (model.transform.transpose() * diff).squaredNorm();
    d += probe.weights(static_cast<Index>(q)) * projected * model.train_weights(static_cast<Index>(q), i);
  }
  return d;
}

double set_distance(const DescriptorTriple& probe, const ModelState& model, Index i) {
  return set_distance(encode_probe(probe, model), model, i);
}

Prediction predict(const DescriptorTriple& probe, const ModelState& model) {
  const ProbeEncoding enc = encode_probe(probe, model);
  const Index n = model.n_train();
  Prediction out;
  out.distances.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.distances(i) = set_distance(enc, model, i);
    if (out.nearest_index < 0 || out.distances(i) < out.distances(out.nearest_index)) out.nearest_index = i;
  }
  out.label_index = model.labels[static_cast<std::size_t>(out.nearest_index)];
  if (static_cast<std::size_t>(out.label_index) < model.class_names.size()) {
    out.label = model.class_names[static_cast<std::size_t>(out.label_index)];
  }
  return out;
}

Prediction predict(const ImageSet& probe, const ModelState& model) {
  return predict(encode_set(probe, model.config), model);
}

}  // namespace setfusion
