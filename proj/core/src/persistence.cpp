#include "setfusion/persistence.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

#include "setfusion/error.hpp"

namespace setfusion {
namespace {

namespace fs = std::filesystem;

constexpr char kMetaFile[] = "model.meta";
constexpr char kMagic[3] = {'S', 'F', 'A'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) fail(ErrorCode::ParseError, "bad number for '" + key + "': " + s);
  return v;
}

long long parse_int(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) fail(ErrorCode::ParseError, "bad integer for '" + key + "': " + s);
  return v;
}

ArrayFile from_matrix(const Matrix& m) {
  ArrayFile a;
  a.rank = 2;
  a.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols()), 1};
  a.values.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) a.values.push_back(m(i, j));
  return a;
}

ArrayFile from_vector(const Vector& v) {
  ArrayFile a;
  a.rank = 1;
  a.dims = {static_cast<std::uint32_t>(v.size()), 1, 1};
  a.values.assign(v.data(), v.data() + v.size());
  return a;
}

ArrayFile from_stack(const std::vector<Matrix>& ms, Index rows, Index cols) {
  ArrayFile a;
  a.rank = 3;
  a.dims = {static_cast<std::uint32_t>(ms.size()), static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols)};
  for (const Matrix& m : ms) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) a.values.push_back(m(i, j));
  }
  return a;
}

void require_shape(const ArrayFile& a, std::uint8_t rank, std::array<std::uint32_t, 3> dims, const std::string& name) {
  if (a.rank != rank || a.dims != dims) {
    std::ostringstream os;
    os << name << " has shape rank " << int(a.rank) << " [" << a.dims[0] << "," << a.dims[1] << "," << a.dims[2]
       << "], expected rank " << int(rank) << " [" << dims[0] << "," << dims[1] << "," << dims[2] << "]";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

Matrix to_matrix(const ArrayFile& a) {
  Matrix m(a.dims[0], a.dims[1]);
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = a.values[k++];
  return m;
}

Matrix stack_slice(const ArrayFile& a, std::size_t slice) {
  Matrix m(a.dims[1], a.dims[2]);
  std::size_t k = slice * a.dims[1] * a.dims[2];
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = a.values[k++];
  return m;
}

class MetaReader {
 public:
  explicit MetaReader(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorCode::ParseError, "malformed metadata line: " + line);
      values_[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorCode::ParseError, "metadata key '" + key + "' missing");
    return it->second;
  }
  double number(const std::string& key) const { return parse_double(get(key), key); }
  long long integer(const std::string& key) const { return parse_int(get(key), key); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

void write_array_file(const fs::path& path, const ArrayFile& array) {
  std::size_t expected = 1;
  for (int r = 0; r < 3; ++r) expected *= array.dims[static_cast<std::size_t>(r)];
  if (array.rank < 1 || array.rank > 3 || expected != array.values.size()) {
    fail(ErrorCode::ShapeMismatch, "array shape does not match its payload: " + path.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic, 3);
  out.put(static_cast<char>(array.rank));
  for (std::uint32_t d : array.dims) {
    const std::uint32_t le = to_little(d);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
  }
  for (double v : array.values) {
    const double le = to_little(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
  }
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

ArrayFile read_array_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  char header[16];
  if (!in.read(header, sizeof(header)) || std::memcmp(header, kMagic, 3) != 0) {
    fail(ErrorCode::ParseError, "bad array header in " + path.string());
  }
  ArrayFile a;
  a.rank = static_cast<std::uint8_t>(header[3]);
  if (a.rank < 1 || a.rank > 3) fail(ErrorCode::ParseError, "bad array rank in " + path.string());
  std::size_t count = 1;
  for (std::size_t r = 0; r < 3; ++r) {
    std::uint32_t d = 0;
    std::memcpy(&d, header + 4 + 4 * r, sizeof(d));
    a.dims[r] = to_little(d);
    count *= a.dims[r];
  }
  a.values.resize(count);
  for (double& v : a.values) {
    double raw = 0.0;
    if (!in.read(reinterpret_cast<char*>(&raw), sizeof(raw))) fail(ErrorCode::ParseError, "truncated array " + path.string());
    v = to_little(raw);
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::ParseError, "trailing bytes in " + path.string());
  return a;
}

std::uint32_t file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(got));
  }
  return static_cast<std::uint32_t>(crc);
}

void save_model(const ModelState& model, const fs::path& dir) {
  const Index n = model.n_train();
  if (static_cast<Index>(model.gallery.size()) != n || n == 0) {
    fail(ErrorCode::ShapeMismatch, "only models with an attached gallery can be saved");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  const Index d = model.gallery.front().dim();
  const Index q = model.gallery.front().subspace.subspace_dim();
  const std::size_t kernels = model.bank.size();

  std::vector<std::pair<std::string, ArrayFile>> arrays;
  arrays.emplace_back("transform.bin", from_matrix(model.transform));
  {
    Matrix deltas(static_cast<Index>(kernels), n);
    for (std::size_t k = 0; k < kernels; ++k) deltas.row(static_cast<Index>(k)) = model.gating.deltas[k].transpose();
    arrays.emplace_back("gating_deltas.bin", from_matrix(deltas));
  }
  arrays.emplace_back("gating_rhos.bin", from_vector(model.gating.rhos));
  arrays.emplace_back("train_weights.bin", from_matrix(model.train_weights.xi));
  {
    std::vector<Matrix> grams;
    for (const KernelMatrix& km : model.bank.kernels) grams.push_back(km.gram);
    arrays.emplace_back("grams.bin", from_stack(grams, n, n));
  }
  arrays.emplace_back("objective_trace.bin",
                      from_vector(Eigen::Map<const Vector>(model.objective_trace.data(),
                                                           static_cast<Index>(model.objective_trace.size()))));
  {
    std::vector<Matrix> cov, sub, emb;
    Matrix means(n, d);
    for (Index i = 0; i < n; ++i) {
      const DescriptorTriple& t = model.gallery[static_cast<std::size_t>(i)];
      cov.push_back(t.cov.matrix());
      sub.push_back(t.subspace.basis());
      emb.push_back(t.gauss.embedding.matrix());
      means.row(i) = t.gauss.mean.transpose();
    }
    arrays.emplace_back("cov.bin", from_stack(cov, d, d));
    arrays.emplace_back("subspace.bin", from_stack(sub, d, q));
    arrays.emplace_back("gauss_mean.bin", from_matrix(means));
    arrays.emplace_back("gauss_embedding.bin", from_stack(emb, d + 1, d + 1));
  }

  std::ostringstream meta;
  const TrainConfig& c = model.config;
  meta << "format=setfusion-model\n"
       << "format_version=" << kModelFormatVersion << '\n'
       << "n_train=" << n << '\n'
       << "feature_dim=" << d << '\n'
       << "subspace_dim=" << q << '\n'
       << "target_dim=" << model.transform.cols() << '\n'
       << "iterations=" << model.iterations << '\n'
       << "config.q=" << c.q << '\n'
       << "config.alpha=" << hex_double(c.alpha) << '\n'
       << "config.target_dim=" << c.target_dim << '\n'
       << "config.gamma=" << hex_double(c.gamma) << '\n'
       << "config.outer_iters=" << c.outer_iters << '\n'
       << "config.itr_iters=" << c.itr_iters << '\n'
       << "config.eps=" << hex_double(c.eps) << '\n'
       << "config.seed=" << c.seed << '\n'
       << "config.normalize_kernels=" << (c.normalize_kernels ? 1 : 0) << '\n'
       << "config.descriptors=" << format_descriptor_list(c.descriptors) << '\n';
  std::vector<KernelId> bank_ids;
  for (const KernelMatrix& km : model.bank.kernels) bank_ids.push_back(km.id);
  meta << "kernels=" << format_descriptor_list(bank_ids) << '\n';
  for (const KernelMatrix& km : model.bank.kernels) {
    meta << "kernel." << descriptor_name(km.id) << ".scale=" << hex_double(km.scale) << '\n'
         << "kernel." << descriptor_name(km.id) << ".normalized=" << (km.normalized ? 1 : 0) << '\n';
  }
  meta << "classes=" << model.class_names.size() << '\n';
  for (std::size_t k = 0; k < model.class_names.size(); ++k) {
    if (model.class_names[k].find('\n') != std::string::npos) fail(ErrorCode::BadSpec, "class name contains a newline");
    meta << "class." << k << '=' << model.class_names[k] << '\n';
  }
  for (Index i = 0; i < n; ++i) {
    const std::string& id = model.gallery[static_cast<std::size_t>(i)].set_id;
    if (id.find('\n') != std::string::npos) fail(ErrorCode::BadSpec, "set id contains a newline");
    meta << "set." << i << '=' << model.labels[static_cast<std::size_t>(i)] << ',' << id << '\n';
  }

  for (const auto& [name, array] : arrays) {
    write_array_file(dir / name, array);
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08" PRIx32, file_crc32(dir / name));
    meta << "checksum." << name << '=' << crc << '\n';
  }

  std::ofstream out(dir / kMetaFile);
  if (!out) fail(ErrorCode::IoError, "cannot write " + (dir / kMetaFile).string());
  out << meta.str();
  if (!out) fail(ErrorCode::IoError, "failed writing " + (dir / kMetaFile).string());
}

ModelState load_model(const fs::path& dir) {
  if (!fs::exists(dir / kMetaFile)) fail(ErrorCode::IoError, "no model metadata in " + dir.string());
  const MetaReader meta(dir / kMetaFile);
  if (!meta.has("format_version") || meta.get("format_version") != std::to_string(kModelFormatVersion)) {
    fail(ErrorCode::FormatVersionMismatch, "model format version '" +
                                               (meta.has("format_version") ? meta.get("format_version") : "") +
                                               "', expected " + std::to_string(kModelFormatVersion));
  }

  auto load = [&](const std::string& name) {
    const fs::path p = dir / name;
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08" PRIx32, file_crc32(p));
    if (meta.get("checksum." + name) != crc) fail(ErrorCode::ChecksumMismatch, "checksum mismatch for " + p.string());
    return read_array_file(p);
  };

  const auto n = static_cast<std::uint32_t>(meta.integer("n_train"));
  const auto d = static_cast<std::uint32_t>(meta.integer("feature_dim"));
  const auto q = static_cast<std::uint32_t>(meta.integer("subspace_dim"));
  const auto dw = static_cast<std::uint32_t>(meta.integer("target_dim"));

  ModelState model;
  TrainConfig& c = model.config;
  c.q = static_cast<int>(meta.integer("config.q"));
  c.alpha = meta.number("config.alpha");
  c.target_dim = static_cast<int>(meta.integer("config.target_dim"));
  c.gamma = meta.number("config.gamma");
  c.outer_iters = static_cast<int>(meta.integer("config.outer_iters"));
  c.itr_iters = static_cast<int>(meta.integer("config.itr_iters"));
  c.eps = meta.number("config.eps");
  c.seed = std::strtoull(meta.get("config.seed").c_str(), nullptr, 10);
  c.normalize_kernels = meta.integer("config.normalize_kernels") != 0;
  c.descriptors = parse_descriptor_list(meta.get("config.descriptors"));
  model.iterations = static_cast<int>(meta.integer("iterations"));

  const std::vector<KernelId> ids = parse_descriptor_list(meta.get("kernels"));
  const auto kernels = static_cast<std::uint32_t>(ids.size());

  const ArrayFile transform = load("transform.bin");
  require_shape(transform, 2, {n, dw, 1}, "transform");
  model.transform = to_matrix(transform);

  const ArrayFile deltas = load("gating_deltas.bin");
  require_shape(deltas, 2, {kernels, n, 1}, "gating deltas");
  const Matrix delta_rows = to_matrix(deltas);
  for (std::uint32_t k = 0; k < kernels; ++k) model.gating.deltas.push_back(delta_rows.row(k).transpose());
  const ArrayFile rhos = load("gating_rhos.bin");
  require_shape(rhos, 1, {kernels, 1, 1}, "gating rhos");
  model.gating.rhos = Eigen::Map<const Vector>(rhos.values.data(), kernels);

  const ArrayFile weights = load("train_weights.bin");
  require_shape(weights, 2, {kernels, n, 1}, "training weights");
  model.train_weights.xi = to_matrix(weights);

  const ArrayFile grams = load("grams.bin");
  require_shape(grams, 3, {kernels, n, n}, "Gram matrices");
  for (std::uint32_t k = 0; k < kernels; ++k) {
    const std::string key = "kernel." + std::string(descriptor_name(ids[k]));
    model.bank.kernels.push_back(
        KernelMatrix{ids[k], stack_slice(grams, k), meta.number(key + ".scale"), meta.integer(key + ".normalized") != 0});
  }

  const ArrayFile trace = load("objective_trace.bin");
  model.objective_trace = trace.values;

  const ArrayFile cov = load("cov.bin");
  require_shape(cov, 3, {n, d, d}, "covariance descriptors");
  const ArrayFile sub = load("subspace.bin");
  require_shape(sub, 3, {n, d, q}, "subspace descriptors");
  const ArrayFile means = load("gauss_mean.bin");
  require_shape(means, 2, {n, d, 1}, "Gaussian means");
  const ArrayFile emb = load("gauss_embedding.bin");
  require_shape(emb, 3, {n, d + 1, d + 1}, "Gaussian embeddings");
  const Matrix mean_rows = to_matrix(means);

  const auto classes = static_cast<std::size_t>(meta.integer("classes"));
  std::vector<std::string> class_names;
  for (std::size_t k = 0; k < classes; ++k) class_names.push_back(meta.get("class." + std::to_string(k)));

  std::vector<DescriptorTriple> gallery;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string entry = meta.get("set." + std::to_string(i));
    const auto comma = entry.find(',');
    if (comma == std::string::npos) fail(ErrorCode::ParseError, "malformed gallery entry " + entry);
    const int label = static_cast<int>(parse_int(entry.substr(0, comma), "set label"));
    if (label < 0 || static_cast<std::size_t>(label) >= classes) fail(ErrorCode::ParseError, "gallery label out of range");
    model.labels.push_back(label);

    SpdMatrix c_i(stack_slice(cov, i));
    GaussianDescriptor g{mean_rows.row(i).transpose(), c_i, SpdMatrix(stack_slice(emb, i))};
    gallery.push_back(DescriptorTriple{std::move(c_i), GrassmannPoint(stack_slice(sub, i)), std::move(g),
                                       class_names[static_cast<std::size_t>(label)], entry.substr(comma + 1)});
  }
  attach_gallery(model, std::move(gallery), std::move(class_names));
  return model;
}

}  // namespace setfusion
