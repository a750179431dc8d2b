#include "setfusion/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_error(const fs::path& file, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << file.string() << ":" << line << ": " << what;
  fail(ErrorCode::ParseError, os.str());
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Matrix read_set_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open set file " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (std::string_view field : split_fields(line)) {
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        parse_error(path, line_no, "non-numeric token '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) parse_error(path, line_no, "non-finite value");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << "row has " << row.size() << " columns, expected " << rows.front().size();
      parse_error(path, line_no, os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_error(path, line_no, "empty set file");

  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_set_file(const fs::path& path, const Matrix& features) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write set file " + path.string());
  for (Index i = 0; i < features.rows(); ++i) {
    for (Index j = 0; j < features.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(features(i, j));
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

DatasetManifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::IoError, "cannot open manifest " + manifest_path.string());

  DatasetManifest manifest;
  manifest.root = manifest_path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "set_id" || fields[1] != "label" || fields[2] != "path") {
        parse_error(manifest_path, line_no, "expected header 'set_id,label,path'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      parse_error(manifest_path, line_no, "expected three non-empty fields");
    }
    manifest.entries.push_back(ManifestEntry{std::string(fields[0]), std::string(fields[1]), fs::path(std::string(fields[2]))});
  }
  if (!header_seen) parse_error(manifest_path, line_no, "missing header");
  return manifest;
}

std::vector<ImageSet> load_dataset(const fs::path& manifest_path) {
  DatasetManifest manifest = read_manifest(manifest_path);
  std::vector<ImageSet> sets;
  std::set<std::string> ids;
  for (const ManifestEntry& e : manifest.entries) {
    if (!ids.insert(e.set_id).second) fail(ErrorCode::ParseError, "duplicate set_id '" + e.set_id + "' in manifest");
    const fs::path file = e.path.is_absolute() ? e.path : manifest.root / e.path;
    ImageSet s{read_set_file(file), e.label, e.set_id};
    if (!sets.empty() && s.dim() != sets.front().dim()) {
      std::ostringstream os;
      os << "set '" << e.set_id << "' has dimension " << s.dim() << ", expected " << sets.front().dim();
      fail(ErrorCode::DimensionMismatch, os.str());
    }
    if (s.size() < 2) fail(ErrorCode::TooFewSamples, "set '" + e.set_id + "' has fewer than two samples");
    sets.push_back(std::move(s));
  }
  return sets;
}

fs::path save_dataset(std::span<const ImageSet> sets, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "sets", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + (dir / "sets").string() + ": " + ec.message());

  const fs::path manifest_path = dir / "manifest.csv";
  std::ofstream manifest(manifest_path);
  if (!manifest) fail(ErrorCode::IoError, "cannot write " + manifest_path.string());
  manifest << "set_id,label,path\n";
  for (const ImageSet& s : sets) {
    if (s.set_id.find_first_of(",/\n") != std::string::npos || s.label.find_first_of(",\n") != std::string::npos) {
      fail(ErrorCode::BadSpec, "set id or label contains a reserved character: " + s.set_id);
    }
    const fs::path rel = fs::path("sets") / (s.set_id + ".csv");
    write_set_file(dir / rel, s.features);
    manifest << s.set_id << ',' << s.label << ',' << rel.generic_string() << '\n';
  }
  if (!manifest) fail(ErrorCode::IoError, "failed writing " + manifest_path.string());
  return manifest_path;
}

std::vector<ImageSet> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.sets_per_class < 1 || spec.dim < 2 || spec.samples_per_set < 2 ||
      !(spec.class_separation >= 0.0) || !std::isfinite(spec.class_separation)) {
    fail(ErrorCode::BadSpec, "synthetic spec needs classes, sets >= 1, dim >= 2, samples >= 2, separation >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index d = spec.dim;
  auto gaussian = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };

  std::vector<Vector> centres;
  for (int c = 0; c < spec.classes; ++c) centres.push_back(spec.class_separation * gaussian(d, 1).col(0));

  std::vector<ImageSet> sets;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.sets_per_class; ++s) {
      const Vector mean = centres[static_cast<std::size_t>(c)] + gaussian(d, 1).col(0);
      const Matrix g = gaussian(d, d) / std::sqrt(static_cast<double>(d));
      const Matrix cov = g * g.transpose() + 0.1 * Matrix::Identity(d, d);
      const Matrix lower = Eigen::LLT<Matrix>(cov).matrixL();
      Matrix samples = (lower * gaussian(d, spec.samples_per_set)).colwise() + mean;

      char label[32];
      char id[48];
      std::snprintf(label, sizeof(label), "class_%02d", c);
      std::snprintf(id, sizeof(id), "c%02d_s%03d", c, s);
      sets.push_back(ImageSet{std::move(samples), label, id});
    }
  }
  return sets;
}

}  // namespace setfusion
