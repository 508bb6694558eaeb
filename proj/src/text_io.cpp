#include "wmfcc/text_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wmfcc/error.hpp"

namespace wmfcc {

namespace {

constexpr const char* kFeatureMagic = "wmfcc-features 1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string expect_field(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::MalformedFile, "feature file ends before '" + key + "'");
  if (line.compare(0, key.size(), key) != 0 || (line.size() > key.size() && line[key.size()] != ' '))
    fail(ErrorCode::MalformedFile, "expected '" + key + "', got '" + line + "'");
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::MalformedFile, "bad integer for " + key + ": '" + s + "'");
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vector_file(const std::filesystem::path& path, const VectorXd& v) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << '\n';
}

VectorXd read_vector_file(const std::filesystem::path& path) {
  std::istringstream in(slurp(path));
  std::vector<double> values;
  double x;
  while (in >> x) values.push_back(x);
  if (!in.eof()) fail(ErrorCode::MalformedFile, "non-numeric entry in " + path.string());
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

void write_matrix_file(const std::filesystem::path& path, const MatrixXd& m) {
  auto out = open_out(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_real(m(r, c));
    out << '\n';
  }
}

void write_decomposition(const std::filesystem::path& dir, const WaveletDecomposition<double>& d) {
  std::filesystem::create_directories(dir);
  write_vector_file(dir / ("CA" + std::to_string(d.level) + ".txt"), d.approx);
  for (int l = d.level; l >= 1; --l)
    write_vector_file(dir / ("CD" + std::to_string(l) + ".txt"), d.detail(l));
}

void write_dtw_dump(const std::filesystem::path& dir, const DtwResult<double>& result) {
  std::filesystem::create_directories(dir);
  if (result.local_cost.size() > 0) write_matrix_file(dir / "local_cost.txt", result.local_cost);
  if (result.accumulated_cost.size() > 0)
    write_matrix_file(dir / "accumulated_cost.txt", result.accumulated_cost);
  auto out = open_out(dir / "path.txt");
  for (const auto& [i, j] : result.path.points) out << i << ' ' << j << '\n';
}

std::string features_to_string(const FeatureSequence& seq) {
  std::ostringstream out;
  out << kFeatureMagic << '\n'
      << "kind " << to_string(seq.kind) << '\n'
      << "dim " << seq.dim() << '\n'
      << "frames " << seq.frames() << '\n'
      << "frame_len " << seq.meta.frame_len << '\n'
      << "hop " << seq.meta.hop << '\n'
      << "sample_rate " << seq.meta.sample_rate_hz << '\n'
      << "channels";
  for (const auto& c : seq.channels) out << ' ' << c;
  out << '\n' << "config_hash " << seq.config_hash << '\n' << "data\n";
  for (Index t = 0; t < seq.frames(); ++t) {
    for (Index d = 0; d < seq.dim(); ++d) out << (d ? " " : "") << format_real(seq.vectors(t, d));
    out << '\n';
  }
  return out.str();
}

FeatureSequence features_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kFeatureMagic)
    fail(ErrorCode::MalformedFile, "missing feature-file header");
  FeatureSequence seq;
  try {
    seq.kind = parse_feature_kind(expect_field(in, "kind"));
  } catch (const Error&) {
    fail(ErrorCode::MalformedFile, "unknown feature kind");
  }
  const long dim = parse_long(expect_field(in, "dim"), "dim");
  const long frames = parse_long(expect_field(in, "frames"), "frames");
  seq.meta.frame_len = static_cast<int>(parse_long(expect_field(in, "frame_len"), "frame_len"));
  seq.meta.hop = static_cast<int>(parse_long(expect_field(in, "hop"), "hop"));
  seq.meta.sample_rate_hz = static_cast<int>(parse_long(expect_field(in, "sample_rate"), "sample_rate"));
  std::istringstream channels(expect_field(in, "channels"));
  for (std::string c; channels >> c;) seq.channels.push_back(c);
  seq.config_hash = expect_field(in, "config_hash");
  expect_field(in, "data");
  if (dim < 1 || frames < 1) fail(ErrorCode::MalformedFile, "feature file needs dim >= 1 and frames >= 1");

  seq.vectors.resize(frames, dim);
  for (long t = 0; t < frames; ++t) {
    if (!std::getline(in, line)) fail(ErrorCode::MalformedFile, "truncated feature data");
    const char* cursor = line.c_str();
    for (long d = 0; d < dim; ++d) {
      char* end = nullptr;
      seq.vectors(t, d) = std::strtod(cursor, &end);
      if (end == cursor)
        fail(ErrorCode::MalformedFile, "row " + std::to_string(t) + " has fewer than dim values");
      cursor = end;
    }
    while (*cursor == ' ' || *cursor == '\t' || *cursor == '\r') ++cursor;
    if (*cursor != '\0') fail(ErrorCode::MalformedFile, "row " + std::to_string(t) + " has extra values");
  }
  return seq;
}

void write_features(const std::filesystem::path& path, const FeatureSequence& seq) {
  auto out = open_out(path);
  out << features_to_string(seq);
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

FeatureSequence read_features(const std::filesystem::path& path) {
  return features_from_string(slurp(path));
}

bool is_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  return in && std::getline(in, line) && line == kFeatureMagic;
}

}  // namespace wmfcc
