#include "wmfcc/speaker.hpp"

#include <algorithm>
#include <fstream>

namespace wmfcc {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "wmfcc-model";
constexpr int kModelVersion = 1;

json vector_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    const VectorXd row = m.row(r).transpose();
    rows.push_back(vector_json(row));
  }
  return rows;
}

VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

MatrixXd matrix_from(const json& j, Index expected_cols) {
  if (!j.is_array()) fail(ErrorCode::MalformedFile, "matrix must be an array of rows");
  MatrixXd m(static_cast<Index>(j.size()), expected_cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const VectorXd row = vector_from(j[r]);
    if (row.size() != expected_cols) fail(ErrorCode::MalformedFile, "ragged matrix in model file");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

}  // namespace

Identification rank_scores(std::vector<std::pair<std::string, double>> scores) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Identification out;
  out.speaker_id = scores.empty() ? std::string() : scores.front().first;
  out.ranked = std::move(scores);
  return out;
}

Identification identify(const std::vector<SpeakerModel>& models, const FeatureSequence& seq) {
  if (models.empty()) fail(ErrorCode::EmptyModelSet, "no speaker models");
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(models.size());
  for (const auto& m : models) {
    if (m.feature_kind != seq.kind)
      fail(ErrorCode::FeatureKindMismatch, "model " + m.speaker_id + " expects " +
                                               std::string(to_string(m.feature_kind)) + " features");
    scores.emplace_back(m.speaker_id, forward_log_likelihood(m.hmm, seq.vectors));
  }
  return rank_scores(std::move(scores));
}

json to_json(const SpeakerModel& model) {
  const auto& h = model.hmm;
  json states = json::array();
  for (const auto& mix : h.emissions)
    states.push_back({{"weights", vector_json(mix.weights)},
                      {"means", matrix_json(mix.means)},
                      {"variances", matrix_json(mix.variances)}});
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"speaker_id", model.speaker_id},
          {"feature_kind", std::string(to_string(model.feature_kind))},
          {"config_hash", model.config_hash},
          {"topology",
           {{"n_states", h.states()},
            {"feature_dim", h.dim()},
            {"max_jump", h.max_jump},
            {"termination", std::string(to_string(h.termination))}}},
          {"initial", vector_json(h.initial)},
          {"transitions", matrix_json(h.transitions)},
          {"variance_floor", vector_json(h.variance_floor)},
          {"states", states}};
}

SpeakerModel speaker_model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      fail(ErrorCode::MalformedFile, "not a speaker model file");
    if (j.at("version").get<int>() != kModelVersion)
      fail(ErrorCode::MalformedFile, "unsupported model version");
    SpeakerModel m;
    m.speaker_id = j.at("speaker_id").get<std::string>();
    m.feature_kind = parse_feature_kind(j.at("feature_kind").get<std::string>());
    m.config_hash = j.at("config_hash").get<std::string>();
    const json& topo = j.at("topology");
    const Index n = topo.at("n_states").get<Index>();
    const Index dim = topo.at("feature_dim").get<Index>();
    m.hmm.max_jump = topo.at("max_jump").get<int>();
    m.hmm.termination = parse_termination(topo.at("termination").get<std::string>());
    m.hmm.initial = vector_from(j.at("initial"));
    m.hmm.transitions = matrix_from(j.at("transitions"), n);
    m.hmm.variance_floor = vector_from(j.at("variance_floor"));
    const json& states = j.at("states");
    if (!states.is_array() || static_cast<Index>(states.size()) != n)
      fail(ErrorCode::MalformedFile, "state count does not match topology");
    for (const auto& s : states) {
      GaussianMixture<double> mix;
      mix.weights = vector_from(s.at("weights"));
      mix.means = matrix_from(s.at("means"), dim);
      mix.variances = matrix_from(s.at("variances"), dim);
      if (mix.means.rows() != mix.components() || mix.variances.rows() != mix.components())
        fail(ErrorCode::MalformedFile, "mixture component counts disagree");
      m.hmm.emissions.push_back(std::move(mix));
    }
    if (const std::string bad = m.hmm.check(1e-9); !bad.empty())
      fail(ErrorCode::MalformedFile, "invalid model: " + bad);
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, std::string("model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedFile) throw;
    fail(ErrorCode::MalformedFile, e.what());
  }
}

void save_model(const std::filesystem::path& path, const SpeakerModel& model) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(model).dump(1) << '\n';
}

SpeakerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
  }
  return speaker_model_from_json(j);
}

std::vector<SpeakerModel> load_models(const std::filesystem::path& dir) {
  std::vector<SpeakerModel> models;
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 11 && name.ends_with(".model.json"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) models.push_back(load_model(f));
  std::sort(models.begin(), models.end(),
            [](const auto& a, const auto& b) { return a.speaker_id < b.speaker_id; });
  return models;
}

}  // namespace wmfcc
