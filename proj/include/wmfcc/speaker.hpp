#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmfcc/feature_sequence.hpp"
#include "wmfcc/hmm.hpp"

namespace wmfcc {

struct SpeakerModel {
  std::string speaker_id;
  Hmm<double> hmm;
  FeatureKind feature_kind = FeatureKind::Mfcc;
  std::string config_hash;
};

struct Identification {
  std::string speaker_id;
  std::vector<std::pair<std::string, double>> ranked;  // best first
};

// Orders (speaker, score) pairs by descending score, ties by ascending id.
Identification rank_scores(std::vector<std::pair<std::string, double>> scores);

// Highest forward log-likelihood wins; ties go to the lowest speaker id.
Identification identify(const std::vector<SpeakerModel>& models, const FeatureSequence& seq);

// Model file: JSON, "format": "wmfcc-model", "version": 1.
nlohmann::json to_json(const SpeakerModel& model);
SpeakerModel speaker_model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const SpeakerModel& model);
SpeakerModel load_model(const std::filesystem::path& path);

// Loads every *.model.json in dir, sorted by speaker id.
std::vector<SpeakerModel> load_models(const std::filesystem::path& dir);

}  // namespace wmfcc
