#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "wmfcc/dtw.hpp"
#include "wmfcc/features.hpp"
#include "wmfcc/hmm_train.hpp"
#include "wmfcc/mfcc.hpp"

namespace wmfcc {

struct NoiseConfig {
  double snr_db = 20.0;
};

struct CorpusConfig {
  int n_speakers = 10;
  int n_utts = 15;
  int n_train = 10;
  int sample_rate_hz = 8000;
};

// Every tunable of the pipeline. The JSON form is the config file; its hash
// is stamped into features, models and reports.
struct PipelineConfig {
  MfccConfig mfcc;      // plain MFCC features
  HybridConfig hybrid;  // wavelet-MFCC features (carries its own per-channel MfccConfig)
  HmmTrainConfig hmm;
  DtwOptions dtw;
  NoiseConfig noise;
  CorpusConfig corpus;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);
std::string fnv1a_hex(const std::string& bytes);

// Feature extraction for a clip under the configured scheme, stamped with
// the config hash.
FeatureSequence extract_features(const AudioClip& clip, FeatureKind kind,
                                 const PipelineConfig& config);

}  // namespace wmfcc
