#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmfcc/config.hpp"
#include "wmfcc/corpus.hpp"
#include "wmfcc/speaker.hpp"

// Speaker-identification experiment: train on each speaker's training
// utterances, identify held-out utterances clean and with additive white
// Gaussian noise, for plain MFCC and wavelet-MFCC features.

namespace wmfcc {

enum class Backend { Hmm, Dtw };

constexpr std::string_view to_string(Backend b) { return b == Backend::Hmm ? "hmm" : "dtw"; }
Backend parse_backend(std::string_view text);

inline constexpr const char* kReportSchema = "wmfcc-report/1";

struct UtteranceResult {
  std::string speaker_id;
  int utterance = 0;
  std::string predicted;  // empty when scoring failed
  std::vector<std::pair<std::string, double>> ranked;  // best first; log-likelihood or DTW distance
  std::string error;
};

struct ConditionResult {
  FeatureKind kind = FeatureKind::Mfcc;
  bool noisy = false;
  double snr_db = 0;
  int correct = 0;
  int total = 0;   // utterances scored
  int failed = 0;  // utterances whose features or scores could not be computed
  double rate = 0; // correct / total
  std::vector<std::vector<int>> confusion;  // [true speaker][predicted speaker]
  std::vector<UtteranceResult> utterances;
};

struct TrainingSummary {
  std::string speaker_id;
  FeatureKind kind = FeatureKind::Mfcc;
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0;
  std::vector<int> collapsed_states;
  std::string error;
};

struct EvalReport {
  Backend backend = Backend::Hmm;
  PipelineConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> speakers;
  std::vector<ConditionResult> conditions;  // clean x {wavelet, mfcc}, then noisy x {wavelet, mfcc}
  std::vector<TrainingSummary> training;
  std::size_t clipped_samples = 0;          // noise-injection clipping events, all test clips

  const ConditionResult& cell(FeatureKind kind, bool noisy) const;
};

// One model per speaker: init_hmm + baum_welch on that speaker's training
// features. Speakers whose training fails are omitted (see summaries).
std::vector<SpeakerModel> train_speaker_models(const Corpus& corpus, FeatureKind kind,
                                               const PipelineConfig& config, std::uint64_t seed,
                                               int threads = 1,
                                               std::vector<TrainingSummary>* summaries = nullptr);

EvalReport run_experiment(const Corpus& corpus, const PipelineConfig& config, std::uint64_t seed,
                          int threads = 1);

// Same protocol with every training utterance as a DTW reference template.
EvalReport dtw_experiment(const Corpus& corpus, const PipelineConfig& config, std::uint64_t seed,
                          int threads = 1);

nlohmann::json to_json(const EvalReport& report);

// Empty when j follows the report schema, otherwise the first violation.
std::string validate_report(const nlohmann::json& j);

// Text table laid out like the published recognition-rate table, with the
// published rates alongside for comparison.
std::string render_table(const EvalReport& report);

}  // namespace wmfcc
