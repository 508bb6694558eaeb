// wmfcc: feature extraction, training, identification and the evaluation
// harness from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmfcc/audio.hpp"
#include "wmfcc/config.hpp"
#include "wmfcc/corpus.hpp"
#include "wmfcc/dtw.hpp"
#include "wmfcc/experiment.hpp"
#include "wmfcc/speaker.hpp"
#include "wmfcc/text_io.hpp"

namespace fs = std::filesystem;
using namespace wmfcc;

namespace {

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string model_file_name(const std::string& id) { return id + ".model.json"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-MFCC speaker identification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string in_path, out_path, feature = "wavelet-mfcc";
  std::string corpus_arg, models_dir, a_path, b_path, dump_dir, backend = "hmm";
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  int threads = 1;
  int n_speakers = 10, n_utts = 15, sample_rate = 8000;
  bool show_table = true;

  auto* extract = app.add_subcommand("extract", "Compute MFCC or wavelet-MFCC features of a WAV file");
  extract->add_option("--in", in_path, "Input WAV")->required();
  extract->add_option("--feature", feature, "mfcc | wavelet-mfcc")->required();
  extract->add_option("--out", out_path, "Output feature file")->required();
  extract->add_option("--config", config_path, "Pipeline config (JSON)");

  auto* train = app.add_subcommand("train", "Train one HMM per speaker of a corpus");
  train->add_option("--corpus", corpus_arg, "Corpus directory")->required();
  train->add_option("--feature", feature, "mfcc | wavelet-mfcc")->required();
  train->add_option("--out", out_path, "Model directory")->required();
  train->add_option("--seed", seed, "Training seed (default: config seed)");
  train->add_option("--config", config_path, "Pipeline config (JSON)");
  train->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* ident = app.add_subcommand("identify", "Rank trained speakers for an utterance");
  ident->add_option("--models", models_dir, "Model directory")->required();
  ident->add_option("--in", in_path, "WAV or feature file")->required();
  ident->add_option("--config", config_path, "Pipeline config used for WAV input");

  auto* dtw = app.add_subcommand("dtw", "DTW distance between two feature files");
  dtw->add_option("--a", a_path, "First feature file")->required();
  dtw->add_option("--b", b_path, "Second feature file")->required();
  dtw->add_option("--dump-matrices", dump_dir, "Write local/accumulated cost and path here");
  dtw->add_option("--config", config_path, "Pipeline config (JSON)");

  auto* noise = app.add_subcommand("add-noise", "Add white Gaussian noise at a given SNR");
  noise->add_option("--in", in_path, "Input WAV")->required();
  noise->add_option("--snr-db", snr_db, "Target SNR in dB")->required();
  noise->add_option("--seed", seed, "Noise seed")->required();
  noise->add_option("--out", out_path, "Output WAV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Run the clean/noisy identification experiment");
  evaluate->add_option("--corpus", corpus_arg, "Corpus directory or synth:SEED")->required();
  evaluate->add_option("--out", out_path, "Report JSON")->required();
  evaluate->add_option("--snr-db", snr_db, "SNR of the noisy condition (default 20)");
  evaluate->add_option("--backend", backend, "hmm | dtw")->check(CLI::IsMember({"hmm", "dtw"}));
  evaluate->add_option("--seed", seed, "Experiment seed (default: config seed)");
  evaluate->add_option("--config", config_path, "Pipeline config (JSON)");
  evaluate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  evaluate->add_flag("!--no-table", show_table, "Do not print the rate table");

  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic corpus");
  synth->add_option("--speakers", n_speakers, "Number of speakers");
  synth->add_option("--utts", n_utts, "Utterances per speaker");
  synth->add_option("--seed", seed, "Corpus seed")->required();
  synth->add_option("--out", out_path, "Output directory")->required();
  synth->add_option("--sample-rate", sample_rate, "Sample rate in Hz");

  auto* defaults = app.add_subcommand("default-config", "Print the default pipeline config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      const PipelineConfig config = config_or_default(config_path);
      write_features(out_path, extract_features(load_wav(in_path), parse_feature_kind(feature), config));
    } else if (*train) {
      PipelineConfig config = config_or_default(config_path);
      const FeatureKind kind = parse_feature_kind(feature);
      const Corpus corpus = load_corpus(corpus_arg);
      std::vector<TrainingSummary> summaries;
      const auto models =
          train_speaker_models(corpus, kind, config, seed.value_or(config.seed), threads, &summaries);
      fs::create_directories(out_path);
      for (const auto& m : models) save_model(fs::path(out_path) / model_file_name(m.speaker_id), m);
      for (const auto& s : summaries) {
        if (!s.error.empty())
          std::cerr << s.speaker_id << ": training failed: " << s.error << '\n';
        else
          std::cerr << s.speaker_id << ": " << s.iterations << " iterations, log-likelihood "
                    << format_real(s.log_likelihood) << (s.converged ? "" : " (not converged)") << '\n';
      }
      if (models.empty()) fail(ErrorCode::EmptyTrainingSet, "no speaker model could be trained");
    } else if (*ident) {
      const auto models = load_models(models_dir);
      if (models.empty()) fail(ErrorCode::EmptyModelSet, "no *.model.json in " + models_dir);
      FeatureSequence seq;
      if (is_feature_file(in_path)) {
        seq = read_features(in_path);
      } else {
        const PipelineConfig config = config_or_default(config_path);
        seq = extract_features(load_wav(in_path), models.front().feature_kind, config);
        if (seq.config_hash != models.front().config_hash)
          std::cerr << "warning: config hash " << seq.config_hash << " differs from the models' "
                    << models.front().config_hash << '\n';
      }
      const Identification result = identify(models, seq);
      int rank = 1;
      for (const auto& [id, score] : result.ranked)
        std::cout << rank++ << ' ' << id << ' ' << format_real(score) << '\n';
    } else if (*dtw) {
      const PipelineConfig config = config_or_default(config_path);
      DtwOptions options = config.dtw;
      options.keep_matrices = !dump_dir.empty();
      const auto result = dtw_distance(read_features(a_path), read_features(b_path), options);
      std::cout << format_real(result.distance) << '\n';
      if (!dump_dir.empty()) write_dtw_dump(dump_dir, result);
    } else if (*noise) {
      AwgnStats stats;
      save_wav(out_path, add_awgn(load_wav(in_path), *snr_db, *seed, &stats));
      if (stats.clipped_samples > 0)
        std::cerr << "warning: " << stats.clipped_samples << " samples clipped to [-1, 1]\n";
    } else if (*evaluate) {
      PipelineConfig config = config_or_default(config_path);
      if (snr_db) config.noise.snr_db = *snr_db;
      const std::uint64_t run_seed = seed.value_or(config.seed);
      Corpus corpus;
      if (corpus_arg.rfind("synth:", 0) == 0) {
        const std::uint64_t corpus_seed = std::stoull(corpus_arg.substr(6));
        const auto& c = config.corpus;
        corpus = synth_corpus(c.n_speakers, c.n_utts, c.sample_rate_hz, corpus_seed, c.n_train);
      } else {
        corpus = load_corpus(corpus_arg);
      }
      const EvalReport report = parse_backend(backend) == Backend::Hmm
                                    ? run_experiment(corpus, config, run_seed, threads)
                                    : dtw_experiment(corpus, config, run_seed, threads);
      write_text(out_path, to_json(report).dump(2) + "\n");
      if (show_table) std::cout << render_table(report);
    } else if (*synth) {
      save_corpus(out_path, synth_corpus(n_speakers, n_utts, sample_rate, *seed));
    } else if (*defaults) {
      std::cout << to_json(PipelineConfig{}).dump(2) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
