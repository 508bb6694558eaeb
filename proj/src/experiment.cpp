#include "wmfcc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "wmfcc/dtw.hpp"
#include "wmfcc/hmm_train.hpp"
#include "wmfcc/random.hpp"

namespace wmfcc {

using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ULL;
constexpr std::uint64_t kTrainSalt = 0x747261696eULL;

constexpr FeatureKind kTableKinds[2] = {FeatureKind::WaveletMfcc, FeatureKind::Mfcc};

// Published recognition rates, keyed by backend, noise condition and kind.
std::optional<double> published_rate(Backend backend, bool noisy, FeatureKind kind) {
  const bool wavelet = kind == FeatureKind::WaveletMfcc;
  if (backend == Backend::Hmm) {
    if (!noisy) return wavelet ? 0.993 : 0.987;
    return wavelet ? 0.973 : 0.933;
  }
  if (!noisy) return wavelet ? 0.986 : 0.980;
  return std::nullopt;
}

struct TestClip {
  std::size_t speaker = 0;
  int utterance = 0;
  const AudioClip* clean = nullptr;
  std::optional<AudioClip> noisy;
  std::string noise_error;
};

std::vector<TestClip> prepare_tests(const Corpus& corpus, const PipelineConfig& config,
                                    std::uint64_t seed, std::size_t* clipped) {
  std::vector<TestClip> tests;
  *clipped = 0;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    for (const auto& u : corpus.speakers[s].test) {
      TestClip t;
      t.speaker = s;
      t.utterance = u.index;
      t.clean = &u.clip;
      try {
        AwgnStats stats;
        t.noisy = add_awgn(u.clip, config.noise.snr_db,
                           derive_seed(seed ^ kNoiseSalt, s, static_cast<std::uint64_t>(u.index)), &stats);
        *clipped += stats.clipped_samples;
      } catch (const Error& e) {
        t.noise_error = e.what();
      }
      tests.push_back(std::move(t));
    }
  }
  return tests;
}

using Scorer = std::function<std::vector<std::pair<std::string, double>>(const FeatureSequence&)>;

ConditionResult score_condition(const Corpus& corpus, const std::vector<TestClip>& tests,
                                FeatureKind kind, bool noisy, const PipelineConfig& config,
                                const Scorer& scorer, int threads) {
  ConditionResult cell;
  cell.kind = kind;
  cell.noisy = noisy;
  cell.snr_db = noisy ? config.noise.snr_db : 0.0;
  cell.utterances.resize(tests.size());
  detail::parallel_for(tests.size(), threads, [&](std::size_t i) {
    const TestClip& t = tests[i];
    UtteranceResult& r = cell.utterances[i];
    r.speaker_id = corpus.speakers[t.speaker].id;
    r.utterance = t.utterance;
    try {
      if (noisy && !t.noisy) fail(ErrorCode::ZeroSignalPower, t.noise_error);
      const AudioClip& clip = noisy ? *t.noisy : *t.clean;
      r.ranked = scorer(extract_features(clip, kind, config));
      if (r.ranked.empty()) fail(ErrorCode::EmptyModelSet, "no trained speaker to compare against");
      r.predicted = r.ranked.front().first;
    } catch (const Error& e) {
      r.error = e.what();
      r.ranked.clear();
    }
  });

  std::map<std::string, std::size_t> column;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) column[corpus.speakers[s].id] = s;
  const std::size_t n = corpus.speakers.size();
  cell.confusion.assign(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const UtteranceResult& r = cell.utterances[i];
    if (!r.error.empty()) {
      ++cell.failed;
      continue;
    }
    ++cell.total;
    if (r.predicted == r.speaker_id) ++cell.correct;
    ++cell.confusion[tests[i].speaker][column.at(r.predicted)];
  }
  cell.rate = cell.total > 0 ? static_cast<double>(cell.correct) / cell.total : 0.0;
  return cell;
}

EvalReport run(const Corpus& corpus, const PipelineConfig& config, std::uint64_t seed, int threads,
               Backend backend) {
  corpus.validate();
  config.validate();
  EvalReport report;
  report.backend = backend;
  report.config = config;
  report.config_hash = config_hash(config);
  report.seed = seed;
  for (const auto& s : corpus.speakers) report.speakers.push_back(s.id);

  const std::vector<TestClip> tests = prepare_tests(corpus, config, seed, &report.clipped_samples);

  std::map<FeatureKind, Scorer> scorers;
  std::map<FeatureKind, std::shared_ptr<void>> keep_alive;
  for (FeatureKind kind : kTableKinds) {
    if (backend == Backend::Hmm) {
      auto models = std::make_shared<std::vector<SpeakerModel>>(
          train_speaker_models(corpus, kind, config, seed, threads, &report.training));
      keep_alive[kind] = models;
      scorers[kind] = [models](const FeatureSequence& seq) { return identify(*models, seq).ranked; };
    } else {
      auto templates = std::make_shared<std::vector<LabeledSequence>>();
      std::vector<std::optional<LabeledSequence>> slots;
      std::vector<std::pair<std::size_t, const Utterance*>> jobs;
      for (std::size_t s = 0; s < corpus.speakers.size(); ++s)
        for (const auto& u : corpus.speakers[s].train) jobs.emplace_back(s, &u);
      slots.resize(jobs.size());
      detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
        try {
          slots[i] = LabeledSequence{corpus.speakers[jobs[i].first].id,
                                     extract_features(jobs[i].second->clip, kind, config)};
        } catch (const Error&) {
          // Unusable template: left out of the reference set.
        }
      });
      for (auto& slot : slots)
        if (slot) templates->push_back(std::move(*slot));
      keep_alive[kind] = templates;
      const DtwOptions options = config.dtw;
      scorers[kind] = [templates, options](const FeatureSequence& seq) {
        return dtw_classify(seq, *templates, options).ranked;
      };
    }
  }

  for (bool noisy : {false, true})
    for (FeatureKind kind : kTableKinds)
      report.conditions.push_back(
          score_condition(corpus, tests, kind, noisy, config, scorers.at(kind), threads));
  return report;
}

json ranked_json(const std::vector<std::pair<std::string, double>>& ranked) {
  json out = json::array();
  for (const auto& [id, score] : ranked) out.push_back({{"speaker", id}, {"score", score}});
  return out;
}

std::string percent(double rate) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * rate);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

Backend parse_backend(std::string_view text) {
  if (text == "hmm") return Backend::Hmm;
  if (text == "dtw") return Backend::Dtw;
  fail(ErrorCode::BadParams, "unknown backend '" + std::string(text) + "'");
}

const ConditionResult& EvalReport::cell(FeatureKind kind, bool noisy) const {
  for (const auto& c : conditions)
    if (c.kind == kind && c.noisy == noisy) return c;
  fail(ErrorCode::BadParams, "report has no such condition");
}

std::vector<SpeakerModel> train_speaker_models(const Corpus& corpus, FeatureKind kind,
                                               const PipelineConfig& config, std::uint64_t seed,
                                               int threads, std::vector<TrainingSummary>* summaries) {
  const std::size_t n = corpus.speakers.size();
  std::vector<std::optional<SpeakerModel>> models(n);
  std::vector<TrainingSummary> local(n);
  const std::string hash = config_hash(config);
  detail::parallel_for(n, threads, [&](std::size_t s) {
    const SpeakerData& speaker = corpus.speakers[s];
    TrainingSummary& summary = local[s];
    summary.speaker_id = speaker.id;
    summary.kind = kind;
    try {
      std::vector<MatrixXd> sequences;
      for (const auto& u : speaker.train) sequences.push_back(extract_features(u.clip, kind, config).vectors);
      const std::uint64_t model_seed =
          derive_seed(seed ^ kTrainSalt, s, static_cast<std::uint64_t>(kind == FeatureKind::Mfcc ? 1 : 2));
      Hmm<double> init = init_hmm(sequences, config.hmm, model_seed);
      auto [trained, trace] =
          baum_welch(std::move(init), sequences, config.hmm.max_iters, config.hmm.tol);
      summary.iterations = trace.iterations;
      summary.converged = trace.converged;
      summary.log_likelihood = trace.log_likelihood.back();
      summary.collapsed_states = trace.collapsed_states;
      models[s] = SpeakerModel{speaker.id, std::move(trained), kind, hash};
    } catch (const Error& e) {
      summary.error = e.what();
    }
  });
  std::vector<SpeakerModel> out;
  for (auto& m : models)
    if (m) out.push_back(std::move(*m));
  if (summaries) summaries->insert(summaries->end(), local.begin(), local.end());
  return out;
}

EvalReport run_experiment(const Corpus& corpus, const PipelineConfig& config, std::uint64_t seed,
                          int threads) {
  return run(corpus, config, seed, threads, Backend::Hmm);
}

EvalReport dtw_experiment(const Corpus& corpus, const PipelineConfig& config, std::uint64_t seed,
                          int threads) {
  return run(corpus, config, seed, threads, Backend::Dtw);
}

json to_json(const EvalReport& report) {
  json conditions = json::array();
  for (const auto& c : report.conditions) {
    json utts = json::array();
    for (const auto& u : c.utterances) {
      json entry = {{"speaker", u.speaker_id}, {"utterance", u.utterance}};
      if (u.error.empty()) {
        entry["predicted"] = u.predicted;
        entry["correct"] = u.predicted == u.speaker_id;
        entry["scores"] = ranked_json(u.ranked);
      } else {
        entry["error"] = u.error;
      }
      utts.push_back(std::move(entry));
    }
    conditions.push_back({{"feature_kind", std::string(to_string(c.kind))},
                          {"noise", c.noisy ? "awgn" : "clean"},
                          {"snr_db", c.noisy ? json(c.snr_db) : json(nullptr)},
                          {"correct", c.correct},
                          {"total", c.total},
                          {"failed", c.failed},
                          {"rate", c.rate},
                          {"confusion", c.confusion},
                          {"utterances", utts}});
  }
  json training = json::array();
  for (const auto& t : report.training) {
    json entry = {{"speaker", t.speaker_id}, {"feature_kind", std::string(to_string(t.kind))}};
    if (t.error.empty()) {
      entry["iterations"] = t.iterations;
      entry["converged"] = t.converged;
      entry["log_likelihood"] = t.log_likelihood;
      entry["collapsed_states"] = t.collapsed_states;
    } else {
      entry["error"] = t.error;
    }
    training.push_back(std::move(entry));
  }
  json published = json::array();
  for (bool noisy : {false, true})
    for (FeatureKind kind : kTableKinds)
      if (const auto rate = published_rate(report.backend, noisy, kind))
        published.push_back({{"feature_kind", std::string(to_string(kind))},
                             {"noise", noisy ? "awgn" : "clean"},
                             {"snr_db", noisy ? json(20.0) : json(nullptr)},
                             {"rate", *rate}});
  return {{"schema", kReportSchema},
          {"backend", std::string(to_string(report.backend))},
          {"config", to_json(report.config)},
          {"config_hash", report.config_hash},
          {"seed", report.seed},
          {"speakers", report.speakers},
          {"conditions", conditions},
          {"training", training},
          {"clipped_samples", report.clipped_samples},
          {"published_reference",
           {{"note", "rates published for a private 30-speaker isolated-word corpus; "
                     "shown for comparison only, not reproduced here"},
            {"rates", published}}}};
}

std::string validate_report(const json& j) {
  try {
    if (!j.is_object()) return "report is not an object";
    if (j.at("schema") != kReportSchema) return "unknown schema";
    parse_backend(j.at("backend").get<std::string>());
    if (!j.at("config").is_object()) return "config missing";
    if (!j.at("config_hash").is_string()) return "config_hash missing";
    if (!j.at("seed").is_number_unsigned()) return "seed missing";
    const auto speakers = j.at("speakers").get<std::vector<std::string>>();
    const std::size_t n = speakers.size();
    const json& conditions = j.at("conditions");
    if (!conditions.is_array() || conditions.size() != 4) return "expected 4 condition cells";
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& c : conditions) {
      const std::string kind = c.at("feature_kind").get<std::string>();
      const std::string noise = c.at("noise").get<std::string>();
      parse_feature_kind(kind);
      if (noise != "clean" && noise != "awgn") return "bad noise label";
      if (!cells.insert({kind, noise}).second) return "duplicate condition cell";
      const int correct = c.at("correct").get<int>();
      const int total = c.at("total").get<int>();
      const int failed = c.at("failed").get<int>();
      const double rate = c.at("rate").get<double>();
      if (correct < 0 || correct > total || failed < 0) return "inconsistent counts";
      if (!(rate >= 0.0 && rate <= 1.0)) return "rate outside [0, 1]";
      if (total > 0 && std::abs(rate - static_cast<double>(correct) / total) > 1e-12)
        return "rate != correct / total";
      const auto confusion = c.at("confusion").get<std::vector<std::vector<int>>>();
      if (confusion.size() != n) return "confusion matrix has wrong size";
      std::map<std::string, int> scored;
      int utt_failed = 0;
      for (const auto& u : c.at("utterances")) {
        if (u.contains("error"))
          ++utt_failed;
        else
          ++scored[u.at("speaker").get<std::string>()];
      }
      if (utt_failed != failed) return "failed count does not match utterances";
      int diagonal = 0, sum = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (confusion[r].size() != n) return "confusion matrix is not square";
        int row = 0;
        for (int v : confusion[r]) row += v;
        if (row != scored[speakers[r]]) return "confusion row does not sum to the speaker's test count";
        diagonal += confusion[r][r];
        sum += row;
      }
      if (diagonal != correct || sum != total) return "confusion matrix disagrees with counts";
    }
    if (!j.at("training").is_array()) return "training missing";
    if (!j.at("published_reference").at("rates").is_array()) return "published_reference missing";
  } catch (const std::exception& e) {
    return std::string("malformed report: ") + e.what();
  }
  return {};
}

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  char snr[32];
  std::snprintf(snr, sizeof snr, "%g", report.config.noise.snr_db);
  out << "Recognition rates (backend " << to_string(report.backend) << ", " << report.speakers.size()
      << " speakers, seed " << report.seed << ", config " << report.config_hash << ")\n";
  const std::size_t w1 = 30, w2 = 22, w3 = 22;
  out << pad("Speech signal", w1) << pad("Feature extraction", w2) << pad("Recognition rate", w3)
      << "Published\n";
  out << std::string(w1 + w2 + w3 + 9, '-') << '\n';
  for (bool noisy : {false, true}) {
    bool first = true;
    for (FeatureKind kind : kTableKinds) {
      const ConditionResult& c = report.cell(kind, noisy);
      const std::string signal =
          first ? (noisy ? "Noisy signal, S/N = " + std::string(snr) + " dB" : "Original clean signal") : "";
      const std::string feature = kind == FeatureKind::WaveletMfcc ? "Wavelet-based MFCCs" : "MFCCs";
      std::string measured = percent(c.rate) + " (" + std::to_string(c.correct) + "/" +
                             std::to_string(c.total) + ")";
      if (c.failed > 0) measured += " +" + std::to_string(c.failed) + " failed";
      const auto ref = published_rate(report.backend, noisy, kind);
      const bool comparable = ref && (!noisy || report.config.noise.snr_db == 20.0);
      out << pad(signal, w1) << pad(feature, w2) << pad(measured, w3) << (comparable ? percent(*ref) : "-")
          << '\n';
      first = false;
    }
  }
  out << "Published column: rates reported for a private 30-speaker corpus, for comparison only.\n";
  return out.str();
}

}  // namespace wmfcc
