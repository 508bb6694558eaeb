#include "wmfcc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "wmfcc/random.hpp"

namespace wmfcc {

using nlohmann::json;

namespace {

constexpr double kF0Low = 80.0;
constexpr double kF0High = 300.0;
constexpr double kF0Margin = 2.6;  // half the guaranteed spacing between fundamentals
constexpr double kBaseDuration = 1.8;
constexpr double kSilence = 0.1;

// Shared "word": a glide between two vowel targets.
constexpr double kVowelStart[3] = {730.0, 1090.0, 2440.0};
constexpr double kVowelEnd[3] = {270.0, 2290.0, 3010.0};
constexpr double kBandwidths[3] = {60.0, 90.0, 130.0};

std::string speaker_name(int s, int n_speakers) {
  const int width = std::max(2, static_cast<int>(std::to_string(n_speakers).size()));
  std::string digits = std::to_string(s + 1);
  return "spk" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

std::string utterance_name(int u) {
  return (u < 10 ? "utt0" : "utt") + std::to_string(u) + ".wav";
}

double quantize16(double v) {
  return std::clamp(std::round(v * 32768.0), -32768.0, 32767.0) / 32768.0;
}

AudioClip synth_utterance(const SyntheticVoice& voice, int sample_rate_hz, Rng& rng) {
  const double fs = sample_rate_hz;
  const double duration = kBaseDuration * rng.uniform(0.9, 1.1);
  const double f0 = voice.f0_hz * rng.uniform(0.97, 1.03);
  const double peak = rng.uniform(0.3, 0.8);
  const double glide_mid = rng.uniform(0.45, 0.55);

  const auto total = static_cast<Index>(std::lround(duration * fs));
  const auto lead = static_cast<Index>(std::lround(kSilence * fs));
  const Index voiced = total - 2 * lead;
  const double attack = 0.06 * fs;
  const double release = 0.1 * fs;
  const double glide_width = 0.06 * fs;

  VectorXd x = VectorXd::Zero(total);
  std::vector<double> y1(3, 0.0), y2(3, 0.0);
  double phase = 0.0;
  double lp1 = 0.0, lp2 = 0.0;
  for (Index i = 0; i < voiced; ++i) {
    const double pos = static_cast<double>(i) / voiced;
    const double pitch = f0 * (1.0 + 0.05 * (0.5 - pos));
    phase += pitch / fs;
    double source = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      source = 1.0;
    }
    lp1 = 0.95 * lp1 + source;
    lp2 = 0.95 * lp2 + lp1;
    double s = 0.05 * lp2 + 0.02 * rng.gaussian();

    const double glide = 1.0 / (1.0 + std::exp(-(i - glide_mid * voiced) / glide_width));
    for (std::size_t k = 0; k < 3; ++k) {
      const double freq = voice.formants_start_hz[k] +
                          (voice.formants_end_hz[k] - voice.formants_start_hz[k]) * glide;
      const double r = std::exp(-std::numbers::pi * voice.bandwidths_hz[k] / fs);
      const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
      const double a2 = -r * r;
      const double out = (1.0 - a1 - a2) * s + a1 * y1[k] + a2 * y2[k];
      y2[k] = y1[k];
      y1[k] = out;
      s = out;
    }
    double env = 1.0;
    if (i < attack) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / attack);
    if (voiced - i < release) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * (voiced - i) / release));
    x[lead + i] = s * env;
  }
  const double max_abs = x.cwiseAbs().maxCoeff();
  if (max_abs > 0) x *= peak / max_abs;
  for (Index i = 0; i < total; ++i) x[i] = quantize16(x[i] + 5e-4 * rng.gaussian());
  return AudioClip(std::move(x), sample_rate_hz);
}

}  // namespace

void Corpus::validate() const {
  if (speakers.empty()) fail(ErrorCode::BadParams, "corpus has no speakers");
  if (sample_rate_hz <= 0) fail(ErrorCode::BadParams, "corpus sample rate must be positive");
  std::set<std::string> ids;
  for (const auto& s : speakers) {
    if (!ids.insert(s.id).second) fail(ErrorCode::BadParams, "duplicate speaker " + s.id);
    if (s.train.empty() || s.test.empty())
      fail(ErrorCode::BadParams, "speaker " + s.id + " needs >= 1 train and >= 1 test utterance");
    std::set<int> seen;
    for (const auto* part : {&s.train, &s.test})
      for (const auto& u : *part) {
        if (!seen.insert(u.index).second)
          fail(ErrorCode::BadParams, "speaker " + s.id + " reuses utterance " + std::to_string(u.index));
        if (u.clip.sample_rate_hz() != sample_rate_hz)
          fail(ErrorCode::BadParams, "mixed sample rates in corpus");
      }
  }
}

int default_test_count(int n_utts) { return std::max(1, n_utts / 3); }

std::vector<SyntheticVoice> synth_voices(int n_speakers, std::uint64_t seed) {
  const double width = (kF0High - kF0Low) / n_speakers;
  if (width < 2 * kF0Margin)
    fail(ErrorCode::BadParams, "too many speakers to keep fundamentals 5 Hz apart");
  Rng rng(derive_seed(seed, 0x766f696365ULL));

  std::vector<int> slots(static_cast<std::size_t>(n_speakers));
  for (int s = 0; s < n_speakers; ++s) slots[static_cast<std::size_t>(s)] = s;
  for (int s = n_speakers - 1; s > 0; --s)
    std::swap(slots[static_cast<std::size_t>(s)],
              slots[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(s + 1)))]);

  std::vector<SyntheticVoice> voices;
  for (int s = 0; s < n_speakers; ++s) {
    SyntheticVoice v;
    const double lo = kF0Low + width * slots[static_cast<std::size_t>(s)] + kF0Margin;
    v.f0_hz = rng.uniform(lo, lo + width - 2 * kF0Margin);
    const double tract = rng.uniform(0.85, 1.15);
    for (int k = 0; k < 3; ++k) {
      v.formants_start_hz.push_back(kVowelStart[k] * tract * rng.uniform(0.95, 1.05));
      v.formants_end_hz.push_back(kVowelEnd[k] * tract * rng.uniform(0.95, 1.05));
      v.bandwidths_hz.push_back(kBandwidths[k] * rng.uniform(0.8, 1.2));
    }
    voices.push_back(std::move(v));
  }
  return voices;
}

Corpus synth_corpus(int n_speakers, int n_utts, int sample_rate_hz, std::uint64_t seed, int n_train) {
  if (n_speakers < 2) fail(ErrorCode::BadParams, "synthetic corpus needs >= 2 speakers");
  if (n_utts < 2) fail(ErrorCode::BadParams, "need >= 2 utterances per speaker for a train/test split");
  if (n_train < 0) n_train = n_utts - default_test_count(n_utts);
  if (n_train < 1 || n_train >= n_utts)
    fail(ErrorCode::BadParams, "n_train must leave >= 1 train and >= 1 test utterance");
  if (sample_rate_hz < 7000)
    fail(ErrorCode::BadParams, "synthetic voices need a sample rate of at least 7 kHz");

  const std::vector<SyntheticVoice> voices = synth_voices(n_speakers, seed);
  Corpus corpus;
  corpus.sample_rate_hz = sample_rate_hz;
  for (int s = 0; s < n_speakers; ++s) {
    SpeakerData speaker{speaker_name(s, n_speakers), {}, {}};
    for (int u = 0; u < n_utts; ++u) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s) + 1, static_cast<std::uint64_t>(u) + 1));
      Utterance utt{u, synth_utterance(voices[static_cast<std::size_t>(s)], sample_rate_hz, rng)};
      (u < n_train ? speaker.train : speaker.test).push_back(std::move(utt));
    }
    corpus.speakers.push_back(std::move(speaker));
  }
  corpus.validate();
  return corpus;
}

void save_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  corpus.validate();
  std::filesystem::create_directories(dir);
  json speakers = json::array();
  for (const auto& s : corpus.speakers) {
    std::filesystem::create_directories(dir / s.id);
    json entry = {{"id", s.id}, {"train", json::array()}, {"test", json::array()}};
    for (const char* part : {"train", "test"}) {
      for (const auto& u : std::string(part) == "train" ? s.train : s.test) {
        const std::string rel = s.id + "/" + utterance_name(u.index);
        save_wav(dir / rel, u.clip);
        entry[part].push_back({{"index", u.index}, {"file", rel}});
      }
    }
    speakers.push_back(std::move(entry));
  }
  std::ofstream out(dir / "corpus.json");
  if (!out) fail(ErrorCode::Io, "cannot write corpus manifest in " + dir.string());
  out << json{{"format", "wmfcc-corpus"},
              {"version", 1},
              {"sample_rate_hz", corpus.sample_rate_hz},
              {"speakers", speakers}}
             .dump(2)
      << '\n';
}

Corpus load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  Corpus corpus;
  const auto manifest = dir / "corpus.json";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    json j;
    try {
      in >> j;
      for (const auto& s : j.at("speakers")) {
        SpeakerData speaker{s.at("id").get<std::string>(), {}, {}};
        for (const char* part : {"train", "test"})
          for (const auto& u : s.at(part)) {
            Utterance utt{u.at("index").get<int>(), load_wav(dir / u.at("file").get<std::string>())};
            (std::string(part) == "train" ? speaker.train : speaker.test).push_back(std::move(utt));
          }
        corpus.speakers.push_back(std::move(speaker));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedFile, manifest.string() + ": " + e.what());
    }
  } else {
    std::vector<std::filesystem::path> speaker_dirs;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_directory()) speaker_dirs.push_back(e.path());
    std::sort(speaker_dirs.begin(), speaker_dirs.end());
    for (const auto& sd : speaker_dirs) {
      std::vector<std::filesystem::path> wavs;
      for (const auto& e : std::filesystem::directory_iterator(sd))
        if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
      std::sort(wavs.begin(), wavs.end());
      if (wavs.empty()) continue;
      const int n = static_cast<int>(wavs.size());
      const int n_train = n - default_test_count(n);
      SpeakerData speaker{sd.filename().string(), {}, {}};
      for (int u = 0; u < n; ++u) {
        Utterance utt{u, load_wav(wavs[static_cast<std::size_t>(u)])};
        (u < n_train ? speaker.train : speaker.test).push_back(std::move(utt));
      }
      corpus.speakers.push_back(std::move(speaker));
    }
  }
  if (corpus.speakers.empty()) fail(ErrorCode::BadParams, "no speakers found in " + dir.string());
  std::sort(corpus.speakers.begin(), corpus.speakers.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  const auto& first = corpus.speakers.front();
  corpus.sample_rate_hz = (first.train.empty() ? first.test : first.train).front().clip.sample_rate_hz();
  corpus.validate();
  return corpus;
}

}  // namespace wmfcc
