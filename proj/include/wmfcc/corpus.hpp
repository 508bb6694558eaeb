#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wmfcc/audio.hpp"

namespace wmfcc {

struct Utterance {
  int index = 0;  // position within the speaker's recordings
  AudioClip clip;
};

struct SpeakerData {
  std::string id;
  std::vector<Utterance> train;
  std::vector<Utterance> test;
};

// Speakers sorted by id; every speaker has >= 1 train and >= 1 test utterance.
struct Corpus {
  std::vector<SpeakerData> speakers;
  int sample_rate_hz = 0;

  void validate() const;
};

// Voice parameters of one synthetic speaker.
struct SyntheticVoice {
  double f0_hz = 0;
  std::vector<double> formants_start_hz;  // resonator centers at word onset
  std::vector<double> formants_end_hz;    // and at word offset
  std::vector<double> bandwidths_hz;
};

// Number of held-out utterances for n_utts recordings: max(1, n_utts / 3)
// (15 -> 5 test, 10 train).
int default_test_count(int n_utts);

// Deterministic stand-in corpus: each speaker is a pulse train at a
// speaker-specific fundamental (80-300 Hz, fundamentals > 5 Hz apart)
// shaped by three speaker-specific resonators that glide between two vowel
// targets. Utterances jitter pitch (+-3%), duration (+-10%) and amplitude.
// Samples are quantized to the 16-bit grid so saving and reloading the
// corpus is lossless.
Corpus synth_corpus(int n_speakers, int n_utts, int sample_rate_hz, std::uint64_t seed,
                    int n_train = -1);

std::vector<SyntheticVoice> synth_voices(int n_speakers, std::uint64_t seed);

// Layout: <dir>/corpus.json manifest plus <dir>/<speaker>/<utt>.wav.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);

// Reads corpus.json when present. Without a manifest, every subdirectory
// is a speaker, its *.wav files (sorted by name) are utterances and the last
// default_test_count(n) of them are held out for testing.
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace wmfcc
