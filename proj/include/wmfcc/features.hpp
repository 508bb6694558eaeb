#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wmfcc/audio.hpp"
#include "wmfcc/dwt.hpp"
#include "wmfcc/feature_sequence.hpp"
#include "wmfcc/mfcc.hpp"

// Wavelet-channel MFCCs: decompose the signal with db8 and compute MFCCs of
// each selected channel, concatenating them frame by frame.

namespace wmfcc {

struct WaveletChannel {
  bool approximation = false;  // CA when true, CD otherwise
  int level = 1;

  std::string name() const { return (approximation ? "CA" : "CD") + std::to_string(level); }
  static WaveletChannel parse(std::string_view text);

  bool operator==(const WaveletChannel&) const = default;
};

// [CA_level, CD_level, ..., CD_1]
std::vector<WaveletChannel> standard_channels(int level);

// How a channel becomes a time series for MFCC analysis.
//  Coefficients:  the coefficient sequence itself, at rate sr / 2^level.
//  Reconstructed: the channel's contribution synthesized back to full rate.
enum class ChannelSource { Coefficients, Reconstructed };

constexpr std::string_view to_string(ChannelSource s) {
  return s == ChannelSource::Coefficients ? "coefficients" : "reconstructed";
}
ChannelSource parse_channel_source(std::string_view text);

struct HybridConfig {
  int dwt_level = 3;
  std::vector<WaveletChannel> channels = standard_channels(3);
  MfccConfig mfcc;
  ChannelSource source = ChannelSource::Coefficients;
  Extension extension = Extension::Symmetric;

  void validate() const;
  std::vector<std::string> channel_names() const;
};

const VectorXd& channel_coefficients(const WaveletDecomposition<double>& decomp,
                                     const WaveletChannel& channel);

// Effective sampling rate of a channel's coefficient sequence.
double channel_sample_rate(double sample_rate_hz, const WaveletChannel& channel);

// Full-rate signal carried by one channel alone (every other channel zeroed).
VectorXd reconstruct_channel(const WaveletDecomposition<double>& decomp,
                             const WaveletChannel& channel,
                             const WaveletFilterPair<double>& filters);

// Per-channel MFCC matrices in config.channels order, before frame-count
// alignment.
std::vector<MatrixXd> wavelet_channel_mfcc(const AudioClip& clip, const HybridConfig& config);

// Channel MFCCs truncated to the shortest channel's frame count and
// concatenated per frame; dim = channels * mfcc.dim().
FeatureSequence extract_wavelet_mfcc(const AudioClip& clip, const HybridConfig& config);

}  // namespace wmfcc
