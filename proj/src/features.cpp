#include "wmfcc/features.hpp"

#include <algorithm>
#include <charconv>

namespace wmfcc {

WaveletChannel WaveletChannel::parse(std::string_view text) {
  WaveletChannel ch;
  if (text.size() < 3 || (text.substr(0, 2) != "CA" && text.substr(0, 2) != "CD"))
    fail(ErrorCode::BadConfig, "bad wavelet channel '" + std::string(text) + "'");
  ch.approximation = text[1] == 'A';
  const auto digits = text.substr(2);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ch.level);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || ch.level < 1)
    fail(ErrorCode::BadConfig, "bad wavelet channel '" + std::string(text) + "'");
  return ch;
}

std::vector<WaveletChannel> standard_channels(int level) {
  std::vector<WaveletChannel> out{{true, level}};
  for (int l = level; l >= 1; --l) out.push_back({false, l});
  return out;
}

ChannelSource parse_channel_source(std::string_view text) {
  if (text == "coefficients") return ChannelSource::Coefficients;
  if (text == "reconstructed") return ChannelSource::Reconstructed;
  fail(ErrorCode::BadConfig, "unknown channel source '" + std::string(text) + "'");
}

void HybridConfig::validate() const {
  if (dwt_level < 1) fail(ErrorCode::BadConfig, "dwt_level must be >= 1");
  if (channels.empty()) fail(ErrorCode::BadConfig, "channel set is empty");
  for (const auto& ch : channels) {
    if (ch.approximation && ch.level != dwt_level)
      fail(ErrorCode::BadConfig, ch.name() + " does not match dwt_level " + std::to_string(dwt_level));
    if (!ch.approximation && (ch.level < 1 || ch.level > dwt_level))
      fail(ErrorCode::BadConfig, ch.name() + " is outside levels 1.." + std::to_string(dwt_level));
  }
}

std::vector<std::string> HybridConfig::channel_names() const {
  std::vector<std::string> names;
  for (const auto& ch : channels) names.push_back(ch.name());
  return names;
}

const VectorXd& channel_coefficients(const WaveletDecomposition<double>& decomp,
                                     const WaveletChannel& channel) {
  if (channel.approximation) {
    if (channel.level != decomp.level)
      fail(ErrorCode::BadParams, "decomposition holds CA" + std::to_string(decomp.level));
    return decomp.approx;
  }
  if (channel.level < 1 || channel.level > decomp.level)
    fail(ErrorCode::BadParams, "no channel " + channel.name() + " in decomposition");
  return decomp.detail(channel.level);
}

double channel_sample_rate(double sample_rate_hz, const WaveletChannel& channel) {
  return sample_rate_hz / static_cast<double>(1 << channel.level);
}

VectorXd reconstruct_channel(const WaveletDecomposition<double>& decomp,
                             const WaveletChannel& channel,
                             const WaveletFilterPair<double>& filters) {
  WaveletDecomposition<double> isolated = decomp;
  const VectorXd kept = channel_coefficients(decomp, channel);
  isolated.approx.setZero();
  for (auto& d : isolated.details) d.setZero();
  if (channel.approximation)
    isolated.approx = kept;
  else
    isolated.detail(channel.level) = kept;
  return waverec(isolated, filters);
}

std::vector<MatrixXd> wavelet_channel_mfcc(const AudioClip& clip, const HybridConfig& config) {
  config.validate();
  static const WaveletFilterPair<double> filters = make_db8_filters<double>();
  const auto decomp = wavedec(clip.samples(), filters, config.dwt_level, config.extension);

  std::vector<MatrixXd> per_channel;
  per_channel.reserve(config.channels.size());
  for (const auto& ch : config.channels) {
    if (config.source == ChannelSource::Coefficients) {
      const VectorXd& series = channel_coefficients(decomp, ch);
      if (series.size() < config.mfcc.frame_len)
        fail(ErrorCode::SignalTooShort,
             ch.name() + " has " + std::to_string(series.size()) + " coefficients, fewer than one " +
                 std::to_string(config.mfcc.frame_len) + "-sample frame");
      per_channel.push_back(
          compute_mfcc(series, channel_sample_rate(clip.sample_rate_hz(), ch), config.mfcc));
    } else {
      const VectorXd band = reconstruct_channel(decomp, ch, filters);
      per_channel.push_back(compute_mfcc(band, clip.sample_rate_hz(), config.mfcc));
    }
  }
  return per_channel;
}

FeatureSequence extract_wavelet_mfcc(const AudioClip& clip, const HybridConfig& config) {
  const std::vector<MatrixXd> per_channel = wavelet_channel_mfcc(clip, config);
  Index frames = per_channel.front().rows();
  for (const auto& m : per_channel) frames = std::min(frames, m.rows());
  const Index block = config.mfcc.dim();

  FeatureSequence seq;
  seq.kind = FeatureKind::WaveletMfcc;
  seq.meta = {config.mfcc.frame_len, config.mfcc.hop(), clip.sample_rate_hz()};
  seq.channels = config.channel_names();
  seq.vectors.resize(frames, block * static_cast<Index>(per_channel.size()));
  for (std::size_t c = 0; c < per_channel.size(); ++c)
    seq.vectors.middleCols(static_cast<Index>(c) * block, block) = per_channel[c].topRows(frames);
  return seq;
}

}  // namespace wmfcc
