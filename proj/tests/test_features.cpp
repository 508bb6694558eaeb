#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "wmfcc/features.hpp"
#include "wmfcc/text_io.hpp"

using namespace wmfcc;

namespace {

AudioClip noise_clip(Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = std::clamp(g(gen), -1.0, 1.0);
  return AudioClip(x, 8000);
}

}  // namespace

TEST_CASE("channel names") {
  const auto ch = standard_channels(3);
  REQUIRE(ch.size() == 4);
  CHECK(ch[0].name() == "CA3");
  CHECK(ch[1].name() == "CD3");
  CHECK(ch[3].name() == "CD1");
  CHECK(WaveletChannel::parse("CD2") == WaveletChannel{false, 2});
  CHECK_THROWS_AS(WaveletChannel::parse("CX2"), Error);
  CHECK_THROWS_AS(WaveletChannel::parse("CA"), Error);
  CHECK(channel_sample_rate(8000, ch[0]) == 1000);
  CHECK(channel_sample_rate(8000, ch[3]) == 4000);
}

TEST_CASE("config validation") {
  HybridConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.channels.push_back({false, 4});
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.channels = {{true, 2}};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.channels.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("default dimension is 52 and column blocks equal standalone channel MFCCs") {
  const AudioClip clip = noise_clip(14400, 1);
  const HybridConfig cfg;
  const auto seq = extract_wavelet_mfcc(clip, cfg);
  CHECK(seq.dim() == 52);
  CHECK(seq.kind == FeatureKind::WaveletMfcc);
  CHECK(seq.channels == std::vector<std::string>{"CA3", "CD3", "CD2", "CD1"});

  const auto filters = make_db8_filters();
  const auto decomp = wavedec(clip.samples(), filters, 3);
  Index t_min = seq.frames() + 1;
  for (std::size_t c = 0; c < cfg.channels.size(); ++c) {
    const VectorXd& series = channel_coefficients(decomp, cfg.channels[c]);
    const MatrixXd own = compute_mfcc(series, channel_sample_rate(8000, cfg.channels[c]), cfg.mfcc);
    t_min = std::min(t_min, own.rows());
    CHECK(seq.vectors.middleCols(13 * static_cast<Index>(c), 13) == own.topRows(seq.frames()));
  }
  CHECK(seq.frames() == t_min);
  // CA3/CD3 are the shortest channels and set the frame count.
  CHECK(seq.frames() == frame_count(decomp.approx.size(), 256, 156));
  CHECK(seq.frames() < frame_count(decomp.detail(1).size(), 256, 156));
}

TEST_CASE("single-channel config reduces to MFCC of the CA3 coefficients") {
  const AudioClip clip = noise_clip(9000, 2);
  HybridConfig cfg;
  cfg.channels = {{true, 3}};
  const auto seq = extract_wavelet_mfcc(clip, cfg);
  const auto decomp = wavedec(clip.samples(), make_db8_filters(), 3);
  CHECK(seq.vectors == compute_mfcc(decomp.approx, 1000.0, cfg.mfcc));
}

TEST_CASE("zero clip gives the repeated zero-signal cepstrum") {
  const auto seq = extract_wavelet_mfcc(AudioClip(VectorXd::Zero(12000), 8000), HybridConfig{});
  REQUIRE(seq.frames() >= 1);
  const auto zero = extract_mfcc(VectorXd::Zero(256), 8000, MfccConfig{});
  for (Index t = 0; t < seq.frames(); ++t)
    for (Index c = 0; c < 4; ++c)
      CHECK((seq.vectors.row(t).segment(13 * c, 13) - zero.vectors.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("short clips are rejected") {
  try {
    extract_wavelet_mfcc(noise_clip(1500, 3), HybridConfig{});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SignalTooShort);
  }
}

TEST_CASE("reconstructed channels sum back to the signal") {
  const AudioClip clip = noise_clip(3000, 4);
  const auto filters = make_db8_filters();
  const auto decomp = wavedec(clip.samples(), filters, 3);
  VectorXd sum = VectorXd::Zero(3000);
  for (const auto& ch : standard_channels(3)) sum += reconstruct_channel(decomp, ch, filters);
  CHECK((sum - clip.samples()).cwiseAbs().maxCoeff() < 1e-10);

  HybridConfig cfg;
  cfg.source = ChannelSource::Reconstructed;
  const auto seq = extract_wavelet_mfcc(clip, cfg);
  CHECK(seq.frames() == frame_count(3000, 256, 156));
  CHECK(seq.dim() == 52);
}

TEST_CASE("deterministic") {
  const AudioClip clip = noise_clip(10000, 5);
  CHECK(extract_wavelet_mfcc(clip, HybridConfig{}).vectors == extract_wavelet_mfcc(clip, HybridConfig{}).vectors);
}

TEST_CASE("feature files round-trip exactly") {
  auto seq = extract_wavelet_mfcc(noise_clip(10000, 6), HybridConfig{});
  seq.config_hash = "0123456789abcdef";
  seq.vectors(0, 0) = 4.9406564584124654e-324;
  const auto back = features_from_string(features_to_string(seq));
  CHECK(back.vectors == seq.vectors);
  CHECK(back.kind == seq.kind);
  CHECK(back.channels == seq.channels);
  CHECK(back.config_hash == seq.config_hash);
  CHECK(back.meta.hop == 156);
  CHECK(back.meta.sample_rate_hz == 8000);

  const auto path = std::filesystem::temp_directory_path() / "wmfcc_features.txt";
  write_features(path, seq);
  CHECK(is_feature_file(path));
  CHECK(read_features(path).vectors == seq.vectors);
  std::filesystem::remove(path);
}

TEST_CASE("malformed feature files") {
  CHECK_THROWS_AS(features_from_string("nope\n"), Error);
  auto seq = extract_mfcc(VectorXd::Zero(600), 8000, MfccConfig{});
  std::string text = features_to_string(seq);
  // Drop the last row entirely.
  text.pop_back();
  CHECK_THROWS_AS(features_from_string(text.substr(0, text.rfind('\n') + 1)), Error);
  // A row with a trailing extra value.
  std::string extra = features_to_string(seq);
  extra.insert(extra.size() - 1, " 1.0");
  CHECK_THROWS_AS(features_from_string(extra), Error);
}

TEST_CASE("decomposition dump") {
  const auto dir = std::filesystem::temp_directory_path() / "wmfcc_dump";
  const auto decomp = wavedec(noise_clip(1000, 7).samples(), make_db8_filters(), 3);
  write_decomposition(dir, decomp);
  CHECK(read_vector_file(dir / "CA3.txt") == decomp.approx);
  CHECK(read_vector_file(dir / "CD1.txt") == decomp.detail(1));
  std::filesystem::remove_all(dir);
}
