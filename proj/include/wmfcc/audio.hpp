#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "wmfcc/error.hpp"
#include "wmfcc/types.hpp"

namespace wmfcc {

// Mono audio, samples normalized to [-1, 1].
class AudioClip {
 public:
  AudioClip(VectorXd samples, int sample_rate_hz);

  const VectorXd& samples() const { return samples_; }
  int sample_rate_hz() const { return sample_rate_hz_; }
  Index size() const { return samples_.size(); }
  double duration_s() const {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

  double mean_square_power() const { return samples_.squaredNorm() / samples_.size(); }

 private:
  VectorXd samples_;
  int sample_rate_hz_;
};

// Reads a RIFF/WAVE file holding 16-bit mono PCM. Integer sample v becomes
// v / 32768. Any sample rate is accepted; resampling is the caller's concern.
AudioClip load_wav(const std::filesystem::path& path);

// Parses an in-memory WAV image (same rules as load_wav).
AudioClip parse_wav(const std::uint8_t* data, std::size_t size);

// Writes 16-bit mono PCM. Samples are quantized as round(x * 32768) and
// saturated to [-32768, 32767], so k / 32768 round-trips exactly.
void save_wav(const std::filesystem::path& path, const AudioClip& clip);

struct AwgnStats {
  double signal_power = 0.0;
  double noise_variance = 0.0;
  std::size_t clipped_samples = 0;
};

// Adds i.i.d. N(0, P_s / 10^(snr_db/10)) noise drawn from Rng(seed), then
// clips to [-1, 1]. Throws ZeroSignalPower for an all-zero clip.
AudioClip add_awgn(const AudioClip& clip, double snr_db, std::uint64_t seed,
                   AwgnStats* stats = nullptr);

// Noise variance that yields snr_db against a signal of power signal_power.
inline double awgn_variance(double signal_power, double snr_db) {
  return signal_power / std::pow(10.0, snr_db / 10.0);
}

template <typename Scalar>
struct FrameSequence {
  Matrix<Scalar> frames;  // one frame per row
  Index frame_len = 0;
  Index hop = 0;

  Index count() const { return frames.rows(); }
};

inline Index frame_count(Index signal_len, Index frame_len, Index hop) {
  return signal_len < frame_len ? 0 : (signal_len - frame_len) / hop + 1;
}

// Splits a signal into frames of frame_len samples starting every
// frame_len - overlap samples. Trailing samples that do not fill a frame are
// dropped.
template <typename Derived>
FrameSequence<typename Derived::Scalar> frame_signal(
    const Eigen::MatrixBase<Derived>& samples, Index frame_len, Index overlap) {
  using Scalar = typename Derived::Scalar;
  if (frame_len <= 0 || overlap < 0 || overlap >= frame_len)
    fail(ErrorCode::BadParams, "frame_signal requires frame_len > overlap >= 0");
  const Index len = samples.size();
  if (len < frame_len)
    fail(ErrorCode::SignalTooShort, "signal of " + std::to_string(len) +
                                        " samples is shorter than one frame of " +
                                        std::to_string(frame_len));
  FrameSequence<Scalar> out;
  out.frame_len = frame_len;
  out.hop = frame_len - overlap;
  const Index n = frame_count(len, frame_len, out.hop);
  out.frames.resize(n, frame_len);
  for (Index k = 0; k < n; ++k)
    out.frames.row(k) = samples.derived().segment(k * out.hop, frame_len).transpose();
  return out;
}

}  // namespace wmfcc
