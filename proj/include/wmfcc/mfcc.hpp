#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "wmfcc/audio.hpp"
#include "wmfcc/error.hpp"
#include "wmfcc/feature_sequence.hpp"
#include "wmfcc/types.hpp"

// Mel-frequency cepstral coefficients: window -> |DFT|^2 -> mel filterbank
// energies -> log -> DCT-II.

namespace wmfcc {

enum class WindowType { Hamming, Hann, Rectangular };

constexpr std::string_view to_string(WindowType w) {
  switch (w) {
    case WindowType::Hamming: return "hamming";
    case WindowType::Hann: return "hann";
    case WindowType::Rectangular: return "rectangular";
  }
  return "hamming";
}

inline WindowType parse_window(std::string_view text) {
  if (text == "hamming") return WindowType::Hamming;
  if (text == "hann" || text == "hanning") return WindowType::Hann;
  if (text == "rectangular") return WindowType::Rectangular;
  fail(ErrorCode::BadConfig, "unknown window '" + std::string(text) + "'");
}

struct MfccConfig {
  int frame_len = 256;
  int overlap = 100;
  int n_fft = 256;
  int n_filters = 20;
  int n_ceps = 13;  // includes c0
  double fmin_hz = 0.0;
  std::optional<double> fmax_hz;  // unset: Nyquist of the analysed signal
  WindowType window = WindowType::Hamming;
  double log_floor = 1e-10;
  double pre_emphasis = 0.0;  // 0 disables
  int delta_order = 0;        // 0: static only, 1: +deltas, 2: +delta-deltas

  int hop() const { return frame_len - overlap; }
  int dim() const { return n_ceps * (1 + delta_order); }
  double upper_edge_hz(double sample_rate_hz) const {
    return fmax_hz.value_or(sample_rate_hz / 2.0);
  }

  void validate(double sample_rate_hz) const {
    if (frame_len <= 0 || overlap < 0 || overlap >= frame_len)
      fail(ErrorCode::BadConfig, "need frame_len > overlap >= 0");
    if (n_fft < frame_len) fail(ErrorCode::BadConfig, "n_fft must be >= frame_len");
    if (n_filters < 1) fail(ErrorCode::BadConfig, "n_filters must be >= 1");
    if (n_ceps < 1 || n_ceps > n_filters) fail(ErrorCode::BadConfig, "need 1 <= n_ceps <= n_filters");
    if (!(sample_rate_hz > 0)) fail(ErrorCode::BadConfig, "sample rate must be positive");
    const double fmax = upper_edge_hz(sample_rate_hz);
    if (!(fmin_hz >= 0 && fmin_hz < fmax && fmax <= sample_rate_hz / 2.0))
      fail(ErrorCode::BadConfig, "need 0 <= fmin < fmax <= sample_rate / 2");
    if (!(log_floor > 0)) fail(ErrorCode::BadConfig, "log_floor must be positive");
    if (delta_order < 0 || delta_order > 2) fail(ErrorCode::BadConfig, "delta_order must be 0, 1 or 2");
  }
};

template <typename Scalar>
Scalar mel_scale(Scalar f_hz) {
  if (f_hz < 0) fail(ErrorCode::NegativeFrequency, "mel_scale of a negative frequency");
  return Scalar(2595) * std::log10(Scalar(1) + f_hz / Scalar(700));
}

template <typename Scalar>
Scalar inverse_mel_scale(Scalar mel) {
  return Scalar(700) * (std::pow(Scalar(10), mel / Scalar(2595)) - Scalar(1));
}

template <typename Scalar>
struct MelFilterbank {
  Matrix<Scalar> weights;           // n_filters x (n_fft / 2 + 1)
  Vector<Scalar> center_freqs_hz;   // n_filters
  std::vector<Index> edge_bins;     // n_filters + 2 breakpoints, centers in [1, n]

  Index filters() const { return weights.rows(); }
};

// Triangular filters over FFT bins. Breakpoint frequencies are mel-uniform
// between mel(fmin) and mel(fmax) (n_filters + 2 points including the two
// virtual edges) and are quantized to bin floor((n_fft + 1) f / sr); each
// triangle rises linearly from the previous breakpoint to 1 at its own
// center bin and falls to zero at the next.
template <typename Scalar = double>
MelFilterbank<Scalar> build_mel_filterbank(const MfccConfig& config, double sample_rate_hz) {
  config.validate(sample_rate_hz);
  const int n = config.n_filters;
  const Index n_bins = config.n_fft / 2 + 1;
  const Scalar mel_lo = mel_scale<Scalar>(config.fmin_hz);
  const Scalar mel_hi = mel_scale<Scalar>(config.upper_edge_hz(sample_rate_hz));
  const Scalar spacing = (mel_hi - mel_lo) / Scalar(n + 1);

  MelFilterbank<Scalar> bank;
  bank.center_freqs_hz.resize(n);
  bank.edge_bins.resize(n + 2);
  for (int i = 0; i < n + 2; ++i) {
    const Scalar hz = inverse_mel_scale(mel_lo + spacing * Scalar(i));
    if (i >= 1 && i <= n) bank.center_freqs_hz[i - 1] = hz;
    const auto bin = static_cast<Index>(
        std::floor((config.n_fft + 1) * static_cast<double>(hz) / sample_rate_hz));
    bank.edge_bins[i] = std::min<Index>(bin, n_bins - 1);
  }
  for (int i = 1; i < n + 2; ++i)
    if (bank.edge_bins[i] <= bank.edge_bins[i - 1])
      fail(ErrorCode::DegenerateBand,
           "mel breakpoints " + std::to_string(i - 1) + " and " + std::to_string(i) +
               " fall in FFT bin " + std::to_string(bank.edge_bins[i]));

  bank.weights = Matrix<Scalar>::Zero(n, n_bins);
  for (int f = 0; f < n; ++f) {
    const Index lo = bank.edge_bins[f];
    const Index mid = bank.edge_bins[f + 1];
    const Index hi = bank.edge_bins[f + 2];
    for (Index k = lo; k <= mid; ++k)
      bank.weights(f, k) = Scalar(k - lo) / Scalar(mid - lo);
    for (Index k = mid; k <= hi; ++k)
      bank.weights(f, k) = Scalar(hi - k) / Scalar(hi - mid);
  }
  return bank;
}

template <typename Scalar = double>
Vector<Scalar> make_window(WindowType type, Index n) {
  Vector<Scalar> w(n);
  const Scalar denom = n > 1 ? Scalar(n - 1) : Scalar(1);
  for (Index i = 0; i < n; ++i) {
    const Scalar phase = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i) / denom;
    switch (type) {
      case WindowType::Hamming: w[i] = Scalar(0.54) - Scalar(0.46) * std::cos(phase); break;
      case WindowType::Hann: w[i] = Scalar(0.5) - Scalar(0.5) * std::cos(phase); break;
      case WindowType::Rectangular: w[i] = Scalar(1); break;
    }
  }
  return w;
}

// Orthonormal DCT-II, first n_out coefficients:
//   y_k = s_k sum_j v_j cos(pi k (2j + 1) / 2J), s_0 = sqrt(1/J), s_k = sqrt(2/J).
template <typename Derived>
Vector<typename Derived::Scalar> dct_ii(const Eigen::MatrixBase<Derived>& v, Index n_out) {
  using Scalar = typename Derived::Scalar;
  const Index len = v.size();
  if (n_out < 1 || n_out > len)
    fail(ErrorCode::BadLength, "dct_ii needs 1 <= n_out <= " + std::to_string(len));
  Vector<Scalar> y(n_out);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (Index k = 0; k < n_out; ++k) {
    Scalar acc = 0;
    for (Index j = 0; j < len; ++j)
      acc += v(j) * std::cos(pi * Scalar(k) * Scalar(2 * j + 1) / Scalar(2 * len));
    const Scalar scale = std::sqrt((k == 0 ? Scalar(1) : Scalar(2)) / Scalar(len));
    y[k] = scale * acc;
  }
  return y;
}

// Transpose of the orthonormal DCT-II (a scaled DCT-III); coefficients past
// coeffs.size() are taken as zero.
template <typename Derived>
Vector<typename Derived::Scalar> inverse_dct_ii(const Eigen::MatrixBase<Derived>& coeffs,
                                                Index length) {
  using Scalar = typename Derived::Scalar;
  if (coeffs.size() < 1 || coeffs.size() > length)
    fail(ErrorCode::BadLength, "inverse_dct_ii needs 1 <= coefficients <= length");
  Vector<Scalar> v = Vector<Scalar>::Zero(length);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (Index j = 0; j < length; ++j) {
    Scalar acc = 0;
    for (Index k = 0; k < coeffs.size(); ++k) {
      const Scalar scale = std::sqrt((k == 0 ? Scalar(1) : Scalar(2)) / Scalar(length));
      acc += scale * coeffs(k) * std::cos(pi * Scalar(k) * Scalar(2 * j + 1) / Scalar(2 * length));
    }
    v[j] = acc;
  }
  return v;
}

// |X_k|^2 for k = 0 .. n_fft/2 of the zero-padded frame.
template <typename Derived>
Vector<typename Derived::Scalar> power_spectrum(const Eigen::MatrixBase<Derived>& frame,
                                                Index n_fft) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> padded(static_cast<std::size_t>(n_fft), Scalar(0));
  for (Index i = 0; i < frame.size(); ++i) padded[static_cast<std::size_t>(i)] = frame(i);
  std::vector<std::complex<Scalar>> spectrum;
  Eigen::FFT<Scalar> fft;
  fft.fwd(spectrum, padded);
  const Index n_bins = n_fft / 2 + 1;
  Vector<Scalar> power(n_bins);
  for (Index k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[static_cast<std::size_t>(k)]);
  return power;
}

template <typename Derived>
Vector<typename Derived::Scalar> apply_pre_emphasis(const Eigen::MatrixBase<Derived>& x,
                                                    double coefficient) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> y = x;
  if (coefficient == 0.0) return y;
  for (Index i = x.size() - 1; i >= 1; --i) y[i] = x(i) - Scalar(coefficient) * x(i - 1);
  return y;
}

// Pre-log mel energies, one frame per row.
template <typename Derived>
Matrix<typename Derived::Scalar> filterbank_energies(const Eigen::MatrixBase<Derived>& samples,
                                                     double sample_rate_hz,
                                                     const MfccConfig& config) {
  using Scalar = typename Derived::Scalar;
  config.validate(sample_rate_hz);
  const Vector<Scalar> signal = apply_pre_emphasis(samples, config.pre_emphasis);
  const FrameSequence<Scalar> frames = frame_signal(signal, config.frame_len, config.overlap);
  const MelFilterbank<Scalar> bank = build_mel_filterbank<Scalar>(config, sample_rate_hz);
  const Vector<Scalar> window = make_window<Scalar>(config.window, config.frame_len);

  Matrix<Scalar> energies(frames.count(), config.n_filters);
  for (Index t = 0; t < frames.count(); ++t) {
    const Vector<Scalar> windowed = frames.frames.row(t).transpose().cwiseProduct(window);
    energies.row(t) = (bank.weights * power_spectrum(windowed, config.n_fft)).transpose();
  }
  return energies;
}

// Regression deltas over +-2 frames with edge frames replicated.
template <typename Scalar>
Matrix<Scalar> delta_features(const Matrix<Scalar>& c) {
  constexpr int kWindow = 2;
  const Index frames = c.rows();
  Matrix<Scalar> d = Matrix<Scalar>::Zero(frames, c.cols());
  const Scalar norm = Scalar(2 * (1 * 1 + 2 * 2));
  for (Index t = 0; t < frames; ++t) {
    for (int n = 1; n <= kWindow; ++n) {
      const Index ahead = std::min<Index>(frames - 1, t + n);
      const Index behind = std::max<Index>(0, t - n);
      d.row(t) += Scalar(n) * (c.row(ahead) - c.row(behind));
    }
  }
  return d / norm;
}

// MFCC matrix (T x dim) for a sampled signal.
template <typename Derived>
Matrix<typename Derived::Scalar> compute_mfcc(const Eigen::MatrixBase<Derived>& samples,
                                              double sample_rate_hz, const MfccConfig& config) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> energies = filterbank_energies(samples, sample_rate_hz, config);
  const Index frames = energies.rows();
  Matrix<Scalar> ceps(frames, config.n_ceps);
  const Scalar floor = static_cast<Scalar>(config.log_floor);
  for (Index t = 0; t < frames; ++t) {
    const Vector<Scalar> log_energy =
        energies.row(t).transpose().unaryExpr([floor](Scalar e) { return std::log(std::max(e, floor)); });
    ceps.row(t) = dct_ii(log_energy, config.n_ceps).transpose();
  }
  if (config.delta_order == 0) return ceps;

  Matrix<Scalar> out(frames, config.dim());
  out.leftCols(config.n_ceps) = ceps;
  const Matrix<Scalar> d1 = delta_features(ceps);
  out.middleCols(config.n_ceps, config.n_ceps) = d1;
  if (config.delta_order == 2) out.rightCols(config.n_ceps) = delta_features(d1);
  return out;
}

inline FeatureSequence extract_mfcc(const VectorXd& samples, int sample_rate_hz,
                                    const MfccConfig& config) {
  FeatureSequence seq;
  seq.vectors = compute_mfcc(samples, sample_rate_hz, config);
  seq.kind = FeatureKind::Mfcc;
  seq.meta = {config.frame_len, config.hop(), sample_rate_hz};
  return seq;
}

inline FeatureSequence extract_mfcc(const AudioClip& clip, const MfccConfig& config) {
  return extract_mfcc(clip.samples(), clip.sample_rate_hz(), config);
}

}  // namespace wmfcc
