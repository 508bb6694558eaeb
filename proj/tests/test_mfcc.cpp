#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "wmfcc/mfcc.hpp"

using namespace wmfcc;

namespace {

constexpr double kPi = std::numbers::pi;

VectorXd random_signal(Index n, unsigned seed, double scale = 0.5) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = u(gen);
  return x;
}

VectorXd tone(Index n, double freq, double rate) {
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = 0.5 * std::sin(2 * kPi * freq * i / rate);
  return x;
}

// DCT-II basis matrix built row by row from the cosine definition.
MatrixXd dct_matrix(Index len) {
  MatrixXd c(len, len);
  for (Index k = 0; k < len; ++k)
    for (Index j = 0; j < len; ++j)
      c(k, j) = std::sqrt((k == 0 ? 1.0 : 2.0) / len) * std::cos(kPi * k * (j + 0.5) / len);
  return c;
}

}  // namespace

TEST_CASE("mel scale closed forms") {
  CHECK(mel_scale(0.0) == 0.0);
  CHECK(mel_scale(700.0) == doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-14));
  CHECK(mel_scale(700.0) == doctest::Approx(781.17).epsilon(1e-5));
  CHECK(mel_scale(1000.0) == doctest::Approx(999.99).epsilon(1e-5));
  for (double f : {10.0, 440.0, 3999.0}) CHECK(inverse_mel_scale(mel_scale(f)) == doctest::Approx(f));
  CHECK(mel_scale(100.0) < mel_scale(101.0));
  try {
    mel_scale(-1.0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeFrequency);
  }
}

TEST_CASE("default filterbank at 8 kHz") {
  const MfccConfig cfg;
  const auto bank = build_mel_filterbank(cfg, 8000);
  REQUIRE(bank.filters() == 20);
  CHECK(bank.weights.cols() == 129);
  CHECK(bank.weights.minCoeff() >= 0.0);
  for (Index f = 0; f < 20; ++f) CHECK(bank.weights.row(f).maxCoeff() == 1.0);

  const double step = mel_scale(4000.0) / 21.0;
  for (Index f = 0; f < 20; ++f)
    CHECK(std::abs(mel_scale(bank.center_freqs_hz[f]) - step * (f + 1)) < 1e-9);
  for (Index f = 1; f < 20; ++f) {
    const double gap = mel_scale(bank.center_freqs_hz[f]) - mel_scale(bank.center_freqs_hz[f - 1]);
    CHECK(std::abs(gap - step) < 1e-9);
  }

  // Triangles: zero outside (prev, next), peak at the center bin, linear ramps.
  for (Index f = 0; f < 20; ++f) {
    const Index lo = bank.edge_bins[f], mid = bank.edge_bins[f + 1], hi = bank.edge_bins[f + 2];
    CHECK(bank.weights(f, mid) == 1.0);
    for (Index k = 0; k < 129; ++k) {
      const double expected = k <= lo || k >= hi ? 0.0
                              : k <= mid         ? double(k - lo) / (mid - lo)
                                                 : double(hi - k) / (hi - mid);
      CHECK(bank.weights(f, k) == doctest::Approx(expected).epsilon(1e-15));
    }
  }

  // Every bin strictly between the first and last centers is covered.
  for (Index k = bank.edge_bins[1] + 1; k < bank.edge_bins[20]; ++k) CHECK(bank.weights.col(k).sum() > 0);
}

TEST_CASE("degenerate bands are rejected") {
  MfccConfig cfg;
  cfg.n_filters = 60;
  cfg.n_ceps = 13;
  cfg.n_fft = 256;
  try {
    build_mel_filterbank(cfg, 8000);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBand);
  }
}

TEST_CASE("config validation") {
  MfccConfig cfg;
  cfg.n_ceps = 21;
  CHECK_THROWS_AS(cfg.validate(8000), Error);
  cfg = {};
  cfg.fmax_hz = 5000;
  CHECK_THROWS_AS(cfg.validate(8000), Error);
  cfg = {};
  cfg.n_fft = 128;
  CHECK_THROWS_AS(cfg.validate(8000), Error);
  cfg = {};
  CHECK_NOTHROW(cfg.validate(8000));
}

TEST_CASE("dct of ones") {
  const auto y = dct_ii(VectorXd::Ones(20), 20);
  CHECK(std::abs(y[0] - std::sqrt(20.0)) < 1e-12);
  CHECK(y.tail(19).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dct matches the basis matrix and round-trips") {
  const VectorXd v = random_signal(20, 3);
  const MatrixXd c = dct_matrix(20);
  CHECK((c * c.transpose() - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-13);
  const VectorXd y = dct_ii(v, 20);
  CHECK((y - c * v).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((inverse_dct_ii(y, 20) - v).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((dct_ii(v, 13) - y.head(13)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dct with one output") {
  const VectorXd v = random_signal(9, 4);
  const auto y = dct_ii(v, 1);
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(std::sqrt(1.0 / 9) * v.sum()).epsilon(1e-14));
  CHECK_THROWS_AS(dct_ii(v, 0), Error);
  CHECK_THROWS_AS(dct_ii(v, 10), Error);
}

TEST_CASE("power spectrum matches a naive DFT") {
  const VectorXd frame = random_signal(200, 8);
  const auto p = power_spectrum(frame, 256);
  REQUIRE(p.size() == 129);
  for (Index k = 0; k <= 128; ++k) {
    std::complex<double> acc = 0;
    for (Index n = 0; n < 200; ++n) acc += frame[n] * std::polar(1.0, -2 * kPi * k * n / 256.0);
    CHECK(std::abs(p[k] - std::norm(acc)) < 1e-10);
  }
}

TEST_CASE("windows") {
  const auto w = make_window(WindowType::Hamming, 256);
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[255] == doctest::Approx(0.08));
  CHECK((w - w.reverse()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(make_window(WindowType::Hann, 16)[0] == doctest::Approx(0.0));
  CHECK(make_window(WindowType::Rectangular, 16).isOnes(0));
  CHECK(parse_window("hann") == WindowType::Hann);
}

TEST_CASE("zero signal gives the floored cepstrum") {
  const MfccConfig cfg;
  const auto seq = extract_mfcc(VectorXd::Zero(256), 8000, cfg);
  REQUIRE(seq.frames() == 1);
  REQUIRE(seq.dim() == 13);
  CHECK(std::abs(seq.vectors(0, 0) - std::sqrt(20.0) * std::log(1e-10)) < 1e-12);
  CHECK(seq.vectors.row(0).tail(12).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(seq.kind == FeatureKind::Mfcc);
  CHECK(seq.meta.hop == 156);
}

TEST_CASE("frame count matches framing") {
  for (Index n : {256, 411, 412, 8000, 14400}) {
    const auto seq = extract_mfcc(random_signal(n, 1), 8000, MfccConfig{});
    CHECK(seq.frames() == frame_count(n, 256, 156));
  }
  CHECK_THROWS_AS(extract_mfcc(VectorXd::Zero(255), 8000, MfccConfig{}), Error);
}

TEST_CASE("1 kHz tone peaks in the filter centered nearest 1 kHz") {
  const MfccConfig cfg;
  const auto bank = build_mel_filterbank(cfg, 8000);
  const MatrixXd e = filterbank_energies(tone(256, 1000.0, 8000.0), 8000.0, cfg);
  Index nearest = 0;
  (bank.center_freqs_hz.array() - 1000.0).abs().minCoeff(&nearest);
  Index loudest = 0;
  e.row(0).maxCoeff(&loudest);
  CHECK(loudest == nearest);
}

TEST_CASE("delaying by one hop shifts the features by one frame") {
  const VectorXd x = random_signal(3000, 6);
  VectorXd delayed(3000 + 156);
  delayed << random_signal(156, 7), x;
  const auto a = extract_mfcc(x, 8000, MfccConfig{});
  const auto b = extract_mfcc(delayed, 8000, MfccConfig{});
  REQUIRE(b.frames() == a.frames() + 1);
  CHECK(b.vectors.bottomRows(a.frames()) == a.vectors);
}

TEST_CASE("log floor keeps outputs finite and results deterministic") {
  VectorXd x = VectorXd::Zero(2000);
  x.segment(900, 300) = random_signal(300, 2, 1.0);
  const auto a = extract_mfcc(x, 8000, MfccConfig{});
  const auto b = extract_mfcc(x, 8000, MfccConfig{});
  CHECK(a.vectors.allFinite());
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("deltas and pre-emphasis") {
  MfccConfig cfg;
  cfg.delta_order = 2;
  const VectorXd x = random_signal(4000, 12);
  const auto seq = extract_mfcc(x, 8000, cfg);
  CHECK(seq.dim() == 39);
  const auto base = extract_mfcc(x, 8000, MfccConfig{});
  CHECK(seq.vectors.leftCols(13) == base.vectors);
  // A constant cepstral track has zero deltas.
  const MatrixXd flat = MatrixXd::Constant(6, 3, 2.5);
  CHECK(delta_features(flat).isZero(0));
  // A linear ramp has unit slope away from the edges.
  MatrixXd ramp(9, 1);
  for (Index t = 0; t < 9; ++t) ramp(t, 0) = double(t);
  CHECK(delta_features(ramp)(4, 0) == doctest::Approx(1.0));

  VectorXd v(3);
  v << 1.0, 2.0, 4.0;
  const auto pe = apply_pre_emphasis(v, 0.5);
  CHECK(pe[0] == 1.0);
  CHECK(pe[1] == 1.5);
  CHECK(pe[2] == 3.0);
  CHECK(apply_pre_emphasis(v, 0.0) == v);
}

TEST_CASE("float instantiation") {
  const Eigen::VectorXf x = random_signal(1000, 5).cast<float>();
  const Eigen::MatrixXf c = compute_mfcc(x, 8000.0, MfccConfig{});
  const MatrixXd d = compute_mfcc(x.cast<double>().eval(), 8000.0, MfccConfig{});
  CHECK((c.cast<double>() - d).cwiseAbs().maxCoeff() < 1e-3);
}
