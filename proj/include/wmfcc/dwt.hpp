#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wmfcc/error.hpp"
#include "wmfcc/types.hpp"

// Discrete wavelet transform by the two-channel filter-bank (Mallat)
// scheme: convolve with the lowpass/highpass analysis pair, keep every second
// output, and iterate on the approximation.

namespace wmfcc {

// Boundary handling for a single analysis step.
//  Symmetric:     half-point reflection (x[-1] = x[0], x[-2] = x[1], ...);
//                 output length floor((n + F - 1) / 2).
//  Periodization: circular wrap with odd lengths extended by repeating the
//                 last sample; output length ceil(n / 2). The transform is
//                 orthogonal, which makes coefficient energy equal to signal
//                 energy exactly.
enum class Extension { Symmetric, Periodization };

template <typename Scalar>
struct WaveletFilterPair {
  Vector<Scalar> lowpass;
  Vector<Scalar> highpass;

  Index size() const { return lowpass.size(); }
};

template <typename Scalar>
struct DwtStep {
  Vector<Scalar> approx;
  Vector<Scalar> detail;
};

template <typename Scalar>
struct WaveletDecomposition {
  int level = 0;
  Vector<Scalar> approx;                 // CA_level
  std::vector<Vector<Scalar>> details;   // [CD_level, ..., CD_1]
  std::vector<Index> source_lengths;     // [len(S), len(CA_1), ..., len(CA_{level-1})]
  Extension extension = Extension::Symmetric;

  // Detail channel CD_lvl, 1 <= lvl <= level.
  const Vector<Scalar>& detail(int lvl) const { return details.at(level - lvl); }
  Vector<Scalar>& detail(int lvl) { return details.at(level - lvl); }
};

// Largest number of the levels the decomposition permits for n samples:
// floor(log2 n).
inline int max_dwt_level(Index n) {
  int level = 0;
  while (n >= 2) {
    n /= 2;
    ++level;
  }
  return level;
}

inline Index dwt_output_length(Index n, Index filter_len, Extension ext) {
  return ext == Extension::Symmetric ? (n + filter_len - 1) / 2 : (n + 1) / 2;
}

namespace detail {

// Half-point symmetric index reflection into [0, n).
inline Index reflect(Index i, Index n) {
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

inline Index wrap(Index i, Index n) {
  Index m = i % n;
  return m < 0 ? m + n : m;
}

}  // namespace detail

// Checks the orthonormal-pair conditions: sum(h) = sqrt 2, sum(g) = 0,
// sum(h^2) = 1, g[n] = (-1)^n h[F-1-n] and double-shift orthogonality.
// Returns an empty string when all hold to tol, otherwise the failed
// condition.
template <typename Scalar>
std::string check_filter_pair(const WaveletFilterPair<Scalar>& f, Scalar tol) {
  const Index len = f.size();
  if (len == 0 || len % 2 != 0 || f.highpass.size() != len) return "filter length";
  using std::abs;
  using std::sqrt;
  if (abs(f.lowpass.sum() - sqrt(Scalar(2))) > tol) return "sum(lowpass) != sqrt(2)";
  if (abs(f.highpass.sum()) > tol) return "sum(highpass) != 0";
  if (abs(f.lowpass.squaredNorm() - Scalar(1)) > tol) return "sum(lowpass^2) != 1";
  for (Index n = 0; n < len; ++n) {
    const Scalar sign = (n % 2 == 0) ? Scalar(1) : Scalar(-1);
    if (abs(f.highpass[n] - sign * f.lowpass[len - 1 - n]) > tol) return "quadrature mirror";
  }
  for (Index shift = 2; shift < len; shift += 2) {
    Scalar dot = 0;
    for (Index n = 0; n + shift < len; ++n) dot += f.lowpass[n] * f.lowpass[n + shift];
    if (abs(dot) > tol) return "double-shift orthogonality at " + std::to_string(shift);
  }
  return {};
}

// Daubechies wavelet with 8 vanishing moments (16 taps), analysis lowpass in
// convolution order. Highpass follows g[n] = (-1)^n h[15 - n].
template <typename Scalar = double>
WaveletFilterPair<Scalar> make_db8_filters() {
  static constexpr std::array<double, 16> kLowpass = {
      -0.00011747678412476953, 0.0006754494064505693, -0.00039174037337694705,
      -0.004870352993451574,   0.008746094047405777,  0.013981027917398282,
      -0.044088253930794755,   -0.017369301001807547, 0.12874742662047847,
      0.0004724845739132828,   -0.2840155429615469,   -0.015829105256349306,
      0.5853546836542067,      0.6756307362972898,    0.31287159091429995,
      0.05441584224310401,
  };
  WaveletFilterPair<Scalar> f;
  const Index len = static_cast<Index>(kLowpass.size());
  f.lowpass.resize(len);
  f.highpass.resize(len);
  for (Index n = 0; n < len; ++n) f.lowpass[n] = static_cast<Scalar>(kLowpass[n]);
  for (Index n = 0; n < len; ++n)
    f.highpass[n] = (n % 2 == 0 ? Scalar(1) : Scalar(-1)) * f.lowpass[len - 1 - n];
  if (const std::string bad = check_filter_pair(f, static_cast<Scalar>(1e-10)); !bad.empty())
    throw std::logic_error("db8 table failed invariant: " + bad);
  return f;
}

// One analysis step: out[k] = sum_j h[j] x[2k + 1 - j] with x extended at the
// boundaries according to ext.
template <typename Derived>
DwtStep<typename Derived::Scalar> dwt_step(
    const Eigen::MatrixBase<Derived>& signal,
    const WaveletFilterPair<typename Derived::Scalar>& filters,
    Extension ext = Extension::Symmetric) {
  using Scalar = typename Derived::Scalar;
  const Index n = signal.size();
  if (n < 1) fail(ErrorCode::EmptySignal, "dwt_step on an empty signal");
  const Index taps = filters.size();
  const Index out_len = dwt_output_length(n, taps, ext);
  const Index period = n + (n % 2);  // periodization works on an even length

  auto sample = [&](Index i) -> Scalar {
    if (ext == Extension::Symmetric) return signal(detail::reflect(i, n));
    const Index m = detail::wrap(i, period);
    return signal(m < n ? m : n - 1);
  };

  DwtStep<Scalar> out{Vector<Scalar>::Zero(out_len), Vector<Scalar>::Zero(out_len)};
  for (Index k = 0; k < out_len; ++k) {
    Scalar a = 0;
    Scalar d = 0;
    for (Index j = 0; j < taps; ++j) {
      const Scalar x = sample(2 * k + 1 - j);
      a += filters.lowpass[j] * x;
      d += filters.highpass[j] * x;
    }
    out.approx[k] = a;
    out.detail[k] = d;
  }
  return out;
}

// Synthesis step (adjoint of the analysis step) producing out_len samples.
template <typename DerivedA, typename DerivedD>
Vector<typename DerivedA::Scalar> idwt_step(
    const Eigen::MatrixBase<DerivedA>& approx, const Eigen::MatrixBase<DerivedD>& detail_coeffs,
    const WaveletFilterPair<typename DerivedA::Scalar>& filters, Index out_len,
    Extension ext = Extension::Symmetric) {
  using Scalar = typename DerivedA::Scalar;
  const Index taps = filters.size();
  const Index n_coeffs = approx.size();
  if (detail_coeffs.size() != n_coeffs)
    fail(ErrorCode::LengthMismatch, "approximation and detail lengths differ");
  if (out_len < 1 || dwt_output_length(out_len, taps, ext) != n_coeffs)
    fail(ErrorCode::LengthMismatch,
         std::to_string(n_coeffs) + " coefficients cannot reconstruct " +
             std::to_string(out_len) + " samples");

  Vector<Scalar> out = Vector<Scalar>::Zero(out_len);
  if (ext == Extension::Symmetric) {
    // x[n] = sum_k a[k] h[2k + 1 - n] + d[k] g[2k + 1 - n]; every coefficient
    // that touches [0, out_len) was computed by the analysis step.
    for (Index i = 0; i < out_len; ++i) {
      Scalar acc = 0;
      const Index k_hi = std::min<Index>(n_coeffs - 1, (i + taps - 2) / 2);
      for (Index k = i / 2; k <= k_hi; ++k) {
        const Index j = 2 * k + 1 - i;
        acc += filters.lowpass[j] * approx(k) + filters.highpass[j] * detail_coeffs(k);
      }
      out[i] = acc;
    }
    return out;
  }

  const Index period = out_len + (out_len % 2);
  Vector<Scalar> full = Vector<Scalar>::Zero(period);
  for (Index k = 0; k < n_coeffs; ++k)
    for (Index j = 0; j < taps; ++j)
      full[detail::wrap(2 * k + 1 - j, period)] +=
          filters.lowpass[j] * approx(k) + filters.highpass[j] * detail_coeffs(k);
  return full.head(out_len);
}

template <typename Derived>
WaveletDecomposition<typename Derived::Scalar> wavedec(
    const Eigen::MatrixBase<Derived>& signal,
    const WaveletFilterPair<typename Derived::Scalar>& filters, int level,
    Extension ext = Extension::Symmetric) {
  using Scalar = typename Derived::Scalar;
  if (signal.size() < 1) fail(ErrorCode::EmptySignal, "wavedec on an empty signal");
  if (level < 1) fail(ErrorCode::BadParams, "decomposition level must be >= 1");
  if (level > max_dwt_level(signal.size()))
    fail(ErrorCode::LevelTooDeep, "level " + std::to_string(level) + " exceeds log2(" +
                                      std::to_string(signal.size()) + ")");

  WaveletDecomposition<Scalar> out;
  out.level = level;
  out.extension = ext;
  out.details.resize(level);
  Vector<Scalar> current = signal;
  for (int l = 1; l <= level; ++l) {
    out.source_lengths.push_back(current.size());
    DwtStep<Scalar> step = dwt_step(current, filters, ext);
    out.details[level - l] = std::move(step.detail);
    current = std::move(step.approx);
  }
  out.approx = std::move(current);
  return out;
}

template <typename Scalar>
Vector<Scalar> waverec(const WaveletDecomposition<Scalar>& decomp,
                       const WaveletFilterPair<Scalar>& filters) {
  const int level = decomp.level;
  if (level < 1 || static_cast<int>(decomp.details.size()) != level ||
      static_cast<int>(decomp.source_lengths.size()) != level)
    fail(ErrorCode::LengthMismatch, "decomposition bookkeeping does not match its level");
  const Index taps = filters.size();
  for (int l = 1; l <= level; ++l) {
    const Index expected = dwt_output_length(decomp.source_lengths[l - 1], taps, decomp.extension);
    const Index next_source =
        l < level ? decomp.source_lengths[l] : decomp.approx.size();
    if (decomp.detail(l).size() != expected || next_source != expected)
      fail(ErrorCode::LengthMismatch, "channel lengths inconsistent at level " + std::to_string(l));
  }
  Vector<Scalar> current = decomp.approx;
  for (int l = level; l >= 1; --l)
    current = idwt_step(current, decomp.detail(l), filters, decomp.source_lengths[l - 1],
                        decomp.extension);
  return current;
}

}  // namespace wmfcc
