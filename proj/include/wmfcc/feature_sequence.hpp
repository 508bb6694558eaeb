#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wmfcc/error.hpp"
#include "wmfcc/types.hpp"

namespace wmfcc {

enum class FeatureKind { Mfcc, WaveletMfcc };

constexpr std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::Mfcc ? "mfcc" : "wavelet_mfcc";
}

// Accepts "mfcc", "wavelet_mfcc" and the CLI spelling "wavelet-mfcc".
inline FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "mfcc") return FeatureKind::Mfcc;
  if (text == "wavelet_mfcc" || text == "wavelet-mfcc") return FeatureKind::WaveletMfcc;
  fail(ErrorCode::BadParams, "unknown feature kind '" + std::string(text) + "'");
}

struct FrameMeta {
  int frame_len = 0;
  int hop = 0;
  int sample_rate_hz = 0;  // rate of the source clip

  bool operator==(const FrameMeta&) const = default;
};

// T x D observation sequence, one frame per row.
struct FeatureSequence {
  MatrixXd vectors;
  FeatureKind kind = FeatureKind::Mfcc;
  FrameMeta meta;
  std::vector<std::string> channels;  // wavelet channel order, empty for plain MFCC
  std::string config_hash;

  Index frames() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

}  // namespace wmfcc
