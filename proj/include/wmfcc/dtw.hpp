#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wmfcc/error.hpp"
#include "wmfcc/feature_sequence.hpp"
#include "wmfcc/types.hpp"

namespace wmfcc {

// Alignment between two sequences as 1-based (i, j) index pairs.
struct WarpPath {
  std::vector<std::pair<Index, Index>> points;

  Index size() const { return static_cast<Index>(points.size()); }

  // Boundary, continuity/monotonicity and length conditions for an
  // alignment of an x_len-frame sequence against a y_len-frame one.
  bool is_legal(Index x_len, Index y_len) const {
    if (points.empty() || points.front() != std::pair<Index, Index>{1, 1} ||
        points.back() != std::pair<Index, Index>{x_len, y_len})
      return false;
    for (std::size_t k = 1; k < points.size(); ++k) {
      const auto [i, j] = points[k - 1];
      const auto [ni, nj] = points[k];
      if (ni < i || ni > i + 1 || nj < j || nj > j + 1 || (ni == i && nj == j)) return false;
    }
    return size() >= std::max(x_len, y_len) && size() <= x_len + y_len;
  }
};

struct DtwOptions {
  bool normalize_by_path_length = false;
  bool keep_matrices = false;
};

template <typename Scalar>
struct DtwResult {
  Scalar distance = 0;   // path_cost, or path_cost / K when normalized
  Scalar path_cost = 0;  // sum of local costs along the path
  WarpPath path;
  Matrix<Scalar> local_cost;        // filled when keep_matrices
  Matrix<Scalar> accumulated_cost;  // filled when keep_matrices
};

// Local-cost matrix of Euclidean distances between rows of x and rows of y.
template <typename DerivedX, typename DerivedY>
Matrix<typename DerivedX::Scalar> euclidean_cost(const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  Matrix<Scalar> cost(x.rows(), y.rows());
  for (Index j = 0; j < y.rows(); ++j)
    for (Index i = 0; i < x.rows(); ++i) cost(i, j) = (x.row(i) - y.row(j)).norm();
  return cost;
}

// DTW over a precomputed local-cost matrix with steps (i-1, j-1), (i-1, j),
// (i, j-1). Backtracking prefers diagonal, then vertical (i-1, j), then
// horizontal (i, j-1) on ties.
template <typename Derived>
DtwResult<typename Derived::Scalar> dtw_from_cost(const Eigen::MatrixBase<Derived>& local,
                                                  const DtwOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  const Index rows = local.rows();
  const Index cols = local.cols();
  if (rows == 0 || cols == 0) fail(ErrorCode::EmptySequence, "DTW of an empty sequence");

  Matrix<Scalar> acc(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      Scalar best;
      if (i == 0 && j == 0)
        best = 0;
      else if (i == 0)
        best = acc(0, j - 1);
      else if (j == 0)
        best = acc(i - 1, 0);
      else
        best = std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
      acc(i, j) = local(i, j) + best;
    }
  }

  DtwResult<Scalar> result;
  Index i = rows - 1;
  Index j = cols - 1;
  std::vector<std::pair<Index, Index>> reversed{{i + 1, j + 1}};
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const Scalar diag = acc(i - 1, j - 1);
      const Scalar vert = acc(i - 1, j);
      const Scalar horiz = acc(i, j - 1);
      if (diag <= vert && diag <= horiz) {
        --i;
        --j;
      } else if (vert <= horiz) {
        --i;
      } else {
        --j;
      }
    }
    reversed.emplace_back(i + 1, j + 1);
  }
  result.path.points.assign(reversed.rbegin(), reversed.rend());
  result.path_cost = acc(rows - 1, cols - 1);
  result.distance = options.normalize_by_path_length
                        ? result.path_cost / static_cast<Scalar>(result.path.size())
                        : result.path_cost;
  if (options.keep_matrices) {
    result.local_cost = local;
    result.accumulated_cost = std::move(acc);
  }
  return result;
}

template <typename DerivedX, typename DerivedY>
DtwResult<typename DerivedX::Scalar> dtw_distance(const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedY>& y,
                                                  const DtwOptions& options = {}) {
  if (x.rows() == 0 || y.rows() == 0) fail(ErrorCode::EmptySequence, "DTW of an empty sequence");
  if (x.cols() != y.cols())
    fail(ErrorCode::DimensionMismatch, "DTW between dimension " + std::to_string(x.cols()) +
                                           " and " + std::to_string(y.cols()));
  return dtw_from_cost(euclidean_cost(x, y), options);
}

inline DtwResult<double> dtw_distance(const FeatureSequence& x, const FeatureSequence& y,
                                      const DtwOptions& options = {}) {
  return dtw_distance(x.vectors, y.vectors, options);
}

struct LabeledSequence {
  std::string speaker_id;
  FeatureSequence features;
};

struct DtwClassification {
  std::string speaker_id;
  std::vector<double> template_distances;          // in template order
  std::vector<std::pair<std::string, double>> ranked;  // speaker, min distance; best first
};

// Nearest-template speaker. A speaker's score is the minimum distance over
// its templates; ties go to the lexicographically lowest speaker id.
inline DtwClassification dtw_classify(const FeatureSequence& test,
                                      const std::vector<LabeledSequence>& templates,
                                      const DtwOptions& options = {}) {
  if (templates.empty()) fail(ErrorCode::EmptyTemplateSet, "no DTW templates");
  DtwClassification out;
  std::map<std::string, double> best;
  for (const auto& t : templates) {
    const double d = dtw_distance(test, t.features, options).distance;
    out.template_distances.push_back(d);
    auto [it, inserted] = best.emplace(t.speaker_id, d);
    if (!inserted) it->second = std::min(it->second, d);
  }
  out.ranked.assign(best.begin(), best.end());
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  out.speaker_id = out.ranked.front().first;
  return out;
}

}  // namespace wmfcc
