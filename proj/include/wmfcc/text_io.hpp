#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wmfcc/dtw.hpp"
#include "wmfcc/dwt.hpp"
#include "wmfcc/feature_sequence.hpp"
#include "wmfcc/types.hpp"

namespace wmfcc {

// %.17g: enough digits to round-trip any double.
std::string format_real(double v);

// One value per line.
void write_vector_file(const std::filesystem::path& path, const VectorXd& v);
VectorXd read_vector_file(const std::filesystem::path& path);

// One row per line, space-separated.
void write_matrix_file(const std::filesystem::path& path, const MatrixXd& m);

// Writes <dir>/CA<L>.txt and <dir>/CD<l>.txt, one coefficient per line.
void write_decomposition(const std::filesystem::path& dir, const WaveletDecomposition<double>& d);

// <dir>/local_cost.txt and <dir>/accumulated_cost.txt (needs keep_matrices)
// plus <dir>/path.txt with one "i j" pair (1-based) per line.
void write_dtw_dump(const std::filesystem::path& dir, const DtwResult<double>& result);

// Feature file:
//   wmfcc-features 1
//   kind <mfcc|wavelet_mfcc>
//   dim <D>
//   frames <T>
//   frame_len <n>
//   hop <n>
//   sample_rate <hz>
//   channels <name>...        (empty list for mfcc)
//   config_hash <hex>
//   data
//   <T rows of D values, %.17g, space-separated>
void write_features(const std::filesystem::path& path, const FeatureSequence& seq);
FeatureSequence read_features(const std::filesystem::path& path);
std::string features_to_string(const FeatureSequence& seq);
FeatureSequence features_from_string(const std::string& text);

// True when the file starts with the feature-file magic line.
bool is_feature_file(const std::filesystem::path& path);

}  // namespace wmfcc
