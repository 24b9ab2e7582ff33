#pragma once

#include "opkde/kernels.hpp"
#include "opkde/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace opkde {

/// Paired training samples, one per row of `inputs` and `outputs`.
/// `labels` optionally carries a symbolic form of each output (OCR words).
struct Dataset {
  SampleMatrix inputs;
  SampleMatrix outputs;
  std::vector<std::string> labels;
  std::map<std::string, std::string> metadata;

  Index size() const { return inputs.rows(); }
  void validate() const;
  Dataset subset(const std::vector<Index>& rows) const;
};

/// Reads delimited numeric text (commas and/or whitespace). Blank lines and
/// lines starting with '#' are skipped. The first `input_cols` columns are
/// inputs and the next `output_cols` are outputs; extra columns are an error.
Dataset load_matrix_dataset(const std::string& path, Index input_cols, Index output_cols);

/// A USPS-style digit: class label plus 256 pixels, row-major 16x16.
struct DigitImage {
  int label = 0;
  Vector pixels;
};

/// One digit per line: label followed by 256 pixel values.
std::vector<DigitImage> load_usps(const std::string& path);

/// Inputs are pixel rows 0-7 (128 values), outputs rows 8-15.
Dataset split_digit_halves(const std::vector<Vector>& digits);

/// Scales pixels linearly so the observed range maps onto [lo, hi].
std::vector<Vector> normalize_pixels(const std::vector<Vector>& digits, double lo, double hi);

/// A segmented handwritten word: one 16x8 binary image (128 values) per letter.
struct OcrWord {
  std::vector<Vector> images;
  std::string word;

  Index length() const { return static_cast<Index>(word.size()); }
};

/// Rows: word_id, position, letter, 128 binary pixels. Comma or whitespace
/// delimited; '#' comments allowed. Words keep first-appearance order and
/// letters are ordered by position.
std::vector<OcrWord> load_ocr_words(const std::string& path);

/// Writes words in the load_ocr_words format.
void write_ocr_words(const std::string& path, const std::vector<OcrWord>& words);

inline const std::string kLowercaseAlphabet = "abcdefghijklmnopqrstuvwxyz";

/// Explicit input and output feature maps for segmented OCR.
///
/// Input:  Phi_k(x)_m = k(c_m, x_{v(c_m)}) over every training segment c_m
///         at position v(c_m), and 0 where v(c_m) exceeds the word length.
/// Output: Phi_l(y) = [onehot(y_1), ..., onehot(y_q), 0, ..., 0], |alphabet| * p values.
class OcrFeatureMap {
 public:
  OcrFeatureMap(const std::vector<OcrWord>& training, const ScalarKernelSpec& char_kernel,
                Index max_length, std::string alphabet = kLowercaseAlphabet);

  Vector input_features(const std::vector<Vector>& images) const;
  Vector output_features(const std::string& word) const;

  /// Encoded dataset: inputs N-dim, outputs |alphabet| * p dim, labels = words.
  Dataset encode(const std::vector<OcrWord>& words) const;

  Index segment_count() const { return static_cast<Index>(positions_.size()); }
  Index max_length() const { return max_length_; }
  const std::string& alphabet() const { return alphabet_; }

 private:
  ScalarKernelSpec char_kernel_;
  Index max_length_;
  std::string alphabet_;
  SampleMatrix segments_;      // N x 128
  std::vector<Index> positions_;  // v(c_m), zero-based
};

/// Smooth vector-valued regression data with correlated output coordinates.
/// Deterministic per seed; noise = 0 gives an exact function of the inputs.
Dataset synthesize_toy(Index n, std::uint64_t seed, double noise);

/// Two-dimensional inputs and outputs drawn around `clusters` paired centers.
/// Kernel matrices of such data have low numerical rank.
Dataset synthesize_clusters(Index n, Index clusters, double spread, std::uint64_t seed);

/// Synthetic 16x16 digit-like images in [0, 1], a stand-in for USPS.
std::vector<DigitImage> synthesize_digits(Index n, std::uint64_t seed);

/// Writes digits in the load_usps format.
void write_usps(const std::string& path, const std::vector<DigitImage>& digits);

/// Random words over `alphabet` rendered from per-letter binary prototypes
/// with independent pixel flips.
std::vector<OcrWord> synthesize_ocr_words(Index count, Index min_length, Index max_length,
                                          const std::string& alphabet, std::uint64_t seed,
                                          double flip_probability);

}  // namespace opkde
