#include "opkde/data.hpp"

#include "opkde/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace opkde {

void Dataset::validate() const {
  if (inputs.rows() == 0) throw DataError("dataset is empty");
  if (outputs.rows() != inputs.rows()) {
    throw DataError("dataset has " + std::to_string(inputs.rows()) + " inputs but " +
                    std::to_string(outputs.rows()) + " outputs");
  }
  if (!labels.empty() && static_cast<Index>(labels.size()) != inputs.rows()) {
    throw DataError("dataset labels do not match the sample count");
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.metadata = metadata;
  out.inputs.resize(static_cast<Index>(rows.size()), inputs.cols());
  out.outputs.resize(static_cast<Index>(rows.size()), outputs.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= size()) throw DataError("dataset subset index out of range");
    out.inputs.row(static_cast<Index>(r)) = inputs.row(src);
    out.outputs.row(static_cast<Index>(r)) = outputs.row(src);
    if (!labels.empty()) out.labels.push_back(labels[static_cast<std::size_t>(src)]);
  }
  return out;
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& token, std::size_t row, std::size_t line,
                    std::size_t column, const std::string& path) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  std::ostringstream os;
  os << path << ": row " << row << " (line " << line << "), column " << column + 1;
  if (end == begin || *end != '\0') {
    os << ": cannot parse '" << token << "' as a number";
    throw DataError(os.str());
  }
  if (!std::isfinite(v)) {
    os << ": non-finite value '" << token << "'";
    throw DataError(os.str());
  }
  return v;
}

struct NumericTable {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
};

NumericTable read_table(const std::string& path) {
  auto in = open_or_throw(path);
  NumericTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto tokens = tokenize(line);
    std::vector<double> values;
    values.reserve(tokens.size());
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      values.push_back(parse_number(tokens[c], table.rows.size() + 1, line_no, c, path));
    }
    table.rows.push_back(std::move(values));
    table.lines.push_back(line_no);
  }
  if (table.rows.empty()) throw DataError(path + ": file contains no data rows");
  return table;
}

}  // namespace

Dataset load_matrix_dataset(const std::string& path, Index input_cols, Index output_cols) {
  if (input_cols < 1 || output_cols < 1) {
    throw ConfigError("load_matrix_dataset: need at least one input and one output column");
  }
  const NumericTable table = read_table(path);
  const auto width = static_cast<std::size_t>(input_cols + output_cols);
  Dataset out;
  const auto n = static_cast<Index>(table.rows.size());
  out.inputs.resize(n, input_cols);
  out.outputs.resize(n, output_cols);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != width) {
      std::ostringstream os;
      os << path << ": row " << r + 1 << " (line " << table.lines[r] << ") has " << row.size()
         << " columns, expected " << width;
      throw DataError(os.str());
    }
    for (Index c = 0; c < input_cols; ++c) {
      out.inputs(static_cast<Index>(r), c) = row[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < output_cols; ++c) {
      out.outputs(static_cast<Index>(r), c) = row[static_cast<std::size_t>(input_cols + c)];
    }
  }
  out.metadata["source"] = path;
  out.metadata["format"] = "matrix";
  return out;
}

std::vector<DigitImage> load_usps(const std::string& path) {
  const NumericTable table = read_table(path);
  std::vector<DigitImage> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 257) {
      std::ostringstream os;
      os << path << ": row " << r + 1 << " (line " << table.lines[r] << ") has " << row.size()
         << " values, expected a label followed by 256 pixels";
      throw DataError(os.str());
    }
    DigitImage d;
    d.label = static_cast<int>(row[0]);
    d.pixels = Eigen::Map<const Vector>(row.data() + 1, 256);
    out.push_back(std::move(d));
  }
  return out;
}

Dataset split_digit_halves(const std::vector<Vector>& digits) {
  if (digits.empty()) throw DataError("split_digit_halves: no digits");
  Dataset out;
  const auto n = static_cast<Index>(digits.size());
  out.inputs.resize(n, 128);
  out.outputs.resize(n, 128);
  for (Index i = 0; i < n; ++i) {
    const Vector& d = digits[static_cast<std::size_t>(i)];
    if (d.size() != 256) {
      throw DataError("split_digit_halves: digit " + std::to_string(i) + " has " +
                      std::to_string(d.size()) + " pixels, expected 256");
    }
    out.inputs.row(i) = d.head(128).transpose();
    out.outputs.row(i) = d.tail(128).transpose();
  }
  out.metadata["format"] = "digit-halves";
  return out;
}

std::vector<Vector> normalize_pixels(const std::vector<Vector>& digits, double lo, double hi) {
  if (digits.empty()) return {};
  double mn = digits.front().minCoeff();
  double mx = digits.front().maxCoeff();
  for (const auto& d : digits) {
    mn = std::min(mn, d.minCoeff());
    mx = std::max(mx, d.maxCoeff());
  }
  std::vector<Vector> out;
  out.reserve(digits.size());
  const double span = mx - mn;
  for (const auto& d : digits) {
    if (span <= 0.0) {
      out.push_back(Vector::Constant(d.size(), lo));
    } else {
      out.push_back(((d.array() - mn) / span * (hi - lo) + lo).matrix());
    }
  }
  return out;
}

std::vector<OcrWord> load_ocr_words(const std::string& path) {
  auto in = open_or_throw(path);
  struct Letter {
    long position;
    char letter;
    Vector image;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Letter>> groups;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    ++row;
    const auto tokens = tokenize(line);
    if (tokens.size() != 131) {
      std::ostringstream os;
      os << path << ": row " << row << " (line " << line_no << ") has " << tokens.size()
         << " fields, expected word_id, position, letter and 128 pixels";
      throw DataError(os.str());
    }
    Letter l;
    l.position = static_cast<long>(parse_number(tokens[1], row, line_no, 1, path));
    if (tokens[2].size() != 1) {
      throw DataError(path + ": row " + std::to_string(row) + ": letter field must be one character");
    }
    l.letter = static_cast<char>(std::tolower(static_cast<unsigned char>(tokens[2][0])));
    l.image.resize(128);
    for (Index p = 0; p < 128; ++p) {
      l.image(p) = parse_number(tokens[static_cast<std::size_t>(3 + p)], row, line_no,
                                static_cast<std::size_t>(3 + p), path);
    }
    auto [it, inserted] = groups.try_emplace(tokens[0]);
    if (inserted) order.push_back(tokens[0]);
    it->second.push_back(std::move(l));
  }
  if (order.empty()) throw DataError(path + ": file contains no data rows");

  std::vector<OcrWord> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    auto& letters = groups[id];
    std::stable_sort(letters.begin(), letters.end(),
                     [](const Letter& a, const Letter& b) { return a.position < b.position; });
    for (std::size_t i = 1; i < letters.size(); ++i) {
      if (letters[i].position == letters[i - 1].position) {
        throw DataError(path + ": word '" + id + "' has two letters at position " +
                        std::to_string(letters[i].position));
      }
    }
    OcrWord w;
    for (auto& l : letters) {
      w.word.push_back(l.letter);
      w.images.push_back(std::move(l.image));
    }
    out.push_back(std::move(w));
  }
  return out;
}

void write_ocr_words(const std::string& path, const std::vector<OcrWord>& words) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "# word_id position letter pixels[128]\n";
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& word = words[w];
    for (std::size_t j = 0; j < word.word.size(); ++j) {
      out << w << ' ' << j << ' ' << word.word[j];
      for (Index p = 0; p < word.images[j].size(); ++p) out << ' ' << word.images[j](p);
      out << '\n';
    }
  }
}

OcrFeatureMap::OcrFeatureMap(const std::vector<OcrWord>& training,
                             const ScalarKernelSpec& char_kernel, Index max_length,
                             std::string alphabet)
    : char_kernel_(char_kernel), max_length_(max_length), alphabet_(std::move(alphabet)) {
  char_kernel_.validate();
  if (training.empty()) throw DataError("OcrFeatureMap: no training words");
  if (alphabet_.empty()) throw ConfigError("OcrFeatureMap: empty alphabet");
  Index total = 0;
  Index image_dim = -1;
  for (const auto& w : training) {
    if (w.length() > max_length_) {
      throw DataError("OcrFeatureMap: word '" + w.word + "' is longer than p = " +
                      std::to_string(max_length_));
    }
    if (static_cast<Index>(w.images.size()) != w.length()) {
      throw DataError("OcrFeatureMap: word '" + w.word + "' needs one image per letter");
    }
    for (const auto& img : w.images) {
      if (image_dim < 0) image_dim = img.size();
      if (img.size() != image_dim) throw DataError("OcrFeatureMap: images differ in size");
    }
    total += w.length();
  }
  segments_.resize(total, image_dim);
  Index m = 0;
  for (const auto& w : training) {
    for (Index j = 0; j < w.length(); ++j) {
      segments_.row(m++) = w.images[static_cast<std::size_t>(j)].transpose();
      positions_.push_back(j);
    }
  }
}

Vector OcrFeatureMap::input_features(const std::vector<Vector>& images) const {
  const auto q = static_cast<Index>(images.size());
  Vector out = Vector::Zero(segment_count());
  for (Index m = 0; m < segment_count(); ++m) {
    const Index v = positions_[static_cast<std::size_t>(m)];
    if (v >= q) continue;
    const Vector c = segments_.row(m).transpose();
    out(m) = eval_kernel(char_kernel_, c, images[static_cast<std::size_t>(v)]);
  }
  return out;
}

Vector OcrFeatureMap::output_features(const std::string& word) const {
  const auto a = static_cast<Index>(alphabet_.size());
  if (static_cast<Index>(word.size()) > max_length_) {
    throw DataError("OcrFeatureMap: word '" + word + "' is longer than p = " +
                    std::to_string(max_length_));
  }
  Vector out = Vector::Zero(a * max_length_);
  for (std::size_t j = 0; j < word.size(); ++j) {
    const auto pos = alphabet_.find(word[j]);
    if (pos == std::string::npos) {
      throw DataError("OcrFeatureMap: letter '" + std::string(1, word[j]) +
                      "' is not in the alphabet");
    }
    out(static_cast<Index>(j) * a + static_cast<Index>(pos)) = 1.0;
  }
  return out;
}

Dataset OcrFeatureMap::encode(const std::vector<OcrWord>& words) const {
  if (words.empty()) throw DataError("OcrFeatureMap: nothing to encode");
  Dataset out;
  const auto n = static_cast<Index>(words.size());
  out.inputs.resize(n, segment_count());
  out.outputs.resize(n, static_cast<Index>(alphabet_.size()) * max_length_);
  for (Index i = 0; i < n; ++i) {
    const auto& w = words[static_cast<std::size_t>(i)];
    out.inputs.row(i) = input_features(w.images).transpose();
    out.outputs.row(i) = output_features(w.word).transpose();
    out.labels.push_back(w.word);
  }
  out.metadata["format"] = "ocr";
  return out;
}

Dataset synthesize_toy(Index n, std::uint64_t seed, double noise) {
  if (n < 1) throw ConfigError("synthesize_toy: n must be at least 1");
  constexpr Index kInputDim = 4;
  constexpr Index kOutputDim = 8;
  constexpr Index kLatentFeatures = 3;
  // Fixed mixing so every seed draws from the same regression problem; the
  // outputs are correlated through the shared three-dimensional latent signal.
  Rng mix_rng(0x6b64655f746f79ULL);
  Matrix mix(kOutputDim, kLatentFeatures);
  for (Index r = 0; r < kOutputDim; ++r) {
    for (Index c = 0; c < kLatentFeatures; ++c) mix(r, c) = mix_rng.normal();
  }

  Rng rng(seed);
  Dataset out;
  out.inputs.resize(n, kInputDim);
  out.outputs.resize(n, kOutputDim);
  const double pi = std::numbers::pi;
  for (Index i = 0; i < n; ++i) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    out.inputs(i, 0) = a;
    out.inputs(i, 1) = b;
    out.inputs(i, 2) = 0.5 * std::sin(pi * a);
    out.inputs(i, 3) = 0.5 * std::cos(pi * b);
    Vector latent(kLatentFeatures);
    latent << std::sin(pi * a), std::cos(pi * b), a * b;
    out.outputs.row(i) = (mix * latent).transpose();
    if (noise > 0.0) {
      for (Index c = 0; c < kInputDim; ++c) out.inputs(i, c) += noise * rng.normal();
      for (Index c = 0; c < kOutputDim; ++c) out.outputs(i, c) += noise * rng.normal();
    }
  }
  out.metadata["format"] = "toy";
  out.metadata["seed"] = std::to_string(seed);
  return out;
}

Dataset synthesize_clusters(Index n, Index clusters, double spread, std::uint64_t seed) {
  if (n < 1 || clusters < 1) throw ConfigError("synthesize_clusters: n and clusters must be positive");
  if (!(spread >= 0.0)) throw ConfigError("synthesize_clusters: spread must be nonnegative");
  Rng rng(seed);
  Matrix in_centers(clusters, 2);
  Matrix out_centers(clusters, 2);
  for (Index c = 0; c < clusters; ++c) {
    for (Index j = 0; j < 2; ++j) {
      in_centers(c, j) = rng.uniform(-3.0, 3.0);
      out_centers(c, j) = rng.uniform(-3.0, 3.0);
    }
  }
  Dataset out;
  out.inputs.resize(n, 2);
  out.outputs.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(clusters)));
    for (Index j = 0; j < 2; ++j) {
      out.inputs(i, j) = in_centers(c, j) + spread * rng.normal();
      out.outputs(i, j) = out_centers(c, j) + spread * rng.normal();
    }
  }
  out.metadata["format"] = "clusters";
  out.metadata["seed"] = std::to_string(seed);
  return out;
}

std::vector<DigitImage> synthesize_digits(Index n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("synthesize_digits: n must be at least 1");
  // Each class is a fixed set of strokes; samples jitter the strokes, vary
  // thickness and add pixel noise.
  struct Stroke {
    double x0, y0, x1, y1;
  };
  Rng proto_rng(0x7573707331ULL);
  std::vector<std::vector<Stroke>> classes(10);
  for (auto& strokes : classes) {
    const int count = 2 + static_cast<int>(proto_rng.below(3));
    for (int s = 0; s < count; ++s) {
      strokes.push_back({proto_rng.uniform(2, 13), proto_rng.uniform(1, 14),
                         proto_rng.uniform(2, 13), proto_rng.uniform(1, 14)});
    }
  }
  Rng rng(seed);
  std::vector<DigitImage> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    DigitImage d;
    d.label = static_cast<int>(rng.below(10));
    const double dx = rng.uniform(-1.0, 1.0);
    const double dy = rng.uniform(-1.0, 1.0);
    const double width = rng.uniform(0.8, 1.6);
    d.pixels = Vector::Zero(256);
    for (Index r = 0; r < 16; ++r) {
      for (Index c = 0; c < 16; ++c) {
        double best = 1e9;
        for (const auto& s : classes[static_cast<std::size_t>(d.label)]) {
          const double ax = s.x0 + dx, ay = s.y0 + dy, bx = s.x1 + dx, by = s.y1 + dy;
          const double vx = bx - ax, vy = by - ay;
          const double px = static_cast<double>(c) - ax, py = static_cast<double>(r) - ay;
          const double len2 = vx * vx + vy * vy;
          const double t = len2 > 0 ? std::clamp((px * vx + py * vy) / len2, 0.0, 1.0) : 0.0;
          const double ex = px - t * vx, ey = py - t * vy;
          best = std::min(best, std::sqrt(ex * ex + ey * ey));
        }
        const double ink = std::exp(-best * best / (2.0 * width * width));
        d.pixels(r * 16 + c) = std::clamp(ink + 0.05 * rng.normal(), 0.0, 1.0);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_usps(const std::string& path, const std::vector<DigitImage>& digits) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (const auto& d : digits) {
    out << d.label;
    for (Index p = 0; p < d.pixels.size(); ++p) out << ' ' << d.pixels(p);
    out << '\n';
  }
}

std::vector<OcrWord> synthesize_ocr_words(Index count, Index min_length, Index max_length,
                                          const std::string& alphabet, std::uint64_t seed,
                                          double flip_probability) {
  if (count < 1 || min_length < 1 || max_length < min_length || alphabet.empty()) {
    throw ConfigError("synthesize_ocr_words: invalid parameters");
  }
  Rng proto_rng(0x6f63725f70726fULL);
  std::vector<Vector> prototypes;
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    Vector p(128);
    for (Index k = 0; k < 128; ++k) p(k) = proto_rng.uniform() < 0.35 ? 1.0 : 0.0;
    prototypes.push_back(std::move(p));
  }
  Rng rng(seed);
  std::vector<OcrWord> out;
  for (Index w = 0; w < count; ++w) {
    OcrWord word;
    const Index len =
        min_length + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_length - min_length + 1)));
    for (Index j = 0; j < len; ++j) {
      const auto a = static_cast<std::size_t>(rng.below(alphabet.size()));
      word.word.push_back(alphabet[a]);
      Vector img = prototypes[a];
      for (Index k = 0; k < 128; ++k) {
        if (rng.uniform() < flip_probability) img(k) = 1.0 - img(k);
      }
      word.images.push_back(std::move(img));
    }
    out.push_back(std::move(word));
  }
  return out;
}

}  // namespace opkde
