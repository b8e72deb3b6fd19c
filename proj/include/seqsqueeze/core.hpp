#pragma once

// Data model shared by every compression method: token matrices, sequences
// with provenance metadata, configuration, merge traces and budget math.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqsqueeze {

enum class ErrorKind {
  NonFiniteInput,
  EmptyInput,
  DimensionMismatch,
  InvalidConfig,
  TooShort,
  InsufficientMergeable,
  CannotReachTarget,
  UnavailableRatio,
  BadMagic,
  UnsupportedVersion,
  MalformedHeader,
  UnsupportedDtype,
  UnsupportedLayout,
  UnsupportedRank,
  OversizeArray,
  TruncatedPayload,
  IoFailure,
  SchemaViolation,
  SpecMismatch,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::InsufficientMergeable: return "InsufficientMergeable";
    case ErrorKind::CannotReachTarget: return "CannotReachTarget";
    case ErrorKind::UnavailableRatio: return "UnavailableRatio";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorKind::UnsupportedRank: return "UnsupportedRank";
    case ErrorKind::OversizeArray: return "OversizeArray";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::SpecMismatch: return "SpecMismatch";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is the stable, testable part;
/// the message is for humans and always starts with the kind name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Dense row-major float32 matrix. Rows are tokens, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorKind::DimensionMismatch, "payload size does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  const std::vector<float>& data() const noexcept { return data_; }
  std::vector<float>& data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// L x D token matrix plus, for each token, its representative original
/// position (1-based, strictly increasing) and how many original tokens it
/// stands for.
class TokenSequence {
 public:
  TokenSequence(Matrix data, std::vector<std::size_t> positions, std::vector<std::size_t> counts)
      : data_(std::move(data)), positions_(std::move(positions)), counts_(std::move(counts)) {
    if (data_.rows() == 0 || data_.cols() == 0) {
      throw Error(ErrorKind::EmptyInput, "sequence needs L >= 1 and D >= 1");
    }
    if (positions_.size() != data_.rows() || counts_.size() != data_.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "metadata length differs from token count");
    }
    for (float v : data_.data()) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "token matrix has NaN or Inf");
    }
    for (std::size_t k = 0; k < positions_.size(); ++k) {
      if (positions_[k] == 0 || (k > 0 && positions_[k] <= positions_[k - 1])) {
        throw Error(ErrorKind::InvalidConfig, "positions must be 1-based and strictly increasing");
      }
      if (counts_[k] == 0) throw Error(ErrorKind::InvalidConfig, "counts must be positive");
    }
  }

  std::size_t length() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }
  std::span<const float> row(std::size_t k) const { return data_.row(k); }

  const Matrix& matrix() const noexcept { return data_; }
  const std::vector<std::size_t>& positions() const noexcept { return positions_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  Matrix data_;
  std::vector<std::size_t> positions_;
  std::vector<std::size_t> counts_;
};

/// Wraps a raw matrix as a fresh sequence: positions 1..L, counts all 1.
inline TokenSequence validate_sequence(Matrix raw) {
  if (raw.rows() == 0 || raw.cols() == 0) {
    throw Error(ErrorKind::EmptyInput, "got " + std::to_string(raw.rows()) + "x" +
                                           std::to_string(raw.cols()) + " matrix");
  }
  const auto& values = raw.data();
  if (auto it = std::find_if(values.begin(), values.end(), [](float v) { return !std::isfinite(v); });
      it != values.end()) {
    const auto flat = static_cast<std::size_t>(it - values.begin());
    throw Error(ErrorKind::NonFiniteInput, "non-finite value at row " +
                                               std::to_string(flat / raw.cols() + 1) + ", column " +
                                               std::to_string(flat % raw.cols() + 1));
  }
  const std::size_t n = raw.rows();
  std::vector<std::size_t> positions(n);
  for (std::size_t k = 0; k < n; ++k) positions[k] = k + 1;
  return TokenSequence(std::move(raw), std::move(positions), std::vector<std::size_t>(n, 1));
}

enum class Method { Ltbm, GlobalMerge, UniAvg, GlobalTopK, SegmentwiseTopK };
enum class Weighting { PaperLiteral, SizeWeighted };

inline constexpr Method kAllMethods[] = {Method::Ltbm, Method::GlobalMerge, Method::UniAvg,
                                         Method::GlobalTopK, Method::SegmentwiseTopK};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Ltbm: return "ltbm";
    case Method::GlobalMerge: return "global-merge";
    case Method::UniAvg: return "uniavg";
    case Method::GlobalTopK: return "global-topk";
    case Method::SegmentwiseTopK: return "segmentwise-topk";
  }
  return "unknown";
}

inline std::string_view to_string(Weighting w) {
  return w == Weighting::PaperLiteral ? "paper-literal" : "size-weighted";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

inline std::optional<Weighting> parse_weighting(std::string_view name) {
  if (name == "paper-literal") return Weighting::PaperLiteral;
  if (name == "size-weighted") return Weighting::SizeWeighted;
  return std::nullopt;
}

/// Matching window over parity indices; nullopt means unbounded.
using Window = std::optional<std::size_t>;
inline constexpr Window kUnbounded = std::nullopt;

struct CompressionConfig {
  Method method = Method::Ltbm;
  double keep_ratio = 1.0;
  Window window = 8;
  Weighting weighting = Weighting::PaperLiteral;
  std::size_t segments = 8;

  /// Window actually in force: Global Merge ignores `window`.
  Window effective_window() const { return method == Method::GlobalMerge ? kUnbounded : window; }

  void validate() const {
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "keep ratio must lie in (0, 1], got " +
                                                std::to_string(keep_ratio));
    }
    if (segments < 1) throw Error(ErrorKind::InvalidConfig, "segments must be >= 1");
  }
};

/// One (source -> destination) merge in a pass's parity indexing (1-based).
struct MergeRecord {
  std::size_t source = 0;
  std::size_t destination = 0;
  float score = 0.0f;

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

struct PassRecord {
  std::size_t input_length = 0;
  // Representative original positions of the pass's sources / destinations,
  // in parity order.
  std::vector<std::size_t> source_positions;
  std::vector<std::size_t> destination_positions;
  std::vector<MergeRecord> merges;

  friend bool operator==(const PassRecord&, const PassRecord&) = default;
};

struct MergeTrace {
  std::vector<PassRecord> passes;

  friend bool operator==(const MergeTrace&, const MergeTrace&) = default;
};

/// Maps each output token to the original positions it is made of. Pruning
/// methods list discarded positions in `dropped`; groups plus dropped always
/// partition 1..original_length.
struct Provenance {
  Method method = Method::Ltbm;
  double keep_ratio = 1.0;
  Window window = kUnbounded;
  Weighting weighting = Weighting::PaperLiteral;
  std::size_t segments = 8;
  std::size_t original_length = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> dropped;

  std::size_t output_length() const noexcept { return groups.size(); }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline Provenance make_provenance(const CompressionConfig& config, std::size_t original_length) {
  Provenance prov;
  prov.method = config.method;
  prov.keep_ratio = config.keep_ratio;
  prov.window = config.effective_window();
  prov.weighting = config.weighting;
  prov.segments = config.segments;
  prov.original_length = original_length;
  return prov;
}

/// Returns an empty string when `prov` is a valid partition, otherwise a
/// description of the first violation.
inline std::string check_partition(const Provenance& prov) {
  std::vector<char> seen(prov.original_length + 1, 0);
  auto mark = [&](std::size_t p) -> std::string {
    if (p == 0 || p > prov.original_length) return "position " + std::to_string(p) + " out of range";
    if (seen[p]) return "position " + std::to_string(p) + " appears twice";
    seen[p] = 1;
    return {};
  };
  std::size_t prev_rep = 0;
  for (std::size_t k = 0; k < prov.groups.size(); ++k) {
    const auto& g = prov.groups[k];
    if (g.empty()) return "group " + std::to_string(k + 1) + " is empty";
    if (!std::is_sorted(g.begin(), g.end())) return "group " + std::to_string(k + 1) + " not sorted";
    if (g.front() <= prev_rep) return "representative positions not increasing at group " +
                                      std::to_string(k + 1);
    prev_rep = g.front();
    for (std::size_t p : g) {
      if (auto msg = mark(p); !msg.empty()) return msg;
    }
  }
  for (std::size_t p : prov.dropped) {
    if (auto msg = mark(p); !msg.empty()) return msg;
  }
  for (std::size_t p = 1; p <= prov.original_length; ++p) {
    if (!seen[p]) return "position " + std::to_string(p) + " not covered";
  }
  return {};
}

/// Rounds halves away from zero (2.5 -> 3, 4.5 -> 5).
inline std::size_t round_half_away(double x) { return static_cast<std::size_t>(std::round(x)); }

/// Output length every exact-budget method must hit: max(1, round(rho * L)),
/// never more than L.
inline std::size_t target_length(double keep_ratio, std::size_t length) {
  const std::size_t rounded = round_half_away(keep_ratio * static_cast<double>(length));
  return std::clamp<std::size_t>(rounded, 1, std::max<std::size_t>(length, 1));
}

}  // namespace seqsqueeze
