#pragma once

// Reader/writer for the .npy v1.0 container restricted to little-endian
// float32, rank 2, C order. Anything else is rejected with a specific error.

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seqsqueeze/core.hpp"

namespace seqsqueeze::npy {

inline constexpr std::array<unsigned char, 6> kMagic = {0x93, 'N', 'U', 'M', 'P', 'Y'};
inline constexpr std::size_t kPreambleSize = 10;  // magic + version + u16 header length
inline constexpr std::uint64_t kDefaultByteCap = std::uint64_t{1} << 30;

struct ArrayHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::uint64_t> shape;
};

namespace detail {

// Minimal parser for the Python dict literal numpy writes, e.g.
// {'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  ArrayHeader parse() {
    ArrayHeader header;
    bool have_descr = false, have_order = false, have_shape = false;
    expect('{');
    while (true) {
      skip_space();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string();
      expect(':');
      if (key == "descr" && !have_descr) {
        header.descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order" && !have_order) {
        header.fortran_order = parse_bool();
        have_order = true;
      } else if (key == "shape" && !have_shape) {
        header.shape = parse_shape();
        have_shape = true;
      } else {
        fail("unexpected or repeated key '" + key + "'");
      }
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after dict");
    if (!have_descr || !have_order || !have_shape) fail("missing descr, fortran_order or shape");
    return header;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::MalformedHeader, what + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_space();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected quoted string");
    const std::size_t end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    skip_space();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }

  std::vector<std::uint64_t> parse_shape() {
    expect('(');
    std::vector<std::uint64_t> dims;
    while (true) {
      skip_space();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected dimension");
      std::uint64_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        const std::uint64_t digit = static_cast<std::uint64_t>(peek() - '0');
        if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) fail("dimension overflows");
        value = value * 10 + digit;
        ++pos_;
      }
      dims.push_back(value);
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("expected ',' or ')' in shape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline std::uint32_t float_bits(float v) { return std::bit_cast<std::uint32_t>(v); }

}  // namespace detail

/// Parses the dict text (without preamble, with or without trailing padding).
inline ArrayHeader parse_header(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.remove_suffix(1);
  return detail::HeaderParser(text).parse();
}

/// Checks the header describes data this library accepts and returns (rows, cols).
inline std::pair<std::size_t, std::size_t> check_header(const ArrayHeader& header,
                                                        std::uint64_t byte_cap) {
  if (header.descr != "<f4") {
    throw Error(ErrorKind::UnsupportedDtype, "dtype '" + header.descr + "', expected '<f4'");
  }
  if (header.fortran_order) throw Error(ErrorKind::UnsupportedLayout, "Fortran-ordered arrays are not supported");
  if (header.shape.size() != 2) {
    throw Error(ErrorKind::UnsupportedRank, "rank " + std::to_string(header.shape.size()) + ", expected 2");
  }
  const std::uint64_t rows = header.shape[0];
  const std::uint64_t cols = header.shape[1];
  if (cols != 0 && rows > byte_cap / 4 / cols) {
    throw Error(ErrorKind::OversizeArray, std::to_string(rows) + "x" + std::to_string(cols) +
                                              " exceeds the " + std::to_string(byte_cap) + "-byte cap");
  }
  return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

/// Parses a complete .npy image held in memory.
inline Matrix parse_array(std::string_view bytes, std::uint64_t byte_cap = kDefaultByteCap) {
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorKind::BadMagic, "not an .npy file");
  }
  if (bytes.size() < kPreambleSize) throw Error(ErrorKind::TruncatedPayload, "file ends inside the preamble");
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw Error(ErrorKind::UnsupportedVersion,
                "format version " + std::to_string(major) + "." + std::to_string(minor) + ", expected 1.0");
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw Error(ErrorKind::TruncatedPayload, "file ends inside the header");
  }
  const std::string_view text = bytes.substr(kPreambleSize, header_len);
  if (text.empty() || text.back() != '\n') throw Error(ErrorKind::MalformedHeader, "header must end in newline");
  const auto [rows, cols] = check_header(parse_header(text), byte_cap);

  const std::size_t payload = rows * cols * sizeof(float);
  const std::string_view body = bytes.substr(kPreambleSize + header_len);
  if (body.size() < payload) {
    throw Error(ErrorKind::TruncatedPayload, "payload has " + std::to_string(body.size()) +
                                                 " bytes, header declares " + std::to_string(payload));
  }
  if (body.size() > payload) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(body.size() - payload) +
                                                  " trailing bytes after payload");
  }
  std::vector<float> values(rows * cols);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(body[4 * k + b])) << (8 * b);
    }
    values[k] = std::bit_cast<float>(bits);
  }
  return Matrix(rows, cols, std::move(values));
}

/// Reads at most cap + largest header bytes; an oversized file then fails
/// on its header or on the excess payload without a full read.
inline Matrix read_array(const std::filesystem::path& path, std::uint64_t byte_cap = kDefaultByteCap) {
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  std::ifstream in(path, std::ios::binary);
  if (ec || !in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());

  const std::uint64_t max_image = byte_cap + kPreambleSize + std::numeric_limits<std::uint16_t>::max();
  const std::uint64_t to_read = std::min(file_size, max_image);
  std::string image(static_cast<std::size_t>(to_read), '\0');
  in.read(image.data(), static_cast<std::streamsize>(to_read));
  if (static_cast<std::uint64_t>(in.gcount()) != to_read) {
    throw Error(ErrorKind::IoFailure, "short read from " + path.string());
  }
  return parse_array(image, byte_cap);
}

/// Serializes to a complete .npy image; the header block is padded with
/// spaces so that data starts on a 64-byte boundary.
inline std::string serialize_array(const Matrix& m) {
  std::ostringstream dict;
  dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols()
       << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = kPreambleSize + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorKind::IoFailure, "header too long for format version 1.0");
  }

  std::string out;
  out.reserve(kPreambleSize + header.size() + m.data().size() * 4);
  out.append(reinterpret_cast<const char*>(kMagic.data()), kMagic.size());
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xFF));
  out.push_back(static_cast<char>(header.size() >> 8));
  out += header;
  for (float v : m.data()) {
    const std::uint32_t bits = detail::float_bits(v);
    for (std::size_t b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::IoFailure, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::IoFailure, "cannot move output into place at " + path.string());
  }
}

inline void write_array(const Matrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_array(m));
}

}  // namespace seqsqueeze::npy
