#pragma once

// Single entry point over every method. A keep ratio of 1 is the identity for
// all of them.

#include <cstddef>
#include <span>
#include <vector>

#include "seqsqueeze/baselines.hpp"
#include "seqsqueeze/core.hpp"
#include "seqsqueeze/merge.hpp"

namespace seqsqueeze {

inline CompressionResult compress(const TokenSequence& seq, const CompressionConfig& config) {
  config.validate();
  if (config.keep_ratio == 1.0) return detail::identity_result(seq, config);

  CompressionResult result = [&]() {
    switch (config.method) {
      case Method::Ltbm:
      case Method::GlobalMerge:
        return compress_merge(seq, config.keep_ratio, config.effective_window(), config.weighting);
      case Method::UniAvg:
        return compress_uniavg(seq, config.keep_ratio);
      case Method::GlobalTopK:
        return compress_global_topk(seq, config.keep_ratio);
      case Method::SegmentwiseTopK:
        return compress_segmentwise_topk(seq, config.keep_ratio, config.segments);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown method");
  }();

  Provenance meta = make_provenance(config, seq.length());
  meta.groups = std::move(result.provenance.groups);
  meta.dropped = std::move(result.provenance.dropped);
  result.provenance = std::move(meta);
  return result;
}

/// Row-major float32 buffer of `rows` x `cols`, as handed over by a host
/// runtime. The buffer is copied once into the sequence.
inline CompressionResult compress(std::span<const float> data, std::size_t rows, std::size_t cols,
                                  const CompressionConfig& config) {
  if (data.size() != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch, "buffer holds " + std::to_string(data.size()) +
                                                  " values, expected rows*cols");
  }
  return compress(validate_sequence(Matrix(rows, cols, std::vector<float>(data.begin(), data.end()))),
                  config);
}

}  // namespace seqsqueeze
