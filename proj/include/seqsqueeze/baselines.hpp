#pragma once

// Contrast baselines sharing the keep-ratio budget: uniform average pooling,
// and L2-norm Top-K pruning either globally or within temporal segments.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "seqsqueeze/core.hpp"
#include "seqsqueeze/merge.hpp"
#include "seqsqueeze/similarity.hpp"

namespace seqsqueeze {

namespace detail {

inline CompressionResult identity_result(const TokenSequence& seq, const CompressionConfig& config) {
  Provenance prov = make_provenance(config, seq.length());
  prov.groups.reserve(seq.length());
  for (std::size_t p : seq.positions()) prov.groups.push_back({p});
  return {seq, MergeTrace{}, std::move(prov)};
}

/// Copies the rows at `kept` (ascending, 0-based) and records the rest as dropped.
inline CompressionResult keep_rows(const TokenSequence& seq, const std::vector<std::size_t>& kept,
                                   const CompressionConfig& config) {
  Matrix out(kept.size(), seq.dim());
  std::vector<std::size_t> positions;
  std::vector<std::size_t> counts;
  Provenance prov = make_provenance(config, seq.length());
  std::vector<char> is_kept(seq.length(), 0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t idx = kept[k];
    std::copy_n(seq.row(idx).begin(), seq.dim(), out.row(k).begin());
    positions.push_back(seq.positions()[idx]);
    counts.push_back(seq.counts()[idx]);
    prov.groups.push_back({seq.positions()[idx]});
    is_kept[idx] = 1;
  }
  for (std::size_t idx = 0; idx < seq.length(); ++idx) {
    if (!is_kept[idx]) prov.dropped.push_back(seq.positions()[idx]);
  }
  return {TokenSequence(std::move(out), std::move(positions), std::move(counts)), MergeTrace{},
          std::move(prov)};
}

/// Indices in [begin, end) ordered by descending score, earlier index first on ties.
inline std::vector<std::size_t> rank_by_score(const std::vector<double>& scores, std::size_t begin,
                                              std::size_t end) {
  std::vector<std::size_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace detail

/// Integer pooling factor round(1/rho); below 2 the ratio cannot be pooled.
inline std::size_t uniavg_factor(double keep_ratio) {
  const std::size_t k = round_half_away(1.0 / keep_ratio);
  if (k < 2) {
    throw Error(ErrorKind::UnavailableRatio,
                "uniform pooling cannot realize keep ratio " + std::to_string(keep_ratio) +
                    " (pooling factor round(1/rho) = " + std::to_string(k) + ")");
  }
  return k;
}

/// Averages consecutive blocks of k = round(1/rho) tokens; the last block may
/// be shorter. Output length is ceil(L / k), only approximately rho * L.
inline CompressionResult compress_uniavg(const TokenSequence& seq, double keep_ratio) {
  CompressionConfig config{Method::UniAvg, keep_ratio};
  config.validate();
  if (keep_ratio == 1.0) return detail::identity_result(seq, config);
  const std::size_t k = uniavg_factor(keep_ratio);

  const std::size_t n = seq.length();
  const std::size_t out_len = (n + k - 1) / k;
  const std::size_t dim = seq.dim();
  Matrix out(out_len, dim);
  std::vector<std::size_t> positions(out_len);
  std::vector<std::size_t> counts(out_len, 0);
  Provenance prov = make_provenance(config, n);
  prov.groups.resize(out_len);
  std::vector<double> acc(dim);

  for (std::size_t m = 0; m < out_len; ++m) {
    const std::size_t begin = m * k;
    const std::size_t end = std::min(begin + k, n);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto row = seq.row(idx);
      for (std::size_t c = 0; c < dim; ++c) acc[c] += static_cast<double>(row[c]);
      counts[m] += seq.counts()[idx];
      prov.groups[m].push_back(seq.positions()[idx]);
    }
    const double size = static_cast<double>(end - begin);
    auto dst = out.row(m);
    for (std::size_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(acc[c] / size);
    positions[m] = seq.positions()[begin];
  }
  return {TokenSequence(std::move(out), std::move(positions), std::move(counts)), MergeTrace{},
          std::move(prov)};
}

/// Keeps the L' tokens with the largest L2 norm, in their original order.
inline CompressionResult compress_global_topk(const TokenSequence& seq, double keep_ratio) {
  CompressionConfig config{Method::GlobalTopK, keep_ratio};
  config.validate();
  if (keep_ratio == 1.0) return detail::identity_result(seq, config);

  const std::size_t target = target_length(keep_ratio, seq.length());
  std::vector<std::size_t> kept = detail::rank_by_score(l2_scores(seq), 0, seq.length());
  kept.resize(target);
  std::sort(kept.begin(), kept.end());
  return detail::keep_rows(seq, kept, config);
}

/// Contiguous near-equal segments with their keep quotas (0-based starts).
struct SegmentPartition {
  std::vector<std::size_t> begin;
  std::vector<std::size_t> length;
  std::vector<std::size_t> quota;

  std::size_t size() const noexcept { return begin.size(); }
};

/// Splits L tokens into min(n, L) segments, the first L mod n one token
/// longer, and apportions `target` keeps by largest remainder. `scores`
/// (per-token) only matters if a quota would exceed its segment length.
inline SegmentPartition partition_segments(std::size_t length, std::size_t n_segments,
                                           std::size_t target, const std::vector<double>& scores) {
  if (n_segments < 1) throw Error(ErrorKind::InvalidConfig, "segment count must be >= 1");
  if (target > length) throw Error(ErrorKind::InvalidConfig, "keep count exceeds sequence length");
  const std::size_t n = std::min(n_segments, length);
  SegmentPartition part;
  std::size_t start = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t len = length / n + (s < length % n ? 1 : 0);
    part.begin.push_back(start);
    part.length.push_back(len);
    start += len;
  }

  // Exact integer largest remainder: quota_s = floor(target * len_s / L),
  // leftovers go to the largest remainders (earlier segment on ties).
  part.quota.resize(n);
  std::vector<std::size_t> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t scaled = target * part.length[s];
    part.quota[s] = scaled / length;
    remainder[s] = scaled % length;
    assigned += part.quota[s];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&remainder](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target; ++k, ++assigned) ++part.quota[order[k % n]];

  std::size_t overflow = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (part.quota[s] > part.length[s]) {
      overflow += part.quota[s] - part.length[s];
      part.quota[s] = part.length[s];
    }
  }
  // Hand clamped keeps to segments whose best not-yet-kept token scores highest.
  while (overflow > 0) {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (part.quota[s] >= part.length[s]) continue;
      const auto ranked = detail::rank_by_score(scores, part.begin[s], part.begin[s] + part.length[s]);
      const double next = scores[ranked[part.quota[s]]];
      if (!best || next > best_score) {
        best = s;
        best_score = next;
      }
    }
    ++part.quota[*best];
    --overflow;
  }
  return part;
}

/// Top-K by L2 norm within each temporal segment, concatenated in order.
inline CompressionResult compress_segmentwise_topk(const TokenSequence& seq, double keep_ratio,
                                                   std::size_t n_segments) {
  CompressionConfig config{Method::SegmentwiseTopK, keep_ratio};
  config.segments = n_segments;
  config.validate();
  if (keep_ratio == 1.0) return detail::identity_result(seq, config);

  const std::vector<double> scores = l2_scores(seq);
  const SegmentPartition part =
      partition_segments(seq.length(), n_segments, target_length(keep_ratio, seq.length()), scores);
  std::vector<std::size_t> kept;
  for (std::size_t s = 0; s < part.size(); ++s) {
    auto ranked = detail::rank_by_score(scores, part.begin[s], part.begin[s] + part.length[s]);
    ranked.resize(part.quota[s]);
    std::sort(ranked.begin(), ranked.end());
    kept.insert(kept.end(), ranked.begin(), ranked.end());
  }
  return detail::keep_rows(seq, kept, config);
}

}  // namespace seqsqueeze
