#pragma once

// Local temporal bipartite merging. One pass splits the current sequence by
// parity into sources (odd positions) and destinations (even positions), lets
// each source pick its most similar destination inside the window, merges the
// best-scoring sources and restores temporal order. The driver repeats passes
// until the target length is reached. An unbounded window gives Global Merge.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "seqsqueeze/core.hpp"
#include "seqsqueeze/similarity.hpp"

namespace seqsqueeze {

/// Back-map from parity order to current-sequence index (both 0-based here;
/// parity index i in the 1-based notation is sources[i - 1]).
struct ParitySplit {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> destinations;
};

inline ParitySplit parity_split(std::size_t current_length) {
  if (current_length < 2) {
    throw Error(ErrorKind::TooShort, "parity split needs at least 2 tokens, got " +
                                         std::to_string(current_length));
  }
  ParitySplit split;
  split.sources.reserve((current_length + 1) / 2);
  split.destinations.reserve(current_length / 2);
  for (std::size_t k = 0; k < current_length; ++k) {
    (k % 2 == 0 ? split.sources : split.destinations).push_back(k);
  }
  return split;
}

inline ParitySplit parity_split(const TokenSequence& seq) { return parity_split(seq.length()); }

/// mask(i, j) = |i - j| <= w over parity indices.
inline PairMask window_mask(std::size_t n_sources, std::size_t n_destinations, Window window) {
  if (!window) return PairMask(n_sources, n_destinations, true);
  PairMask mask(n_sources, n_destinations, false);
  const std::size_t w = *window;
  for (std::size_t i = 0; i < n_sources; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(n_destinations, i + w + 1);
    for (std::size_t j = lo; j < hi; ++j) mask.set(i, j, true);
  }
  return mask;
}

struct PassPlan {
  // Indexed by source parity order; nullopt when every pair is masked.
  std::vector<std::optional<std::size_t>> best_destination;
  std::vector<double> best_score;
  // Source parity indices chosen to merge, highest score first.
  std::vector<std::size_t> selected;

  std::size_t mergeable() const {
    return static_cast<std::size_t>(std::count_if(best_destination.begin(), best_destination.end(),
                                                  [](const auto& d) { return d.has_value(); }));
  }
};

/// Best destination per source: largest score, smallest j on ties.
inline PassPlan best_matches(const ScoreTable& table) {
  PassPlan plan;
  plan.best_destination.assign(table.sources, std::nullopt);
  plan.best_score.assign(table.sources, kMaskedScore);
  for (std::size_t i = 0; i < table.sources; ++i) {
    for (std::size_t j = 0; j < table.destinations; ++j) {
      const double s = table(i, j);
      if (s == kMaskedScore) continue;
      if (!plan.best_destination[i] || s > plan.best_score[i]) {
        plan.best_destination[i] = j;
        plan.best_score[i] = s;
      }
    }
  }
  return plan;
}

/// Selects the `merges` sources with the highest best-match score (smallest
/// source index on ties).
inline PassPlan plan_pass(const ScoreTable& table, std::size_t merges) {
  PassPlan plan = best_matches(table);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < table.sources; ++i) {
    if (plan.best_destination[i]) candidates.push_back(i);
  }
  if (merges == 0 || candidates.size() < merges) {
    throw Error(ErrorKind::InsufficientMergeable,
                "requested " + std::to_string(merges) + " merges but only " +
                    std::to_string(candidates.size()) + " sources have an in-window candidate");
  }
  auto by_rank = [&plan](std::size_t a, std::size_t b) {
    if (plan.best_score[a] != plan.best_score[b]) return plan.best_score[a] > plan.best_score[b];
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(merges),
                    candidates.end(), by_rank);
  candidates.resize(merges);
  plan.selected = std::move(candidates);
  return plan;
}

struct PassOutcome {
  TokenSequence sequence;
  PassRecord record;
  // composition[k] lists the input indices (0-based) merged into output k.
  std::vector<std::vector<std::size_t>> composition;
};

/// Merges every selected source into its best destination and restores
/// temporal order by representative (smallest original) position.
inline PassOutcome apply_pass(const TokenSequence& seq, const ParitySplit& split,
                              const PassPlan& plan, Weighting weighting) {
  const std::size_t n_dst = split.destinations.size();
  const std::size_t dim = seq.dim();

  std::vector<std::vector<std::size_t>> absorbed(n_dst);
  std::vector<char> source_merged(split.sources.size(), 0);
  PassRecord record;
  record.input_length = seq.length();
  for (std::size_t i : split.sources) record.source_positions.push_back(seq.positions()[i]);
  for (std::size_t j : split.destinations) record.destination_positions.push_back(seq.positions()[j]);

  // Records are kept in source order so traces do not depend on rank order.
  std::vector<std::size_t> chosen = plan.selected;
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) {
    const std::size_t j = *plan.best_destination[i];
    absorbed[j].push_back(i);
    source_merged[i] = 1;
    record.merges.push_back({i + 1, j + 1, static_cast<float>(plan.best_score[i])});
  }

  // Every output token is identified by the input index that anchors it:
  // a destination (possibly with absorbed sources) or an unmerged source.
  struct Slot {
    std::size_t representative;
    std::size_t anchor;
    std::optional<std::size_t> destination;
  };
  std::vector<Slot> slots;
  slots.reserve(seq.length() - chosen.size());
  for (std::size_t i = 0; i < split.sources.size(); ++i) {
    if (!source_merged[i]) {
      const std::size_t idx = split.sources[i];
      slots.push_back({seq.positions()[idx], idx, std::nullopt});
    }
  }
  for (std::size_t j = 0; j < n_dst; ++j) {
    const std::size_t idx = split.destinations[j];
    std::size_t rep = seq.positions()[idx];
    for (std::size_t i : absorbed[j]) rep = std::min(rep, seq.positions()[split.sources[i]]);
    slots.push_back({rep, idx, j});
  }
  std::sort(slots.begin(), slots.end(),
            [](const Slot& a, const Slot& b) { return a.representative < b.representative; });

  Matrix out(slots.size(), dim);
  std::vector<std::size_t> positions(slots.size());
  std::vector<std::size_t> counts(slots.size());
  std::vector<std::vector<std::size_t>> composition(slots.size());
  std::vector<double> acc(dim);

  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Slot& slot = slots[k];
    positions[k] = slot.representative;
    const bool merged = slot.destination && !absorbed[*slot.destination].empty();
    if (!merged) {
      std::copy_n(seq.row(slot.anchor).begin(), dim, out.row(k).begin());
      counts[k] = seq.counts()[slot.anchor];
      composition[k] = {slot.anchor};
      continue;
    }

    const auto& members = absorbed[*slot.destination];
    std::vector<std::size_t> parts{slot.anchor};
    for (std::size_t i : members) parts.push_back(split.sources[i]);

    std::fill(acc.begin(), acc.end(), 0.0);
    double denom = 0.0;
    std::size_t total = 0;
    for (std::size_t idx : parts) {
      const double weight = weighting == Weighting::SizeWeighted
                                ? static_cast<double>(seq.counts()[idx])
                                : 1.0;
      const auto row = seq.row(idx);
      for (std::size_t c = 0; c < dim; ++c) acc[c] += weight * static_cast<double>(row[c]);
      denom += weight;
      total += seq.counts()[idx];
    }
    auto dst = out.row(k);
    for (std::size_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(acc[c] / denom);
    counts[k] = total;
    std::sort(parts.begin(), parts.end());
    composition[k] = std::move(parts);
  }

  return {TokenSequence(std::move(out), std::move(positions), std::move(counts)), std::move(record),
          std::move(composition)};
}

struct CompressionResult {
  TokenSequence sequence;
  MergeTrace trace;
  Provenance provenance;
};

/// Iterates merge passes until the sequence has exactly `target` tokens.
/// Provenance groups are expressed in the input's position labels.
inline CompressionResult compress_merge_to(const TokenSequence& seq, std::size_t target,
                                           Window window, Weighting weighting) {
  if (target < 1 || target > seq.length()) {
    throw Error(ErrorKind::InvalidConfig, "target length " + std::to_string(target) +
                                              " outside [1, " + std::to_string(seq.length()) + "]");
  }
  CompressionConfig config;
  config.method = window ? Method::Ltbm : Method::GlobalMerge;
  config.keep_ratio = static_cast<double>(target) / static_cast<double>(seq.length());
  config.window = window;
  config.weighting = weighting;
  Provenance prov = make_provenance(config, seq.length());

  std::vector<std::vector<std::size_t>> groups(seq.length());
  for (std::size_t k = 0; k < seq.length(); ++k) groups[k] = {seq.positions()[k]};

  MergeTrace trace;
  TokenSequence current = seq;
  std::vector<std::span<const float>> src_rows;
  std::vector<std::span<const float>> dst_rows;
  while (current.length() > target) {
    const ParitySplit split = parity_split(current);
    src_rows.clear();
    dst_rows.clear();
    for (std::size_t i : split.sources) src_rows.push_back(current.row(i));
    for (std::size_t j : split.destinations) dst_rows.push_back(current.row(j));
    const PairMask mask = window_mask(src_rows.size(), dst_rows.size(), window);
    const ScoreTable table = similarity_table(src_rows, dst_rows, mask);

    const std::size_t mergeable = best_matches(table).mergeable();
    const std::size_t r = std::min(current.length() - target, mergeable);
    if (r == 0) {
      throw Error(ErrorKind::CannotReachTarget,
                  "no source has an in-window destination at length " +
                      std::to_string(current.length()) + " (target " + std::to_string(target) + ")");
    }
    const PassPlan plan = plan_pass(table, r);
    PassOutcome outcome = apply_pass(current, split, plan, weighting);

    std::vector<std::vector<std::size_t>> next_groups(outcome.composition.size());
    for (std::size_t k = 0; k < outcome.composition.size(); ++k) {
      for (std::size_t idx : outcome.composition[k]) {
        next_groups[k].insert(next_groups[k].end(), groups[idx].begin(), groups[idx].end());
      }
      std::sort(next_groups[k].begin(), next_groups[k].end());
    }
    groups = std::move(next_groups);
    trace.passes.push_back(std::move(outcome.record));
    current = std::move(outcome.sequence);
  }
  prov.groups = std::move(groups);
  return {std::move(current), std::move(trace), std::move(prov)};
}

/// LTBM (bounded window) or Global Merge (kUnbounded) to max(1, round(rho L)).
inline CompressionResult compress_merge(const TokenSequence& seq, double keep_ratio, Window window,
                                        Weighting weighting) {
  CompressionResult result =
      compress_merge_to(seq, target_length(keep_ratio, seq.length()), window, weighting);
  result.provenance.keep_ratio = keep_ratio;
  return result;
}

}  // namespace seqsqueeze
