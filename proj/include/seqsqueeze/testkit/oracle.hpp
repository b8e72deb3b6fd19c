#pragma once

// Slow reference implementation of every compression method. It works on
// float64 copies of the input with plain loops and deliberately shares no
// code with the engine headers (only the data-model types from core.hpp), so
// agreement between the two is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "seqsqueeze/core.hpp"

namespace seqsqueeze::testkit {

inline constexpr std::size_t kOracleMaxLength = 512;

struct OracleResult {
  std::vector<std::vector<double>> rows;
  Provenance provenance;
  MergeTrace trace;
};

namespace oracle_detail {

struct Token {
  std::vector<double> vec;
  std::vector<std::size_t> group;  // sorted original positions
  std::size_t count = 1;
};

inline std::size_t budget(double rho, std::size_t n) {
  double r = std::round(rho * static_cast<double>(n));
  if (r < 1.0) r = 1.0;
  if (r > static_cast<double>(n)) r = static_cast<double>(n);
  return static_cast<std::size_t>(r);
}

inline double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cos_sim(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  double den = std::sqrt(aa) * std::sqrt(bb);
  if (den < 1e-12) den = 1e-12;
  return ab / den;
}

inline OracleResult finish(const std::vector<Token>& tokens, const CompressionConfig& cfg,
                           std::size_t original_length) {
  OracleResult out;
  out.provenance.method = cfg.method;
  out.provenance.keep_ratio = cfg.keep_ratio;
  out.provenance.window = cfg.method == Method::GlobalMerge ? Window{} : cfg.window;
  out.provenance.weighting = cfg.weighting;
  out.provenance.segments = cfg.segments;
  out.provenance.original_length = original_length;
  for (const Token& t : tokens) {
    out.rows.push_back(t.vec);
    out.provenance.groups.push_back(t.group);
  }
  return out;
}

inline std::vector<Token> merge_loop(std::vector<Token> tokens, std::size_t target, bool bounded,
                                     std::size_t w, bool size_weighted, MergeTrace& trace) {
  while (tokens.size() > target) {
    const std::size_t n = tokens.size();
    const std::size_t n_src = (n + 1) / 2;
    const std::size_t n_dst = n / 2;

    PassRecord pass;
    pass.input_length = n;
    for (std::size_t p = 0; p < n_src; ++p) pass.source_positions.push_back(tokens[2 * p].group.front());
    for (std::size_t q = 0; q < n_dst; ++q) pass.destination_positions.push_back(tokens[2 * q + 1].group.front());

    struct Candidate {
      std::size_t src;
      std::size_t dst;
      double score;
    };
    std::vector<Candidate> cands;
    for (std::size_t p = 0; p < n_src; ++p) {
      bool found = false;
      Candidate best{p, 0, 0.0};
      for (std::size_t q = 0; q < n_dst; ++q) {
        const std::size_t gap = p > q ? p - q : q - p;
        if (bounded && gap > w) continue;
        const double s = cos_sim(tokens[2 * p].vec, tokens[2 * q + 1].vec);
        if (!found || s > best.score) {
          best = {p, q, s};
          found = true;
        }
      }
      if (found) cands.push_back(best);
    }
    const std::size_t r = std::min(n - target, cands.size());
    if (r == 0) throw Error(ErrorKind::CannotReachTarget, "oracle: no mergeable source");
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.src < b.src;
    });
    cands.resize(r);
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.src < b.src; });

    std::vector<bool> gone(n, false);
    std::vector<std::vector<std::size_t>> into(n_dst);
    for (const Candidate& c : cands) {
      into[c.dst].push_back(c.src);
      gone[2 * c.src] = true;
      pass.merges.push_back({c.src + 1, c.dst + 1, static_cast<float>(c.score)});
    }

    std::vector<Token> next;
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (gone[idx]) continue;
      Token t = tokens[idx];
      if (idx % 2 == 1 && !into[idx / 2].empty()) {
        const auto& srcs = into[idx / 2];
        double total_weight = size_weighted ? static_cast<double>(t.count) : 1.0;
        std::vector<double> sum(t.vec.size());
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] = total_weight * t.vec[c];
        for (std::size_t p : srcs) {
          const Token& s = tokens[2 * p];
          const double wgt = size_weighted ? static_cast<double>(s.count) : 1.0;
          for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += wgt * s.vec[c];
          total_weight += wgt;
          t.count += s.count;
          t.group.insert(t.group.end(), s.group.begin(), s.group.end());
        }
        for (std::size_t c = 0; c < sum.size(); ++c) t.vec[c] = sum[c] / total_weight;
        std::sort(t.group.begin(), t.group.end());
      }
      next.push_back(std::move(t));
    }
    std::sort(next.begin(), next.end(),
              [](const Token& a, const Token& b) { return a.group.front() < b.group.front(); });
    trace.passes.push_back(std::move(pass));
    tokens = std::move(next);
  }
  return tokens;
}

// Indices sorted by (norm descending, position ascending).
inline std::vector<std::size_t> by_norm(const std::vector<Token>& tokens, std::size_t lo, std::size_t hi) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t k = lo; k < hi; ++k) keyed.push_back({norm_of(tokens[k].vec), k});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (const auto& kv : keyed) out.push_back(kv.second);
  return out;
}

inline OracleResult keep_only(const std::vector<Token>& tokens, std::vector<std::size_t> keep,
                              const CompressionConfig& cfg) {
  std::sort(keep.begin(), keep.end());
  std::vector<Token> kept;
  std::vector<bool> used(tokens.size(), false);
  for (std::size_t k : keep) {
    kept.push_back(tokens[k]);
    used[k] = true;
  }
  OracleResult out = finish(kept, cfg, tokens.size());
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (!used[k]) out.provenance.dropped.push_back(tokens[k].group.front());
  }
  return out;
}

}  // namespace oracle_detail

/// Reference result for `seq` under `config`; same tie-breaks and error
/// kinds as the engine. Input lengths above kOracleMaxLength are refused.
inline OracleResult oracle_compress(const TokenSequence& seq, const CompressionConfig& config) {
  using namespace oracle_detail;
  if (!(config.keep_ratio > 0.0 && config.keep_ratio <= 1.0) || config.segments < 1) {
    throw Error(ErrorKind::InvalidConfig, "oracle: bad configuration");
  }
  const std::size_t n = seq.length();
  if (n > kOracleMaxLength) {
    throw Error(ErrorKind::InvalidConfig, "oracle is limited to " + std::to_string(kOracleMaxLength) + " tokens");
  }

  std::vector<Token> tokens(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (float v : seq.row(k)) tokens[k].vec.push_back(static_cast<double>(v));
    tokens[k].group = {seq.positions()[k]};
    tokens[k].count = seq.counts()[k];
  }
  if (config.keep_ratio == 1.0) return finish(tokens, config, n);

  const std::size_t target = budget(config.keep_ratio, n);
  switch (config.method) {
    case Method::Ltbm:
    case Method::GlobalMerge: {
      const bool bounded = config.method == Method::Ltbm && config.window.has_value();
      MergeTrace trace;
      auto merged = merge_loop(tokens, target, bounded, bounded ? *config.window : 0,
                               config.weighting == Weighting::SizeWeighted, trace);
      OracleResult out = finish(merged, config, n);
      out.trace = std::move(trace);
      return out;
    }
    case Method::UniAvg: {
      const double inv = std::round(1.0 / config.keep_ratio);
      if (inv < 2.0) throw Error(ErrorKind::UnavailableRatio, "oracle: pooling factor below 2");
      const auto k = static_cast<std::size_t>(inv);
      std::vector<Token> pooled;
      for (std::size_t start = 0; start < n; start += k) {
        Token t;
        t.vec.assign(seq.dim(), 0.0);
        t.count = 0;
        std::size_t members = 0;
        for (std::size_t idx = start; idx < n && idx < start + k; ++idx) {
          for (std::size_t c = 0; c < seq.dim(); ++c) t.vec[c] += tokens[idx].vec[c];
          t.group.push_back(tokens[idx].group.front());
          t.count += tokens[idx].count;
          ++members;
        }
        for (double& v : t.vec) v /= static_cast<double>(members);
        pooled.push_back(std::move(t));
      }
      return finish(pooled, config, n);
    }
    case Method::GlobalTopK: {
      auto order = by_norm(tokens, 0, n);
      order.resize(target);
      return keep_only(tokens, order, config);
    }
    case Method::SegmentwiseTopK: {
      const std::size_t segs = std::min(config.segments, n);
      std::vector<std::size_t> start(segs), len(segs), quota(segs);
      std::size_t pos = 0;
      for (std::size_t s = 0; s < segs; ++s) {
        len[s] = n / segs + (s < n % segs ? 1 : 0);
        start[s] = pos;
        pos += len[s];
      }
      // Largest remainder, handing out one leftover at a time.
      std::size_t given = 0;
      std::vector<std::size_t> rem(segs);
      for (std::size_t s = 0; s < segs; ++s) {
        quota[s] = target * len[s] / n;
        rem[s] = target * len[s] % n;
        given += quota[s];
      }
      std::vector<bool> bumped(segs, false);
      while (given < target) {
        std::size_t pick = segs;
        for (std::size_t s = 0; s < segs; ++s) {
          if (bumped[s]) continue;
          if (pick == segs || rem[s] > rem[pick]) pick = s;
        }
        ++quota[pick];
        bumped[pick] = true;
        ++given;
      }
      std::size_t spill = 0;
      for (std::size_t s = 0; s < segs; ++s) {
        if (quota[s] > len[s]) {
          spill += quota[s] - len[s];
          quota[s] = len[s];
        }
      }
      while (spill > 0) {
        std::size_t pick = segs;
        double pick_norm = 0.0;
        for (std::size_t s = 0; s < segs; ++s) {
          if (quota[s] == len[s]) continue;
          const double next = norm_of(tokens[by_norm(tokens, start[s], start[s] + len[s])[quota[s]]].vec);
          if (pick == segs || next > pick_norm) {
            pick = s;
            pick_norm = next;
          }
        }
        ++quota[pick];
        --spill;
      }
      std::vector<std::size_t> keep;
      for (std::size_t s = 0; s < segs; ++s) {
        auto order = by_norm(tokens, start[s], start[s] + len[s]);
        keep.insert(keep.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(quota[s]));
      }
      return keep_only(tokens, keep, config);
    }
  }
  throw Error(ErrorKind::InvalidConfig, "oracle: unknown method");
}

}  // namespace seqsqueeze::testkit
