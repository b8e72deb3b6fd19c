#pragma once

// Deterministic synthetic token sequences.
//
// The generator is SplitMix64 (increment 0x9E3779B97F4A7C15, mix multipliers
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, shifts 30/27/31). Uniform doubles
// take the top 53 bits; Gaussians use one Box-Muller cosine branch per pair
// of uniforms, u1 taken from (0, 1]. Integers below n use modulo reduction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "seqsqueeze/core.hpp"

namespace seqsqueeze::testkit {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double gaussian() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

enum class Profile { IidGaussian, PiecewiseEvents };

inline std::string_view to_string(Profile p) {
  return p == Profile::IidGaussian ? "iid-gaussian" : "piecewise-events";
}

inline std::optional<Profile> parse_profile(std::string_view name) {
  if (name == "iid-gaussian") return Profile::IidGaussian;
  if (name == "piecewise-events") return Profile::PiecewiseEvents;
  return std::nullopt;
}

struct SynthSpec {
  std::size_t length = 64;
  std::size_t dim = 8;
  std::uint64_t seed = 0;
  Profile profile = Profile::IidGaussian;
  // piecewise-events only
  std::size_t events = 4;
  double mean_span = 8.0;
  double noise = 0.05;
  double separation = 1.0;

  void validate() const {
    if (length < 1 || dim < 1) throw Error(ErrorKind::InvalidConfig, "synthetic length and dim must be >= 1");
    if (profile == Profile::PiecewiseEvents) {
      if (events > length) throw Error(ErrorKind::InvalidConfig, "more events than tokens");
      if (!(mean_span >= 1.0)) throw Error(ErrorKind::InvalidConfig, "mean event span must be >= 1");
      if (!(noise >= 0.0) || !(separation > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "noise must be >= 0 and separation > 0");
      }
    }
  }

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Inclusive 1-based token range occupied by one event.
struct EventSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first + 1; }
  friend bool operator==(const EventSpan&, const EventSpan&) = default;
};

namespace detail {

// Spans are drawn uniformly around the mean, shrunk (largest first) until
// they fit, then background tokens are scattered over the E + 1 gaps.
inline std::vector<EventSpan> draw_layout(const SynthSpec& spec, SplitMix64& rng) {
  std::vector<std::size_t> spans(spec.events);
  std::size_t total = 0;
  for (auto& s : spans) {
    s = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(spec.mean_span * (0.5 + rng.uniform()))));
    total += s;
  }
  while (total > spec.length) {
    auto widest = std::max_element(spans.begin(), spans.end());
    --*widest;
    --total;
  }
  std::vector<std::size_t> gaps(spec.events + 1, 0);
  for (std::size_t b = 0; b < spec.length - total; ++b) ++gaps[rng.below(gaps.size())];

  std::vector<EventSpan> layout;
  std::size_t cursor = 1;
  for (std::size_t e = 0; e < spec.events; ++e) {
    cursor += gaps[e];
    layout.push_back({cursor, cursor + spans[e] - 1});
    cursor += spans[e];
  }
  return layout;
}

}  // namespace detail

/// Event spans of a piecewise-events spec (empty for iid-gaussian).
inline std::vector<EventSpan> event_layout(const SynthSpec& spec) {
  spec.validate();
  if (spec.profile != Profile::PiecewiseEvents) return {};
  SplitMix64 rng(spec.seed);
  return detail::draw_layout(spec, rng);
}

inline TokenSequence generate(const SynthSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  Matrix data(spec.length, spec.dim);
  if (spec.profile == Profile::IidGaussian) {
    for (float& v : data.data()) v = static_cast<float>(rng.gaussian());
    return validate_sequence(std::move(data));
  }

  const auto layout = detail::draw_layout(spec, rng);
  std::vector<int> owner(spec.length, -1);
  for (std::size_t e = 0; e < layout.size(); ++e) {
    for (std::size_t p = layout[e].first; p <= layout[e].last; ++p) owner[p - 1] = static_cast<int>(e);
  }
  std::vector<double> centroid(spec.dim);
  int current = -1;
  for (std::size_t t = 0; t < spec.length; ++t) {
    auto row = data.row(t);
    if (owner[t] < 0) {
      for (auto& v : row) v = static_cast<float>(spec.separation * rng.gaussian());
      continue;
    }
    if (owner[t] != current) {
      current = owner[t];
      for (auto& c : centroid) c = spec.separation * rng.gaussian();
    }
    for (std::size_t c = 0; c < spec.dim; ++c) {
      const double jitter = spec.noise > 0.0 ? spec.noise * rng.gaussian() : 0.0;
      row[c] = static_cast<float>(centroid[c] + jitter);
    }
  }
  return validate_sequence(std::move(data));
}

}  // namespace seqsqueeze::testkit
