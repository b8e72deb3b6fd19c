#pragma once

#include <algorithm>
#include <cstddef>

#include "seqsqueeze/core.hpp"
#include "seqsqueeze/testkit/synth.hpp"

namespace seqsqueeze::testkit {

/// Fraction of events that still own at least one output token built only
/// from their own positions. `original` must be exactly what `spec` generates.
inline double event_retention(const TokenSequence& original, const Provenance& prov, const SynthSpec& spec) {
  if (spec.profile != Profile::PiecewiseEvents) {
    throw Error(ErrorKind::SpecMismatch, "event retention needs a piecewise-events spec");
  }
  if (original.length() != spec.length || original.dim() != spec.dim ||
      prov.original_length != spec.length) {
    throw Error(ErrorKind::SpecMismatch, "sequence or provenance shape differs from the spec");
  }
  if (!(generate(spec).matrix() == original.matrix())) {
    throw Error(ErrorKind::SpecMismatch, "sequence was not generated from this spec");
  }

  const auto layout = event_layout(spec);
  if (layout.empty()) return 1.0;
  std::size_t survived = 0;
  for (const EventSpan& ev : layout) {
    const bool kept = std::any_of(prov.groups.begin(), prov.groups.end(), [&ev](const auto& g) {
      return !g.empty() && g.front() >= ev.first && g.back() <= ev.last;
    });
    if (kept) ++survived;
  }
  return static_cast<double>(survived) / static_cast<double>(layout.size());
}

}  // namespace seqsqueeze::testkit
