#pragma once

// JSON serialization of provenance and merge traces.
//
// {
//   "method": "ltbm", "keep_ratio": 0.25, "window": 8 (null = unbounded),
//   "weighting": "paper-literal", "segments": 8,
//   "original_length": 64, "output_length": 16,
//   "groups": [[1, 2], [3], ...],          1-based original positions
//   "dropped": [...],                      pruning methods only
//   "passes": [{"input_length": 64, "sources": [...], "destinations": [...],
//               "merges": [{"i": 1, "j": 1, "score": 0.981234121}, ...]}]
// }
//
// Scores are float32 values written with 9 significant digits, which is
// enough to read back the identical float.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "seqsqueeze/core.hpp"
#include "seqsqueeze/npy.hpp"

namespace seqsqueeze {

namespace detail {

inline double nine_digit(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return std::strtod(buf, nullptr);
}

template <typename T>
T require(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::SchemaViolation, std::string("missing key \"") + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json provenance_to_json(const Provenance& prov, const MergeTrace& trace) {
  nlohmann::json doc;
  doc["method"] = std::string(to_string(prov.method));
  doc["keep_ratio"] = prov.keep_ratio;
  doc["window"] = prov.window ? nlohmann::json(*prov.window) : nlohmann::json(nullptr);
  doc["weighting"] = std::string(to_string(prov.weighting));
  doc["segments"] = prov.segments;
  doc["original_length"] = prov.original_length;
  doc["output_length"] = prov.output_length();
  doc["groups"] = prov.groups;
  doc["dropped"] = prov.dropped;
  nlohmann::json passes = nlohmann::json::array();
  for (const PassRecord& pass : trace.passes) {
    nlohmann::json merges = nlohmann::json::array();
    for (const MergeRecord& m : pass.merges) {
      merges.push_back({{"i", m.source}, {"j", m.destination}, {"score", detail::nine_digit(m.score)}});
    }
    passes.push_back({{"input_length", pass.input_length},
                      {"sources", pass.source_positions},
                      {"destinations", pass.destination_positions},
                      {"merges", std::move(merges)}});
  }
  doc["passes"] = std::move(passes);
  return doc;
}

inline std::pair<Provenance, MergeTrace> provenance_from_json(const nlohmann::json& doc) {
  using detail::require;
  Provenance prov;
  const auto method = parse_method(require<std::string>(doc, "method"));
  if (!method) throw Error(ErrorKind::SchemaViolation, "unknown method");
  prov.method = *method;
  prov.keep_ratio = require<double>(doc, "keep_ratio");
  if (!doc.contains("window")) throw Error(ErrorKind::SchemaViolation, "missing key \"window\"");
  prov.window = doc["window"].is_null() ? kUnbounded : Window(require<std::size_t>(doc, "window"));
  const auto weighting = parse_weighting(require<std::string>(doc, "weighting"));
  if (!weighting) throw Error(ErrorKind::SchemaViolation, "unknown weighting");
  prov.weighting = *weighting;
  prov.segments = require<std::size_t>(doc, "segments");
  prov.original_length = require<std::size_t>(doc, "original_length");
  prov.groups = require<std::vector<std::vector<std::size_t>>>(doc, "groups");
  prov.dropped = require<std::vector<std::size_t>>(doc, "dropped");
  if (require<std::size_t>(doc, "output_length") != prov.groups.size()) {
    throw Error(ErrorKind::SchemaViolation, "output_length disagrees with the number of groups");
  }

  MergeTrace trace;
  const auto passes = require<nlohmann::json>(doc, "passes");
  if (!passes.is_array()) throw Error(ErrorKind::SchemaViolation, "\"passes\" must be an array");
  for (const auto& p : passes) {
    PassRecord pass;
    pass.input_length = require<std::size_t>(p, "input_length");
    pass.source_positions = require<std::vector<std::size_t>>(p, "sources");
    pass.destination_positions = require<std::vector<std::size_t>>(p, "destinations");
    const auto merges = require<nlohmann::json>(p, "merges");
    if (!merges.is_array()) throw Error(ErrorKind::SchemaViolation, "\"merges\" must be an array");
    for (const auto& m : merges) {
      pass.merges.push_back({require<std::size_t>(m, "i"), require<std::size_t>(m, "j"),
                             static_cast<float>(require<double>(m, "score"))});
    }
    trace.passes.push_back(std::move(pass));
  }
  return {std::move(prov), std::move(trace)};
}

inline void write_provenance(const Provenance& prov, const MergeTrace& trace,
                             const std::filesystem::path& path) {
  npy::write_file_atomic(path, provenance_to_json(prov, trace).dump(1) + "\n");
}

inline std::pair<Provenance, MergeTrace> read_provenance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("not valid JSON: ") + e.what());
  }
  return provenance_from_json(doc);
}

}  // namespace seqsqueeze
