#pragma once

// seqsqueeze command-line front end: compress, batch, gen, verify, bench,
// compare. Every report line is tab-separated: a record tag followed by
// key=value fields.
//
// Exit codes: 0 ok, 1 verification mismatch, 2 bad arguments, 3 I/O or
// format error, 4 the method cannot produce the requested budget.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqsqueeze/seqsqueeze.hpp"
#include "seqsqueeze/testkit/oracle.hpp"
#include "seqsqueeze/testkit/retention.hpp"
#include "seqsqueeze/testkit/synth.hpp"

namespace seqsqueeze::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitBudget = 4;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnavailableRatio:
    case ErrorKind::CannotReachTarget:
    case ErrorKind::InsufficientMergeable:
      return kExitBudget;
    case ErrorKind::InvalidConfig:
      return kExitUsage;
    default:
      return kExitIo;
  }
}

/// Tab-separated "tag\tkey=value..." line builder.
class Row {
 public:
  explicit Row(std::string_view tag) : text_(tag) {}

  template <typename T>
  Row& add(std::string_view key, const T& value) {
    std::ostringstream field;
    if constexpr (std::is_floating_point_v<T>) {
      field << std::setprecision(9) << value;
    } else {
      field << value;
    }
    text_ += '\t';
    text_ += key;
    text_ += '=';
    text_ += field.str();
    return *this;
  }

  const std::string& str() const noexcept { return text_; }

 private:
  std::string text_;
};

inline std::ostream& operator<<(std::ostream& os, const Row& row) { return os << row.str(); }

/// Accepts a non-negative integer or "unbounded".
inline Window parse_window(const std::string& text) {
  if (text == "unbounded" || text == "inf" || text == "none") return kUnbounded;
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || used == 0) {
    throw Error(ErrorKind::InvalidConfig, "window must be a non-negative integer or 'unbounded', got '" + text + "'");
  }
  return static_cast<std::size_t>(value);
}

inline std::string window_text(Window w) { return w ? std::to_string(*w) : std::string("unbounded"); }

/// Flags shared by every command that runs a compression method.
struct MethodFlags {
  std::string method = "ltbm";
  double keep_ratio = 0.5;
  std::string window = "8";
  std::string weighting = "paper-literal";
  std::size_t segments = 8;

  void attach(CLI::App& app, const std::string& prefix = "", bool with_ratio = true) {
    app.add_option("--" + prefix + "method", method, "ltbm | global-merge | uniavg | global-topk | segmentwise-topk")
        ->capture_default_str();
    if (with_ratio) app.add_option("--keep-ratio", keep_ratio, "fraction of tokens kept, in (0, 1]")->capture_default_str();
    app.add_option("--" + prefix + "window", window, "LTBM window w, or 'unbounded'")->capture_default_str();
    app.add_option("--" + prefix + "weighting", weighting, "paper-literal | size-weighted")->capture_default_str();
    app.add_option("--" + prefix + "segments", segments, "segment count for segmentwise-topk")->capture_default_str();
  }

  CompressionConfig config() const {
    CompressionConfig cfg;
    const auto m = parse_method(method);
    if (!m) throw Error(ErrorKind::InvalidConfig, "unknown method '" + method + "'");
    const auto wt = parse_weighting(weighting);
    if (!wt) throw Error(ErrorKind::InvalidConfig, "unknown weighting '" + weighting + "'");
    cfg.method = *m;
    cfg.weighting = *wt;
    cfg.keep_ratio = keep_ratio;
    cfg.window = parse_window(window);
    cfg.segments = segments;
    cfg.validate();
    return cfg;
  }
};

inline TokenSequence load_sequence(const fs::path& path) {
  return validate_sequence(npy::read_array(path));
}

inline double elapsed_us(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- compress

struct JobSpec {
  fs::path input;
  fs::path output;
  fs::path provenance;  // empty: not written
  CompressionConfig config;
};

/// Runs one compression job and returns its summary row.
inline Row run_job(const JobSpec& job) {
  const TokenSequence seq = load_sequence(job.input);
  const auto start = std::chrono::steady_clock::now();
  const CompressionResult result = compress(seq, job.config);
  const double wall = elapsed_us(start);
  npy::write_array(result.sequence.matrix(), job.output);
  if (!job.provenance.empty()) write_provenance(result.provenance, result.trace, job.provenance);
  Row row("compress");
  row.add("input", job.input.string())
      .add("method", to_string(job.config.method))
      .add("keep_ratio", job.config.keep_ratio)
      .add("window", window_text(job.config.effective_window()))
      .add("weighting", to_string(job.config.weighting))
      .add("input_length", seq.length())
      .add("output_length", result.sequence.length())
      .add("passes", result.trace.passes.size())
      .add("wall_us", static_cast<long long>(std::llround(wall)));
  return row;
}

// ---------------------------------------------------------------- batch

/// Manifest schema:
/// {"overrides": {<config keys>}, "jobs": [{"input", "output", "provenance",
///  "method", "keep_ratio", "window", "weighting", "segments"}]}
/// Config keys missing from a job fall back to CLI defaults; overrides win.
inline std::vector<JobSpec> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("jobs") || !doc["jobs"].is_array()) {
    throw Error(ErrorKind::SchemaViolation, "manifest needs a \"jobs\" array");
  }
  const nlohmann::json overrides = doc.value("overrides", nlohmann::json::object());
  const fs::path base = path.parent_path();
  auto resolve = [&base](const std::string& p) { return p.empty() ? fs::path{} : (fs::path(p).is_absolute() ? fs::path(p) : base / p); };

  std::vector<JobSpec> jobs;
  std::set<fs::path> outputs;
  for (const auto& entry : doc["jobs"]) {
    nlohmann::json merged = entry;
    for (const auto& [key, value] : overrides.items()) merged[key] = value;
    try {
      MethodFlags flags;
      flags.method = merged.value("method", flags.method);
      flags.keep_ratio = merged.value("keep_ratio", flags.keep_ratio);
      if (merged.contains("window")) {
        flags.window = merged["window"].is_null() ? "unbounded"
                       : merged["window"].is_string() ? merged["window"].get<std::string>()
                                                      : std::to_string(merged["window"].get<long long>());
      }
      flags.weighting = merged.value("weighting", flags.weighting);
      flags.segments = merged.value("segments", flags.segments);
      JobSpec job{resolve(merged.value("input", std::string())), resolve(merged.value("output", std::string())),
                  resolve(merged.value("provenance", std::string())), flags.config()};
      if (job.input.empty() || job.output.empty()) {
        throw Error(ErrorKind::SchemaViolation, "every job needs non-empty input and output paths");
      }
      if (job.input == job.output || job.output == job.provenance || job.input == job.provenance) {
        throw Error(ErrorKind::SchemaViolation, "job paths must be distinct: " + job.input.string());
      }
      for (const fs::path& p : {job.output, job.provenance}) {
        if (!p.empty() && !outputs.insert(p).second) {
          throw Error(ErrorKind::SchemaViolation, "two jobs write " + p.string());
        }
      }
      jobs.push_back(std::move(job));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaViolation, std::string("bad job entry: ") + e.what());
    }
  }
  return jobs;
}

inline std::size_t default_jobs() {
  if (const char* env = std::getenv("SEQSQUEEZE_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// ---------------------------------------------------------------- verify

struct VerifyReport {
  std::vector<Row> rows;
  bool ok = true;

  void check(std::string_view name, bool pass, const std::string& detail = {}) {
    Row row("check");
    row.add("name", name).add("status", pass ? "pass" : "fail");
    if (!detail.empty()) row.add("detail", detail);
    rows.push_back(std::move(row));
    ok = ok && pass;
  }
};

/// Compares the engine with the reference oracle on one sequence.
inline VerifyReport verify_against_oracle(const TokenSequence& seq, const CompressionConfig& cfg, double tolerance) {
  VerifyReport report;
  const CompressionResult engine = compress(seq, cfg);
  const testkit::OracleResult oracle = testkit::oracle_compress(seq, cfg);

  report.check("length", engine.sequence.length() == oracle.rows.size(),
               std::to_string(engine.sequence.length()) + " vs " + std::to_string(oracle.rows.size()));

  std::string group_detail;
  const auto& eg = engine.provenance.groups;
  const auto& og = oracle.provenance.groups;
  for (std::size_t k = 0; k < std::max(eg.size(), og.size()); ++k) {
    if (k >= eg.size() || k >= og.size() || eg[k] != og[k]) {
      group_detail = "first differing group " + std::to_string(k + 1);
      break;
    }
  }
  report.check("groups", group_detail.empty(), group_detail);
  report.check("dropped", engine.provenance.dropped == oracle.provenance.dropped);

  std::string trace_detail;
  const auto& ep = engine.trace.passes;
  const auto& op = oracle.trace.passes;
  if (ep.size() != op.size()) trace_detail = std::to_string(ep.size()) + " vs " + std::to_string(op.size()) + " passes";
  for (std::size_t p = 0; trace_detail.empty() && p < ep.size(); ++p) {
    const bool same_shape = ep[p].input_length == op[p].input_length &&
                            ep[p].source_positions == op[p].source_positions &&
                            ep[p].destination_positions == op[p].destination_positions &&
                            ep[p].merges.size() == op[p].merges.size();
    if (!same_shape) {
      trace_detail = "pass " + std::to_string(p + 1) + " differs";
      break;
    }
    for (std::size_t m = 0; m < ep[p].merges.size(); ++m) {
      const auto& a = ep[p].merges[m];
      const auto& b = op[p].merges[m];
      if (a.source != b.source || a.destination != b.destination ||
          std::abs(static_cast<double>(a.score) - static_cast<double>(b.score)) > std::max(tolerance, 0.0)) {
        trace_detail = "pass " + std::to_string(p + 1) + " merge " + std::to_string(m + 1) + " differs";
        break;
      }
    }
  }
  report.check("trace", trace_detail.empty(), trace_detail);

  std::string value_detail;
  double worst = 0.0;
  if (engine.sequence.length() == oracle.rows.size()) {
    for (std::size_t k = 0; k < oracle.rows.size(); ++k) {
      for (std::size_t c = 0; c < seq.dim(); ++c) {
        const double diff = std::abs(static_cast<double>(engine.sequence.matrix()(k, c)) - oracle.rows[k][c]);
        worst = std::max(worst, diff);
        if (diff > tolerance && value_detail.empty()) {
          std::ostringstream os;
          os << std::setprecision(9) << "token " << k + 1 << " component " << c + 1 << ": engine "
             << engine.sequence.matrix()(k, c) << " oracle " << oracle.rows[k][c];
          value_detail = os.str();
        }
      }
    }
  } else {
    value_detail = "lengths differ";
  }
  std::ostringstream worst_text;
  worst_text << std::setprecision(3) << "max_abs_diff " << worst;
  report.check("values", value_detail.empty(), value_detail.empty() ? worst_text.str() : value_detail);
  return report;
}

// ---------------------------------------------------------------- bench

/// Nearest-rank percentile of a sample (q in (0, 1]).
inline double percentile(std::vector<double> sample, double q) {
  std::sort(sample.begin(), sample.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sample.size())));
  return sample[std::clamp<std::size_t>(rank, 1, sample.size()) - 1];
}

// ---------------------------------------------------------------- compare

/// Expands an output back to the original length: each original position
/// takes the vector of the output token that contains it (zeros if dropped).
inline Matrix reconstruct(const CompressionResult& result, std::size_t original_length) {
  Matrix full(original_length, result.sequence.dim(), 0.0f);
  for (std::size_t k = 0; k < result.provenance.groups.size(); ++k) {
    for (std::size_t p : result.provenance.groups[k]) {
      std::copy_n(result.sequence.row(k).begin(), result.sequence.dim(), full.row(p - 1).begin());
    }
  }
  return full;
}

inline double reconstruction_distance(const CompressionResult& a, const CompressionResult& b, std::size_t length) {
  const Matrix ra = reconstruct(a, length);
  const Matrix rb = reconstruct(b, length);
  double worst = 0.0;
  for (std::size_t k = 0; k < ra.data().size(); ++k) {
    worst = std::max(worst, std::abs(static_cast<double>(ra.data()[k]) - static_cast<double>(rb.data()[k])));
  }
  return worst;
}

inline std::string group_histogram(const Provenance& prov) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& g : prov.groups) ++hist[g.size()];
  std::string out;
  for (const auto& [size, count] : hist) {
    if (!out.empty()) out += ';';
    out += std::to_string(size) + ":" + std::to_string(count);
  }
  return out;
}

inline nlohmann::json synth_spec_to_json(const testkit::SynthSpec& spec) {
  return {{"length", spec.length},     {"dim", spec.dim},
          {"seed", spec.seed},         {"profile", std::string(testkit::to_string(spec.profile))},
          {"events", spec.events},     {"mean_span", spec.mean_span},
          {"noise", spec.noise},       {"separation", spec.separation}};
}

inline testkit::SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  try {
    testkit::SynthSpec spec;
    spec.length = doc.at("length").get<std::size_t>();
    spec.dim = doc.at("dim").get<std::size_t>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    const auto profile = testkit::parse_profile(doc.at("profile").get<std::string>());
    if (!profile) throw Error(ErrorKind::SchemaViolation, "unknown profile in sidecar");
    spec.profile = *profile;
    spec.events = doc.at("events").get<std::size_t>();
    spec.mean_span = doc.at("mean_span").get<double>();
    spec.noise = doc.at("noise").get<double>();
    spec.separation = doc.at("separation").get<double>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("bad synth sidecar: ") + e.what());
  }
}

/// Sidecar describing how a generated array was produced.
inline fs::path sidecar_path(const fs::path& array_path) {
  fs::path p = array_path;
  p += ".synth.json";
  return p;
}

inline std::vector<fs::path> corpus_files(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".npy") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(input)) {
    for (const JobSpec& job : read_manifest(input)) files.push_back(job.input);
  } else {
    throw Error(ErrorKind::IoFailure, "no corpus directory or manifest at " + input.string());
  }
  return files;
}

// ---------------------------------------------------------------- entry

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"seqsqueeze: training-free token sequence compression"};
  app.require_subcommand(1);

  MethodFlags compress_flags;
  std::string compress_input, compress_output, compress_provenance;
  auto* compress_cmd = app.add_subcommand("compress", "Compress one .npy token matrix");
  compress_cmd->add_option("--input", compress_input, "input .npy (L x D float32)")->required();
  compress_cmd->add_option("--output", compress_output, "output .npy")->required();
  compress_cmd->add_option("--provenance", compress_provenance, "optional provenance JSON");
  compress_flags.attach(*compress_cmd);
  compress_cmd->get_option("--method")->required();
  compress_cmd->get_option("--keep-ratio")->required();

  std::string manifest_path;
  std::size_t jobs = default_jobs();
  auto* batch_cmd = app.add_subcommand("batch", "Run every job in a JSON manifest");
  batch_cmd->add_option("--manifest", manifest_path, "manifest JSON")->required();
  batch_cmd->add_option("--jobs", jobs, "parallel jobs (default $SEQSQUEEZE_JOBS or 1)")->check(CLI::PositiveNumber);

  testkit::SynthSpec synth;
  std::string gen_out, gen_profile = "iid-gaussian", gen_sidecar;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic token matrix");
  gen_cmd->add_option("--out", gen_out, "output .npy")->required();
  gen_cmd->add_option("--length", synth.length, "tokens L")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim", synth.dim, "features D")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", synth.seed, "64-bit seed")->required();
  gen_cmd->add_option("--profile", gen_profile, "iid-gaussian | piecewise-events")->capture_default_str();
  gen_cmd->add_option("--events", synth.events, "event count")->capture_default_str();
  gen_cmd->add_option("--mean-span", synth.mean_span, "mean event span in tokens")->capture_default_str();
  gen_cmd->add_option("--noise", synth.noise, "within-event noise scale")->capture_default_str();
  gen_cmd->add_option("--separation", synth.separation, "between-event separation scale")->capture_default_str();
  gen_cmd->add_option("--sidecar", gen_sidecar, "also write the generator spec as JSON here");

  MethodFlags verify_flags;
  std::string verify_input;
  double tolerance = 1e-5;
  auto* verify_cmd = app.add_subcommand("verify", "Check the engine against the reference oracle");
  verify_cmd->add_option("--input", verify_input, "input .npy")->required();
  verify_flags.attach(*verify_cmd);
  verify_cmd->add_option("--oracle-tolerance", tolerance, "max per-component difference")->capture_default_str();

  MethodFlags bench_flags;
  std::size_t bench_length = 750, bench_dim = 1280, repeats = 30, warmup = 3;
  std::uint64_t bench_seed = 0;
  std::vector<std::string> bench_methods{"ltbm"};
  auto* bench_cmd = app.add_subcommand("bench", "Time the compression kernels");
  bench_cmd->add_option("--length", bench_length, "tokens L")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--dim", bench_dim, "features D")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--keep-ratio", bench_flags.keep_ratio, "keep ratio")->capture_default_str();
  bench_cmd->add_option("--methods", bench_methods, "methods to time")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--window", bench_flags.window, "LTBM window")->capture_default_str();
  bench_cmd->add_option("--weighting", bench_flags.weighting, "weighting")->capture_default_str();
  bench_cmd->add_option("--segments", bench_flags.segments, "segments")->capture_default_str();
  bench_cmd->add_option("--repeats", repeats, "timed repeats")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", warmup, "untimed warm-up runs")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "input seed")->capture_default_str();

  MethodFlags side_a, side_b;
  side_b.method = "global-merge";
  std::string compare_input;
  double compare_ratio = 0.25;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two method configs over a corpus");
  compare_cmd->add_option("--input", compare_input, "corpus directory of .npy files, or a manifest")->required();
  compare_cmd->add_option("--keep-ratio", compare_ratio, "keep ratio for both sides")->capture_default_str();
  side_a.attach(*compare_cmd, "a-", false);
  side_b.attach(*compare_cmd, "b-", false);

  std::vector<std::string> argv_storage{"seqsqueeze"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*compress_cmd) {
      out << run_job({compress_input, compress_output, compress_provenance, compress_flags.config()}) << '\n';
      return kExitOk;
    }

    if (*batch_cmd) {
      const std::vector<JobSpec> specs = read_manifest(manifest_path);
      std::vector<std::string> lines(specs.size());
      std::vector<int> codes(specs.size(), kExitOk);
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (std::size_t k = next++; k < specs.size(); k = next++) {
          try {
            lines[k] = run_job(specs[k]).str();
          } catch (const Error& e) {
            codes[k] = exit_code_for(e.kind());
            lines[k] = Row("error").add("input", specs[k].input.string()).add("kind", to_string(e.kind())).str();
            lines[k] += "\tmessage=" + std::string(e.what());
          }
        }
      };
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < std::min(jobs, specs.size()); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (const auto& line : lines) out << line << '\n';
      return codes.empty() ? kExitOk : *std::max_element(codes.begin(), codes.end());
    }

    if (*gen_cmd) {
      const auto profile = testkit::parse_profile(gen_profile);
      if (!profile) throw Error(ErrorKind::InvalidConfig, "unknown profile '" + gen_profile + "'");
      synth.profile = *profile;
      const TokenSequence seq = testkit::generate(synth);
      npy::write_array(seq.matrix(), gen_out);
      if (!gen_sidecar.empty()) npy::write_file_atomic(gen_sidecar, synth_spec_to_json(synth).dump(1) + "\n");
      out << Row("gen").add("out", gen_out).add("length", synth.length).add("dim", synth.dim)
                 .add("seed", synth.seed).add("profile", gen_profile)
          << '\n';
      return kExitOk;
    }

    if (*verify_cmd) {
      const TokenSequence seq = load_sequence(verify_input);
      const CompressionConfig cfg = verify_flags.config();
      std::optional<ErrorKind> engine_error, oracle_error;
      try {
        (void)compress(seq, cfg);
      } catch (const Error& e) {
        engine_error = e.kind();
      }
      try {
        (void)testkit::oracle_compress(seq, cfg);
      } catch (const Error& e) {
        oracle_error = e.kind();
      }
      if (engine_error || oracle_error) {
        VerifyReport report;
        report.check("errors", engine_error == oracle_error,
                     std::string("engine ") + (engine_error ? std::string(to_string(*engine_error)) : "ok") +
                         ", oracle " + (oracle_error ? std::string(to_string(*oracle_error)) : "ok"));
        for (const Row& row : report.rows) out << row << '\n';
        if (!report.ok) return kExitMismatch;
        throw Error(*engine_error, "both engine and oracle reject this configuration");
      }
      const VerifyReport report = verify_against_oracle(seq, cfg, tolerance);
      for (const Row& row : report.rows) out << row << '\n';
      out << Row("verify").add("status", report.ok ? "match" : "mismatch") << '\n';
      return report.ok ? kExitOk : kExitMismatch;
    }

    if (*bench_cmd) {
      testkit::SynthSpec spec;
      spec.length = bench_length;
      spec.dim = bench_dim;
      spec.seed = bench_seed;
      const TokenSequence seq = testkit::generate(spec);
      std::vector<CompressionConfig> configs;
      for (const auto& name : bench_methods) {
        MethodFlags flags = bench_flags;
        flags.method = name;
        configs.push_back(flags.config());
      }
      for (const CompressionConfig& cfg : configs) {
        Row row("bench");
        row.add("method", to_string(cfg.method)).add("L", bench_length).add("D", bench_dim).add("rho", cfg.keep_ratio);
        try {
          for (std::size_t w = 0; w < warmup; ++w) (void)compress(seq, cfg);
          std::vector<double> times;
          std::size_t sink = 0;
          for (std::size_t r = 0; r < repeats; ++r) {
            const auto start = std::chrono::steady_clock::now();
            const CompressionResult result = compress(seq, cfg);
            times.push_back(elapsed_us(start));
            sink += result.sequence.length();
          }
          row.add("output_length", sink / repeats);
          row.add("median_us", percentile(times, 0.5)).add("p90_us", percentile(times, 0.9)).add("status", "ok");
        } catch (const Error& e) {
          row.add("median_us", "NA").add("p90_us", "NA").add("status", to_string(e.kind()));
        }
        out << row << '\n';
      }
      return kExitOk;
    }

    if (*compare_cmd) {
      side_a.keep_ratio = compare_ratio;
      side_b.keep_ratio = compare_ratio;
      const CompressionConfig cfg_a = side_a.config();
      const CompressionConfig cfg_b = side_b.config();
      const auto files = corpus_files(compare_input);
      double distance_sum = 0.0, distance_max = 0.0, retention_a = 0.0, retention_b = 0.0;
      std::size_t with_sidecar = 0;
      for (const fs::path& file : files) {
        const TokenSequence seq = load_sequence(file);
        const CompressionResult a = compress(seq, cfg_a);
        const CompressionResult b = compress(seq, cfg_b);
        const double distance = reconstruction_distance(a, b, seq.length());
        distance_sum += distance;
        distance_max = std::max(distance_max, distance);
        Row row("compare");
        row.add("file", file.filename().string())
            .add("L", seq.length())
            .add("a_length", a.sequence.length())
            .add("b_length", b.sequence.length())
            .add("a_hist", group_histogram(a.provenance))
            .add("b_hist", group_histogram(b.provenance))
            .add("distance", distance);
        if (const fs::path side = sidecar_path(file); fs::exists(side)) {
          std::ifstream in(side);
          nlohmann::json doc;
          try {
            in >> doc;
          } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::SchemaViolation, std::string("bad synth sidecar: ") + e.what());
          }
          const testkit::SynthSpec spec = synth_spec_from_json(doc);
          if (spec.profile == testkit::Profile::PiecewiseEvents) {
            const double ra = testkit::event_retention(seq, a.provenance, spec);
            const double rb = testkit::event_retention(seq, b.provenance, spec);
            retention_a += ra;
            retention_b += rb;
            ++with_sidecar;
            row.add("a_retention", ra).add("b_retention", rb);
          }
        }
        out << row << '\n';
      }
      Row summary("compare-aggregate");
      summary.add("files", files.size())
          .add("a", std::string(to_string(cfg_a.method)) + "/w=" + window_text(cfg_a.effective_window()))
          .add("b", std::string(to_string(cfg_b.method)) + "/w=" + window_text(cfg_b.effective_window()))
          .add("mean_distance", files.empty() ? 0.0 : distance_sum / static_cast<double>(files.size()))
          .add("max_distance", distance_max);
      if (with_sidecar > 0) {
        summary.add("mean_a_retention", retention_a / static_cast<double>(with_sidecar))
            .add("mean_b_retention", retention_b / static_cast<double>(with_sidecar));
      }
      out << summary << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace seqsqueeze::cli
