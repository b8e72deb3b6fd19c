// Regenerates tests/fixtures from the reference oracle:
//   make_fixtures <fixture-dir>

#include <filesystem>
#include <iostream>

#include "seqsqueeze/npy.hpp"
#include "seqsqueeze/provenance_io.hpp"
#include "seqsqueeze/testkit/oracle.hpp"
#include "seqsqueeze/testkit/synth.hpp"

int main(int argc, char** argv) {
  using namespace seqsqueeze;
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixture-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  testkit::SynthSpec spec;
  spec.length = 64;
  spec.dim = 8;
  spec.seed = 2024;
  const TokenSequence seq = testkit::generate(spec);
  npy::write_array(seq.matrix(), dir / "input_64x8.npy");

  CompressionConfig cfg;
  cfg.method = Method::Ltbm;
  cfg.keep_ratio = 0.25;
  cfg.window = 8;
  const testkit::OracleResult expected = testkit::oracle_compress(seq, cfg);
  Matrix out(expected.rows.size(), spec.dim);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = static_cast<float>(expected.rows[r][c]);
  npy::write_array(out, dir / "ltbm_r0.25_w8.npy");
  write_provenance(expected.provenance, expected.trace, dir / "ltbm_r0.25_w8.json");
  std::cout << "wrote fixtures to " << dir << '\n';
  return 0;
}
