#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "voicesearch/synth/synth.hpp"

using namespace voicesearch;

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic desk corpus (3 words x 2 moods x N takes) with labels.csv"};
  std::string out;
  int takes = 3;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--takes", takes, "Takes per word and mood")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto entries = synth::write_desk_corpus(out, takes, seed);
    std::printf("wrote %zu clips to %s\n", entries.size(), out.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
