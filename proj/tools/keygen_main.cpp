#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "voicesearch/common/files.hpp"
#include "voicesearch/keys/keyfile.hpp"
#include "voicesearch/ringhe/serialize.hpp"

using namespace voicesearch;

int main(int argc, char** argv) {
  CLI::App app{"Create the shared key file for a device and its caregiver"};
  std::string out;
  std::string params_out;
  app.add_option("--out", out, "Key file to write (mode 0600)")->required();
  app.add_option("--params-out", params_out, "Also write the public HE parameters for the server");
  CLI11_PARSE(app, argc, argv);

  try {
    SystemRandom rng;
    const auto keys = keys::generate_key_material(ringhe::HeParams::defaults(), rng);
    keys::save_key_file(out, keys);
    if (!params_out.empty()) write_file_atomic(params_out, ringhe::params_to_json(keys.context->params()).dump(2));
    std::printf("wrote %s (key_id %s)\n", out.c_str(), keys.key_id.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
