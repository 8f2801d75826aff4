// Writes the Langlie input sequence used by the changepoint experiment.
#include <cstdint>
#include <iostream>
#include <string>

#include "perms/experiments.hpp"

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "langlie_inputs.csv";
  try {
    const perms::ChangepointConfig cfg;
    const auto t = perms::langlie_inputs(cfg, -2.0, 2.0, perms::kLanglieFixtureSeed);
    perms::save_langlie_inputs(out, t);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
