//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Writes the procedurally generated 20-drug dataset as drugs.csv/pairs.csv.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "msan/error.h"
#include "msan/synthetic.h"

int main(int argc, char **argv) {
  CLI::App app { "Generate the synthetic DDI dataset", "msan_synth" };
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--output-dir", out_dir, "destination directory");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto ds = msan::synthetic::make_dataset(seed);
    msan::synthetic::write_dataset(ds, out_dir);
    std::cout << nlohmann::json { { "drugs", ds.drugs.size() },
                                  { "pairs", ds.positives.size() },
                                  { "output_dir", out_dir } }
                     .dump()
              << std::endl;
  } catch (const msan::Error &e) {
    std::cerr << nlohmann::json { { "error", std::string(msan::error_name(e.code())) },
                                  { "message", e.what() } }
                     .dump()
              << std::endl;
    return 1;
  }
  return 0;
}
