// Copyright 2026 The sparsenorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sparsenorm/cli.hpp"

namespace {

namespace cli = sparsenorm::cli;

std::optional<std::uint64_t> seed_if_set(const CLI::Option* opt, std::uint64_t value) {
  return opt->count() > 0 ? std::optional<std::uint64_t>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse normalizers, evidential oracle and mixture benchmark"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  cli::NormalizeOptions norm;
  std::string input_path;
  std::uint64_t norm_seed = 0;
  auto* normalize = app.add_subcommand("normalize", "Normalize score vectors, one per line");
  normalize->add_option("--fn", norm.fn, "softmax, ev, ev-strict, ev-train, sparsemax, entmax15")
      ->capture_default_str();
  normalize->add_option("--eps", norm.eps, "Relaxation for ev-train")->capture_default_str();
  normalize->add_option("--input", input_path, "Input file (default: stdin)");
  auto* norm_seed_opt = normalize->add_option("--seed", norm_seed, "Seed recorded in the output");

  cli::CheckOptions chk;
  std::uint64_t chk_seed = 0;
  auto* check = app.add_subcommand("check", "Run the randomized property suite");
  check->add_option("--trials", chk.trials, "Trials per property")->capture_default_str();
  auto* chk_seed_opt = check->add_option("--seed", chk_seed, "RNG seed");

  cli::OracleOptions orc;
  std::uint64_t orc_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Fuzz the evidential oracle against ev-softmax");
  oracle->add_option("--trials", orc.trials, "Random draws")->capture_default_str();
  oracle->add_option("--k", orc.k, "Number of classes")->capture_default_str();
  oracle->add_option("--j", orc.j, "Feature dimension")->capture_default_str();
  oracle->add_flag("--lattice", orc.lattice, "Also check closed-form masses on the full lattice");
  auto* orc_seed_opt = oracle->add_option("--seed", orc_seed, "RNG seed");

  cli::BenchOptions bench_opts;
  std::string config_path, out_dir;
  std::uint64_t bench_seed = 0;
  auto* bench = app.add_subcommand("bench", "Train the mixture benchmark for each normalizer");
  auto* config_opt = bench->add_option("--config", config_path, "key=value config file");
  auto* out_opt = bench->add_option("--out", out_dir, "Directory for results.jsonl and curves");
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed, "Seed (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    if (*normalize) {
      norm.seed = seed_if_set(norm_seed_opt, norm_seed);
      if (input_path.empty()) return cli::run_normalize(norm, std::cin, std::cout, std::cerr);
      std::ifstream in(input_path);
      if (!in) {
        std::cerr << "error: cannot read '" << input_path << "'\n";
        return cli::kExitUsage;
      }
      return cli::run_normalize(norm, in, std::cout, std::cerr);
    }
    if (*check) {
      chk.seed = seed_if_set(chk_seed_opt, chk_seed);
      return cli::run_check(chk, std::cout, std::cerr);
    }
    if (*oracle) {
      orc.seed = seed_if_set(orc_seed_opt, orc_seed);
      return cli::run_oracle(orc, std::cout, std::cerr);
    }
    if (*bench) {
      if (config_opt->count() > 0) bench_opts.config_path = config_path;
      if (out_opt->count() > 0) bench_opts.out_dir = out_dir;
      bench_opts.seed = seed_if_set(bench_seed_opt, bench_seed);
      return cli::run_bench(bench_opts, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitFailure;
  }
  return cli::kExitUsage;
}
