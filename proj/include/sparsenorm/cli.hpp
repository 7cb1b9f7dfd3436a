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

// Command implementations behind the `sparsenorm` tool. Each command writes
// JSON lines to `out`, diagnostics to `err`, and returns the process exit
// code, so the same code paths can be driven in-process by tests.
//
// Every output line is an object
//   {"command", "inputs_digest", "results", "version", "seed"}
// with floating-point numbers printed to 17 significant digits.

#ifndef SPARSENORM_CLI_HPP_
#define SPARSENORM_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sparsenorm/mixture.hpp"

namespace sparsenorm::cli {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitBadNumber = 3,
  kExitDivergence = 4,
};

using Json = nlohmann::ordered_json;

/// Compact single-line JSON. Doubles use 17 significant digits; non-finite
/// doubles become null.
std::string to_json_line(const Json& value);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);

/// Flag, then config file, then the SPARSENORM_SEED environment variable,
/// then 42. Throws ConfigError if the environment value is not an integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config);

/// {"command", "inputs_digest", "results", "version", "seed"} as one line.
std::string output_record(std::string_view command, std::string_view inputs,
                          const Json& results, std::uint64_t seed);

struct NormalizeOptions {
  std::string fn = "ev";
  double eps = 1e-6;
  std::optional<std::uint64_t> seed;
};

/// One record per non-blank input line: {"p": [...], "support": [...]}.
/// Exit 2 (naming the line) on an unparsable token, unknown --fn or bad
/// --eps; exit 3 on a non-finite or out-of-range number.
int run_normalize(const NormalizeOptions& options, std::istream& in, std::ostream& out,
                  std::ostream& err);

struct CheckOptions {
  std::size_t trials = 10000;
  std::optional<std::uint64_t> seed;
};

/// Property suite summary; exit 0 iff every property passes.
int run_check(const CheckOptions& options, std::ostream& out, std::ostream& err);

struct OracleOptions {
  std::size_t trials = 100000;
  std::size_t k = 10;
  std::size_t j = 8;
  bool lattice = false;
  std::optional<std::uint64_t> seed;
};

/// Theorem fuzz, plus the lattice fuzz when requested. Exit 2 when --k
/// exceeds 16 with --lattice; exit 1 on any deviation above tolerance.
int run_oracle(const OracleOptions& options, std::ostream& out, std::ostream& err);

struct BenchConfig {
  mixture::DatasetConfig dataset;
  std::vector<mixture::TrainConfig> runs;
  std::uint64_t seed = kDefaultSeed;
};

/// Flat key=value text with optional [train] and [dataset] sections; '#'
/// starts a comment. Keys before any section belong to [train]. Recognized
/// keys:
///   [train]   seed, normalizers, steps, lr (learning_rate), eps,
///             batch_size, classes, init, init_scale, decoder_scale,
///             record_every
///   [dataset] prototypes, bits, noise_rate, samples, min_separation,
///             max_attempts
/// `normalizers` is a comma-separated list, optionally in [brackets] with
/// quoted names. Throws ConfigError naming the line on any problem.
/// `seed_override` follows the precedence of resolve_seed().
BenchConfig parse_bench_config(std::string_view text,
                               std::optional<std::uint64_t> seed_override);

/// The default configuration: all four normalizers on the default dataset.
BenchConfig default_bench_config(std::optional<std::uint64_t> seed_override);

struct BenchOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

/// One record per normalizer. With --out, also writes results.jsonl and one
/// elbo_<normalizer>.csv per run into that directory. Exit 4 on divergence.
int run_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

}  // namespace sparsenorm::cli

#endif  // SPARSENORM_CLI_HPP_
