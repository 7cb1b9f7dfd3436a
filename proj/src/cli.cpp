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

#include "sparsenorm/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "sparsenorm/check.hpp"
#include "sparsenorm/errors.hpp"
#include "sparsenorm/evidential.hpp"
#include "sparsenorm/normalize.hpp"

namespace sparsenorm::cli {

namespace {

void write_json(const Json& j, std::string& out) {
  using T = Json::value_t;
  switch (j.type()) {
    case T::null:
    case T::discarded:
      out += "null";
      break;
    case T::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case T::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case T::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case T::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        break;
      }
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::general, 17);
      out.append(buf, res.ptr);
      break;
    }
    case T::string:
    case T::binary:
      out += j.dump();
      break;
    case T::array: {
      out += '[';
      bool first = true;
      for (const Json& item : j) {
        if (!first) out += ',';
        first = false;
        write_json(item, out);
      }
      out += ']';
      break;
    }
    case T::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        write_json(item, out);
      }
      out += '}';
      break;
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

enum class NumberStatus { kOk, kMalformed, kNonFinite };

NumberStatus parse_real(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, value);
  if (res.ec == std::errc::invalid_argument || res.ptr != end || token.empty()) {
    return NumberStatus::kMalformed;
  }
  if (res.ec == std::errc::result_out_of_range || !std::isfinite(value)) {
    return NumberStatus::kNonFinite;
  }
  return NumberStatus::kOk;
}

bool parse_unsigned(std::string_view token, std::uint64_t& value) {
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, value);
  return res.ec == std::errc() && res.ptr == end && !token.empty();
}

Json distribution_json(const Distribution& p) {
  Json support = Json::array();
  for (bool b : p.support) support.push_back(b);
  return Json{{"p", p.probs}, {"support", support}};
}

Json property_json(const check::PropertyResult& r) {
  return Json{{"name", r.name},
              {"pass", r.pass},
              {"worst", r.worst},
              {"tolerance", r.tolerance},
              {"cases", r.cases}};
}

Json oracle_json(const check::OracleReport& r) {
  return Json{{"trials", r.trials},
              {"max_deviation", r.max_deviation},
              {"support_mismatches", r.support_mismatches},
              {"tolerance", r.tolerance},
              {"pass", r.pass}};
}

std::string format_real(double d) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Canonical text of a parsed configuration, used for the inputs digest.
std::string describe(const BenchConfig& c) {
  std::ostringstream s;
  const auto& d = c.dataset;
  s << "seed=" << c.seed << ";prototypes=" << d.prototypes << ";bits=" << d.bits
    << ";noise_rate=" << format_real(d.noise_rate) << ";samples=" << d.samples
    << ";min_separation=" << d.min_separation << ";max_attempts=" << d.max_attempts;
  for (const auto& r : c.runs) {
    s << ";run=" << to_string(r.normalizer) << ",eps=" << format_real(r.eps.value())
      << ",lr=" << format_real(r.learning_rate) << ",steps=" << r.steps
      << ",batch_size=" << r.batch_size << ",classes=" << r.classes
      << ",init=" << mixture::to_string(r.init) << ",init_scale=" << format_real(r.init_scale)
      << ",decoder_scale=" << format_real(r.decoder_scale) << ",record_every=" << r.record_every;
  }
  return s.str();
}

Json bench_row_json(const mixture::CompareRow& row) {
  const auto& m = row.metrics;
  Json modes = Json::array();
  for (bool b : m.modes_recovered) modes.push_back(b);
  return Json{{"normalizer", to_string(row.config.normalizer)},
              {"prior_tv", m.prior_tv},
              {"prior_w1", m.prior_w1},
              {"support_size", m.prior_support_size},
              {"final_elbo", m.final_elbo},
              {"prior_tv_per_query", m.prior_tv_per_query},
              {"prior_w1_per_query", m.prior_w1_per_query},
              {"modes_recovered", modes},
              {"mode_assignment", m.mode_assignment},
              {"prior", m.prior},
              {"elbo_steps", m.elbo_steps},
              {"elbo_curve", m.elbo_curve}};
}

std::string csv_curve(const mixture::BenchMetrics& m) {
  std::string s = "step,elbo\n";
  for (std::size_t i = 0; i < m.elbo_curve.size(); ++i) {
    s += std::to_string(m.elbo_steps[i]) + "," + format_real(m.elbo_curve[i]) + "\n";
  }
  return s;
}

}  // namespace

std::string to_json_line(const Json& value) {
  std::string out;
  write_json(value, out);
  return out;
}

std::string digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config) {
  if (flag) return *flag;
  if (config) return *config;
  if (const char* env = std::getenv("SPARSENORM_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t seed = 0;
    if (!parse_unsigned(trim(env), seed)) {
      throw ConfigError("SPARSENORM_SEED is not a nonnegative integer");
    }
    return seed;
  }
  return kDefaultSeed;
}

std::string output_record(std::string_view command, std::string_view inputs,
                          const Json& results, std::uint64_t seed) {
  const Json record{{"command", command},
                    {"inputs_digest", digest_hex(inputs)},
                    {"results", results},
                    {"version", kVersion},
                    {"seed", seed}};
  return to_json_line(record);
}

int run_normalize(const NormalizeOptions& options, std::istream& in, std::ostream& out,
                  std::ostream& err) {
  std::uint64_t seed = 0;
  try {
    seed = resolve_seed(options.seed, std::nullopt);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::function<Distribution(const LogitVector&)> fn;
  const std::string& name = options.fn;
  if (name == "ev-strict") {
    fn = ev_softmax_strict;
  } else if (name == "ev-train") {
    if (!(options.eps > 0.0) || !std::isfinite(options.eps)) {
      err << "error: --eps must be positive and finite\n";
      return kExitUsage;
    }
    const Epsilon eps(options.eps);
    fn = [eps](const LogitVector& v) { return ev_softmax_train(v, eps); };
  } else if (const auto kind = parse_normalizer(name)) {
    fn = [k = *kind](const LogitVector& v) { return normalize(k, v); };
  } else {
    err << "error: unknown --fn '" << name
        << "' (expected softmax, ev, ev-strict, ev-train, sparsemax or entmax15)\n";
    return kExitUsage;
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::vector<double> values;
    std::string token;
    while (tokens >> token) {
      double x = 0.0;
      switch (parse_real(token, x)) {
        case NumberStatus::kMalformed:
          err << "error: line " << line_no << ": cannot parse '" << token << "' as a number\n";
          return kExitUsage;
        case NumberStatus::kNonFinite:
          err << "error: line " << line_no << ": '" << token << "' is not a finite number\n";
          return kExitBadNumber;
        case NumberStatus::kOk:
          values.push_back(x);
          break;
      }
    }
    if (values.empty()) continue;
    std::string inputs = name;
    if (name == "ev-train") inputs += "|eps=" + format_real(options.eps);
    inputs += "|";
    inputs += trim(line);
    const Distribution p = fn(LogitVector(std::move(values)));
    out << output_record("normalize", inputs, distribution_json(p), seed) << "\n";
  }
  return kExitOk;
}

int run_check(const CheckOptions& options, std::ostream& out, std::ostream& err) {
  if (options.trials == 0) {
    err << "error: --trials must be positive\n";
    return kExitUsage;
  }
  std::uint64_t seed = 0;
  try {
    seed = resolve_seed(options.seed, std::nullopt);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const check::SuiteReport report = check::run_suite(seed, options.trials);
  Json props = Json::array();
  for (const auto& p : report.properties) {
    props.push_back(property_json(p));
    if (!p.pass) err << "FAIL " << p.name << ": worst " << p.worst << "\n";
  }
  const Json results{{"pass", report.all_pass()}, {"trials", options.trials}, {"properties", props}};
  out << output_record("check", "trials=" + std::to_string(options.trials), results, seed) << "\n";
  return report.all_pass() ? kExitOk : kExitFailure;
}

int run_oracle(const OracleOptions& options, std::ostream& out, std::ostream& err) {
  if (options.trials == 0 || options.k == 0 || options.j == 0) {
    err << "error: --trials, --k and --j must be positive\n";
    return kExitUsage;
  }
  if (options.lattice && options.k > evidential::kMaxLatticeClasses) {
    err << "error: --lattice supports --k up to " << evidential::kMaxLatticeClasses << "\n";
    return kExitUsage;
  }
  std::uint64_t seed = 0;
  try {
    seed = resolve_seed(options.seed, std::nullopt);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto equivalence = check::equivalence_fuzz(seed, options.trials, options.k, options.j);
  Json results{{"k", options.k}, {"j", options.j}, {"equivalence", oracle_json(equivalence)}};
  bool pass = equivalence.pass;
  if (options.lattice) {
    const auto lattice = check::lattice_fuzz(seed, options.trials, options.k);
    results["lattice"] = oracle_json(lattice);
    pass = pass && lattice.pass;
  }
  results["pass"] = pass;
  const std::string inputs = "trials=" + std::to_string(options.trials) +
                             ";k=" + std::to_string(options.k) + ";j=" + std::to_string(options.j) +
                             ";lattice=" + (options.lattice ? "1" : "0");
  out << output_record("oracle", inputs, results, seed) << "\n";
  if (!pass) err << "oracle deviation above tolerance\n";
  return pass ? kExitOk : kExitFailure;
}

BenchConfig default_bench_config(std::optional<std::uint64_t> seed_override) {
  return parse_bench_config("", seed_override);
}

BenchConfig parse_bench_config(std::string_view text,
                               std::optional<std::uint64_t> seed_override) {
  BenchConfig config;
  mixture::TrainConfig train;
  std::vector<NormalizerKind> kinds = {NormalizerKind::kSoftmax, NormalizerKind::kEvSoftmax,
                                       NormalizerKind::kSparsemax, NormalizerKind::kEntmax15};
  std::optional<std::uint64_t> file_seed;
  std::string section = "train";

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto fail = [&](const std::string& why) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + why);
    };
    if (const auto hash = raw.find('#'); hash != raw.npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "train" && section != "dataset") fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == line.npos) fail("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = unquote(line.substr(eq + 1));
    if (value.empty()) fail("missing value for '" + key + "'");

    const auto real = [&]() {
      double x = 0.0;
      if (parse_real(value, x) != NumberStatus::kOk) fail("'" + key + "' needs a finite number");
      return x;
    };
    const auto count = [&]() {
      std::uint64_t x = 0;
      if (!parse_unsigned(value, x)) fail("'" + key + "' needs a nonnegative integer");
      return static_cast<std::size_t>(x);
    };

    if (section == "train") {
      if (key == "seed") {
        std::uint64_t s = 0;
        if (!parse_unsigned(value, s)) fail("'seed' needs a nonnegative integer");
        file_seed = s;
      } else if (key == "normalizers") {
        std::string_view list = trim(value);
        if (!list.empty() && list.front() == '[') {
          if (list.back() != ']') fail("unterminated list");
          list = list.substr(1, list.size() - 2);
        }
        kinds.clear();
        std::size_t start = 0;
        while (start <= list.size()) {
          const std::size_t comma = list.find(',', start);
          const std::string_view item = unquote(
              list.substr(start, comma == list.npos ? list.npos : comma - start));
          start = comma == list.npos ? list.size() + 1 : comma + 1;
          if (item.empty()) continue;
          const auto kind = parse_normalizer(item);
          if (!kind) fail("unknown normalizer '" + std::string(item) + "'");
          kinds.push_back(*kind);
        }
        if (kinds.empty()) fail("normalizers list is empty");
      } else if (key == "steps") {
        train.steps = count();
      } else if (key == "lr" || key == "learning_rate") {
        train.learning_rate = real();
      } else if (key == "eps") {
        const double e = real();
        if (!(e > 0.0)) fail("'eps' must be positive");
        train.eps = Epsilon(e);
      } else if (key == "batch_size") {
        train.batch_size = count();
      } else if (key == "classes") {
        train.classes = count();
      } else if (key == "init") {
        const auto init = mixture::parse_model_init(value);
        if (!init) fail("unknown init '" + std::string(value) + "'");
        train.init = *init;
      } else if (key == "init_scale") {
        train.init_scale = real();
      } else if (key == "decoder_scale") {
        train.decoder_scale = real();
      } else if (key == "record_every") {
        train.record_every = count();
      } else {
        fail("unknown key '" + key + "' in [train]");
      }
    } else {
      auto& d = config.dataset;
      if (key == "prototypes") {
        d.prototypes = count();
      } else if (key == "bits") {
        d.bits = count();
      } else if (key == "noise_rate") {
        d.noise_rate = real();
      } else if (key == "samples") {
        d.samples = count();
      } else if (key == "min_separation") {
        d.min_separation = count();
      } else if (key == "max_attempts") {
        d.max_attempts = count();
      } else {
        fail("unknown key '" + key + "' in [dataset]");
      }
    }
  }

  config.seed = resolve_seed(seed_override, file_seed);
  config.dataset.seed = config.seed;
  train.seed = config.seed;
  try {
    train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (NormalizerKind kind : kinds) {
    mixture::TrainConfig run = train;
    run.normalizer = kind;
    config.runs.push_back(run);
  }
  return config;
}

int run_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  BenchConfig config;
  try {
    if (options.config_path) {
      std::ifstream file(*options.config_path, std::ios::binary);
      if (!file) {
        err << "error: cannot read config '" << *options.config_path << "'\n";
        return kExitUsage;
      }
      std::ostringstream text;
      text << file.rdbuf();
      config = parse_bench_config(text.str(), options.seed);
    } else {
      config = default_bench_config(options.seed);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<mixture::CompareRow> rows;
  try {
    const mixture::SyntheticDataset data = mixture::gen_dataset(config.dataset);
    rows = mixture::compare(data, config.runs);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: divergence in " << e.what() << "\n";
    return kExitDivergence;
  }

  const std::string inputs = describe(config);
  std::string lines;
  for (const auto& row : rows) {
    lines += output_record("bench", inputs, bench_row_json(row), config.seed);
    lines += "\n";
  }
  out << lines;

  if (options.out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(*options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream results(dir / "results.jsonl", std::ios::binary);
    results << lines;
    bool ok = static_cast<bool>(results);
    for (const auto& row : rows) {
      std::ofstream csv(dir / ("elbo_" + std::string(to_string(row.config.normalizer)) + ".csv"),
                        std::ios::binary);
      csv << csv_curve(row.metrics);
      ok = ok && static_cast<bool>(csv);
    }
    if (!ok) {
      err << "error: cannot write results under '" << *options.out_dir << "'\n";
      return kExitUsage;
    }
  }
  return kExitOk;
}

}  // namespace sparsenorm::cli
