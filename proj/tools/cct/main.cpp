// cct: rate-memory tradeoff toolkit for coded caching networks.
//
// Subcommands: curve (tradeoff curves as CSV/JSON), optimize (cache
// allocations), gap (multiplicative-gap certificates), simulate (bit-exact
// placement/delivery), oracle (closed form vs enumeration cross-check).
//
// Exit codes: 0 success, 1 invalid input or I/O failure, 2 violated
// internal invariant (failed decode, breached certificate).

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "codedcache/bounds.hpp"
#include "codedcache/centralized.hpp"
#include "codedcache/decentralized.hpp"
#include "codedcache/io.hpp"
#include "codedcache/numeric.hpp"
#include "codedcache/popularity.hpp"
#include "codedcache/simulator.hpp"
#include "codedcache/tradeoff.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20260817;

int default_threads() {
  if (const char* env = std::getenv("CCT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
      // fall through to the built-in default
    }
    std::cerr << "warning: ignoring CCT_THREADS='" << env << "' (expected a positive integer)\n";
  }
  return 1;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    codedcache::write_file_atomic(out_path, content);
  }
}

std::string json_dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json curve_to_json(const codedcache::TradeoffCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : curve.points) points.push_back({pt.r_c, pt.r_u});
  return nlohmann::json{{"schema", 1}, {"label", curve.label}, {"points", points}};
}

// Parses "1,2,2" (1-based file ids in the input ordering) into the sorted
// domain used internally.
codedcache::RequestVector parse_requests(const std::string& text, const codedcache::PopularityProfile& profile,
                                         int users) {
  codedcache::RequestVector request;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("requests: cannot parse '" + token + "'");
    }
    if (used != token.size()) throw std::invalid_argument("requests: cannot parse '" + token + "'");
    if (value < 1 || value > profile.size())
      throw std::invalid_argument("requests: file " + std::to_string(value) + " outside [1, " +
                                  std::to_string(profile.size()) + "]");
    request.files.push_back(profile.inverse_permutation()[value - 1]);
  }
  if (request.users() != users)
    throw std::invalid_argument("requests: got " + std::to_string(request.users()) + " entries for " +
                                std::to_string(users) + " users");
  return request;
}

std::string transcript_blob(const codedcache::DeliveryTranscript& transcript, int users) {
  // Little-endian dump: per message the user-subset bitmask packed into
  // ceil(users/8) bytes, the payload bit length (4 bytes), then the payload
  // packed 8 bits per byte.
  std::string blob;
  const int mask_bytes = (users + 7) / 8;
  const auto push_le = [&](std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) blob.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  for (const auto& message : transcript.messages) {
    push_le(message.subset_mask, mask_bytes);
    push_le(static_cast<std::uint32_t>(message.payload.size()), 4);
    std::uint8_t byte = 0;
    int filled = 0;
    for (std::uint8_t bit : message.payload) {
      byte = static_cast<std::uint8_t>(byte | (bit << filled));
      if (++filled == 8) {
        blob.push_back(static_cast<char>(byte));
        byte = 0;
        filled = 0;
      }
    }
    if (filled > 0) blob.push_back(static_cast<char>(byte));
  }
  return blob;
}

struct CommonArgs {
  int files = 0;
  int users = 0;
  std::string popularity = "uniform";
};

codedcache::PopularityProfile profile_of(const CommonArgs& args) {
  auto profile = codedcache::PopularityProfile::from_spec(args.popularity, args.files);
  if (args.files > 0 && profile.size() != args.files)
    throw std::invalid_argument("popularity profile has " + std::to_string(profile.size()) + " files, --files " +
                                std::to_string(args.files));
  return profile;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool files_required = true) {
  auto* files = cmd->add_option("--files,-n", args.files, "Number of files in the library");
  if (files_required) files->required();
  cmd->add_option("--users,-l", args.users, "Number of users")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--popularity", args.popularity,
                  "Popularity spec: 'uniform', 'zipf:<alpha>', or a file with one probability per line");
}

int run(int argc, char** argv) {
  CLI::App app{"Rate-memory tradeoff toolkit for coded caching networks"};
  app.set_config("--config", "", "Config file with key=value lines (flags take precedence)");
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: CCT_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  // ---- curve ----
  auto* curve_cmd = app.add_subcommand("curve", "Sample a rate-memory tradeoff curve");
  CommonArgs curve_args;
  add_common(curve_cmd, curve_args);
  std::string curve_scheme = "centralized";
  double curve_step = 0.0;
  bool curve_convexify = false;
  std::string curve_out;
  std::string curve_format = "csv";
  curve_cmd->add_option("--scheme", curve_scheme,
                        "lower|centralized|decentralized|hpf|mn_centralized|mn_decentralized|optimal_regime");
  curve_cmd->add_option("--step", curve_step, "Cache grid step (default N/100)");
  curve_cmd->add_flag("--convexify", curve_convexify, "Lower convex envelope of the sampled points");
  curve_cmd->add_option("--out,-o", curve_out, "Output path (default: stdout)");
  curve_cmd->add_option("--format", curve_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  // ---- optimize ----
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize a cache allocation for one cache size");
  CommonArgs opt_args;
  add_common(opt_cmd, opt_args);
  std::string opt_scheme = "centralized";
  double opt_cache = 0.0;
  std::string opt_out;
  opt_cmd->add_option("--scheme", opt_scheme, "centralized|decentralized")
      ->check(CLI::IsMember({"centralized", "decentralized"}));
  opt_cmd->add_option("--cache", opt_cache, "Normalized cache size R_c")->required();
  opt_cmd->add_option("--out,-o", opt_out, "Output path (default: stdout)");

  // ---- gap ----
  auto* gap_cmd = app.add_subcommand("gap", "Certify the multiplicative gap to the lower bound");
  CommonArgs gap_args;
  add_common(gap_cmd, gap_args);
  std::string gap_model = "ergodic";
  int gap_grid = 10000;
  std::string gap_out;
  gap_cmd->add_option("--model", gap_model, "ergodic|static")->check(CLI::IsMember({"ergodic", "static"}));
  gap_cmd->add_option("--grid", gap_grid, "Grid intervals for the ratio scan")->check(CLI::PositiveNumber);
  gap_cmd->add_option("--out,-o", gap_out, "Output path (default: stdout)");

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Run bit-exact placement and delivery");
  CommonArgs sim_args;
  add_common(sim_cmd, sim_args);
  std::string sim_scheme = "centralized";
  double sim_cache = -1.0;
  std::string sim_alloc_path;
  std::string sim_requests;
  std::int64_t sim_file_bits = 100000;
  int sim_trials = 1;
  std::uint64_t sim_seed = kDefaultSeed;
  std::string sim_out;
  std::string sim_transcript_out;
  sim_cmd->add_option("--scheme", sim_scheme, "centralized|decentralized")
      ->check(CLI::IsMember({"centralized", "decentralized"}));
  sim_cmd->add_option("--cache", sim_cache, "Cache size; the allocation is optimized for it");
  sim_cmd->add_option("--allocation", sim_alloc_path, "Allocation JSON (overrides --cache)");
  sim_cmd->add_option("--requests", sim_requests, "Comma-separated 1-based file ids, one per user")->required();
  sim_cmd->add_option("--file-bits", sim_file_bits, "Bits per file")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--trials", sim_trials, "Independent trials (seeds seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "Base seed (default " + std::to_string(kDefaultSeed) + ")");
  sim_cmd->add_option("--out,-o", sim_out, "Summary JSON path (default: stdout)");
  sim_cmd->add_option("--transcript-out", sim_transcript_out, "Binary transcript dump of the first trial");

  // ---- oracle ----
  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check the ergodic closed form against enumeration");
  CommonArgs oracle_args;
  add_common(oracle_cmd, oracle_args);
  std::string oracle_scheme = "centralized";
  double oracle_cache = -1.0;
  std::string oracle_alloc_path;
  std::uint64_t oracle_budget = 1'000'000;
  std::uint64_t oracle_samples = 200'000;
  std::uint64_t oracle_seed = kDefaultSeed;
  std::string oracle_out;
  oracle_cmd->add_option("--scheme", oracle_scheme, "centralized|decentralized")
      ->check(CLI::IsMember({"centralized", "decentralized"}));
  oracle_cmd->add_option("--cache", oracle_cache, "Cache size; the allocation is optimized for it");
  oracle_cmd->add_option("--allocation", oracle_alloc_path, "Allocation JSON (overrides --cache)");
  oracle_cmd->add_option("--budget", oracle_budget, "Enumerate exactly while N^L <= budget");
  oracle_cmd->add_option("--samples", oracle_samples, "Monte Carlo demand draws beyond the budget");
  oracle_cmd->add_option("--seed", oracle_seed, "Monte Carlo seed");
  oracle_cmd->add_option("--out,-o", oracle_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's assorted parse-error codes into the documented
    // exit contract (0 for --help/--version, 1 for bad input).
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (curve_cmd->parsed()) {
    const auto profile = profile_of(curve_args);
    const double step = curve_step > 0.0 ? curve_step : profile.size() / 100.0;
    const auto curve = codedcache::build_curve(codedcache::scheme_from_string(curve_scheme), profile,
                                               curve_args.users, step, curve_convexify, threads);
    emit(curve_out, curve_format == "json" ? json_dump(curve_to_json(curve)) : codedcache::curve_to_csv(curve));
    return 0;
  }

  if (opt_cmd->parsed()) {
    const auto profile = profile_of(opt_args);
    nlohmann::json j;
    if (opt_scheme == "centralized") {
      const auto result = codedcache::greedy_optimize(profile, opt_args.users, opt_cache);
      j = nlohmann::json::parse(codedcache::allocation_to_json(profile, result.allocation));
      j["rate"] = result.rate;
    } else {
      const auto result = codedcache::kkt_optimize(profile, opt_args.users, opt_cache);
      j = nlohmann::json::parse(codedcache::allocation_to_json(profile, result.allocation, opt_args.users));
      j["rate"] = result.rate;
      j["lambda"] = result.lambda;
      j["stationarity_residual"] = result.stationarity_residual;
      j["budget_residual"] = result.budget_residual;
    }
    j["scheme"] = opt_scheme;
    j["cache"] = opt_cache;
    emit(opt_out, json_dump(j));
    return 0;
  }

  if (gap_cmd->parsed()) {
    const auto certificate = gap_model == "ergodic"
                                 ? codedcache::gap_ergodic(gap_args.files, gap_args.users, gap_grid, threads)
                                 : codedcache::gap_static(gap_args.files, gap_args.users, gap_grid, threads);
    nlohmann::json j{{"schema", 1},
                     {"n", certificate.n_files},
                     {"l", certificate.users},
                     {"model", gap_model},
                     {"max_ratio", certificate.max_ratio},
                     {"argmax_rc", certificate.argmax_rc},
                     {"certified_bound", certificate.certified_bound}};
    emit(gap_out, json_dump(j));
    return 0;
  }

  if (sim_cmd->parsed()) {
    const auto profile = profile_of(sim_args);
    const auto request = parse_requests(sim_requests, profile, sim_args.users);

    std::optional<codedcache::IntegerAllocation> int_alloc;
    std::optional<codedcache::FractionalAllocation> frac_alloc;
    if (!sim_alloc_path.empty()) {
      const std::string text = codedcache::read_file(sim_alloc_path);
      if (sim_scheme == "centralized") {
        int_alloc = codedcache::integer_allocation_from_json(text, profile);
        if (int_alloc->users != sim_args.users)
          throw std::invalid_argument("allocation is for " + std::to_string(int_alloc->users) + " users, --users " +
                                      std::to_string(sim_args.users));
      } else {
        frac_alloc = codedcache::fractional_allocation_from_json(text, profile);
      }
    } else {
      if (sim_cache < 0.0)
        throw std::invalid_argument("simulate needs --cache or --allocation");
      if (sim_scheme == "centralized") {
        int_alloc = codedcache::greedy_optimize(profile, sim_args.users, sim_cache).allocation;
      } else {
        frac_alloc = codedcache::kkt_optimize(profile, sim_args.users, sim_cache).allocation;
      }
    }

    // Each trial owns its network state; results land in per-trial slots so
    // the summary is byte-identical for any --threads value.
    std::vector<double> trial_rate(sim_trials, 0.0);
    std::vector<std::int64_t> trial_bits(sim_trials, 0);
    std::vector<std::int64_t> trial_padded(sim_trials, 0);
    std::string first_transcript;
    codedcache::parallel_for(sim_trials, threads, [&](std::int64_t trial) {
      codedcache::SimulatedNetwork net(profile.size(), sim_args.users, sim_file_bits,
                                       sim_seed + static_cast<std::uint64_t>(trial));
      if (int_alloc) {
        net.place_centralized(*int_alloc);
      } else {
        net.place_decentralized(*frac_alloc);
      }
      trial_padded[trial] = net.file_bits();
      const auto transcript = net.deliver(request);  // throws on decode failure
      trial_rate[trial] = transcript.normalized_rate;
      trial_bits[trial] = transcript.total_bits;
      if (trial == 0 && !sim_transcript_out.empty())
        first_transcript = transcript_blob(transcript, sim_args.users);
    });
    if (!sim_transcript_out.empty()) codedcache::write_file_atomic(sim_transcript_out, first_transcript);

    codedcache::CompensatedSum rate_sum;
    std::int64_t total_bits = 0;
    for (int trial = 0; trial < sim_trials; ++trial) {
      rate_sum.add(trial_rate[trial]);
      total_bits += trial_bits[trial];
    }
    const std::int64_t padded_bits = trial_padded[0];
    const bool decode_ok = true;  // deliver() already verified every trial

    const double mean_rate = rate_sum.value() / sim_trials;
    nlohmann::json j{{"schema", 1},
                     {"scheme", sim_scheme},
                     {"rate", mean_rate},
                     {"total_bits", total_bits},
                     {"decode_ok", decode_ok},
                     {"trials", sim_trials},
                     {"file_bits", sim_file_bits},
                     {"padded_file_bits", padded_bits},
                     {"seed", sim_seed}};
    if (sim_trials > 1) {
      codedcache::CompensatedSum sq_dev;
      for (int trial = 0; trial < sim_trials; ++trial) {
        const double d = trial_rate[trial] - mean_rate;
        sq_dev.add(d * d);
      }
      j["rate_std_error"] = std::sqrt(sq_dev.value() / (sim_trials - 1) / sim_trials);
    }
    emit(sim_out, json_dump(j));
    return 0;
  }

  if (oracle_cmd->parsed()) {
    const auto profile = profile_of(oracle_args);
    codedcache::OracleResult oracle;
    double closed_form = 0.0;
    if (oracle_scheme == "centralized") {
      codedcache::IntegerAllocation alloc;
      if (!oracle_alloc_path.empty()) {
        alloc = codedcache::integer_allocation_from_json(codedcache::read_file(oracle_alloc_path), profile);
        if (alloc.users != oracle_args.users)
          throw std::invalid_argument("allocation is for " + std::to_string(alloc.users) + " users, --users " +
                                      std::to_string(oracle_args.users));
      } else if (oracle_cache >= 0.0) {
        alloc = codedcache::greedy_optimize(profile, oracle_args.users, oracle_cache).allocation;
      } else {
        throw std::invalid_argument("oracle needs --cache or --allocation");
      }
      closed_form = codedcache::ergodic_rate(profile, alloc);
      oracle = codedcache::ergodic_rate_oracle(profile, alloc, oracle_budget, oracle_samples, oracle_seed);
    } else {
      codedcache::FractionalAllocation alloc;
      if (!oracle_alloc_path.empty()) {
        alloc = codedcache::fractional_allocation_from_json(codedcache::read_file(oracle_alloc_path), profile);
      } else if (oracle_cache >= 0.0) {
        alloc = codedcache::kkt_optimize(profile, oracle_args.users, oracle_cache).allocation;
      } else {
        throw std::invalid_argument("oracle needs --cache or --allocation");
      }
      closed_form = codedcache::ergodic_rate(profile, alloc, oracle_args.users);
      oracle = codedcache::ergodic_rate_oracle(profile, alloc, oracle_args.users, oracle_budget, oracle_samples,
                                               oracle_seed);
    }
    nlohmann::json j{{"schema", 1},
                     {"scheme", oracle_scheme},
                     {"closed_form", closed_form},
                     {"oracle", oracle.value},
                     {"abs_diff", std::abs(closed_form - oracle.value)},
                     {"exact", oracle.exact},
                     {"samples", oracle.samples}};
    if (!oracle.exact) j["std_error"] = oracle.std_error;
    emit(oracle_out, json_dump(j));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const codedcache::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const codedcache::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
