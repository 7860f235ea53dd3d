// End-to-end checks of the cct binary: exit codes, output formats, config
// handling, and determinism across thread counts. The binary path comes in
// through the CCT_BIN compile definition.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& args) {
  const std::string cmd = std::string(CCT_BIN) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, got);
  const int status = pclose(pipe);
  REQUIRE(status != -1);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

nlohmann::json run_json(const std::string& args) {
  const auto result = run_command(args);
  REQUIRE(result.exit_code == 0);
  return nlohmann::json::parse(result.output);
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("help text lists the subcommands and exits cleanly") {
  const auto result = run_command("--help");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("curve") != std::string::npos);
  CHECK(result.output.find("simulate") != std::string::npos);
}

TEST_CASE("curve emits CSV by default and JSON on request") {
  const auto csv = run_command("curve --files 2 --users 2 --step 1");
  CHECK(csv.exit_code == 0);
  CHECK(csv.output.rfind("r_c,r_u\n", 0) == 0);

  const auto j = run_json("curve --files 2 --users 2 --step 1 --format json");
  CHECK(j.at("schema") == 1);
  CHECK(j.at("label") == "centralized");
  REQUIRE(j.at("points").size() == 3);
  CHECK(j["points"][0][0] == doctest::Approx(0.0));
  CHECK(j["points"][0][1] == doctest::Approx(1.5));  // both users miss: 2 * (1 - 2^-2)
  CHECK(j["points"][2][0] == doctest::Approx(2.0));
  CHECK(j["points"][2][1] == doctest::Approx(0.0));
}

TEST_CASE("optimize reports the allocation and its rate") {
  const auto j = run_json("optimize --files 2 --users 2 --cache 1");
  CHECK(j.at("scheme") == "centralized");
  CHECK(j.at("cache") == doctest::Approx(1.0));
  REQUIRE(j.at("r").size() == 2);
  CHECK(j["r"][0] == 1);
  CHECK(j["r"][1] == 1);
  CHECK(j.at("rate") == doctest::Approx(0.5));

  const auto k = run_json("optimize --scheme decentralized --files 2 --users 2 --cache 1");
  CHECK(k.at("r")[0] == doctest::Approx(0.5));
  CHECK(k.at("r")[1] == doctest::Approx(0.5));
  CHECK(k.at("stationarity_residual").get<double>() <= 1e-8);
}

TEST_CASE("gap certifies the ratio bound") {
  const auto j = run_json("gap --files 2 --users 2 --grid 512");
  CHECK(j.at("model") == "ergodic");
  CHECK(j.at("max_ratio").get<double>() <= 4.0);
  CHECK(j.at("certified_bound") == doctest::Approx(4.0));

  const auto k = run_json("gap --files 3 --users 4 --model static --grid 512");
  CHECK(k.at("max_ratio").get<double>() <= 4.7);
}

TEST_CASE("simulate delivers and decodes a decentralized round") {
  const auto j = run_json(
      "simulate --scheme decentralized --files 2 --users 2 --cache 1 "
      "--requests 1,2 --file-bits 200000 --seed 7");
  CHECK(j.at("decode_ok") == true);
  CHECK(j.at("scheme") == "decentralized");
  CHECK(j.at("seed") == 7);
  // Uniform caches at half the library: worst-case demand rate is 3/4.
  CHECK(j.at("rate").get<double>() == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("simulate maps request ids through the input file order") {
  TempDir dir("cct_cli_requests");
  const auto pop = dir / "pop.txt";
  {
    std::ofstream out(pop);
    out << "0.2\n0.8\n";  // file 2 is the popular one
  }
  const std::string common = "simulate --files 2 --users 2 --popularity " + pop.string() +
                             " --cache 1 --file-bits 8 --seed 3 --requests ";

  // Greedy at this cache size stores only the popular file, fully. Users
  // asking for it are served from cache; the cold file costs one unit each.
  const auto cached = run_json(common + "2,2 --transcript-out " + (dir / "t0.bin").string());
  CHECK(cached.at("rate") == doctest::Approx(0.0));
  CHECK(cached.at("total_bits") == 0);
  CHECK(fs::file_size(dir / "t0.bin") == 0);

  const auto cold = run_json(common + "1,1 --transcript-out " + (dir / "t1.bin").string());
  CHECK(cold.at("rate") == doctest::Approx(2.0));
  CHECK(cold.at("total_bits") == 16);
  CHECK(cold.at("padded_file_bits") == 8);
  // Two messages: 1 mask byte + 4 length bytes + 1 payload byte each.
  CHECK(fs::file_size(dir / "t1.bin") == 12);
}

TEST_CASE("oracle agrees with the closed form on a small library") {
  const auto j = run_json("oracle --files 2 --users 2 --cache 1");
  CHECK(j.at("exact") == true);
  CHECK(j.at("abs_diff").get<double>() <= 1e-12);

  const auto k = run_json("oracle --scheme decentralized --files 2 --users 2 --cache 1");
  CHECK(k.at("exact") == true);
  CHECK(k.at("abs_diff").get<double>() <= 1e-12);
}

TEST_CASE("invalid invocations exit with code 1") {
  CHECK(run_command("curve --files 2 --users 2 --bogus 2>/dev/null").exit_code == 1);
  CHECK(run_command("curve --files 2 --users 2 --popularity zipf:abc 2>/dev/null").exit_code == 1);
  CHECK(run_command("simulate --files 2 --users 2 --requests 1,2 2>/dev/null").exit_code == 1);
  CHECK(run_command("simulate --files 2 --users 2 --cache 1 --requests 1,2,1 2>/dev/null").exit_code == 1);
  CHECK(run_command("simulate --files 2 --users 2 --cache 1 --requests 3,1 2>/dev/null").exit_code == 1);

  TempDir dir("cct_cli_badalloc");
  const auto alloc = dir / "alloc.json";
  const auto opt = run_command("optimize --files 2 --users 3 --cache 1 --out " + alloc.string());
  REQUIRE(opt.exit_code == 0);
  CHECK(run_command("simulate --files 2 --users 2 --allocation " + alloc.string() +
                    " --requests 1,2 2>/dev/null")
            .exit_code == 1);
}

TEST_CASE("outputs are byte-identical across thread counts") {
  TempDir dir("cct_cli_threads");
  const std::string curve_args = "curve --scheme decentralized --files 3 --users 3 --step 0.25 --out ";
  REQUIRE(run_command("--threads 1 " + curve_args + (dir / "c1.csv").string()).exit_code == 0);
  REQUIRE(run_command("--threads 4 " + curve_args + (dir / "c4.csv").string()).exit_code == 0);
  CHECK(slurp(dir / "c1.csv") == slurp(dir / "c4.csv"));

  const std::string sim_args =
      "simulate --scheme decentralized --files 2 --users 3 --cache 1 "
      "--requests 1,2,2 --file-bits 5000 --trials 4 --seed 11 --out ";
  REQUIRE(run_command("--threads 1 " + sim_args + (dir / "s1.json").string()).exit_code == 0);
  REQUIRE(run_command("--threads 3 " + sim_args + (dir / "s3.json").string()).exit_code == 0);
  CHECK(slurp(dir / "s1.json") == slurp(dir / "s3.json"));
}

TEST_CASE("config files feed defaults and flags override them") {
  TempDir dir("cct_cli_config");
  const auto cfg = dir / "run.ini";
  {
    std::ofstream out(cfg);
    out << "[simulate]\n"
        << "seed=123\n"
        << "file-bits=4096\n";
  }
  const std::string base = "--config " + cfg.string() +
                           " simulate --scheme decentralized --files 2 --users 2 --cache 1 --requests 1,2";
  const auto from_cfg = run_json(base);
  CHECK(from_cfg.at("seed") == 123);
  CHECK(from_cfg.at("file_bits") == 4096);

  const auto overridden = run_json(base + " --seed 7");
  CHECK(overridden.at("seed") == 7);
  CHECK(overridden.at("file_bits") == 4096);
}
