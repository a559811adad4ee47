#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SPHMEAN_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "sphmean_cli_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kBaseConfig =
    "dimension = 2\n"
    "sphere_resolution = 32\n"
    "direction_resolution = 128\n"
    "t_resolution = 129\n"
    "m_max = 4\n"
    "zero_count = 4\n"
    "moment_poly_k_max = 1\n"
    "tolerance_condition3 = 1e-3\n"
    "tolerance_condition2 = 1e-3\n"
    "tolerance_moment = 1e-3\n"
    "bump = 0.3 0 0 0.4 1\n";

}  // namespace

TEST_CASE("pipeline: forward, decompose, check", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "run.cfg", kBaseConfig);
  const std::string cfg = " --config " + (dir / "run.cfg").string();

  const RunResult fwd = run("forward" + cfg + " --out " + (dir / "fw").string());
  INFO(fwd.output);
  CHECK(fwd.exit_code == 0);
  CHECK_THAT(fwd.output, ContainsSubstring("support gap"));
  CHECK(fs::exists(dir / "fw" / "grid.csv"));
  CHECK(fs::exists(dir / "fw" / "grid.meta"));
  CHECK(fs::exists(dir / "fw" / "config.echo"));

  // Decompose from the written grid and from a fresh synthesis: the file
  // format holds full precision, so the two runs must agree byte for byte.
  const RunResult dec1 = run("decompose" + cfg + " --grid " + (dir / "fw").string() +
                             " --out " + (dir / "dec1").string());
  INFO(dec1.output);
  CHECK(dec1.exit_code == 0);
  const RunResult dec2 = run("decompose" + cfg + " --out " + (dir / "dec2").string());
  CHECK(dec2.exit_code == 0);
  CHECK(read_file(dir / "dec1" / "coefficients.csv") ==
        read_file(dir / "dec2" / "coefficients.csv"));
  CHECK(read_file(dir / "dec1" / "spectral.csv") ==
        read_file(dir / "dec2" / "spectral.csv"));

  const RunResult chk = run("check" + cfg + " --grid " + (dir / "fw").string() +
                            " --out " + (dir / "chk").string());
  INFO(chk.output);
  CHECK(chk.exit_code == 0);
  CHECK_THAT(chk.output, ContainsSubstring("verdict: PASS"));
  const json report = json::parse(read_file(dir / "chk" / "report.json"));
  CHECK(report["verdict"] == "PASS");
  CHECK(report["m_max"] == 4);
  CHECK(report["channels"].size() == 9);
}

TEST_CASE("perturbed data is rejected with exit code 1", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "bad.cfg",
             std::string(kBaseConfig) + "perturbation = 3 1 3 3 0.01\n");
  const RunResult chk = run("check --config " + (dir / "bad.cfg").string() + " --out " +
                            (dir / "chk").string());
  INFO(chk.output);
  CHECK(chk.exit_code == 1);
  CHECK_THAT(chk.output, ContainsSubstring("verdict: FAIL"));
  const json report = json::parse(read_file(dir / "chk" / "report.json"));
  CHECK(report["verdict"] == "FAIL");
  bool failed_channel = false;
  for (const auto& ch : report["channels"])
    if (ch["m"] == 3 && ch["l"] == 1) failed_channel = !ch["condition3"]["pass"];
  CHECK(failed_channel);
}

TEST_CASE("configuration problems exit with code 2", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "typo.cfg", "widget = 3\n");
  const RunResult bad = run("check --config " + (dir / "typo.cfg").string());
  CHECK(bad.exit_code == 2);
  CHECK_THAT(bad.output, ContainsSubstring("unknown key"));

  const RunResult missing = run("forward --config " + (dir / "nope.cfg").string());
  CHECK(missing.exit_code == 2);

  write_file(dir / "run.cfg", kBaseConfig);
  const RunResult no_grid = run("decompose --config " + (dir / "run.cfg").string() +
                                " --grid " + (dir / "empty").string());
  CHECK(no_grid.exit_code == 2);

  const RunResult no_sub = run("");
  CHECK(no_sub.exit_code == 2);

  const RunResult help = run("--help");
  CHECK(help.exit_code == 0);
  CHECK_THAT(help.output, ContainsSubstring("forward"));
  CHECK_THAT(help.output, ContainsSubstring("verify-lemmas"));
}

TEST_CASE("command line overrides reach the report", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "run.cfg", kBaseConfig);
  const RunResult chk = run("check --config " + (dir / "run.cfg").string() +
                            " --m-max 2 --zeros 3 --out " + (dir / "chk").string());
  CHECK(chk.exit_code == 0);
  const json report = json::parse(read_file(dir / "chk" / "report.json"));
  CHECK(report["m_max"] == 2);
  CHECK(report["zero_count"] == 3);
  CHECK(report["channels"].size() == 5);
}

TEST_CASE("forward output is deterministic across thread counts", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "run.cfg", kBaseConfig);
  const std::string cfg = " --config " + (dir / "run.cfg").string();
  const RunResult one = run("forward" + cfg + " --out " + (dir / "a").string());
  CHECK(one.exit_code == 0);
  // Re-run under a different worker count; chunked writes keep output identical.
  const std::string cmd = "SPHMEAN_THREADS=3 " + std::string(SPHMEAN_CLI_PATH) +
                          " forward" + cfg + " --out " + (dir / "b").string() + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fread(buf, 1, sizeof buf, pipe) > 0) {
  }
  CHECK(WEXITSTATUS(pclose(pipe)) == 0);
  CHECK(read_file(dir / "a" / "grid.csv") == read_file(dir / "b" / "grid.csv"));
}

TEST_CASE("lemma verification and fault injection", "[cli]") {
  const fs::path dir = scratch_dir();
  write_file(dir / "lem.cfg", "lemma_m_max = 3\nlemma_samples = 4000\n");
  const std::string cfg = " --config " + (dir / "lem.cfg").string();

  const RunResult ok = run("verify-lemmas" + cfg + " --out " + (dir / "ok").string());
  INFO(ok.output);
  CHECK(ok.exit_code == 0);
  for (const char* name : {"bessel-lower-bound", "sonine-identity", "laplacian-power",
                           "triangular-moments", "null-moments", "derivative-vanishing"})
    CHECK_THAT(ok.output, ContainsSubstring(std::string("PASS ") + name));
  const json lemmas = json::parse(read_file(dir / "ok" / "lemmas.json"));
  CHECK(lemmas["verdict"] == "PASS");
  CHECK(lemmas["lemmas"].size() == 6);

  const RunResult bad = run("verify-lemmas" + cfg + " --inject-c-scale 1.05 --out " +
                            (dir / "bad").string());
  INFO(bad.output);
  CHECK(bad.exit_code == 1);
  CHECK_THAT(bad.output, ContainsSubstring("FAIL triangular-moments"));
  const json lemmas_bad = json::parse(read_file(dir / "bad" / "lemmas.json"));
  CHECK(lemmas_bad["verdict"] == "FAIL");
}
