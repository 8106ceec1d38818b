#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dampwave/commands.hpp"
#include "dampwave/config.hpp"
#include "dampwave/report.hpp"

using namespace dampwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dampwave_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("config defaults and strict keys") {
  const RunConfig d = parse_config("");
  CHECK(d.geometry.kind == "torus");
  CHECK(d.damping.kind == "constant");
  CHECK(d.seed == 20240601u);
  CHECK(d.to_json()["truncation"]["kmax"] == 4);

  const RunConfig c = parse_config(R"(
geometry:
  kind: sphere
damping:
  kind: zonal_caps
  amplitude: 0.5
truncation:
  lmax: 6
experiment:
  window: [4, 12]
seed: 7
)");
  CHECK(c.geometry.kind == "sphere");
  CHECK(c.truncation.lmax == 6);
  CHECK(c.experiment.window[1] == 12.0);
  CHECK(c.seed == 7u);

  CHECK_THROWS_AS(parse_config("geometry:\n  knd: torus\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("bogus: 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("truncation:\n  kmax: many\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("geometry:\n  kind: klein\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("experiment:\n  window: [1]\n"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/dampwave.yaml"), ValidationError);
}

TEST_CASE("csv and hashing") {
  CHECK(fmt17(0.1) == "0.10000000000000001");
  CsvTable t({"a", "b"});
  t.row({1.0, 2.5});
  CHECK(t.str() == "a,b\n1,2.5\n");
  CHECK_THROWS(t.row({1.0}));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("spectrum command: constant damping rows") {
  RunConfig cfg = parse_config("truncation:\n  kmax: 2\n");
  cfg.out = scratch("spectrum").string();
  const ReportBundle b = run_command("spectrum", cfg);
  const std::string csv = slurp(fs::path(cfg.out) / "spectrum.csv");
  CHECK(csv.rfind("re_tau,im_tau,residual,group_id,trusted,cluster_k\n", 0) == 0);
  // tau = 2ic = 0.2i and a root ic + sqrt(1 - c^2)
  CHECK(csv.find("0.20000000000000") != std::string::npos);
  CHECK(csv.find("0.99498743710661") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(fs::path(cfg.out) / "manifest.json"));
  CHECK(manifest["command"] == "spectrum");
  CHECK(manifest["config"] == cfg.to_json());
  const auto doc = nlohmann::json::parse(slurp(fs::path(cfg.out) / "spectrum.json"));
  auto echo = cfg.to_json();
  echo.erase("output");
  CHECK(doc["config"] == echo);
  for (const auto& f : manifest["files"])
    CHECK(sha256_hex(slurp(fs::path(cfg.out) / f["file"].get<std::string>())) == f["sha256"]);
}

TEST_CASE("resolvent scan with an empty rectangle") {
  RunConfig cfg = parse_config("experiment:\n  rect:\n    re_steps: 0\n");
  cfg.out = scratch("scan").string();
  run_command("resolvent-scan", cfg);
  CHECK(slurp(fs::path(cfg.out) / "resolvent_scan.csv") == "re_tau,im_tau,norm_L2,norm_H\n");
}

TEST_CASE("decay outputs are reproducible") {
  RunConfig cfg = parse_config(R"(
truncation:
  kmax: 2
experiment:
  A_inf: 0.1
  decay_window: [2, 8]
)");
  std::string hashes[2];
  for (int i = 0; i < 2; ++i) {
    cfg.out = scratch("decay" + std::to_string(i)).string();
    run_command("decay", cfg);
    hashes[i] = sha256_hex(slurp(fs::path(cfg.out) / "energy.csv")) +
                sha256_hex(slurp(fs::path(cfg.out) / "decay.json"));
  }
  CHECK(hashes[0] == hashes[1]);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ValidationError("x")) == 2);
  CHECK(exit_code_for(NumericalError("x")) == 3);
  RunConfig cfg = parse_config("geometry:\n  kind: sphere\ndamping:\n  kind: disk_complement\n");
  cfg.out = scratch("bad").string();
  try {
    run_command("spectrum", cfg);
    FAIL("expected a validation failure");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == 2);
  }
  CHECK_THROWS_AS(run_command("nonsense", cfg), ValidationError);
}
