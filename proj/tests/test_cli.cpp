#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "tvlab_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(TVLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

const std::string kSmall = R"({"grids": {"n": 10, "m": 8}, "scheme": {"dt": 0.05, "t_end": 4},
  "resolvent": {"count": 5}, "observability": {"n": 40, "samples": 8}})";

}  // namespace

TEST_CASE("usage and configuration errors map to exit codes") {
  CHECK(run("") == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("simulate --threads 0") == 2);
  CHECK(run("simulate --config " + (kRoot / "missing.json").string()) == 2);
  CHECK(run("simulate --config " + write_config("bad.json", "{\"b\": ").string()) == 3);
  CHECK(run("simulate --config " + write_config("neg.json", "{\"b\": -1}").string()) == 4);
  CHECK(run("simulate --config " + write_config("kern.json", R"({"b": 2, "kernel": {"g0": 3, "a": 1}})").string()) == 4);
  CHECK(run("simulate --config " + write_config("coarse.json", R"({"grids": {"m": 4}})").string()) == 4);
  CHECK(run("--help") == 0);
}

TEST_CASE("each command writes its artifacts and one manifest") {
  const fs::path cfg = write_config("small.json", kSmall);
  const std::map<std::string, std::vector<std::string>> expected{
      {"simulate", {"energy.csv"}},
      {"spectrum", {"spectrum.csv", "A.txt", "G.txt", "summary.json"}},
      {"resolvent", {"sweep.csv", "summary.json"}},
      {"decay", {"energy.csv", "fit.json"}},
      {"observability", {"observability.json"}},
  };
  for (const auto& [command, files] : expected) {
    const fs::path out = kRoot / command;
    fs::remove_all(out);
    CAPTURE(command);
    REQUIRE(run(command + " --config " + cfg.string() + " --out " + out.string() + " --seed 5") == 0);
    const json m = manifest(out);
    CHECK(m["command"] == command);
    CHECK(m["seed"] == 5);
    CHECK(m["config"]["grids"]["n"] == 10);
    for (const auto& f : files) {
      CHECK(fs::exists(out / f));
      CHECK(std::find(m["files"].begin(), m["files"].end(), f) != m["files"].end());
    }
    CHECK(m["files"].size() == files.size());
  }
  CHECK(slurp(kRoot / "simulate" / "energy.csv").rfind("t,energy,dissipation\n", 0) == 0);
  CHECK(slurp(kRoot / "resolvent" / "sweep.csv").rfind("lambda,norm\n", 0) == 0);
  const json summary = json::parse(slurp(kRoot / "spectrum" / "summary.json"));
  CHECK(summary["abscissa"].get<double>() < 0.0);
  CHECK(json::parse(slurp(kRoot / "resolvent" / "summary.json")).contains("sup_norm"));
}

TEST_CASE("identical config and seed give bit-identical CSV") {
  const fs::path cfg = write_config("rough.json", R"({"grids": {"n": 10, "m": 8}, "scheme": {"dt": 0.05, "t_end": 4},
                                                     "initial": "rough"})");
  for (const char* dir : {"a", "b"})
    REQUIRE(run("simulate --config " + cfg.string() + " --seed 3 --out " + (kRoot / dir).string()) == 0);
  REQUIRE(run("simulate --config " + cfg.string() + " --seed 4 --out " + (kRoot / "c").string()) == 0);
  CHECK(slurp(kRoot / "a" / "energy.csv") == slurp(kRoot / "b" / "energy.csv"));
  CHECK(slurp(kRoot / "a" / "energy.csv") != slurp(kRoot / "c" / "energy.csv"));
  CHECK(manifest(kRoot / "a")["fingerprint"] == manifest(kRoot / "b")["fingerprint"]);
  CHECK(manifest(kRoot / "a")["fingerprint"] != manifest(kRoot / "simulate")["fingerprint"]);
}

TEST_CASE("compare writes the scan and a digest consistent with the exit code") {
  const fs::path cfg = write_config("scan.json", R"({"scheme": {"dt": 0.05, "t_end": 10},
      "scan": {"ratios": [1, 2], "meshes": [[10, 8], [20, 8]], "bcs": ["dirichlet"]}})");
  const fs::path out = kRoot / "compare";
  const int code = run("compare --config " + cfg.string() + " --out " + out.string() + " --threads 2");
  CHECK((code == 0 || code == 1));
  const json digest = json::parse(slurp(out / "digest.json"));
  CHECK(digest["passed"].get<bool>() == (code == 0));
  CHECK(digest["verdicts"].size() == 5);
  CHECK(slurp(out / "scan.csv").rfind("ratio,variant,bc,n,m,abscissa,m_hat,residual\n", 0) == 0);
  CHECK(manifest(out)["files"].size() == 2);
}
