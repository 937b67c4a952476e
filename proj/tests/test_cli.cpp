#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shuffled/cli.hpp"
#include "shuffled/config.hpp"

namespace fs = std::filesystem;
using shuffled::Json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = shuffled::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh directory per test case, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("shuffled_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& file) const { return (path / file).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("cli fit recovers noiseless d = 1 weights with sm") {
  TempDir dir("fit_d1");
  const auto sim = run({"simulate", "--input", R"({"n": 200, "w0": [2.75], "noise": {"sigma": 0}})",
                        "--output", dir / "data.csv", "--seed", "3"});
  REQUIRE(sim.code == 0);
  const auto fit = run({"fit", "--input", dir / "data.csv", "--estimator", "sm"});
  REQUIRE(fit.code == 0);
  const Json j = Json::parse(fit.out);
  CHECK(std::abs(j["weights"][0].get<double>() - 2.75) < 1e-9);
  CHECK(j["estimator_resolved"] == "sm");
  CHECK(j["diagnostics"]["method"] == "closed_form");
}

TEST_CASE("cli fit with auto on five features and fifteen replications resolves to sm") {
  TempDir dir("fit_auto");
  REQUIRE(run({"simulate", "--input",
               R"({"n": 150, "d": 5, "replications": 15, "noise": {"snr_db": 20}})", "--output",
               dir / "data.csv"})
              .code == 0);
  CHECK(slurp(dir / "data.csv").rfind("x1,x2,x3,x4,x5,y,replication\n", 0) == 0);
  const auto fit = run({"fit", "--input", dir / "data.csv", "--replication-col", "replication",
                        "--starts", "2", "--max-iters", "200"});
  REQUIRE(fit.code == 0);
  const Json j = Json::parse(fit.out);
  CHECK(j["diagnostics"]["resolved"] == "sm");
  CHECK(j["diagnostics"]["requested"] == "auto");
  CHECK(j["diagnostics"]["replications"] == 15);
}

TEST_CASE("cli usage errors") {
  TempDir dir("errors");
  write(dir / "bad.csv", "x1,y\n1,2\n3,oops\n");
  const auto bad = run({"fit", "--input", dir / "bad.csv"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("row 3") != std::string::npos);
  CHECK(bad.err.find("column 2") != std::string::npos);

  write(dir / "ok.csv", "x1,y\n1,2\n2,4\n3,6\n");
  const auto unknown = run({"fit", "--input", dir / "ok.csv", "--estimator", "magic"});
  CHECK(unknown.code == 1);
  for (const char* name : {"ols", "sm", "ls", "p1", "p2", "emd", "ks", "auto"}) {
    CHECK(unknown.err.find(name) != std::string::npos);
  }

  CHECK(run({"fit"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"fit", "--input", dir / "missing.csv"}).code == 1);
  CHECK(run({"fit", "--input", dir / "ok.csv", "--starts", "0"}).code == 1);
  CHECK(run({"sweep"}).code == 1);
  CHECK(run({"control"}).code == 1);
}

TEST_CASE("cli numerical failures exit 2") {
  TempDir dir("numerical");
  write(dir / "zero.csv", "x1,y\n-1,2\n1,4\n");
  CHECK(run({"fit", "--input", dir / "zero.csv", "--estimator", "sm"}).code == 2);
}

TEST_CASE("cli help for every subcommand") {
  for (const char* cmd : {"fit", "simulate", "sweep", "bench", "control"}) {
    const auto h = run({cmd, "--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("--output") != std::string::npos);
  }
  const auto fit = run({"fit", "--help"});
  for (const char* flag : {"--input", "--label-col", "--replication-col", "--estimator",
                           "--loss-spec", "--fit-config", "--seed", "--normalize"}) {
    CHECK(fit.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("cli outputs are byte-identical across invocations") {
  TempDir dir("repeat");
  const std::string scenario = R"({"n": 60, "d": 3, "noise": {"nsr_db": -10}})";
  for (const char* tag : {"a", "b"}) {
    REQUIRE(run({"simulate", "--input", scenario, "--output", dir / (std::string(tag) + ".csv"),
                 "--truth", dir / (std::string(tag) + ".json"), "--seed", "11"})
                .code == 0);
  }
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  const std::vector<std::string> fit = {"fit", "--input", dir / "a.csv", "--estimator", "p1",
                                        "--starts", "3", "--normalize"};
  CHECK(run(fit).out == run(fit).out);

  const std::string study =
      R"({"study": "sweep", "n_values": [32], "d_values": [1, 2], "trials": 2,
          "estimators": [{"estimator": "sm", "fit": {"starts": 2}}, {"estimator": "p1", "fit": {"starts": 2}}]})";
  for (const char* tag : {"s1", "s2"}) {
    REQUIRE(run({"sweep", "--study", study, "--output", dir / tag, "--seed", "9"}).code == 0);
  }
  for (const char* file : {"results.csv", "fig4.csv", "manifest.json"}) {
    CHECK(slurp(dir / (std::string("s1/") + file)) == slurp(dir / (std::string("s2/") + file)));
  }
}

TEST_CASE("cli control on a simulated dataset") {
  TempDir dir("control");
  REQUIRE(run({"simulate", "--input", R"({"n": 100, "w0": [1.5, -1, 0.5], "noise": {"sigma": 0.1}})",
               "--output", dir / "data.csv"})
              .code == 0);
  const auto r = run({"control", "--input", dir / "data.csv", "--output", dir / "out"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "out/table4.csv"));
  CHECK(fs::exists(dir / "out/manifest.json"));
}
