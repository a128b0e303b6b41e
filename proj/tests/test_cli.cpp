#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "ensconv/cli.hpp"
#include "ensconv/io.hpp"

using namespace ensconv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  fs::path saved = fs::current_path();
  TempDir() {
    path = fs::temp_directory_path() / ("ensconv_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
    fs::current_path(path);
  }
  ~TempDir() {
    fs::current_path(saved);
    fs::remove_all(path);
  }
};

nlohmann::json report(const Run& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_CASE("extrapolate") {
  auto r = run({"extrapolate", "--sigma0", "0.02", "--t0", "200", "--t", "800"});
  REQUIRE(r.code == 0);
  CHECK(report(r)["sigma"].get<double>() == doctest::Approx(0.01).epsilon(1e-15));
  r = run({"extrapolate", "--sigma0", "0.02", "--t0", "200", "--eps", "0.03"});
  CHECK(report(r)["min_trees"].get<int>() == 800);
  CHECK(run({"extrapolate", "--sigma0", "0.02", "--t0", "200"}).code == kExitUsage);
  CHECK(run({"extrapolate", "--sigma0", "0.02", "--t0", "200", "--eps", "0"}).code == kExitUsage);
  CHECK(run({"extrapolate", "--sigma0", "x", "--t0", "200", "--t", "3"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
}

TEST_CASE("estimate") {
  TempDir dir;
  write_file("same.pred", "3 4 2\n0 1 1 0\n0 1 1 0\n0 1 1 0\n");
  write_file("truth", "0 1 0 0\n");
  write_file("mask", "1111\n0000\n1010\n");
  auto r = run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--seed", "4"});
  REQUIRE(r.code == 0);
  auto j = report(r);
  CHECK(j["sigma_hat"].get<double>() == 0.0);
  CHECK(j["err_hat"].get<double>() == 0.25);
  CHECK(j["replicates"].size() == 50);
  CHECK(j["manifest"]["inputs"].size() == 2);

  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--seed", "4"}).out == r.out);
  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--B", "1"}).code ==
        kExitUsage);
  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--mode", "oob"}).code ==
        kExitUsage);
  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--mask", "mask"}).code ==
        kExitUsage);
  auto oob = run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--mode", "oob",
                  "--mask", "mask", "--targets", "12,48", "--eps", "0.1", "--eta", "0.5"});
  REQUIRE(oob.code == 0);
  j = report(oob);
  CHECK(j["extrapolation"]["targets"].size() == 2);
  CHECK(j["tolerance"]["converged"].is_boolean());
  CHECK(j["relative"]["converged"].is_boolean());

  write_file("bad.pred", "2 2 2\n0 1\n0 5\n");
  r = run({"estimate", "--predictions", "bad.pred", "--truth", "truth"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("bad.pred:3:3") != std::string::npos);
  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "truth", "--class", "1",
             "--threads", "3"}).code == 0);
  write_file("zero", "0 0 0 0\n");
  CHECK(run({"estimate", "--predictions", "same.pred", "--truth", "zero", "--class", "1"}).code ==
        kExitData);
}

TEST_CASE("train, estimate and replay") {
  TempDir dir;
  REQUIRE(run({"generate", "continuous", "--n-per-class", "40", "--dims", "12", "--seed", "2",
               "--out", "d.csv"}).code == 0);
  auto r = run({"train", "--data", "d.csv", "--trees", "1", "--out-dir", "one"});
  REQUIRE(r.code == 0);
  CHECK(load_prediction_array("one/oob.pred").trees() == 1);
  CHECK_FALSE(fs::exists("one/holdout.pred"));

  REQUIRE(run({"train", "--data", "d.csv", "--trees", "15", "--seed", "7", "--holdout-frac", "0.25",
               "--out-dir", "a"}).code == 0);
  REQUIRE(run({"train", "--data", "d.csv", "--trees", "15", "--seed", "7", "--holdout-frac", "0.25",
               "--out-dir", "b", "--threads", "2"}).code == 0);
  for (const char* f : {"oob.pred", "oob.mask", "oob.truth", "holdout.pred", "holdout.truth", "ensemble.json"})
    CHECK(read_file(fs::path("a") / f) == read_file(fs::path("b") / f));
  CHECK(load_prediction_array("a/holdout.pred").points() == 20);

  REQUIRE(run({"estimate", "--predictions", "a/oob.pred", "--truth", "a/oob.truth", "--mode", "oob",
               "--mask", "a/oob.mask", "--out", "rep.json"}).code == 0);
  const std::string before = read_file("rep.json");
  r = run({"replay", "--manifest", "rep.json"});
  REQUIRE(r.code == 0);
  CHECK(report(r)["reproduced"].get<bool>());
  CHECK(read_file("rep.json") == before);

  r = run({"replay", "--manifest", "a/manifest.json"});
  REQUIRE(r.code == 0);
  CHECK(report(r)["reproduced"].get<bool>());

  write_file("a/oob.truth", read_file("a/oob.truth") + "1\n");
  CHECK(run({"replay", "--manifest", "rep.json"}).code == kExitData);

  write_file("bad.csv", "x,label\n1,0\n2,one\n");
  CHECK(run({"train", "--data", "bad.csv", "--out-dir", "x"}).code == kExitData);
}

TEST_CASE("simulate") {
  TempDir dir;
  write_file("u.json", R"({"k":2,"pi":[0.5,0.5],"mu":[{"family":"beta","params":[1,1]},{"family":"beta","params":[1,1]}]})");
  write_file("m.json", R"({"k":2,"pi":[0.3,0.7],"mu":[{"family":"beta","params":[2,5]},{"family":"beta","params":[5,2]}]})");
  auto r = run({"simulate", "clt", "--model", "u.json", "--t", "31", "--runs", "20"});
  REQUIRE(r.code == 0);
  CHECK(report(r)["err_infinity"].get<double>() == doctest::Approx(0.5).epsilon(1e-14));

  r = run({"simulate", "sigma", "--model", "m.json", "--t", "20", "--runs", "2", "--identical-runs",
           "--out", "s.csv"});
  REQUIRE(r.code == 0);
  std::istringstream csv(read_file("s.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) CHECK(line.substr(line.find(',') + 1) == "0");

  const auto a = run({"simulate", "paths", "--model", "m.json", "--t", "10", "--runs", "3", "--seed", "5"});
  const auto b = run({"simulate", "paths", "--model", "m.json", "--t", "10", "--runs", "3", "--seed", "5"});
  CHECK(a.out == b.out);

  r = run({"simulate", "bootstrap-check", "--model", "m.json", "--t", "51", "--runs", "20", "--B", "10"});
  REQUIRE(r.code == 0);
  CHECK(report(r)["mean_sigma_hat"].get<double>() > 0);

  write_file("bad.json", R"({"k":2,"pi":[0.9,0.7],"mu":[{"family":"beta","params":[2,5]},{"family":"beta","params":[5,2]}]})");
  r = run({"simulate", "paths", "--model", "bad.json", "--t", "10"});
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("sum to 1") != std::string::npos);
  CHECK(run({"simulate", "wobble", "--model", "m.json", "--t", "10"}).code == kExitUsage);
}

TEST_CASE("version flag from the binary") {
  const std::string cmd = std::string(ENSCONV_BINARY) + " --version > ensconv_version.txt";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string text = read_file("ensconv_version.txt");
  CHECK(text.rfind("ensconv 0.1.0 (", 0) == 0);
  fs::remove("ensconv_version.txt");
}
