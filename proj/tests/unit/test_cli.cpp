#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("graphrqi_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int c = 0;
    return c;
  }

  Run run(const std::string& args) const {
    const fs::path err = dir / "stderr.txt", out = dir / "stdout.txt";
    const std::string cmd = std::string("\"") + GRAPHRQI_CLI_PATH + "\" " + args + " >\"" + out.string() +
                            "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    r.out = slurp(out);
    return r;
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit 2") {
  Sandbox sb;
  CHECK(sb.run("").code == 2);
  CHECK(sb.run("frobnicate").code == 2);
  CHECK(sb.run("graph --out x").code == 2);
  CHECK(sb.run("--help").code == 0);
}

TEST_CASE("synth then pipeline end to end") {
  Sandbox sb;
  const auto s = sb.run("synth --n 30 --seed 3 --out " + sb.p("scene"));
  REQUIRE(s.code == 0);
  CHECK(fs::exists(sb.p("scene/trajectories.csv")));
  CHECK(fs::exists(sb.p("scene/labels.csv")));

  // Existing non-empty directory needs --force.
  CHECK(sb.run("synth --n 30 --seed 3 --out " + sb.p("scene")).code == 3);
  CHECK(sb.run("synth --n 30 --seed 3 --force --out " + sb.p("scene")).code == 0);

  const std::string args = "pipeline --input " + sb.p("scene/trajectories.csv") + " --labels " +
                           sb.p("scene/labels.csv") + " --seed 5 --epochs 300 --out ";
  const auto a = sb.run(args + sb.p("run1"));
  REQUIRE_MESSAGE(a.code == 0, a.err);
  const auto metrics = nlohmann::json::parse(slurp(sb.p("run1/metrics.json")));
  REQUIRE(metrics.contains("weighted_accuracy"));
  const double wa = metrics["weighted_accuracy"].get<double>();
  CHECK(wa >= 0.0);
  CHECK(wa <= 1.0);
  CHECK(metrics.contains("superclass_accuracy"));
  CHECK(metrics["confusion_matrix"]["rows"].size() == 6);
  for (const char* f : {"features.csv", "predictions.csv", "ranking.csv", "model.txt"}) {
    CHECK(fs::exists(sb.p(std::string("run1/") + f)));
  }

  REQUIRE(sb.run(args + sb.p("run2")).code == 0);
  CHECK(slurp(sb.p("run1/predictions.csv")) == slurp(sb.p("run2/predictions.csv")));

  // The saved model reproduces the pipeline's predictions.
  REQUIRE(sb.run("classify --model " + sb.p("run1/model.txt") + " --features " + sb.p("run1/features.csv") +
                 " --out " + sb.p("pred.csv")).code == 0);
  CHECK(slurp(sb.p("pred.csv")) == slurp(sb.p("run1/predictions.csv")));
}

TEST_CASE("train with a missing labels file exits 3 naming the path") {
  Sandbox sb;
  std::ofstream(sb.p("f.csv")) << "agent_id,f1\n1,0.5\n2,-0.5\n";
  const auto r = sb.run("train --features " + sb.p("f.csv") + " --labels " + sb.p("nope.csv") + " --out " + sb.p("m.txt"));
  CHECK(r.code == 3);
  CHECK(r.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("graph and spectrum subcommands") {
  Sandbox sb;
  std::ofstream(sb.p("t.csv")) << "frame,agent_id,x,y\n0,1,0,0\n0,2,1,0\n0,3,2,0\n";
  REQUIRE(sb.run("graph --k 1 --input " + sb.p("t.csv") + " --out " + sb.p("lap.txt")).code == 0);
  CHECK(slurp(sb.p("lap.txt")).find("3") == 0);
  const auto r = sb.run("spectrum --k 1 --spec-k 3 --input " + sb.p("t.csv") + " --out " + sb.p("spec.txt"));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto spec = slurp(sb.p("spec.txt"));
  CHECK(spec.rfind("3 3\n", 0) == 0);

  // Refuses to overwrite without --force.
  CHECK(sb.run("graph --k 1 --input " + sb.p("t.csv") + " --out " + sb.p("lap.txt")).code == 3);
  // Malformed data is a data error.
  std::ofstream(sb.p("bad.csv")) << "frame,agent_id,x,y\n0,1,nan,0\n";
  CHECK(sb.run("graph --input " + sb.p("bad.csv") + " --out " + sb.p("lap2.txt")).code == 3);
  // Unknown spectrum end is a usage error.
  CHECK(sb.run("spectrum --k 1 --spec-k 3 --end bogus --input " + sb.p("t.csv") + " --out " + sb.p("s2.txt")).code == 2);
}

TEST_CASE("bench: report, k too large, injected fault") {
  Sandbox sb;
  const auto ok = sb.run("bench --sizes 10,14 --steps 2 --repeats 3 --out " + sb.p("b.csv"));
  REQUIRE_MESSAGE(ok.code == 0, ok.err);
  const auto csv = slurp(sb.p("b.csv"));
  CHECK(csv.find("\nmethod,d,k,median_s,mean_s,p95_s,med_iters,max_residual\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);

  CHECK(sb.run("bench --sizes 10,14 --spec-k 12 --out " + sb.p("b2.csv")).code == 2);
  const auto bad = sb.run("bench --sizes 10 --steps 2 --repeats 3 --inject-fault --dump-dir " + sb.dir.string() +
                          " --out " + sb.p("b3.csv"));
  CHECK(bad.code == 4);
  CHECK(bad.err.find("oracle") != std::string::npos);

  REQUIRE(sb.run("bench --sizes 10 --steps 2 --repeats 3 --json --out " + sb.p("b.json")).code == 0);
  const auto j = nlohmann::json::parse(slurp(sb.p("b.json")));
  CHECK(j["results"].size() == 3);
  CHECK(j["results"][0].contains("max_residual"));
}

TEST_CASE("config file and dump-config") {
  Sandbox sb;
  std::ofstream(sb.p("run.conf")) << "seed=9\nk=2\n";
  const auto r = sb.run("--config " + sb.p("run.conf") + " --dump-config --k 3 synth --n 12 --out " + sb.p("s"));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("seed=9") != std::string::npos);
  CHECK(r.out.find("k=3") != std::string::npos);  // flags win
}
