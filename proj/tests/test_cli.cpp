#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("spinlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path put(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

Run cli(const std::string& args) {
  fs::path o = scratch() / "stdout.txt", e = scratch() / "stderr.txt";
  std::string cmd = std::string("\"") + SPINLAB_CLI_PATH + "\" " + args + " >\"" + o.string() +
                    "\" 2>\"" + e.string() + "\"";
  int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(o), slurp(e)};
}

std::string params_file() {
  return put("p.json", R"({"beta": "1/3", "gamma": "2", "lambda": "3/2"})").string();
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("nonsense").code == 2);
  CHECK(cli("exact").code == 2);  // --graph is required
  CHECK(cli("certify --preset nope").code == 2);
  CHECK(cli("verify-all --suite huge").code == 2);
  CHECK(cli("exact --graph gen:cycle:4 --params " + put("neg.json", R"({"beta":"-1","gamma":"1","lambda":"1"})").string())
            .code == 2);
}

TEST_CASE("cli: malformed graph file names the line") {
  auto g = put("bad.txt", "3 2\n0 1\n1 x\n");
  Run r = cli("exact --graph " + g.string() + " --params " + params_file());
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("cli: exact report on a generated graph") {
  Run r = cli("exact --graph gen:path:2 --params " + params_file());
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["kind"] == "exact");
  // Z = 1*gamma + 2*lambda + beta*lambda^2 = 2 + 3 + 3/4
  CHECK(j["Z"] == "23/4");
}

TEST_CASE("cli: every subcommand honours --dry-run") {
  const std::string p = params_file();
  const char* cmds[] = {"exact --graph gen:cycle:4 --params ",
                        "divcheck --root 0 --graph gen:cycle:4 --params ",
                        "decay --root 0 --graph gen:cycle:4 --params ",
                        "mix --graph gen:cycle:4 --params "};
  for (const char* c : cmds) {
    Run r = cli(std::string(c) + p + " --dry-run");
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["dry_run"] == true);
  }
  CHECK(cli("saw --graph gen:cycle:4 --root 0 --dry-run").code == 0);
  CHECK(cli("certify --preset hardcore --delta 0.5 --Delta 3 --dry-run").code == 0);
  CHECK(cli("verify-all --suite small --dry-run").code == 0);
  // dry runs still validate
  CHECK(cli("exact --graph gen:cycle:1 --params " + p + " --dry-run").code == 2);
}

TEST_CASE("cli: hardcore preset certificate") {
  auto out = scratch() / "cert.json";
  Run r = cli("certify --preset hardcore --delta 0.5 --Delta 3 --out " + out.string());
  REQUIRE(r.code == 0);
  json j = json::parse(slurp(out));
  CHECK(j["passed"] == true);
  CHECK(j["alpha"].get<double>() >= 1.0 / 16);
  CHECK(j["c"].get<double>() <= 4);
  CHECK(j["beta"].get<double>() == 0);

  Run md = cli("render --format md --report " + out.string());
  REQUIRE(md.code == 0);
  CHECK(md.out.rfind("| regime | potential | mode | alpha |", 0) == 0);
  CHECK(md.out.find("| H.1 |") != std::string::npos);
}

TEST_CASE("cli: certification failures exit 1 with a JSON record") {
  Run r = cli("certify --beta 4 --gamma 4 --lambda 1 --Delta 3");
  CHECK(r.code == 1);
  json j = json::parse(r.out);
  CHECK(j["status"] == "fail");
  CHECK(j["error_kind"] == "OutsideUniqueness");
}

TEST_CASE("cli: verify-all small suite") {
  Run r = cli("verify-all --suite small --seed 7");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["status"] == "ok");
  CHECK(j["failures"].empty());
  CHECK(j["checks"].get<int>() > 100);
}

TEST_CASE("cli: render tables") {
  auto empty = put("empty.json", R"({"kind": "decay", "levels": []})");
  Run r = cli("render --report " + empty.string());
  CHECK(r.code == 0);
  CHECK(r.out == "k,s_k,s_k_weighted,bound_k\n");

  auto d = scratch() / "decay.json";
  REQUIRE(cli("decay --graph gen:cycle:5 --root 0 --levels 6 --params " + params_file() + " --out " +
              d.string())
              .code == 0);
  Run csv = cli("render --report " + d.string());
  REQUIRE(csv.code == 0);
  std::istringstream in(csv.out);
  std::string line;
  std::getline(in, line);
  int prev = 0;
  while (std::getline(in, line)) {
    int k = std::stoi(line.substr(0, line.find(',')));
    CHECK(k == prev + 1);
    prev = k;
  }
  CHECK(prev == 6);

  CHECK(cli("render --report " + put("x.json", R"({"kind": "mystery"})").string()).code == 2);
  CHECK(cli("render --report " + put("y.json", "[1, 2]").string()).code == 2);
}

TEST_CASE("cli: identical config and seed give identical reports") {
  const std::string p = params_file();
  std::string args = "mix --simulate --graph gen:path:3 --steps 10 --reps 2000 --seed 11 --params " + p;
  Run a = cli(args), b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  Run c = cli("verify-all --suite small --seed 3"), d = cli("verify-all --suite small --seed 3");
  CHECK(c.out == d.out);

  auto cfg = put("cfg.json", R"({"command": "certify", "args": {"preset": "hardcore", "delta": 0.5, "Delta": 3}})");
  Run e = cli("run --config " + cfg.string());
  Run f = cli("certify --preset hardcore --delta 0.5 --Delta 3");
  REQUIRE(e.code == 0);
  CHECK(e.out == f.out);
  CHECK(cli("run --config " + put("bad_cfg.json", R"({"args": {}})").string()).code == 2);
}

TEST_CASE("cli: edge list and JSON graph inputs agree") {
  auto el = put("c4.txt", "4 4\n0 1\n1 2\n2 3\n3 0\n");
  auto gj = put("c4.json", R"({"n": 4, "edges": [[0,1],[1,2],[2,3],[3,0]]})");
  const std::string p = params_file();
  Run a = cli("exact --graph " + el.string() + " --params " + p);
  Run b = cli("exact --graph " + gj.string() + " --params " + p);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}
