#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Run {
  int exit;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hermhecke_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string(HERMHECKE_CLI) + " " + args + " 2>" + err.string();
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err)};
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("field and class group commands") {
  auto r = run("--json field --m 11 --classify 2,3,5,7");
  REQUIRE(r.exit == 0);
  auto j = Json::parse(r.out);
  CHECK(j["d_K"] == -11);
  CHECK(j["seed"] == 1);
  auto c = run("--json classgroup --m 5");
  REQUIRE(c.exit == 0);
  auto cj = Json::parse(c.out);
  CHECK(cj["h"] == 2);
  CHECK(cj["N"] == 2);
  CHECK(cj["reps"][1]["u"] == Json::parse(R"({"num":[1,1],"den":2})"));
  auto p = run("--json find-prime --m 5 --modulus 4");
  REQUIRE(p.exit == 0);
  CHECK(Json::parse(p.out)["p"] == 13);
  CHECK(run("find-prime --m 1 --bound 2").exit == 1);
}

TEST_CASE("coset enumeration is deterministic") {
  const auto a = path("a.json"), b = path("b.json");
  REQUIRE(run("--out " + a + " hecke cosets --m 1 --n 2 --key 1,1,3,3").exit == 0);
  REQUIRE(run("--threads 3 --out " + b + " hecke cosets --m 1 --n 2 --key 1,1,3,3").exit == 0);
  const std::string x = slurp(a);
  CHECK(x == slurp(b));
  CHECK(Json::parse(x)["reps"].size() == 112);
  CHECK(!fs::exists(a + ".tmp"));
  auto sum = run("hecke cosets --m 1 --n 2 --key 1,1,3,3");
  CHECK(sum.out.find("112") != std::string::npos);
}

TEST_CASE("products, phi, actions and certificates chain through files") {
  const auto t = path("t.json"), e4 = path("e4.json"), img = path("img.json");
  REQUIRE(run("--out " + t + " hecke cosets --m 1 --n 1 --key 1,3").exit == 0);
  auto prod = run("--json hecke product --lhs " + t + " --rhs " + t);
  REQUIRE(prod.exit == 0);
  auto pj = Json::parse(prod.out);
  CHECK(pj["terms"].size() == 2);
  const auto t2 = path("t2.json");
  REQUIRE(run("--out " + t2 + " hecke cosets --m 1 --n 2 --key 1,1,3,3").exit == 0);
  auto phi = run("--json hecke phi --k 6 --in " + t2);
  REQUIRE(phi.exit == 0);
  CHECK(Json::parse(phi.out)["scalar"] == "28/27");

  REQUIRE(run("--out " + e4 + " forms eisenstein --m 1 --k 4 --terms 30").exit == 0);
  REQUIRE(run("--out " + img + " forms act --form " + e4 + " --coset " + t + " --k 4").exit == 0);
  auto ij = Json::parse(slurp(img));
  CHECK(ij["trunc"] == 9);
  auto eig = run("--json eigen --form " + e4 + " --p 3");
  REQUIRE(eig.exit == 0);
  CHECK(Json::parse(eig.out)["lambda"] == "28/27");
  auto cusp = run("--json forms cusp-test --form " + e4);
  REQUIRE(cusp.exit == 0);
  CHECK(Json::parse(cusp.out)["direct"] == false);

  const auto e11 = path("e11.json");
  REQUIRE(run("--out " + e11 + " forms eisenstein --m 11 --k 4 --terms 30").exit == 0);
  auto cert = run("--json certify --form " + e11 + " --m 11 --k 4 --p 2");
  REQUIRE(cert.exit == 0);
  CHECK(Json::parse(cert.out)["conclusion"] == true);
  auto bad = run("--json certify --m 11 --k 4 --p 3");
  REQUIRE(bad.exit == 0);
  CHECK(Json::parse(bad.out)["conclusion"] == false);
}

TEST_CASE("error mapping") {
  auto scope = run("hecke cosets --m 5 --n 2 --key 1,1,6,6");
  CHECK(scope.exit == 2);
  CHECK(Json::parse(scope.err)["error"] == "scope_error");
  auto usage = run("hecke cosets --m 1 --n 2 --nope");
  CHECK(usage.exit == 1);
  CHECK(Json::parse(usage.err)["error"] == "usage_error");
  auto cap = run("--cap 10 hecke cosets --m 1 --n 2 --key 1,1,3,3");
  CHECK(cap.exit == 1);
  CHECK(Json::parse(cap.err)["error"] == "resource_cap");
  const auto junk = path("junk.json");
  std::ofstream(junk) << "{\"m\": ";
  auto mal = run("forms phi --form " + junk);
  CHECK(mal.exit == 1);
  CHECK(Json::parse(mal.err)["error"] == "malformed_input");
  CHECK(run("field --m 4").exit == 1);
}

TEST_CASE("config file and seed override") {
  const auto cfg = path("run.toml");
  std::ofstream(cfg) << "seed = 77\n";
  auto a = run("--config " + cfg + " --json field --m 1");
  REQUIRE(a.exit == 0);
  CHECK(Json::parse(a.out)["seed"] == 77);
  auto b = run("--config " + cfg + " --seed 5 --json field --m 1");
  REQUIRE(b.exit == 0);
  CHECK(Json::parse(b.out)["seed"] == 5);
}
