#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(HSV_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string write_params(const std::string& name, const json& j) {
  const fs::path p = fs::temp_directory_path() / ("hsv_cli_" + name + ".json");
  std::ofstream(p) << j.dump();
  return p.string();
}

json frozen_point() {
  return {{"q", "1/3"}, {"a", "2"}, {"c", "-5/2"}, {"x", {"1/2", "2/3", "-3/7", "5/4"}}};
}

}  // namespace

TEST(Cli, ZMethodsAgree) {
  const auto params = write_params("z", frozen_point());
  const auto pf = run("--params " + params + " z --method pfaffian");
  const auto en = run("--params " + params + " z --method enum");
  ASSERT_EQ(pf.code, 0);
  ASSERT_EQ(en.code, 0);
  const auto jp = json::parse(pf.out), je = json::parse(en.out);
  EXPECT_EQ(jp["value"], je["value"]);
  EXPECT_EQ(jp["value"]["num"], "695023");
  EXPECT_EQ(jp["value"]["den"], "75125544");
  EXPECT_EQ(jp["backend"], "rational");
}

TEST(Cli, RationalRoundTrip) {
  auto j = frozen_point();
  j["x"] = {"1/2"};
  const auto r = run("--params " + write_params("rt", j) + " z");
  ASSERT_EQ(r.code, 0);
  const auto v = json::parse(r.out)["value"];
  EXPECT_EQ(v["num"], "1");
  EXPECT_EQ(v["den"], "6");
}

TEST(Cli, LocalRelationsSuitePasses) {
  const auto r = run("verify local-relations --trials 20 --seed 7");
  EXPECT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["failed"], 0);
}

TEST(Cli, AsepFormulaForEmptyTarget) {
  const auto r = run("asep prob --nu '' --method formula --t 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 0.606531, 1e-6);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("z --method nonsense").code, 2);
  EXPECT_EQ(run("asep prob --nu 1 --q -0.5").code, 2);
  EXPECT_EQ(run("--params /nonexistent/params.json z").code, 2);
  // Contour integrals need the complex backend.
  const auto params = write_params("contour", frozen_point());
  EXPECT_EQ(run("--params " + params + " --backend rational g --nu 1 --method contour").code, 2);
  // h has a pole at x = a.
  auto j = frozen_point();
  j["x"] = {"2"};
  const auto r = run("--params " + write_params("pole", j) + " z --method enum");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, Deterministic) {
  const std::string args = "--seed 11 asep prob --nu 1 --method mc --samples 2000";
  const auto a = run(args), b = run(args), c = run("--threads 1 " + args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST(Cli, EnvironmentBackendOverridesFlag) {
  const auto params = write_params("env", frozen_point());
  const auto r = run("--params " + params + " --backend rational z --m 2", "HSV_BACKEND=complex");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["backend"], "complex");
  EXPECT_EQ(j["precision_bits"], 53);
  EXPECT_NEAR(j["value"]["re"].get<double>(), 77.0 / 912.0, 1e-14);
}

TEST(Cli, LimitCsvHeader) {
  const auto r = run("asep limit --nu 1 --L 16,32");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "L,value,reference,abs_error");
}
