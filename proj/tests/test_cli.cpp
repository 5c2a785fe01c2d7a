#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tacnode/cli.hpp"
#include "tacnode/error.hpp"
#include "tacnode/io.hpp"

using namespace tacnode;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tacnode");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(TACNODE_TEST_DATA) + "/" + name; }

// value column of a single-record CSV
std::string csv_field(const std::string& csv, const std::string& key) {
  std::istringstream in(csv);
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  std::istringstream h(head), r(row);
  std::string k, v;
  while (std::getline(h, k, ',') && std::getline(r, v, ','))
    if (k == key) return v;
  return "";
}

}  // namespace

TEST_CASE("csv ingestion") {
  std::istringstream ok("# comment\nt,h\n0.2, 1.0\n\n0.5,0.5\n");
  CHECK(read_numeric_csv(ok, {"t", "h"}).size() == 2);
  std::istringstream head("x,h\n0.2,1\n");
  CHECK_THROWS_WITH_AS(read_numeric_csv(head, {"t", "h"}, "f.csv"), doctest::Contains("f.csv:1"), DomainError);
  std::istringstream bad("t,h\n0.2,1\n0.3\n");
  CHECK_THROWS_WITH_AS(read_numeric_csv(bad, {"t", "h"}, "f.csv"), doctest::Contains("f.csv:3"), DomainError);
  CHECK_THROWS_WITH_AS(read_slices_csv(data("bad_slices.csv")), doctest::Contains(":3:"), DomainError);
  const auto s = read_slices_csv(data("slices.csv"));
  REQUIRE(s.size() == 2);
  CHECK(s[0].t == 0.3);
  CHECK_THROWS_AS(read_slices_csv(data("missing.csv")), DomainError);
}

TEST_CASE("record formatting") {
  CHECK(format_number(1.0 - std::exp(-2.0), 12) == "0.864664716763");
  CHECK(format_number(0.0, 12) == "0");
  CHECK(format_number(std::nan(""), 12) == "nan");
  Record r;
  r.set("a", 1.5).set("b", std::string("x,y")).set("a", 2.0);
  CHECK(to_csv(r, 6) == "a,b\n2,\"x,y\"\n");
  const auto j = nlohmann::json::parse(to_json(r, 6));
  CHECK(j["a"] == 2.0);
}

TEST_CASE("gap command") {
  const Run a = run({"gap", "--N", "1", "--r", "1"});
  CHECK(a.code == 0);
  CHECK(csv_field(a.out, "value") == "0.864664716763");
  CHECK(csv_field(run({"gap", "--N", "1", "--r", "0"}).out, "value") == "0");

  const Run j = run({"gap", "--N", "2", "--r", "2", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  for (const char* k : {"value", "err_est", "N", "r", "schema_version", "version", "method"}) CHECK(doc.contains(k));
  CHECK(doc["schema_version"] == 1);

  CHECK(run({"stay-below", "--N", "2", "--R", "0.5"}).code == 0);
  CHECK(run({"gap", "--N", "2"}).code == kExitDomain);
  CHECK(run({"gap", "--N", "2", "--r", "1", "--R", "1"}).code == kExitDomain);
  CHECK(run({"gap", "--N", "0", "--r", "1"}).code == kExitDomain);
  CHECK(run({"gap", "--N", "1", "--r", "1", "--colour", "red"}).code == kExitDomain);
  const Run prof = run({"gap", "--N", "2", "--r", "2", "--profile", data("profile.csv")});
  CHECK(prof.code == 0);
  CHECK(std::stod(csv_field(prof.out, "value")) < 1.0);
}

TEST_CASE("multipoint command") {
  const Run a = run({"multipoint", "--N", "2", "--r", "2", "--slices", data("slices.csv")});
  CHECK(a.code == 0);
  const Run same = run({"gap", "--N", "2", "--r", "2", "--slices", data("slices.csv")});
  CHECK(std::fabs(std::stod(csv_field(a.out, "value")) - std::stod(csv_field(same.out, "value"))) < 1e-9);
  const Run bad = run({"multipoint", "--N", "2", "--r", "2", "--slices", data("bad_slices.csv")});
  CHECK(bad.code == kExitDomain);
  CHECK(bad.err.find(":3:") != std::string::npos);
  const Run high = run({"multipoint", "--N", "2", "--r", "1", "--slices", data("slices.csv")});
  CHECK(high.code == kExitDomain);
}

TEST_CASE("limit commands") {
  const Run k = run({"limit-kernel", "--R", "1", "--T1", "0", "--U1", "0", "--T2", "0", "--U2", "-1"});
  CHECK(k.code == 0);
  CHECK(csv_field(k.out, "value") == "0");
  CHECK(run({"limit-kernel", "--airy", "--T1", "0", "--U1", "0.5", "--T2", "0.2", "--U2", "-1"}).code == 0);
  CHECK(run({"limit-kernel", "--R", "1", "--T1", "0", "--U1", "1", "--T2", "0", "--U2", "-1"}).code == kExitDomain);
  CHECK(csv_field(run({"limit-gap", "--R", "1", "--T", "0", "--a", "0"}).out, "value") == "1");
  CHECK(run({"limit-gap", "--R", "1", "--slices", data("limit_slices.csv")}).code == 0);
  CHECK(run({"limit-functional", "--R", "1", "--T1", "-0.5", "--T2", "0.5", "--H", "2"}).code == kExitDomain);
  const Run d = run({"limit-derivative-check", "--R", "1", "--format", "json"});
  CHECK(d.code == 0);
  CHECK(nlohmann::json::parse(d.out)["pass"] == true);
}

TEST_CASE("sample command") {
  const std::vector<std::string> args{"sample", "--N", "2", "--r", "1.5", "--replicas", "2000", "--seed", "7", "--grid", "32"};
  const Run a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(csv_field(a.out, "seed") == "7");
  auto t = args;
  t.insert(t.end(), {"--threads", "2"});
  CHECK(run(t).out == a.out);
  CHECK(run({"sample", "--N", "1", "--r", "1", "--grid", "0"}).code == kExitDomain);
  CHECK(run({"sample", "--N", "3", "--r", "0.05", "--replicas", "500", "--grid", "8", "--slices", data("slices.csv")}).code == kExitDomain);

  const std::string csv = "tacnode_test_export.csv", py = "tacnode_test_plot.py";
  const Run e = run({"sample", "--N", "2", "--r", "1.5", "--replicas", "3", "--grid", "4", "--export", csv, "--plot-script", py});
  CHECK(e.code == 0);
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  CHECK(line == "replica,t,topvalue,accepted,weight");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 12);
  CHECK(std::ifstream(py).good());
  std::remove(csv.c_str());
  std::remove(py.c_str());
}

TEST_CASE("verify command") {
  const Run v = run({"verify", "--suite", "specfun"});
  CHECK(v.code == 0);
  CHECK(v.out.rfind("suite,check,measured,tolerance,status", 0) == 0);
  CHECK(v.out.find("FAIL") == std::string::npos);
  CHECK(run({"verify", "--suite", "nope"}).code == kExitDomain);
  CHECK(run({"--version"}).code == 0);
}
