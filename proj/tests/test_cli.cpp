#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "lbf/model_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData{LBF_DATA_DIR};
const fs::path kGolden{LBF_GOLDEN_DIR};

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout and stderr together.
Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + LBF_CLI_PATH + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string model_arg() { return "--model \"" + (kData / "models" / "gold_stocks.json").string() + "\""; }
std::string evidence_arg() {
  return "--evidence \"" + (kData / "evidence" / "jewelry_demand.json").string() + "\"";
}

}  // namespace

TEST_CASE("table output matches the golden files byte for byte") {
  const auto base = run("evaluate " + model_arg());
  CHECK(base.status == 0);
  CHECK(base.out == lbf::io::read_file(kGolden / "gold_stocks.table.txt"));

  const auto updated = run("evaluate " + model_arg() + " " + evidence_arg());
  CHECK(updated.status == 0);
  CHECK(updated.out == lbf::io::read_file(kGolden / "gold_stocks_jewelry.table.txt"));

  CHECK(run("evaluate " + model_arg()).out == base.out);
  CHECK(run("evaluate " + model_arg() + " " + evidence_arg()).out == updated.out);
}

TEST_CASE("json output carries full precision") {
  const auto r = run("evaluate " + model_arg() + " --format json --query G,M --riskless-rate 0.01");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["variables"] == nlohmann::json::array({"P", "S1", "S2", "S3"}));
  CHECK(j["mean"][0].get<double>() == doctest::Approx(0.03425).epsilon(1e-12));
  CHECK(j["riskless_rate"].get<double>() == 0.01);
  CHECK(j["query"]["variables"] == nlohmann::json::array({"G", "M"}));
  CHECK(j["optimal_weights"]["weights"].size() == 3);
}

TEST_CASE("query section appears in the table") {
  const auto r = run("evaluate " + model_arg() + " --query G");
  CHECK(r.status == 0);
  CHECK(r.out.find("Moment matrix M(G)") != std::string::npos);
}

TEST_CASE("failures exit nonzero with a diagnostic") {
  const auto missing = run("evaluate --model /no/such/model.json");
  CHECK(missing.status != 0);
  CHECK(missing.out.find("error") != std::string::npos);

  const auto bad_query = run("evaluate " + model_arg() + " --query Q");
  CHECK(bad_query.status != 0);
  CHECK(bad_query.out.find("Q") != std::string::npos);

  CHECK(run("evaluate " + model_arg() + " --format xml").status != 0);
  CHECK(run("evaluate").status != 0);
  CHECK(run("").status != 0);
}
