#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

// Drives the installed binary end to end through std::system.
// ISOCHRONE_CLI_PATH is injected by the build.

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISOCHRONE_CLI_PATH) + " " + args + " > cli_stdout.txt 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("period-map writes six rows of T near 2 pi") {
  REQUIRE(run_cli("period-map --model plasma --d 4 --h 0.05:0.3:6 --out cli_pm.csv") == 0);
  std::istringstream csv(slurp("cli_pm.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "h,T,return_error");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    REQUIRE(c1 != std::string::npos);
    const double T = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(std::abs(T - 2.0 * std::numbers::pi) < 1e-6);
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("blowup on hopf reports t_star = 3 pi / 4") {
  REQUIRE(run_cli("blowup --model hopf --y0 1 --out cli_blow.json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_blow.json"));
  REQUIRE(j.at("result").at("blown").get<bool>());
  CHECK(j.at("result").at("t_star").get<double>() ==
        Catch::Approx(3.0 * std::numbers::pi / 4.0).margin(1e-6));
  CHECK(j.at("schema_version").get<std::string>() == "1");
}

TEST_CASE("sabatini on plasma d=5 reports tau = 4/9 and not_isochronous") {
  REQUIRE(run_cli("sabatini --model plasma --d 5 --z 1 --out cli_sab.csv") == 0);
  const std::string csv = slurp("cli_sab.csv");
  CHECK(csv.rfind("z,tau,verdict\n", 0) == 0);
  std::istringstream is(csv);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  const auto c1 = row.find(','), c2 = row.rfind(',');
  CHECK(std::stod(row.substr(c1 + 1, c2 - c1 - 1)) == Catch::Approx(4.0 / 9.0).margin(1e-10));
  CHECK(row.substr(c2 + 1) == "not_isochronous");
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("") == 1);                                  // missing subcommand
  CHECK(run_cli("period-map --no-such-flag") == 1);         // unknown option
  CHECK(run_cli("period-map --h nonsense --out x.csv") == 1);
}

TEST_CASE("invalid model parameters exit 3") {
  CHECK(run_cli("period-map --model plasma --d 0 --out cli_bad.csv") == 3);
  CHECK(run_cli("blowup --model nosuch") == 3);
}

TEST_CASE("repeated runs produce identical files") {
  REQUIRE(run_cli("period-map --model plasma --d 1 --h 0.05:0.2:4 --out cli_det1.json") == 0);
  REQUIRE(run_cli("period-map --model plasma --d 1 --h 0.05:0.2:4 --out cli_det2.json") == 0);
  CHECK(slurp("cli_det1.json") == slurp("cli_det2.json"));
}

TEST_CASE("JSON and CSV views of one run stay consistent") {
  REQUIRE(run_cli("period-map --model plasma --d 4 --h 0.05:0.3:6 "
                  "--out cli_rt.json --out cli_rt.csv") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_rt.json"));
  // regenerate the CSV from the JSON by hand: headers + 17-digit doubles
  std::ostringstream os;
  os << "h,T,return_error\n";
  for (const auto& e : j.at("result").at("entries")) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", e.at("h").get<double>(),
                  e.at("T").get<double>(), e.at("return_error").get<double>());
    os << buf;
  }
  CHECK(os.str() == slurp("cli_rt.csv"));
}

TEST_CASE("config file drives a run") {
  {
    std::ofstream cfgf("cli_run.cfg");
    cfgf << "[period-map]\n"
         << "model=plasma\n"
         << "d=4\n"
         << "h=0.05:0.3:6\n"
         << "out=cli_cfg.csv\n";
  }
  REQUIRE(run_cli("--config cli_run.cfg period-map") == 0);
  const std::string a = slurp("cli_cfg.csv");
  REQUIRE(run_cli("period-map --model plasma --d 4 --h 0.05:0.3:6 --out cli_flag.csv") == 0);
  CHECK(a == slurp("cli_flag.csv"));
}

TEST_CASE("svg output for the period map is self-contained") {
  REQUIRE(run_cli("period-map --model plasma --d 1 --h 0.05:0.2:4 --out cli_pm.svg") == 0);
  const std::string svg = slurp("cli_pm.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
}
