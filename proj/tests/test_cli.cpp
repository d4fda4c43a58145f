#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef SHAPANOVA_CLI_PATH
#define SHAPANOVA_CLI_PATH "shapanova"
#endif

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const std::string err_path =
      std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
      "/shapanova_cli_err.txt";
  const std::string command =
      std::string(SHAPANOVA_CLI_PATH) + " " + args + " 2>" + err_path;
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer;
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    result.out.append(buffer.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream err_file(err_path);
  std::stringstream err_stream;
  err_stream << err_file.rdbuf();
  result.err = err_stream.str();
  return result;
}

}  // namespace

TEST_CASE("cli explain") {
  SUBCASE("exact method on linear3") {
    const CliResult r =
        run_cli("explain --model linear3 --dist single:0,0,0 --target 1,1,1 "
                "--method exact");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["phi"][0].get<double>() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(j["phi"][1].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(j["phi"][2].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(j["method"] == "exact-formula");
  }
  SUBCASE("regression route matches exact to 1e-10") {
    const CliResult exact =
        run_cli("explain --model linear-interaction3 --dist single:0,0,0 "
                "--target 1,1,1 --method exact");
    const CliResult reg =
        run_cli("explain --model linear-interaction3 --dist single:0,0,0 "
                "--target 1,1,1 --method regression");
    REQUIRE(exact.exit_code == 0);
    REQUIRE(reg.exit_code == 0);
    const auto je = nlohmann::json::parse(exact.out);
    const auto jr = nlohmann::json::parse(reg.out);
    for (int i = 0; i < 3; ++i)
      CHECK(std::fabs(je["phi"][i].get<double>() - jr["phi"][i].get<double>()) <=
            1e-10);
  }
  SUBCASE("sampled regression below 2p warns but satisfies the constraint") {
    const CliResult r =
        run_cli("explain --model linear3 --dist single:0,0,0 --target 1,1,1 "
                "--method regression-sampled --budget 4");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    double sum = 0;
    for (const auto& v : j["phi"]) sum += v.get<double>();
    CHECK(sum == doctest::Approx(j["y_target"].get<double>() -
                                 j["y_null"].get<double>())
                     .epsilon(1e-10));
    REQUIRE(j.contains("notes"));
  }
  SUBCASE("deterministic given the seed") {
    const std::string args =
        "explain --model nonlinear3 --dist normal01 --target 1,1,1 "
        "--method exact --n 2000 --seed 5";
    CHECK(run_cli(args).out == run_cli(args).out);
  }
  SUBCASE("external model through the child-process protocol") {
    const std::string dir = std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp";
    const std::string script = dir + "/shapanova_affine_model.sh";
    {
      std::ofstream out(script);
      out << "#!/bin/sh\nawk -F, '{print 2*$1 + $2}'\n";
    }
    REQUIRE(std::system(("chmod +x " + script).c_str()) == 0);
    const CliResult r = run_cli("explain --model ext:" + script +
                                " --p 2 --dist single:0,0 --target 1,3 "
                                "--method exact");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["phi"][0].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(j["phi"][1].get<double>() == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("cli error contract") {
  SUBCASE("unknown model: exit 2 and a structured error") {
    const CliResult r = run_cli(
        "explain --model no-such --dist single:0,0,0 --target 1,1,1");
    CHECK(r.exit_code == 2);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"]["kind"] == "input");
  }
  SUBCASE("degenerate sensitivity target: exit 3") {
    const CliResult r = run_cli(
        "sensitivity --model \"ext:awk '{print 1}'\" --p 3 --dist uniform01 "
        "--n 256");
    CHECK(r.exit_code == 3);
  }
  SUBCASE("failing external model: exit 4") {
    const CliResult r = run_cli(
        "explain --model ext:false --p 2 --dist single:0,0 --target 1,1");
    CHECK(r.exit_code == 4);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"]["kind"] == "evaluation");
  }
}

TEST_CASE("cli alias prints the published pattern") {
  const CliResult r = run_cli("alias --p 6 --budget 12 --lead 1");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (int c = 0; c < 5; ++c)
    CHECK(j["alias"][0][c].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["alias"][1][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::fabs(j["alias"][1][1].get<double>()) <= 1e-12);
}

TEST_CASE("cli search recovers the published ranking") {
  const CliResult r = run_cli(
      "search --model additive-pair4 --dist uniform01 --epsilon 0.01 --n 500");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["selected"].size() == 4);
  const auto& sel = j["selected"];
  const bool head_ok =
      (sel[0] == nlohmann::json::array({2}) && sel[1] == nlohmann::json::array({3})) ||
      (sel[0] == nlohmann::json::array({3}) && sel[1] == nlohmann::json::array({2}));
  CHECK(head_ok);
  CHECK(sel[2] == nlohmann::json::array({1}));
  CHECK(sel[3] == nlohmann::json::array({2, 3}));
  CHECK(j["converged"].get<bool>());
}

TEST_CASE("cli table3 emits sixteen rows with deviations") {
  const CliResult r = run_cli("table3 --n 4000 --seed 1 --format csv");
  REQUIRE(r.exit_code == 0);
  int lines = 0;
  for (char ch : r.out)
    if (ch == '\n') ++lines;
  CHECK(lines == 17);  // header + 16 cells
  CHECK(r.out.find("max_deviation") != std::string::npos);
}

TEST_CASE("cli output file and config merging") {
  const std::string dir = std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp";
  const std::string out_path = dir + "/shapanova_out.json";
  const std::string config_path = dir + "/shapanova_config.json";
  {
    std::ofstream config(config_path);
    config << R"({"model": "linear3", "dist": "single:0,0,0",
                  "target": [1, 1, 1], "seed": 3})";
  }
  const CliResult r = run_cli("explain --config " + config_path +
                              " --method exact --output " + out_path);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(out_path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j["phi"][0].get<double>() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(j["seed"].get<int>() == 3);

  // a flag on the command line beats the config value
  const CliResult r2 =
      run_cli("explain --config " + config_path + " --method exact --seed 9");
  const auto j2 = nlohmann::json::parse(r2.out);
  CHECK(j2["seed"].get<int>() == 9);
}

TEST_CASE("cli empirical distribution from a CSV file") {
  const std::string dir = std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp";
  const std::string csv_path = dir + "/shapanova_baselines.csv";
  {
    std::ofstream out(csv_path);
    out << "0,0,0\n0,0,0\n";  // two identical baselines: exact result
  }
  const CliResult r = run_cli("explain --model linear3 --dist empirical:" +
                              csv_path + " --target 1,1,1 --method exact --n 64");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["phi"][0].get<double>() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(j["phi"][1].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("cli anova emits every term with a reconstruction-consistent sum") {
  const CliResult r = run_cli(
      "anova --model linear-interaction3 --dist single:0,0,0 --target 1,1,1 "
      "--skip-variances");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["terms"].size() == 8);
  double total = 0.0;
  for (const auto& term : j["terms"]) total += term["value"].get<double>();
  CHECK(total == doctest::Approx(j["f_at_target"].get<double>()).epsilon(1e-12));
}

TEST_CASE("cli search trace writes the per-order score table") {
  const std::string dir = std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp";
  const std::string trace = dir + "/shapanova_trace.csv";
  const CliResult r = run_cli(
      "search --model additive-pair4 --dist uniform01 --epsilon 0.01 --n 400 "
      "--trace " + trace);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(trace);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "subset,psi");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows >= 4);  // all singletons plus at least one pair
}

TEST_CASE("cli sensitivity bundles indices, dimensions, and screening") {
  const CliResult r = run_cli(
      "sensitivity --model additive-pair4 --dist uniform01 --n 8192 --seed 2 "
      "--epsilon 0.05");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["indices"]["first_order"].size() == 3);
  CHECK(j["effective_dimensions"]["from_bounds"].get<bool>());
  CHECK(j["screening"].contains("ratios"));
}
