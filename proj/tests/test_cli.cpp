#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "cli_runner.hpp"

using nlohmann::json;
using testing::read_file;
using testing::run_cli;
using testing::write_file;

namespace {

std::string temp_path(const std::string& name)
{
    return "/tmp/aoiijam_cli_" + std::to_string(::getpid()) + "_" + name;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

std::string header_row(const std::string& csv)
{
    for (const auto& line : lines(csv)) {
        if (line.rfind("#", 0) != 0) {
            return line;
        }
    }
    return {};
}

}  // namespace

TEST_CASE("exit codes")
{
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("bogus").exit_code == 2);
    CHECK(run_cli("threshold-curve --params 0,0.5,0.2").exit_code == 2);
    CHECK(run_cli("threshold-curve --params 0.5,0.5").exit_code == 2);
    CHECK(run_cli("sim --policy sometimes --horizon 100").exit_code == 2);
    CHECK(run_cli("sim --policy whittle:1 --horizon 100").exit_code == 2);
    CHECK(run_cli("sim --horizon 0").exit_code == 2);
    CHECK(run_cli("multi-sim --n-list 3 --horizon 100 --seeds 1").exit_code == 2);
    CHECK(run_cli("whittle-table --params 1,0.5,0.2 --iterative").exit_code == 2);
    CHECK(run_cli("verify --fault nothing").exit_code == 2);
    CHECK(run_cli("verify --format xml").exit_code == 2);
}

TEST_CASE("verify exits 1 on a failed check")
{
    const std::string cfg = temp_path("verify.json");
    write_file(cfg, R"({"grid": [[0.9, 0.9, 0.1], [0.4, 0.3, 0.25]], "whittle": [[0.9, 0.9, 0.1]], "lambda_points": 4})");
    const auto ok = run_cli("verify --config " + cfg);
    CHECK(ok.exit_code == 0);
    const json report = json::parse(ok.out);
    CHECK(report.at("passed") == true);

    const auto broken = run_cli("verify --config " + cfg + " --fault avg_eaoii");
    CHECK(broken.exit_code == 1);
    CHECK(json::parse(broken.out).at("passed") == false);

    const auto csv = run_cli("verify --config " + cfg + " --format csv");
    CHECK(header_row(csv.out) == "check,passed,cases,tolerance,worst_error,witness");
    std::remove(cfg.c_str());
}

TEST_CASE("config files")
{
    const std::string cfg = temp_path("curve.json");
    write_file(cfg, R"({"params": [0.9, 0.9, 0.1], "lambda_min": 0, "lambda_max": 5, "lambda_step": 0.5, "full": true})");
    const auto from_file = run_cli("threshold-curve --config " + cfg);
    REQUIRE(from_file.exit_code == 0);
    const auto rows = lines(from_file.out);
    CHECK(rows[0] == "# command: threshold-curve");
    CHECK(rows[1].rfind("# version: ", 0) == 0);
    CHECK(rows[2].rfind("# config: ", 0) == 0);
    CHECK(header_row(from_file.out) == "lambda,threshold_n");
    CHECK(rows.back() == "5,INF");
    CHECK(std::count(from_file.out.begin(), from_file.out.end(), '\n') == 4 + 1 + 11);

    // the flag wins over the file
    const auto overridden = run_cli("threshold-curve --config " + cfg + " --lambda-max 1");
    REQUIRE(overridden.exit_code == 0);
    CHECK(lines(overridden.out).back() == "1,0");

    write_file(cfg, R"({"params": [0.9, 0.9, 0.1], "lamda_max": 5})");
    CHECK(run_cli("threshold-curve --config " + cfg).exit_code == 2);
    write_file(cfg, "[1, 2]");
    CHECK(run_cli("threshold-curve --config " + cfg).exit_code == 2);
    write_file(cfg, "{ not json");
    CHECK(run_cli("threshold-curve --config " + cfg).exit_code == 2);
    CHECK(run_cli("threshold-curve --config /nonexistent/x.json").exit_code == 2);
    std::remove(cfg.c_str());
}

TEST_CASE("json output")
{
    const auto table = run_cli("whittle-table --params 0.9,0.9,0.1 --params 0.2,0.2,0.4 --k-max 10 --format json");
    REQUIRE(table.exit_code == 0);
    const json doc = json::parse(table.out);
    CHECK(doc.at("command") == "whittle-table");
    CHECK(doc.at("columns") == json({"subsystem_id", "k", "s_k", "W"}));
    REQUIRE(doc.at("rows").size() == 22);
    CHECK(doc["rows"][0]["W"].get<double>() == doctest::Approx(1.645271368215795).epsilon(1e-12));
    CHECK(doc["rows"][11]["W"].get<double>() == doctest::Approx(0.03877171215880894).epsilon(1e-12));

    const auto iterative = run_cli("whittle-table --params 0.9,0.9,0.1 --k-max 10 --iterative --format json");
    REQUIRE(iterative.exit_code == 0);
    const json it = json::parse(iterative.out);
    for (std::size_t k = 0; k <= 10; ++k) {
        CHECK(it["rows"][k]["W"].get<double>() ==
              doctest::Approx(doc["rows"][k]["W"].get<double>()).epsilon(1e-8));
    }
}

TEST_CASE("sim output and trace")
{
    const std::string trace = temp_path("trace.csv");
    const std::string out = temp_path("sim.csv");
    const auto run = run_cli("sim --policy threshold:1 --horizon 500 --seed 4 --trace " + trace + " --out " + out);
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.empty());
    CHECK(header_row(read_file(out)) ==
          "scope,avg_reward,reward_se,avg_eaoii,eaoii_se,avg_true_aoii,true_aoii_se,avg_aat,aat_se");
    const auto rows = lines(read_file(trace));
    REQUIRE(rows.size() == 501);
    CHECK(rows[0] == "slot,subsystem_id,age_index,true_aoii,jammed,delivered");
    CHECK(rows[1].rfind("0,0,0,0,", 0) == 0);

    const auto fleet = run_cli("sim --params 0.9,0.9,0.1 --params 0.5,0.5,0.2 --policy whittle:1 --horizon 400");
    REQUIRE(fleet.exit_code == 0);
    CHECK(lines(fleet.out).size() == 4 + 1 + 3);
    std::remove(trace.c_str());
    std::remove(out.c_str());
}

TEST_CASE("deterministic output")
{
    for (const char* args : {"sim --policy random:0.3 --horizon 20000 --seed 9",
                             "sweep-lambda --lambda-max 2 --horizon 5000",
                             "multi-sim --n-list 4,8 --horizon 2000 --seeds 1-3"}) {
        INFO(args);
        const auto a = run_cli(args);
        const auto b = run_cli(args);
        REQUIRE(a.exit_code == 0);
        CHECK(a.out == b.out);
    }
    CHECK(run_cli("sim --policy random:0.3 --horizon 20000 --seed 9").out !=
          run_cli("sim --policy random:0.3 --horizon 20000 --seed 10").out);
}
