// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks against the installed binary. SQUIDSIM_CLI is injected
// by the build so the tests run the exact artifact users get.
#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <squidsim/csv.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SQUIDSIM_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 512> buf{};
    while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path fresh_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("squidsim_cli_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("predict-d prints the quoted rate", "[cli]") {
    const RunResult r = run_cli("predict-d --v0-phi-c 14.149 --delta 0.00032 --omega-c 0.05");
    CHECK(r.code == 0);
    CHECK(r.out == "0.00164\n");
}

TEST_CASE("missing config file is a usage error", "[cli]") {
    const RunResult r = run_cli("ensemble --config /nonexistent/missing.json");
    CHECK(r.code == 1);
}

TEST_CASE("unknown subcommand is a usage error", "[cli]") {
    const RunResult r = run_cli("frobnicate");
    CHECK(r.code == 1);
}

TEST_CASE("invalid config value is a config error", "[cli]") {
    const fs::path dir = fresh_dir("badcfg");
    const fs::path cfg = dir / "bad.json";
    {
        std::ofstream out(cfg);
        out << R"({"hamiltonian": {"mu": -1.0}})";
    }
    const RunResult r = run_cli("spectrum --config " + cfg.string());
    CHECK(r.code == 1);
    fs::remove_all(dir);
}

TEST_CASE("spectrum writes a parseable table", "[cli]") {
    const fs::path dir = fresh_dir("spectrum");
    const RunResult r = run_cli("spectrum --levels 6 --output-dir " + dir.string());
    CHECK(r.code == 0);
    const squidsim::Table t = squidsim::read_csv_file((dir / "spectrum.csv").string());
    CHECK(t.has("level_index"));
    CHECK(t.has("energy"));
    CHECK(t.rows() == 6);
    const auto& e = t.col("energy");
    CHECK(e[1] - e[0] < e[2] - e[1]);  // doublet splitting is the small gap
    fs::remove_all(dir);
}

TEST_CASE("bloch subcommand emits the damped trajectory", "[cli]") {
    const fs::path dir = fresh_dir("bloch");
    const RunResult r = run_cli("bloch --vx 0.02 --d 0.0016 --total-time 2000 --points 100 "
                                "--output-dir " + dir.string());
    CHECK(r.code == 0);
    const squidsim::Table t = squidsim::read_csv_file((dir / "bloch.csv").string());
    CHECK(t.rows() == 101);
    CHECK(t.col("p_z").front() == 1.0);
    fs::remove_all(dir);
}

TEST_CASE("fit subcommand reads a synthetic trace", "[cli]") {
    const fs::path dir = fresh_dir("fit");
    const fs::path csv = dir / "synthetic.csv";
    {
        squidsim::Table t;
        std::vector<double> time, rho;
        for (int i = 0; i <= 100; ++i) {
            time.push_back(20.0 * i);
            rho.push_back(0.5 * (1.0 + std::exp(-0.0013 * 20.0 * i)));
        }
        t.add("time", time);
        t.add("rho11_energy", rho);
        squidsim::write_csv_file(csv.string(), t);
    }
    const RunResult r =
        run_cli("fit --input " + csv.string() + " --output-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "fit.json"));
    CHECK(r.out.find("d_hat_vs_pred") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("noise subcommand reports trace statistics", "[cli]") {
    const fs::path dir = fresh_dir("noise");
    const RunResult r =
        run_cli("noise --steps 100000 --seed 3 --output-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "noise.csv"));
    CHECK(r.out.find("correlation integral") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("environment override places the outputs", "[cli]") {
    const fs::path dir = fresh_dir("envdir");
    const std::string cmd = "SQUIDSIM_OUTPUT_DIR=" + dir.string() + " " +
                            std::string(SQUIDSIM_CLI) +
                            " bloch --vx 0.02 --d 0 --total-time 100 --points 10"
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "bloch.csv"));
    fs::remove_all(dir);
}
