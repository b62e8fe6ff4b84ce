// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "pnlab/io.hpp"

using namespace pnlab;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

const fs::path& work() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "pnlab_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct Run {
    int code;
    std::string output;
};

Run pnlab_cli(const std::string& args) {
    const auto log = work() / "last.log";
    const std::string cmd = std::string("\"") + PNLAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(log)};
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto p = work() / name;
    io::write_atomic(p, body);
    return p;
}

const std::string kDisk = R"({
  "domain.kind": "disk", "domain.a": 1.0,
  "problem.p": 2, "grid.h": 0.03125,
  "solver.tolerance": 1e-8, "solver.nested_levels": 1
})";

const std::string kEllipse = R"({
  "domain.kind": "ellipse", "domain.a": 1.5, "domain.b": 1.0,
  "problem.p": 3, "grid.h": 0.03125,
  "solver.tolerance": 1e-8, "solver.nested_levels": 1
})";

}  // namespace

TEST_CASE("usage errors exit with 1", "[cli]") {
    CHECK(pnlab_cli("").code == 1);
    CHECK(pnlab_cli("frobnicate").code == 1);
    CHECK(pnlab_cli("solve").code == 1);
    CHECK(pnlab_cli("solve --config /nonexistent.json").code == 1);
    CHECK(pnlab_cli("reproduce hopf --threads 0").code == 1);
    const auto r = pnlab_cli("reproduce no-such-experiment");
    CHECK(r.code == 1);
    CHECK_THAT(r.output, ContainsSubstring("radial-convergence"));
    CHECK_THAT(r.output, ContainsSubstring("boundary-identity"));
}

TEST_CASE("solve and diagnose a disk", "[cli]") {
    const auto cfg = write_config("disk.json", kDisk);
    const auto out = work() / "disk";
    auto r = pnlab_cli("solve --config " + cfg.string() + " --out " + out.string() + " --threads 2");
    REQUIRE(r.code == 0);
    for (const char* f : {"solution.json", "solution.bin", "solve_report.json", "u.svg"}) CHECK(fs::exists(out / f));
    const auto rep = nlohmann::json::parse(io::read_file(out / "solve_report.json"));
    CHECK(rep.at("convergence").at("converged") == true);

    r = pnlab_cli("diagnose " + (out / "solution.json").string() + " --out " + (out / "diag").string());
    CHECK(r.code == 0);
    const auto d = nlohmann::json::parse(io::read_file(out / "diag" / "diagnostics.json"));
    CHECK(d.at("results").at("symmetry").at("score").at("spread").get<double>() < 0.02);
    CHECK(fs::exists(out / "diag" / "neumann_trace.csv"));
    CHECK(fs::exists(out / "diag" / "residual.svg"));
    // Thresholds are echoed.
    CHECK_THAT(r.output, ContainsSubstring("0.02"));

    r = pnlab_cli("diagnose " + (out / "solution.json").string() + " --select viscosity,pucci,moving-plane,p-function --out " +
                  (out / "diag2").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(out / "diag2" / "p_function.svg"));
    CHECK(fs::exists(out / "diag2" / "moving_plane.csv"));
    CHECK(pnlab_cli("diagnose " + (out / "solution.json").string() + " --select bogus").code == 1);
}

TEST_CASE("non-convergence exits with 2", "[cli]") {
    const auto cfg = write_config("short.json", R"({"grid.h": 0.0625, "solver.max_iterations": 1})");
    const auto out = work() / "short";
    const auto r = pnlab_cli("solve --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 2);
    const auto rep = nlohmann::json::parse(io::read_file(out / "solve_report.json"));
    CHECK(rep.at("convergence").at("converged") == false);
    CHECK(fs::exists(out / "solution.json"));
}

TEST_CASE("strict config parsing", "[cli]") {
    const auto cfg = write_config("typo.json", "{\n  \"grid.h\": 0.0625,\n  \"solver.epsilonn\": 3\n}\n");
    const auto r = pnlab_cli("solve --config " + cfg.string() + " --out " + (work() / "typo").string());
    CHECK(r.code == 1);
    CHECK_THAT(r.output, ContainsSubstring("typo.json:3:"));
}

TEST_CASE("ellipse fails the ball threshold", "[cli]") {
    const auto cfg = write_config("ellipse.json", kEllipse);
    const auto out = work() / "ellipse";
    REQUIRE(pnlab_cli("solve --config " + cfg.string() + " --out " + out.string()).code == 0);
    auto r = pnlab_cli("diagnose " + (out / "solution.json").string() + " --assert-ball --out " + (out / "d").string());
    CHECK(r.code == 3);
    CHECK_THAT(r.output, ContainsSubstring("FAIL"));
    r = pnlab_cli("diagnose " + (out / "solution.json").string() + " --no-assert-ball --out " + (out / "d2").string());
    CHECK(r.code == 0);
}

TEST_CASE("corrupt checkpoints exit with 1", "[cli]") {
    const auto cfg = write_config("disk2.json", kDisk);
    const auto out = work() / "corrupt";
    REQUIRE(pnlab_cli("solve --config " + cfg.string() + " --out " + out.string()).code == 0);
    const auto bin = io::read_file(out / "solution.bin");
    io::write_atomic(out / "solution.bin", bin.substr(0, bin.size() - 100));
    CHECK(pnlab_cli("diagnose " + (out / "solution.json").string()).code == 1);
    auto bad = bin;
    bad[0] = 'X';
    io::write_atomic(out / "solution.bin", bad);
    CHECK(pnlab_cli("diagnose " + (out / "solution.json").string()).code == 1);
    CHECK(pnlab_cli("diagnose " + (work() / "missing.json").string()).code == 1);
}

TEST_CASE("fast experiments reproduce", "[cli]") {
    const auto out = work() / "rep";
    for (const char* name : {"envelope-table", "pucci-sandwich", "annulus-infinity"}) {
        const auto r = pnlab_cli(std::string("reproduce ") + name + " --out " + out.string() + " --seed 7");
        CHECK(r.code == 0);
        CHECK_THAT(r.output, ContainsSubstring("PASS"));
        CHECK(fs::exists(out / (std::string("reproduce_") + name + ".json")));
    }
    const auto r = pnlab_cli("envelope-table --count 50 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(out / "envelope_table.csv"));
}

TEST_CASE("sample configs parse", "[cli]") {
    for (const char* f : {"disk_p2.json", "ellipse_p3.json"}) {
        const auto path = fs::path(PNLAB_SOURCE_DIR) / "tools" / "configs" / f;
        REQUIRE(fs::exists(path));
        const auto max1 = work() / (std::string("m_") + f);
        auto j = nlohmann::json::parse(io::read_file(path));
        j["solver.max_iterations"] = 1;
        j["grid.h"] = 0.0625;
        io::write_atomic(max1, j.dump(2));
        CHECK(pnlab_cli("solve --config " + max1.string() + " --out " + (work() / f).string()).code == 2);
    }
}
