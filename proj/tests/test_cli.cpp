#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path workdir()
{
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("slqg_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args)
{
    const std::string cmd = std::string(SLQG_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<json> json_lines(const std::string& p)
{
    std::vector<json> v;
    std::istringstream is(slurp(p));
    std::string line;
    while (std::getline(is, line))
        if (!line.empty())
            v.push_back(json::parse(line));
    return v;
}

std::vector<std::vector<std::string>> csv(const std::string& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(slurp(p));
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            r.push_back(cell);
        rows.push_back(r);
    }
    return rows;
}

} // namespace

TEST_CASE("theta-star table")
{
    REQUIRE(run("theta-star --q-min 0.01 --q-max 1.9 --steps 1 --out " + path("ts1.csv")) == 0);
    const auto rows = csv(path("ts1.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"Q", "theta_star", "mu_Q"});
    CHECK(std::abs(std::stod(rows[1][1]) - 1.9647) < 5e-4);

    REQUIRE(run("theta-star --steps 50 --out " + path("ts_a.csv")) == 0);
    REQUIRE(run("theta-star --steps 50 --out " + path("ts_b.csv")) == 0);
    CHECK(slurp(path("ts_a.csv")) == slurp(path("ts_b.csv")));
    CHECK(csv(path("ts_a.csv")).size() == 51);

    const auto m = json::parse(slurp(path("ts_a.csv") + ".manifest.json"));
    CHECK(m.contains("command_line"));
    CHECK(m.contains("versions"));
    CHECK(m["config"]["steps"] == 50);
}

TEST_CASE("usage errors exit with 2")
{
    CHECK(run("theta-star --steps 0") == 2);
    CHECK(run("theta-star --q-min 1.5 --q-max 1.0") == 2);
    CHECK(run("theta-star --q-min 0 --q-max 1.0") == 2);
    CHECK(run("sample bogus") == 2);
    CHECK(run("verify --suite nope") == 2);
    CHECK(run("estimate-f --method guess") == 2);
    CHECK(run("estimate-f --q 2.5") == 2);
    CHECK(run("--no-such-flag") == 2);
    CHECK(run("sample tree --size 2000 --nu binary") == 2);
}

TEST_CASE("estimate-f with closed rings is identically one")
{
    REQUIRE(run("estimate-f --ring zero-inner --method monte-carlo --samples 200 --p-max 6 --out " +
                path("f_zero.csv")) == 0);
    const auto rows = csv(path("f_zero.csv"));
    REQUIRE(rows.size() == 8);
    CHECK(rows[0] == std::vector<std::string>{"p", "F", "stderr", "h"});
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][1]) == 1.0);
}

TEST_CASE("estimate-f is reproducible across runs and thread counts")
{
    const std::string base = "estimate-f --method fixed-point --samples 2000 --sweeps 4 --p-max 6 --seed 42 ";
    REQUIRE(run(base + "--threads 1 --out " + path("f_a.csv")) == 0);
    REQUIRE(run(base + "--threads 1 --out " + path("f_b.csv")) == 0);
    REQUIRE(run(base + "--threads 3 --out " + path("f_c.csv")) == 0);
    CHECK(slurp(path("f_a.csv")) == slurp(path("f_b.csv")));
    CHECK(slurp(path("f_a.csv")) == slurp(path("f_c.csv")));
    const auto m = json::parse(slurp(path("f_a.csv") + ".manifest.json"));
    CHECK(m["master_seed"] == 42);
    CHECK(m["config"]["method"] == "fixed-point");

    REQUIRE(run("estimate-f --method fixed-point --samples 500 --sweeps 2 --p-max 20 --out " + path("f_20.csv")) ==
            0);
    const auto a = json::parse(slurp(path("f_20.csv") + ".alpha.json"));
    CHECK(a.contains("alpha_hat"));
    CHECK(a.contains("subadditive_bracket"));
}

TEST_CASE("infeasible Monte Carlo regime is an advisory")
{
    CHECK(run("estimate-f --method monte-carlo --samples 100 --p-max 30 --perimeter-cap 1 --out " +
              path("f_inf.csv")) == 3);
    CHECK(slurp(path("stderr.txt")).find("advisory") != std::string::npos);
}

TEST_CASE("config file with flag overrides")
{
    {
        std::ofstream c(path("run.conf"));
        c << "# sample run\nq-min=0.5\nq-max=1.5\nsteps=3\n";
    }
    REQUIRE(run("theta-star --config " + path("run.conf") + " --steps 5 --out " + path("ts_conf.csv")) == 0);
    const auto rows = csv(path("ts_conf.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(std::stod(rows[1][0]) == 0.5);
    CHECK(std::stod(rows[5][0]) == 1.5);
    CHECK(run("theta-star --config " + path("missing.conf")) == 2);
}

TEST_CASE("sample supermap conditioned on finiteness")
{
    REQUIRE(run("sample supermap --method tilt --p 4 --samples 100 --sweeps 4 --out " + path("sm.jsonl")) == 0);
    const auto recs = json_lines(path("sm.jsonl"));
    REQUIRE(recs.size() == 100);
    for (const auto& r : recs) {
        CHECK(r["finite"] == true);
        CHECK(r["p"] == 4);
        std::uint64_t t = 4;
        for (const auto& n : r["nodes"])
            t += n[1].get<std::uint64_t>() + n[2].get<std::uint64_t>();
        CHECK(r["tperm"] == t);
    }
    REQUIRE(run("sample supermap --p 2 --samples 20 --out " + path("sm_u.jsonl")) == 0);
    CHECK(json_lines(path("sm_u.jsonl")).size() == 20);
}

TEST_CASE("sample cascade at Q = 2 has no tilt")
{
    REQUIRE(run("sample cascade --q 2 --generations 3 --children-cap 20 --pool 2000 --samples 3 --out " +
                path("cas.jsonl")) == 0);
    const auto recs = json_lines(path("cas.jsonl"));
    REQUIRE(recs.size() > 3);
    for (const auto& r : recs) {
        CHECK(r["Z"] == r["ZQ"]);
        CHECK(r.contains("tree"));
        CHECK(r.contains("u"));
    }
}

TEST_CASE("sample trees and trunks")
{
    REQUIRE(run("sample tree --size 2001 --samples 4 --out " + path("tree.jsonl")) == 0);
    for (const auto& r : json_lines(path("tree.jsonl"))) {
        CHECK(r["size"] == 2001);
        CHECK(r["newick"].get<std::string>().back() == ';');
    }
    REQUIRE(run("sample trunk --height 10 --nu geometric --samples 2 --out " + path("trunk.jsonl")) == 0);
    for (const auto& r : json_lines(path("trunk.jsonl")))
        CHECK(r["spine"].size() == 10);
}

TEST_CASE("verify reports")
{
    REQUIRE(run("verify --suite analytic --out " + path("v_an.json")) == 0);
    const auto rep = json::parse(slurp(path("v_an.json")));
    CHECK(rep["passed"] == true);
    CHECK(!rep["checks"].empty());
    for (const auto& c : rep["checks"])
        CHECK(c["status"] == "pass");

    REQUIRE(run("verify --suite biggins-mc --budget 0.001 --out " + path("v_low.json")) == 0);
    const auto low = json::parse(slurp(path("v_low.json")));
    bool flagged = false;
    for (const auto& c : low["checks"]) {
        CHECK(c["status"] != "fail");
        flagged = flagged || c["status"] == "insufficient_power";
    }
    CHECK(flagged);
}
