// Runs every verification suite at full budget and prints one line per check
// followed by one PASS / FAIL line per acceptance criterion.
//
//   slqg_acceptance [budget]
//
// SLQG_THREADS overrides the worker count (results do not depend on it).

#include "slqg/verify.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char** argv)
{
    slqg::VerifyOptions opt;
    if (argc > 1)
        opt.budget = std::atof(argv[1]);
    opt.threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* t = std::getenv("SLQG_THREADS"))
        opt.threads = static_cast<unsigned>(std::max(1, std::atoi(t)));

    const std::vector<std::string> suites = {"analytic",    "biggins-mc",   "stable-laplace", "f-estimators",
                                             "conditioned", "walk-scaling", "crt",            "combinatorial"};

    std::map<int, std::vector<slqg::CheckResult>> by_crit;
    bool crashed = false;
    for (const auto& s : suites) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<slqg::CheckResult> r;
        try {
            r = slqg::run_suite(s, opt);
        } catch (const std::exception& e) {
            std::printf("suite %s threw: %s\n", s.c_str(), e.what());
            crashed = true;
            continue;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("suite %s (%.1f s)\n", s.c_str(), secs);
        for (const auto& c : r) {
            std::printf("  [%d] %-18s %s stat=%.6g tol=%.6g %s\n", c.criterion, slqg::to_string(c.status),
                        c.name.c_str(), c.statistic, c.tolerance, c.detail.c_str());
            by_crit[c.criterion].push_back(c);
        }
        std::fflush(stdout);
    }

    bool ok = !crashed;
    std::printf("\n");
    for (int k = 1; k <= 8; ++k) {
        const auto it = by_crit.find(k);
        if (it == by_crit.end()) {
            std::printf("CRITERION %d: FAIL (no checks ran)\n", k);
            ok = false;
            continue;
        }
        int fail = 0, weak = 0;
        for (const auto& c : it->second) {
            fail += c.status == slqg::CheckStatus::fail;
            weak += c.status == slqg::CheckStatus::insufficient_power;
        }
        const bool pass = fail == 0 && weak == 0;
        ok = ok && pass;
        std::printf("CRITERION %d: %s (%zu checks, %d failed, %d underpowered)\n", k, pass ? "PASS" : "FAIL",
                    it->second.size(), fail, weak);
    }
    return ok ? 0 : 1;
}
