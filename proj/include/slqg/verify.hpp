#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace slqg {

enum class CheckStatus { pass, fail, insufficient_power };
const char* to_string(CheckStatus s);

struct CheckResult {
    int criterion = 0;
    std::string name;
    CheckStatus status = CheckStatus::fail;
    double statistic = 0;
    double tolerance = 0;
    std::string detail;

    nlohmann::json to_json() const;
};

struct VerifyOptions {
    // scales every sample size; below 1 the statistical checks still run but
    // report insufficient power instead of pass / fail
    double budget = 1.0;
    std::uint64_t seed = 20240611;
    unsigned threads = 1;
};

const std::vector<std::string>& suite_names(); // includes "all"

// throws UsageError for an unknown suite
std::vector<CheckResult> run_suite(const std::string& name, const VerifyOptions& opt);

bool any_failed(const std::vector<CheckResult>& r);
nlohmann::json verify_report(const std::string& suite, const VerifyOptions& opt, const std::vector<CheckResult>& r);

} // namespace slqg
