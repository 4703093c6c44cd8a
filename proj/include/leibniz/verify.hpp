#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace leibniz {

struct VerifyResult {
    std::string name;
    bool pass = false;
    double max_err = 0.0;
    std::string detail;
};

// Executes every module invariant suite. Deterministic for a given seed.
std::vector<VerifyResult> run_verification(std::uint64_t seed);

std::string verification_report_json(const std::vector<VerifyResult>& results);

}  // namespace leibniz
