#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hypofbi::app {

struct SuiteResult {
    std::string name;
    bool passed = true;
    int checks = 0;
    std::string detail;  // first failure, or a short summary
};

/// Property suites for expr, structure, fbi, corpus, classify, inversion and
/// propagate. Deterministic for a given seed.
std::vector<SuiteResult> run_suites(std::uint64_t seed, int threads = 0);

} // namespace hypofbi::app
