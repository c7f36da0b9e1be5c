#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrepsim {

struct CheckResult {
    std::string group;
    std::string name;
    bool passed = false;
    double observed = 0.0;   // worst deviation (or z-score for Monte Carlo checks)
    double threshold = 0.0;
    std::string detail;
};

struct ValidationOptions {
    // Replaces every numeric tolerance; Monte Carlo checks keep their 3-sigma
    // criterion.
    std::optional<double> tolerance;
    // Groups to run; empty runs all of them.
    std::vector<std::string> only;
    std::uint64_t seed = 20250101;
    std::uint64_t monte_carlo_trials = 100'000;
};

// closed-form, permutation, commutation, channels, composition, ghz,
// expectation
const std::vector<std::string>& validation_groups();

// Throws InvalidParameter for unknown group names.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

}  // namespace qrepsim
