#pragma once

#include <string>
#include <vector>

namespace contactflow {

enum class CheckLevel { Quick, Full };

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string details;
};

// Self-contained invariant suite over all modules; Quick uses reduced
// grids and budgets.
std::vector<CheckResult> run_checks(CheckLevel level);

}  // namespace contactflow
