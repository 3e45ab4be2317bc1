#pragma once

#include <functional>
#include <string>
#include <vector>

namespace slowfast {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Run the full verification suite (the `check` command and the acceptance
// test binary both dispatch here). on_done, when set, is invoked after each
// criterion so progress can be streamed.
std::vector<CriterionResult> run_acceptance(
    const std::function<void(const CriterionResult&)>& on_done = nullptr);

}  // namespace slowfast
