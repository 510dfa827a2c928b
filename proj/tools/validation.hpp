#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lorentz::validation {

enum class Suite { small_xi, tail, support, invariants, all };

Suite parse_suite(const std::string& name);
std::string to_string(Suite suite);

/// Criterion numbers run by a suite, in order.
std::vector<int> suite_criteria(Suite suite);

struct Options {
    bool fast = true;  ///< desk-scale sampling; false selects the large runs
    std::uint64_t seed = 1;
    std::function<void(const std::string&)> log;  ///< progress lines, may be empty
};

struct Result {
    int criterion = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the listed criteria, sharing the expensive curves between them.
/// `on_result` is called as each criterion finishes.
std::vector<Result> run(const std::vector<int>& criteria, const Options& options,
                        const std::function<void(const Result&)>& on_result = {});

/// One report line: "PASS criterion N (title): detail [12.3 s]".
std::string format(const Result& result);

}  // namespace lorentz::validation
