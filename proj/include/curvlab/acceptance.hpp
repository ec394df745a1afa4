#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace curvlab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool numeric_pass = false;
    bool runtime_pass = false;
    bool pass = false;            // numeric and runtime
    double measured = 0.0;        // headline value, worst case over the sub-checks
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;           // per sub-check values
    double seconds = 0.0;         // timed portion
    double time_limit = 0.0;
    std::string error;            // set when a check threw
};

/// Runs the verification suite. `only` selects criteria by id (empty: all).
/// Progress lines go to `log` when it is non-null.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {}, std::ostream* log = nullptr);

/// One line per criterion: `[PASS] 3 name: measured=... target=... tol=... (1.2 s / 30 s)`.
std::string format_result_line(const CriterionResult& r);

}  // namespace curvlab
