#include "curvlab/acceptance.hpp"

#include <iostream>

int main() {
    const auto results = curvlab::run_acceptance({}, &std::cerr);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << curvlab::format_result_line(r) << "\n";
        if (!r.pass) ++failed;
    }
    std::cout << (failed ? "FAILED " : "PASSED ") << results.size() - failed << "/" << results.size() << "\n";
    return failed ? 1 : 0;
}
