#pragma once

#include "clab/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clab {

struct SuiteConfig {
    double grid = 1.0 / 64;   // Klein chart spacing; convergence checks also use grid / 2
    double margin = 0.3;      // Klein chart radius is 1 - margin
    double eps_tip = 1e-3;    // innermost cone radius
    double tol_alg = 1e-12;
    double tol_global = 0.01;
    std::uint64_t seed = 1;
    std::string out = "clab_out";

    // throws std::invalid_argument
    void validate() const;
    nlohmann::json to_json() const;
};

const std::vector<std::string>& suite_names();

// one of suite_names() or "all"
Report run_suite(const std::string& name, const SuiteConfig& cfg);
// union of the named suites, run concurrently and merged in the given order; empty list gives an empty report
Report run_suites(const std::vector<std::string>& names, const SuiteConfig& cfg);

}  // namespace clab
