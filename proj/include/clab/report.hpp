#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace clab {

inline constexpr const char* kVersion = "0.1.0";

struct Check {
    std::string id;
    std::string basis;  // identity, oracle, convergence, bound
    double measured = 0.0;
    double expected = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// |measured - expected| <= tol
Check check_close(std::string id, std::string basis, double measured, double expected, double tol);
// measured <= bound
Check check_below(std::string id, std::string basis, double measured, double bound);
// measured >= bound
Check check_above(std::string id, std::string basis, double measured, double bound);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    bool profile = false;  // a radial profile; one gnuplot data file each
};

struct Report {
    std::string suite;
    std::vector<Check> checks;
    std::vector<Table> tables;
    nlohmann::json config;
    nlohmann::json extra = nlohmann::json::object();

    bool passed() const;
    int failures() const;
    nlohmann::json to_json() const;
    // appends the checks and tables of r, prefixing ids with r.suite
    void merge(const Report& r);
};

nlohmann::json conventions();

// doubles printed with 17 significant digits, object keys sorted
std::string dump_json(const nlohmann::json& j, int indent = 2);

enum class ReportFormat { json, csv, gnuplot };
ReportFormat parse_format(const std::string& s);

// files written under dir; throws std::runtime_error naming the path on failure
std::vector<std::string> emit_report(const Report& r, ReportFormat format, const std::string& dir);

}  // namespace clab
