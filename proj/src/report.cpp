#include "clab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace clab {

Check check_close(std::string id, std::string basis, double measured, double expected, double tol) {
    bool ok = std::isfinite(measured) && std::abs(measured - expected) <= tol;
    return {std::move(id), std::move(basis), measured, expected, tol, ok};
}

Check check_below(std::string id, std::string basis, double measured, double bound) {
    bool ok = std::isfinite(measured) && measured <= bound;
    return {std::move(id), std::move(basis), measured, bound, bound, ok};
}

Check check_above(std::string id, std::string basis, double measured, double bound) {
    bool ok = std::isfinite(measured) && measured >= bound;
    return {std::move(id), std::move(basis), measured, bound, bound, ok};
}

bool Report::passed() const { return failures() == 0; }

int Report::failures() const {
    int n = 0;
    for (const Check& c : checks) n += c.pass ? 0 : 1;
    return n;
}

nlohmann::json Report::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const Check& c : checks)
        cs.push_back({{"id", c.id},
                      {"basis", c.basis},
                      {"measured", c.measured},
                      {"expected", c.expected},
                      {"tol", c.tol},
                      {"pass", c.pass}});
    nlohmann::json j{{"suite", suite},
                     {"version", kVersion},
                     {"checks", cs},
                     {"config", config},
                     {"conventions", conventions()},
                     {"passed", passed()}};
    if (!extra.empty()) j["data"] = extra;
    return j;
}

void Report::merge(const Report& r) {
    for (Check c : r.checks) {
        c.id = r.suite + "." + c.id;
        checks.push_back(std::move(c));
    }
    for (Table t : r.tables) {
        t.name = r.suite + "_" + t.name;
        tables.push_back(std::move(t));
    }
    if (!r.extra.empty()) extra[r.suite] = r.extra;
}

nlohmann::json conventions() {
    return {{"minkowski_form", "x1*y1 + x2*y2 - x3*y3"},
            {"box_product", "<u box v, w> = det(u, v, w)"},
            {"J", "rotation by +pi/2 in the oriented frame; J v = x box v on H2"},
            {"cocycle", "t_ab = t_a + a t_b; u(x) - u(a^-1 x) = <t_a, x>"},
            {"b_form", "B(X, Y) = tr(XY)/4"}};
}

namespace {

void write_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void write(std::string& out, const nlohmann::json& j, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                write(out, it.value(), indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                newline(depth + 1);
                write(out, j[i], indent, depth + 1);
            }
            newline(depth);
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float:
            write_number(out, j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

std::string num(double v) {
    std::string s;
    write_number(s, v);
    return s == "null" ? "nan" : s;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    write(out, j, indent, 0);
    return out;
}

ReportFormat parse_format(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "gnuplot") return ReportFormat::gnuplot;
    throw std::invalid_argument("unknown format '" + s + "' (json, csv, gnuplot)");
}

std::vector<std::string> emit_report(const Report& r, ReportFormat format, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir);
    std::vector<std::string> written;
    const std::string stem = r.suite.empty() ? "report" : r.suite;

    if (format == ReportFormat::json) {
        fs::path p = fs::path(dir) / (stem + ".json");
        auto f = open_out(p);
        f << dump_json(r.to_json()) << '\n';
        if (!f) throw std::runtime_error("write failed: " + p.string());
        written.push_back(p.string());
        return written;
    }

    if (format == ReportFormat::csv) {
        fs::path p = fs::path(dir) / (stem + "_checks.csv");
        auto f = open_out(p);
        f << "id,basis,measured,expected,tol,pass\n";
        for (const Check& c : r.checks)
            f << c.id << ',' << c.basis << ',' << num(c.measured) << ',' << num(c.expected) << ',' << num(c.tol)
              << ',' << (c.pass ? 1 : 0) << '\n';
        written.push_back(p.string());
        for (const Table& t : r.tables) {
            fs::path q = fs::path(dir) / (stem + "_" + t.name + ".csv");
            auto g = open_out(q);
            for (std::size_t i = 0; i < t.columns.size(); ++i) g << (i ? "," : "") << t.columns[i];
            g << '\n';
            for (const auto& row : t.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) g << (i ? "," : "") << num(row[i]);
                g << '\n';
            }
            written.push_back(q.string());
        }
        return written;
    }

    for (const Table& t : r.tables) {
        if (!t.profile) continue;
        fs::path q = fs::path(dir) / (stem + "_" + t.name + ".dat");
        auto g = open_out(q);
        g << '#';
        for (const auto& c : t.columns) g << ' ' << c;
        g << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) g << (i ? " " : "") << num(row[i]);
            g << '\n';
        }
        written.push_back(q.string());
    }
    return written;
}

}  // namespace clab
