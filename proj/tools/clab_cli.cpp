#include "clab/cone.hpp"
#include "clab/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

// "0.015625" or "1/64"
double parse_spacing(const std::string& s) {
    auto slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    }
    double num = std::stod(s.substr(0, slash)), den = std::stod(s.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return num / den;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

nlohmann::json run_scene(const nlohmann::json& s) {
    double theta = s.at("theta").get<double>();
    double d1 = s.value("d1", 1.0), d2 = s.value("d2", 1.0);
    return clab::wedge_surgery(clab::ConeAngle(theta), d1, d2).describe();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Codazzi tensor and holonomy verification harness"};
    app.require_subcommand(1);

    clab::SuiteConfig cfg;
    std::string grid = "1/64";
    std::string formats = "json";
    app.add_option("--grid", grid, "Klein chart spacing, e.g. 1/64")->envname("CLAB_GRID");
    app.add_option("--margin", cfg.margin, "chart radius is 1 - margin")->envname("CLAB_MARGIN");
    app.add_option("--eps-tip", cfg.eps_tip, "innermost cone radius")->envname("CLAB_EPS_TIP");
    app.add_option("--tol-alg", cfg.tol_alg, "algebraic tolerance")->envname("CLAB_TOL_ALG");
    app.add_option("--tol-global", cfg.tol_global, "relative tolerance for global quadratures")
        ->envname("CLAB_TOL_GLOBAL");
    app.add_option("--seed", cfg.seed, "seed for random fields")->envname("CLAB_SEED");
    app.add_option("--out", cfg.out, "output directory")->envname("CLAB_OUT");
    app.add_option("--format", formats, "comma list of json, csv, gnuplot")->envname("CLAB_FORMAT");

    auto* run = app.add_subcommand("run", "run verification suites");
    std::string suites = "all";
    std::vector<std::string> positional;
    run->add_option("--suites", suites, "comma list of suites, 'all', or empty for none")->envname("CLAB_SUITES");
    run->add_option("names", positional, "suite names");

    auto* list = app.add_subcommand("list", "list suites");

    auto* wedge = app.add_subcommand("wedge-surgery", "angles after wedge surgery for a JSON scene");
    std::string scene;
    wedge->add_option("scene", scene, "JSON file with {theta, d1, d2} or a list of them")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& n : clab::suite_names()) std::cout << n << '\n';
            std::cout << "all\n";
            return 0;
        }
        if (wedge->parsed()) {
            std::ifstream in(scene);
            if (!in) throw std::runtime_error("cannot read " + scene);
            nlohmann::json s = nlohmann::json::parse(in);
            nlohmann::json out;
            if (s.is_array()) {
                out = nlohmann::json::array();
                for (const auto& e : s) out.push_back(run_scene(e));
            } else {
                out = run_scene(s);
            }
            std::cout << clab::dump_json(out) << '\n';
            return 0;
        }

        cfg.grid = parse_spacing(grid);
        cfg.validate();
        std::vector<std::string> names = positional.empty() ? split_list(suites) : positional;
        if (names.size() == 1 && names[0] == "all") names = clab::suite_names();
        std::vector<clab::ReportFormat> fmts;
        for (const auto& f : split_list(formats)) fmts.push_back(clab::parse_format(f));

        clab::Report r = clab::run_suites(names, cfg);
        for (const auto& c : r.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << "  measured " << c.measured << "  expected "
                      << c.expected << "  tol " << c.tol << '\n';
        for (auto f : fmts)
            for (const auto& p : clab::emit_report(r, f, cfg.out)) std::cout << "wrote " << p << '\n';
        std::cout << r.checks.size() - r.failures() << "/" << r.checks.size() << " checks passed\n";
        return r.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
