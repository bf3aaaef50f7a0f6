#include "clab/suites.hpp"

#include "clab/cone.hpp"
#include "clab/embedding.hpp"
#include "clab/pairing.hpp"

#include <algorithm>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t seed) : g(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    MinkVec vec(double s) { return {uniform(-s, s), uniform(-s, s), uniform(-s, s)}; }
};

// u / cosh r is a cubic in Klein coordinates at the chart base
ScalarFn random_potential(Rng& rng, const MinkVec& base) {
    std::array<double, 10> c;
    for (double& x : c) x = rng.uniform(-1, 1);
    return [c, base](const MinkVec& x) {
        Vec2 k = klein_project(x, base);
        double X = k.x(), Y = k.y();
        double p = c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y + c[6] * X * X * X +
                   c[7] * X * X * Y + c[8] * X * Y * Y + c[9] * Y * Y * Y;
        return p / std::sqrt(1.0 - k.squaredNorm());
    };
}

// shift Id + harmonic + small bump, positive for shift >= 2
OperatorFn random_positive(Rng& rng) {
    QuadDiffLocal q;
    q.terms = {{0, {rng.uniform(-1, 1), rng.uniform(-1, 1)}}, {1, {rng.uniform(-1, 1), rng.uniform(-1, 1)}}};
    MinkVec c = h2_point_polar(rng.uniform(0, 0.8), rng.uniform(0, 2 * kPi));
    double amp = rng.uniform(0.05, 0.15), shift = rng.uniform(2.0, 3.0);
    OperatorFn bq = harmonic_tensor(q);
    OperatorFn bu = trivial_tensor([c, amp](const MinkVec& x) { return amp * bump_jet(c, 2.0, x); });
    return [=](const PointFrame& F) -> Mat2 { return shift * Mat2::Identity() + 0.3 * bq(F) + bu(F); };
}

Check ratio_check(std::string id, double coarse, double fine) {
    return check_close(std::move(id), "convergence", coarse / fine, 4.0, 0.7);
}

double rel_err(const Mat2& a, const Mat2& b) { return (a - b).norm() / b.norm(); }

Report suite_core(const SuiteConfig& cfg) {
    Report r;
    r.suite = "core";
    Rng rng(cfg.seed);
    double box = 0.0, lam = 0.0, inv = 0.0, exp_def = 0.0, klein = 0.0, h2 = 0.0;
    for (int n = 0; n < 100; ++n) {
        MinkVec u = rng.vec(2.0), v = rng.vec(2.0), w = rng.vec(2.0);
        Mat3 M;
        M << u, v, w;
        box = std::max(box, std::abs(mink_dot(box_product(u, v), w) - M.determinant()));
        lam = std::max(lam, (lambda_iso(u) * v - box_product(u, v)).cwiseAbs().maxCoeff());
        inv = std::max(inv, (lambda_inv(lambda_iso(u)) - u).cwiseAbs().maxCoeff());
        exp_def = std::max(exp_def, LinIsom::isometry_defect(so21_exp(u, 1.0)));
        MinkVec x = h2_point_polar(rng.uniform(0, 2), rng.uniform(0, 2 * kPi));
        MinkVec p = h2_point_polar(rng.uniform(0, 1), rng.uniform(0, 2 * kPi));
        klein = std::max(klein, (klein_unproject(klein_project(x, p), p) - x).cwiseAbs().maxCoeff());
        h2 = std::max(h2, (h2_exp(p, h2_log(p, x)) - x).cwiseAbs().maxCoeff());
    }
    double tol = 100.0 * cfg.tol_alg;
    r.checks.push_back(check_below("box_product_determinant", "identity", box, tol));
    r.checks.push_back(check_below("lambda_is_box_product", "identity", lam, tol));
    r.checks.push_back(check_below("lambda_inverse", "identity", inv, tol));
    r.checks.push_back(check_below("exp_is_isometry", "identity", exp_def, 1e3 * cfg.tol_alg));
    r.checks.push_back(check_below("klein_round_trip", "identity", klein, 1e3 * cfg.tol_alg));
    r.checks.push_back(check_below("h2_exp_log_round_trip", "identity", h2, 1e3 * cfg.tol_alg));
    r.checks.push_back(check_close("b_form_e3", "identity",
                                   b_form(lambda_iso(MinkVec::UnitZ()), lambda_iso(MinkVec::UnitZ())), -0.5,
                                   cfg.tol_alg));
    return r;
}

Report suite_holonomy(const SuiteConfig& cfg) {
    Report r;
    r.suite = "holonomy";
    Rng rng(cfg.seed);
    SurfaceGroup G = build_genus2_octagon();
    r.checks.push_back(check_below("relator_defect", "identity", G.relator_defect(), 1e-10));
    OctagonQuadrature Q(G);
    double area = Q.integrate([](const QuadPoint&) { return 1.0; });
    r.checks.push_back(check_close("octagon_area", "identity", area, 4 * kPi, 1e-4));
    double angles = 0.0;
    for (double a : octagon_vertex_angles(G)) angles += a;
    r.checks.push_back(check_close("vertex_angle_sum", "identity", angles, 2 * kPi, 1e-10));
    CocycleBasis B = cocycle_basis(G);
    r.checks.push_back(check_close("dim_Z1", "identity", static_cast<double>(B.z1.size()), 9, 0));
    r.checks.push_back(check_close("dim_B1", "identity", static_cast<double>(B.b1.size()), 3, 0));
    r.checks.push_back(check_close("dim_H1", "identity", static_cast<double>(B.h1.size()), 6, 0));
    r.checks.push_back(check_below("basis_orthogonality", "identity", B.orthogonality_residual, 1e-10));
    double cob = 0.0, per = 0.0;
    for (int n = 0; n < 20; ++n) {
        TransCocycle c = coboundary_cocycle(rng.vec(1.0), G);
        cob = std::max(cob, cocycle_relator_defect(c, G));
        cob = std::max(cob, B.h1_coords(c).norm());
        LinIsom R = elliptic_rotation(h2_point_polar(rng.uniform(0, 1), rng.uniform(0, 2 * kPi)),
                                      rng.uniform(0.3, 2 * kPi - 0.3));
        MinkVec t0 = rng.vec(1.0);
        PeripheralResult p = peripheral_reduction(R(t0) - t0, R, 1e-8);
        per = std::max(per, std::abs(p.defect));
        per = std::max(per, (R(p.t0) - p.t0 - (R(t0) - t0)).cwiseAbs().maxCoeff());
    }
    r.checks.push_back(check_below("coboundaries_vanish_in_H1", "identity", cob, 1e-9));
    r.checks.push_back(check_below("peripheral_reduction_elliptic", "identity", per, 1e-10));
    return r;
}

Report suite_codazzi(const SuiteConfig& cfg) {
    Report r;
    r.suite = "codazzi";
    Rng rng(cfg.seed);
    const MinkVec base = h2_point_polar(0.3, -0.4);
    const double inner = std::max(0.2, 0.9 * (1.0 - cfg.margin) - 0.1);
    KleinChart c1(base, 2 * cfg.grid, cfg.margin), c2(base, cfg.grid, cfg.margin);

    double k1 = 0.0, k2 = 0.0;
    for (int n = 0; n < 5; ++n) {
        MinkVec t = rng.vec(1.0);
        k1 = std::max(k1, max_norm(hess_minus_id_covariant(linear_potential(t, c1), c1), c1, 1, inner));
        k2 = std::max(k2, max_norm(hess_minus_id_covariant(linear_potential(t, c2), c2), c2, 1, inner));
    }
    r.checks.push_back(ratio_check("kernel_richardson", k1, k2));

    ScalarFn u = random_potential(rng, base);
    double w1 = codazzi_residual(hess_minus_id(sample(c1, u), c1), c1).max_within(c1, inner);
    double w2 = codazzi_residual(hess_minus_id(sample(c2, u), c2), c2).max_within(c2, inner);
    r.checks.push_back(ratio_check("random_potential_codazzi_richardson", w1, w2));

    QuadDiffLocal q;
    q.terms = {{0, {rng.uniform(-1, 1), rng.uniform(-1, 1)}}, {2, {rng.uniform(-1, 1), rng.uniform(-1, 1)}}};
    double i1 = iota_closedness(harmonic_tensor(q, c1), c1).max_within(c1, inner);
    double i2 = iota_closedness(harmonic_tensor(q, c2), c2).max_within(c2, inner);
    r.checks.push_back(ratio_check("harmonic_closedness_richardson", i1, i2));
    Mat2 d;
    d << 1.0, 0.0, 0.0, 2.0;
    double bad = iota_closedness(OperatorField(c2.size(), d), c2).max_within(c2, inner);
    r.checks.push_back(check_above("non_codazzi_detected", "bound", bad, 10.0 * i2));

    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    KleinChart C(G.center(), 1.0 / 32, 0.04);
    double worst = 0.0;
    for (int k : {0, 3}) {
        auto D = delta_extract(EquivariantGenerator(G, B.h1[k]).tensor(), C, G);
        worst = std::max(worst, B.h1_coords(D.t - B.h1[k]).norm());
    }
    r.checks.push_back(check_below("delta_of_generator", "oracle", worst, 1e-6));
    QuotientFunction U(G, {h2_point_polar(0.5, 0.3)}, {1.0}, 1.0);
    r.checks.push_back(check_below("delta_of_trivial", "identity", B.h1_coords(delta_extract(U.tensor(), C, G).t).norm(),
                                   1e-8));
    return r;
}

Report suite_embedding(const SuiteConfig& cfg) {
    Report r;
    r.suite = "embedding";
    Rng rng(cfg.seed);
    const MinkVec base = h2_point_polar(0.3, -0.4);
    const double inner = std::min(0.6, 0.9 * (1.0 - cfg.margin));
    OperatorFn b = random_positive(rng);

    Table prof{"round_trip", {"grid", "I_error", "s_error", "gauss"}, {}, true};
    double eI[2], es[2], eg[2];
    int i = 0;
    for (double h : {2 * cfg.grid, cfg.grid}) {
        KleinChart C(base, h, cfg.margin);
        auto geo = immersion_geometry(reconstruct_immersion(b, C), C);
        auto bs = sample(C, b);
        auto gc = gauss_codazzi_residual(geo.data, C);
        eI[i] = es[i] = 0.0;
        for (std::size_t n = 0; n < C.size(); ++n) {
            if (!is_valid(geo.data.I[n]) || C.node(static_cast<int>(n)).k.norm() > inner) continue;
            eI[i] = std::max(eI[i], rel_err(geo.data.I[n], bs[n] * bs[n]));
            es[i] = std::max(es[i], rel_err(geo.data.s[n], bs[n].inverse()));
        }
        eg[i] = gc.gauss.max_within(C, inner);
        prof.rows.push_back({h, eI[i], es[i], eg[i]});
        ++i;
    }
    r.tables.push_back(prof);
    r.checks.push_back(check_below("round_trip_I", "bound", eI[1], 0.1 * cfg.tol_global));
    r.checks.push_back(check_below("round_trip_s", "bound", es[1], 0.1 * cfg.tol_global));
    r.checks.push_back(ratio_check("round_trip_richardson", es[0], es[1]));

    KleinChart C(base, 2 * cfg.grid, cfg.margin);
    auto F = reconstruct_immersion(b, C);
    auto F1 = normal_flow(b, C, 1.0);
    std::vector<MinkVec> shifted(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) shifted[n] = F.sigma[n] + F.G[n];
    r.checks.push_back(check_below("normal_flow_shift", "identity", translation_spread(F1.sigma, shifted, C), 1e-6));
    double prev = 1e300;
    bool mono = true;
    for (double t : {10.0, 20.0, 40.0}) {
        auto geo = immersion_geometry(normal_flow(b, C, t), C);
        double d = 0.0;
        for (std::size_t n = 0; n < C.size(); ++n)
            if (is_valid(geo.data.I[n])) d = std::max(d, (geo.data.I[n] / (t * t) - Mat2::Identity()).cwiseAbs().maxCoeff());
        mono = mono && d < prev;
        prev = d;
    }
    r.checks.push_back(check_close("normal_flow_third_form_monotone", "identity", mono ? 1.0 : 0.0, 1.0, 0.0));

    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    KleinChart K(G.center(), 1.0 / 32, 0.04);
    OperatorFn be = EquivariantGenerator(G, B.h1[1]).tensor();
    OperatorFn bp = [be](const PointFrame& P) -> Mat2 { return be(P) + 3.0 * Mat2::Identity(); };
    auto P = potential_from_codazzi(bp, K);
    auto H = immersion_holonomy(P, G);
    auto D = delta_extract(P, G);
    double worst = 0.0;
    for (int a = 0; a < 4; ++a) worst = std::max(worst, (H.t.values[a] - D.t.values[a]).cwiseAbs().maxCoeff());
    r.checks.push_back(check_below("immersion_holonomy_is_delta", "oracle", worst, 1e-6));
    return r;
}

Report suite_cone(const SuiteConfig& cfg) {
    Report r;
    r.suite = "cone";
    QuadDiffLocal simple, dbl;
    simple.terms = {{-1, {1.0, 0.3}}};
    dbl.terms = {{-2, {1.0, 0.0}}};
    const std::pair<const char*, double> angles[] = {{"2pi_3", 2 * kPi / 3}, {"pi", kPi}, {"3pi_2", 1.5 * kPi}};
    for (auto [tag, th] : angles) {
        ConeAngle a(th);
        std::string id = std::string("theta_") + tag;
        ConeChart Cl = cone_chart(a, ConeKind::polar, cfg.eps_tip / 10, 1.0, 200, 64);
        auto H1 = harmonic_tensor_cone(simple, Cl);
        auto H2 = harmonic_tensor_cone(dbl, Cl);
        double l1a = cone_l2_norm2(H1.b, Cl, 10 * cfg.eps_tip), l1b = cone_l2_norm2(H1.b, Cl, cfg.eps_tip),
               l1c = cone_l2_norm2(H1.b, Cl, cfg.eps_tip / 10);
        double l2a = cone_l2_norm2(H2.b, Cl, 10 * cfg.eps_tip), l2b = cone_l2_norm2(H2.b, Cl, cfg.eps_tip);
        r.checks.push_back(check_below(id + ".simple_pole_l2_increment", "convergence",
                                       (l1c - l1b) / std::max(l1b - l1a, 1e-300), 0.5));
        r.checks.push_back(check_above(id + ".double_pole_growth", "bound", l2b / l2a, 50.0));
        if (th < kPi)
            r.checks.push_back(check_below(id + ".sup_near_tip", "bound",
                                           cone_sup_within(H1.b, Cl, cfg.eps_tip) /
                                               cone_sup_within(H1.b, Cl, 10 * cfg.eps_tip),
                                           0.2));

        ConeChart C = cone_chart(a, ConeKind::polar, cfg.eps_tip);
        auto P = peripheral_potential(H1.fn, C, 1e-6, a.alpha());
        double rate = std::min(1.0, a.alpha() + 2.0);
        r.checks.push_back(check_below(id + ".peripheral_defect", "identity", std::abs(P.reduction.defect), 1e-6));
        r.checks.push_back(check_close(id + ".circle_integral_rate", "convergence", P.circle_fit.exponent, rate,
                                       0.1 * rate));
        Table t{std::string("profile_") + tag, {"r", "circle_integral", "du_sup"}, {}, true};
        for (int i = 0; i < C.rings(); ++i) t.rows.push_back({C.r(i), P.circle_integral[i], P.du_sup[i]});
        r.tables.push_back(std::move(t));
    }

    ConeAngle a(kPi);
    ConeFn bq = harmonic_tensor_cone(simple, a);
    ConeFn b = [bq](double rr, double p) { return Mat2(Mat2::Identity() + 0.25 * bq(rr, p)); };
    auto E = singular_embedding(b, cone_chart(a, ConeKind::polar, cfg.eps_tip, 1.0, 80, 64), 0.5, 1.5);
    r.checks.push_back(check_below("singular.conjugation", "identity", E.conjugation, 1e-8));
    r.checks.push_back(check_close("singular.bilipschitz", "bound", E.bilipschitz_ok() ? 1 : 0, 1, 0));
    r.checks.push_back(check_above("singular.unifdist", "bound", E.unifdist, 1.0));
    r.checks.push_back(check_close("singular.orthogonality_exponent", "convergence", E.f_fit.exponent, 2.0, 0.1));
    r.checks.push_back(check_close("singular.flat_angle", "convergence", E.flat_angle.theta, kPi, 1e-2));
    r.checks.push_back(check_close("singular.I_angle", "convergence", E.I_angle.theta, kPi, 1e-2));

    double worst = 0.0;
    int spread = 0;
    for (int k = 0; k < 100; ++k) {
        double th = 0.05 + (kPi - 0.1) * k / 99.0, d2 = 0.1 + 0.05 * k;
        auto S = wedge_surgery(ConeAngle(th), 1.0, d2);
        worst = std::max(worst, std::abs(S.theta1 + S.theta2 - S.theta - 2 * kPi));
        bool one = (S.theta1 >= kPi && S.theta1 < 2 * kPi) || (S.theta2 >= kPi && S.theta2 < 2 * kPi);
        spread += one ? 0 : 1;
    }
    r.checks.push_back(check_below("wedge_angle_sum", "identity", worst, 1e-12));
    r.checks.push_back(check_close("wedge_large_angle", "identity", spread, 0, 0));
    return r;
}

Report suite_pairing(const SuiteConfig& cfg) {
    Report r;
    r.suite = "pairing";
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    PairingDomain D(G);
    auto b = sample_generators(B.h1, G, D);
    PairingMatrices M = pairing_matrices(B.h1, b, G, D);
    double kappa = calibrate_cup_normalization(B.h1[0], B.h1[1], G, D);
    r.checks.push_back(check_close("cup_normalization", "oracle", kappa, kCupNormalization, 1e-4));
    r.checks.push_back(check_below("routes_agree", "oracle", M.max_rel, cfg.tol_global));
    double wedge_trace = (M.wedge - M.half_trace).cwiseAbs().maxCoeff();
    r.checks.push_back(check_below("wedge_is_half_trace", "identity", wedge_trace, 1e-8));

    auto dump = [&](const char* name, const Eigen::MatrixXd& m) {
        Table t{name, {"c0", "c1", "c2", "c3", "c4", "c5"}, {}, false};
        for (int i = 0; i < m.rows(); ++i) {
            t.rows.emplace_back();
            for (int j = 0; j < m.cols(); ++j) t.rows.back().push_back(m(i, j));
        }
        r.tables.push_back(std::move(t));
    };
    dump("matrix_cup", M.cup);
    dump("matrix_wedge", M.wedge);
    dump("matrix_half_trace", M.half_trace);

    Table ratios{"ratios", {"i", "j", "ratio_cup", "ratio_trace"}, {}, false};
    double worst_cup = 0.0, worst_trace = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            PairingReport p = goldman_wp_report(B.h1[i], B.h1[j], b[i], b[j], G, D, cfg.tol_global);
            if (p.degenerate) continue;
            ratios.rows.push_back({double(i), double(j), p.ratio_cup, p.ratio_trace});
            worst_cup = std::max(worst_cup, std::abs(p.ratio_cup / 0.125 - 1.0));
            worst_trace = std::max(worst_trace, std::abs(p.ratio_trace - 0.125));
        }
    r.tables.push_back(ratios);
    r.checks.push_back(check_below("goldman_wp_ratio_cup", "oracle", worst_cup, cfg.tol_global));
    r.checks.push_back(check_below("goldman_wp_ratio_trace", "identity", worst_trace, 100 * cfg.tol_alg));
    r.extra["h1_pairs"] = static_cast<int>(ratios.rows.size());
    return r;
}

}  // namespace

void SuiteConfig::validate() const {
    if (!(grid > 0.0 && grid < 0.5)) throw std::invalid_argument("grid must be in (0, 0.5)");
    if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("margin must be in (0, 1)");
    if (!(eps_tip > 0.0 && eps_tip < 0.1)) throw std::invalid_argument("eps-tip must be in (0, 0.1)");
    if (!(tol_alg > 0.0) || !(tol_global > 0.0)) throw std::invalid_argument("tolerances must be positive");
}

nlohmann::json SuiteConfig::to_json() const {
    return {{"grid", grid},       {"margin", margin}, {"eps_tip", eps_tip}, {"tol_alg", tol_alg},
            {"tol_global", tol_global}, {"seed", seed},     {"out", out}};
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"core", "holonomy", "codazzi", "embedding", "cone", "pairing"};
    return names;
}

Report run_suite(const std::string& name, const SuiteConfig& cfg) {
    cfg.validate();
    if (name == "all") return run_suites(suite_names(), cfg);
    Report r;
    if (name == "core") r = suite_core(cfg);
    else if (name == "holonomy") r = suite_holonomy(cfg);
    else if (name == "codazzi") r = suite_codazzi(cfg);
    else if (name == "embedding") r = suite_embedding(cfg);
    else if (name == "cone") r = suite_cone(cfg);
    else if (name == "pairing") r = suite_pairing(cfg);
    else throw std::invalid_argument("unknown suite '" + name + "'");
    r.config = cfg.to_json();
    return r;
}

Report run_suites(const std::vector<std::string>& names, const SuiteConfig& cfg) {
    cfg.validate();
    for (const auto& n : names)
        if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
            throw std::invalid_argument("unknown suite '" + n + "'");
    std::vector<std::future<Report>> jobs;
    for (const auto& n : names) jobs.push_back(std::async(std::launch::async, [n, &cfg] { return run_suite(n, cfg); }));
    Report all;
    all.suite = names.size() == 1 ? names.front() : (names.empty() ? "none" : "all");
    all.config = cfg.to_json();
    for (auto& j : jobs) {
        Report r = j.get();
        if (names.size() == 1) return r;
        all.merge(r);
    }
    return all;
}

}  // namespace clab
