#include "clab/cone.hpp"
#include "clab/embedding.hpp"
#include "clab/pairing.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

using namespace clab;

namespace {

constexpr double kPi = std::numbers::pi;

// pinned tolerances
constexpr double kRatioLo = 3.3, kRatioHi = 4.7;
constexpr double kDetectFactor = 10.0;
constexpr double kDeltaTol = 1e-6;
constexpr double kRoundTripTol = 1e-3;
constexpr double kFlowTol = 1e-6;
constexpr double kWedgeTraceTol = 1e-8;
constexpr double kRouteTol = 0.01;
constexpr double kRatioTraceTol = 1e-12;
constexpr double kTrivialTol = 1e-6;
constexpr double kPeripheralTol = 1e-6;
constexpr double kRateTol = 0.1;
constexpr double kAngleTol = 1e-2;
constexpr double kSurgeryTol = 1e-12;
constexpr double kRelatorTol = 1e-10;
constexpr double kAreaTol = 1e-4;

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t s) : g(s) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    MinkVec vec(double s) { return {uniform(-s, s), uniform(-s, s), uniform(-s, s)}; }
    cplx c() { return {uniform(-1, 1), uniform(-1, 1)}; }
};

int failures = 0;

void report(int n, bool ok, std::string what, double seconds) {
    while (!what.empty() && (what.back() == ' ' || what.back() == ';')) what.pop_back();
    std::printf("criterion %2d %s  %s  (%.1f s)\n", n, ok ? "PASS" : "FAIL", what.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

void timed(int n, const std::function<std::pair<bool, std::string>()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string what;
    try {
        std::tie(ok, what) = body();
    } catch (const std::exception& e) {
        what = std::string("threw: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(n, ok, what, s);
}

bool in_ratio(double r) { return r >= kRatioLo && r <= kRatioHi; }

// cubic in Klein coordinates over cosh r
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

OperatorFn random_positive(Rng& rng) {
    QuadDiffLocal q;
    q.terms = {{0, rng.c()}, {1, rng.c()}};
    MinkVec c = h2_point_polar(rng.uniform(0, 0.8), rng.uniform(0, 2 * kPi));
    double amp = rng.uniform(0.05, 0.15), shift = rng.uniform(2.0, 3.0);
    OperatorFn bq = harmonic_tensor(q);
    OperatorFn bu = trivial_tensor([c, amp](const MinkVec& x) { return amp * bump_jet(c, 2.0, x); });
    return [=](const PointFrame& F) -> Mat2 { return shift * Mat2::Identity() + 0.3 * bq(F) + bu(F); };
}

double rel_err(const Mat2& a, const Mat2& b) { return (a - b).norm() / b.norm(); }

const MinkVec kE3(0.0, 0.0, 1.0);
const MinkVec kBase = h2_point_polar(0.3, -0.4);

std::pair<bool, std::string> kernel() {
    Rng rng(101);
    KleinChart c1(kBase, 1.0 / 64, 0.3), c2(kBase, 1.0 / 128, 0.3);
    double worst_lo = 1e9, worst_hi = 0.0;
    for (int n = 0; n < 20; ++n) {
        MinkVec t = rng.vec(1.0);
        double e1 = max_norm(hess_minus_id_covariant(linear_potential(t, c1), c1), c1, 1, 0.53);
        double e2 = max_norm(hess_minus_id_covariant(linear_potential(t, c2), c2), c2, 1, 0.53);
        worst_lo = std::min(worst_lo, e1 / e2);
        worst_hi = std::max(worst_hi, e1 / e2);
    }
    return {in_ratio(worst_lo) && in_ratio(worst_hi),
            fmt("kernel of H: Richardson ratio in [%.3f, %.3f] over 20 cocycles", worst_lo, worst_hi)};
}

std::pair<bool, std::string> closure() {
    Rng rng(202);
    KleinChart c1(kBase, 1.0 / 64, 0.3), c2(kBase, 1.0 / 128, 0.3);
    const double inner = 0.53;
    double lo = 1e9, hi = 0.0, fine = 0.0;
    for (int n = 0; n < 10; ++n) {
        ScalarFn u = random_potential(rng, kBase);
        QuadDiffLocal q;
        q.terms = {{0, rng.c()}, {1, rng.c()}, {2, rng.c()}};
        auto field = [&](const KleinChart& C) {
            OperatorField b = hess_minus_id(sample(C, u), C), bq = harmonic_tensor(q, C);
            for (std::size_t i = 0; i < b.size(); ++i) b[i] += bq[i];
            return b;
        };
        double r1 = iota_closedness(field(c1), c1).max_within(c1, inner);
        double r2 = iota_closedness(field(c2), c2).max_within(c2, inner);
        lo = std::min(lo, r1 / r2);
        hi = std::max(hi, r1 / r2);
        fine = std::max(fine, r2);
    }
    Mat2 d;
    d << 1.0, 0.0, 0.0, 2.0;
    double bad = iota_closedness(OperatorField(c2.size(), d), c2).max_within(c2, inner);
    bool ok = in_ratio(lo) && in_ratio(hi) && bad > kDetectFactor * fine;
    return {ok, fmt("closure ratio in [%.3f, %.3f]; non-Codazzi residual %.2e vs ", lo, hi, bad) +
                    fmt("%.2e at 1/128", fine)};
}

std::pair<bool, std::string> theorem_a() {
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    KleinChart K(G.center(), 1.0 / 32, 0.04);
    double worst = 0.0;
    for (int k = 0; k < 6; ++k) {
        OperatorFn be = EquivariantGenerator(G, B.h1[k]).tensor();
        OperatorFn bp = [be](const PointFrame& P) -> Mat2 { return be(P) + 3.0 * Mat2::Identity(); };
        auto P = potential_from_codazzi(bp, K);
        auto H = immersion_holonomy(P, G);
        auto D = delta_extract(P, G);
        for (int a = 0; a < 4; ++a) worst = std::max(worst, (H.t.values[a] - D.t.values[a]).cwiseAbs().maxCoeff());
    }
    return {worst <= kDeltaTol, fmt("immersion translation part vs delta, 6 cocycles: max %.2e", worst)};
}

std::pair<bool, std::string> round_trip() {
    Rng rng(404);
    const double inner = 0.6;
    double worst = 0.0, lo = 1e9, hi = 0.0;
    for (int n = 0; n < 10; ++n) {
        OperatorFn b = random_positive(rng);
        double err = 0.0, gauss[2];
        int i = 0;
        for (double h : {1.0 / 64, 1.0 / 128}) {
            KleinChart C(kBase, h, 0.3);
            auto geo = immersion_geometry(reconstruct_immersion(b, C), C);
            auto bs = sample(C, b);
            err = 0.0;
            for (std::size_t m = 0; m < C.size(); ++m) {
                if (!is_valid(geo.data.I[m]) || C.node(static_cast<int>(m)).k.norm() > inner) continue;
                err = std::max(err, rel_err(geo.data.I[m], bs[m] * bs[m]));
                err = std::max(err, rel_err(geo.data.s[m], bs[m].inverse()));
            }
            gauss[i++] = gauss_codazzi_residual(geo.data, C).gauss.max_within(C, inner);
        }
        worst = std::max(worst, err);
        lo = std::min(lo, gauss[0] / gauss[1]);
        hi = std::max(hi, gauss[0] / gauss[1]);
    }
    bool ok = worst <= kRoundTripTol && in_ratio(lo) && in_ratio(hi);
    return {ok, fmt("round trip at 1/128: max rel error %.2e; Gauss residual ratio in [%.3f, %.3f]", worst, lo, hi)};
}

std::pair<bool, std::string> normal_flow_check() {
    Rng rng(505);
    OperatorFn b = random_positive(rng);
    KleinChart C(kBase, 1.0 / 32, 0.3);
    auto F = reconstruct_immersion(b, C);
    auto F1 = normal_flow(b, C, 1.0);
    std::vector<MinkVec> shifted(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) shifted[n] = F.sigma[n] + F.G[n];
    double shift = translation_spread(F1.sigma, shifted, C);
    double d[3];
    int i = 0;
    for (double t : {10.0, 20.0, 40.0}) {
        auto geo = immersion_geometry(normal_flow(b, C, t), C);
        d[i] = 0.0;
        for (std::size_t n = 0; n < C.size(); ++n)
            if (is_valid(geo.data.I[n]))
                d[i] = std::max(d[i], (geo.data.I[n] / (t * t) - Mat2::Identity()).cwiseAbs().maxCoeff());
        ++i;
    }
    bool ok = shift <= kFlowTol && d[1] < d[0] && d[2] < d[1];
    return {ok, fmt("normal flow shift %.2e; |I_t/t^2 - h| = %.3e, %.3e, ", shift, d[0], d[1]) + fmt("%.3e", d[2])};
}

std::pair<bool, std::string> pairing() {
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    PairingDomain D(G);
    auto b = sample_generators(B.h1, G, D);
    PairingMatrices M = pairing_matrices(B.h1, b, G, D);
    double wt = (M.wedge - M.half_trace).cwiseAbs().maxCoeff();
    double worst_cup = 0.0, worst_trace = 0.0;
    int pairs = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            PairingReport p = goldman_wp_report(B.h1[i], B.h1[j], b[i], b[j], G, D, kRouteTol);
            ++pairs;
            if (p.degenerate) continue;
            worst_cup = std::max(worst_cup, std::abs(p.ratio_cup / 0.125 - 1.0));
            worst_trace = std::max(worst_trace, std::abs(p.ratio_trace - 0.125));
        }
    bool ok = pairs == 15 && wt <= kWedgeTraceTol && M.max_rel <= kRouteTol && worst_cup <= kRouteTol &&
              worst_trace <= kRatioTraceTol;
    return {ok, fmt("wedge vs half trace %.2e; cup route rel %.2e; WP ratio rel %.2e", wt, M.max_rel, worst_cup) +
                    fmt(" (cup), %.1e (trace)", worst_trace)};
}

std::pair<bool, std::string> trivial_factors() {
    SurfaceGroup G = build_genus2_octagon();
    auto S = std::make_shared<PoincareSeries>(G, 12.0, 3);
    OctagonQuadrature Q(G, 8);
    KleinChart K(kE3, 0.5, 0.5);
    Rng rng(707);
    std::vector<OperatorFn> bu;
    for (int m = 0; m < 5; ++m) {
        std::vector<MinkVec> centers = {h2_point_polar(rng.uniform(0.2, 1.2), rng.uniform(0, 2 * kPi)),
                                        h2_point_polar(rng.uniform(0.2, 1.2), rng.uniform(0, 2 * kPi))};
        bu.push_back(QuotientFunction(G, centers, {rng.uniform(0.5, 1.0), rng.uniform(-1.0, -0.5)}, 1.0).tensor());
    }
    std::vector<double> I(25, 0.0), N(5, 0.0), M(5, 0.0);
    for (const auto& p : Q.points()) {
        PointFrame F = K.point_frame(p.k);
        auto th = S->evaluate(disc_coordinate(p.x, kE3));
        Mat2 u[5], q[5];
        for (int m = 0; m < 5; ++m) u[m] = bu[m](F);
        // theta_4 vanishes identically for this group, i theta_0 takes its place
        for (int k = 0; k < 4; ++k) q[k] = harmonic_matrix(th[k], F, kE3);
        q[4] = harmonic_matrix(cplx(0.0, 1.0) * th[0], F, kE3);
        for (int k = 0; k < 5; ++k) {
            N[k] += p.w * (q[k] * q[k]).trace();
            M[k] += p.w * (u[k] * u[k]).trace();
            for (int m = 0; m < 5; ++m) I[5 * k + m] += p.w * (J2() * q[k] * u[m]).trace();
        }
    }
    double worst = 0.0, rel = 0.0;
    for (int k = 0; k < 5; ++k)
        for (int m = 0; m < 5; ++m) {
            worst = std::max(worst, std::abs(I[5 * k + m]));
            rel = std::max(rel, std::abs(I[5 * k + m]) / std::sqrt(N[k] * M[m]));
        }
    return {worst <= kTrivialTol, fmt("|int tr(J b_q H(u))| over 25 pairs: max %.2e (%.2e relative to the L2 norms)",
                                      worst, rel)};
}

struct Angle {
    const char* tag;
    double theta;
};
const Angle kAngles[] = {{"2pi/3", 2 * kPi / 3}, {"pi", kPi}, {"3pi/2", 1.5 * kPi}};

QuadDiffLocal simple_pole() {
    QuadDiffLocal q;
    q.terms = {{-1, {1.0, 0.3}}};
    return q;
}

std::pair<bool, std::string> trichotomy() {
    QuadDiffLocal dbl;
    dbl.terms = {{-2, {1.0, 0.0}}};
    const double eps = 1e-3;
    bool ok = true;
    std::string what;
    for (const Angle& A : kAngles) {
        ConeAngle a(A.theta);
        ConeChart Cl = cone_chart(a, ConeKind::polar, eps / 10, 1.0, 200, 64);
        auto H1 = harmonic_tensor_cone(simple_pole(), Cl);
        auto H2 = harmonic_tensor_cone(dbl, Cl);
        double s[3] = {cone_l2_norm2(H1.b, Cl, 10 * eps), cone_l2_norm2(H1.b, Cl, eps), cone_l2_norm2(H1.b, Cl, eps / 10)};
        double d[3] = {cone_l2_norm2(H2.b, Cl, 10 * eps), cone_l2_norm2(H2.b, Cl, eps), cone_l2_norm2(H2.b, Cl, eps / 10)};
        double inc = (s[2] - s[1]) / (s[1] - s[0]);
        bool stable = inc < 0.5;
        bool diverges = d[1] > 50 * d[0] && d[2] > 50 * d[1];
        bool tip = true;
        double tip_ratio = 0.0;
        if (A.theta < kPi) {
            tip_ratio = cone_sup_within(H1.b, Cl, eps) / cone_sup_within(H1.b, Cl, 10 * eps);
            tip = tip_ratio < 0.2;
        }
        ok = ok && stable && diverges && tip;
        what += std::string(A.tag) + fmt(": L2 increment %.2e, double-pole growth %.1e", inc, d[2] / d[1]);
        if (A.theta < kPi) what += fmt(", tip sup ratio %.3f", tip_ratio);
        what += "; ";
    }
    return {ok, what};
}

std::pair<bool, std::string> peripheral() {
    bool ok = true;
    std::string what;
    for (const Angle& A : kAngles) {
        ConeAngle a(A.theta);
        ConeChart C = cone_chart(a, ConeKind::polar, 1e-3);
        auto P = peripheral_potential(harmonic_tensor_cone(simple_pole(), a), C, 1e-6, a.alpha());
        double rate = std::min(1.0, a.alpha() + 2.0);
        double defect = std::abs(P.reduction.defect);
        double rel = std::abs(P.circle_fit.exponent / rate - 1.0);
        ok = ok && defect <= kPeripheralTol && rel <= kRateTol;
        what += std::string(A.tag) + fmt(": defect %.1e, exponent %.3f vs %.3f; ", defect, P.circle_fit.exponent, rate);
    }
    return {ok, what};
}

std::pair<bool, std::string> singular() {
    bool ok = true;
    std::string what;
    // the embedding needs b bounded; the simple-pole tensor is unbounded at the tip for theta0 > pi
    for (const Angle& A : kAngles) {
        if (A.theta > kPi) continue;
        ConeAngle a(A.theta);
        ConeFn bq = harmonic_tensor_cone(simple_pole(), a);
        ConeFn b = [bq](double r, double p) { return Mat2(Mat2::Identity() + 0.25 * bq(r, p)); };
        for (int rings : {80, 160}) {
            auto E = singular_embedding(b, cone_chart(a, ConeKind::polar, 1e-3, 1.0, rings, rings * 4 / 5), 0.5, 1.5);
            double ef = std::abs(E.flat_angle.theta - A.theta), eI = std::abs(E.I_angle.theta - A.theta);
            bool pass = E.conjugation_ok() && E.bilipschitz_ok() && E.unifdist_ok() && E.orthogonality_ok() &&
                        E.metric_error < kAngleTol && E.shape_error < kAngleTol && ef <= kAngleTol && eI <= kAngleTol;
            ok = ok && pass;
            if (rings == 160) what += std::string(A.tag) + fmt(": angle errors %.1e, %.1e; ", ef, eI);
        }
    }
    return {ok, what};
}

std::pair<bool, std::string> surgery() {
    Rng rng(1111);
    double worst = 0.0;
    int bad = 0;
    for (int k = 0; k < 100; ++k) {
        double th = rng.uniform(0.05, kPi - 0.05), d1 = rng.uniform(0.1, 5.0), d2 = rng.uniform(0.1, 5.0);
        auto S = wedge_surgery(ConeAngle(th), d1, d2);
        worst = std::max(worst, std::abs(S.theta1 + S.theta2 - S.theta - 2 * kPi));
        double hi = std::max(S.theta1, S.theta2), lo = std::min(S.theta1, S.theta2);
        bool one = (hi >= kPi && hi < 2 * kPi) || (lo >= kPi && lo < 2 * kPi);
        bad += one ? 0 : 1;
    }
    return {worst <= kSurgeryTol && bad == 0, fmt("wedge surgery over 100 samples: angle sum error %.1e, %g violations",
                                                  worst, bad)};
}

std::pair<bool, std::string> octagon() {
    SurfaceGroup G = build_genus2_octagon();
    double rel = G.relator_defect();
    double area = OctagonQuadrature(G).integrate([](const QuadPoint&) { return 1.0; });
    CocycleBasis B = cocycle_basis(G);
    bool dims = B.z1.size() == 9 && B.b1.size() == 3 && B.h1.size() == 6;
    bool ok = rel <= kRelatorTol && std::abs(area - 4 * kPi) <= kAreaTol && dims;
    return {ok, fmt("relator defect %.1e, area - 4pi = %.1e, dims ", rel, area - 4 * kPi) +
                    fmt("(%g, %g, ", B.z1.size(), B.b1.size()) + fmt("%g)", B.h1.size())};
}

}  // namespace

int main() {
    timed(1, kernel);
    timed(2, closure);
    timed(3, theorem_a);
    timed(4, round_trip);
    timed(5, normal_flow_check);
    timed(6, pairing);
    timed(7, trivial_factors);
    timed(8, trichotomy);
    timed(9, peripheral);
    timed(10, singular);
    timed(11, surgery);
    timed(12, octagon);
    std::printf("%d of 12 criteria passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
