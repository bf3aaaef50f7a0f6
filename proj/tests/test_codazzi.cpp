#include <doctest.h>

#include "clab/codazzi.hpp"
#include "test_util.hpp"

using namespace clab;

namespace {

const MinkVec kE3(0.0, 0.0, 1.0);
const MinkVec kBase = h2_point_polar(0.4, 0.7);

Jet smooth_jet(const MinkVec& x) {
    MinkVec a(0.3, -0.2, 0.1), c(-0.5, 0.4, 0.2);
    Jet la = 0.5 * linear_jet(a, x), lc = linear_jet(c, x);
    double ea = std::exp(la.v);
    Jet X = linear_jet(MinkVec(1, 0, 0), x), Y = linear_jet(MinkVec(0, 1, 0), x);
    return chain(la, ea, ea, ea) + chain(lc, std::sin(lc.v), std::cos(lc.v), -std::sin(lc.v)) + 0.2 * (X * Y);
}

double smooth_u(const MinkVec& x) { return smooth_jet(x).v; }

double max_diff(const OperatorField& a, const OperatorField& b) {
    double w = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        if (is_valid(a[n]) && is_valid(b[n])) w = std::max(w, testutil::max_abs(a[n] - b[n]));
    return w;
}

OperatorField add(const OperatorField& a, const OperatorField& b) {
    OperatorField c(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) c[n] = a[n] + b[n];
    return c;
}

QuadDiffLocal sample_q() {
    QuadDiffLocal q;
    q.terms = {{0, {1.0, 0.5}}, {1, {-0.4, 0.2}}, {2, {0.3, -0.2}}};
    return q;
}

std::vector<MinkVec> near_centre(int n, unsigned seed) {
    testutil::Gen g(seed);
    std::vector<MinkVec> p;
    for (int i = 0; i < n; ++i) p.push_back(g.h2_point(0.6));
    return p;
}

}  // namespace

TEST_CASE("linear potentials are recovered from three nodes") {
    KleinChart C(kBase, 1.0 / 32, 0.1);
    testutil::Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
        MinkVec t = g.vec(2.0);
        auto v = linear_potential(t, C);
        double res = 1.0;
        MinkVec r = recover_linear(v, C, &res);
        CHECK((r - t).norm() < 1e-10);
        CHECK(res <= 1e-10);
        CHECK(max_norm(hess_minus_id(v, C), C, 1, 1.0) < 1e-9);
    }
    auto z = linear_potential(MinkVec::Zero(), C);
    CHECK(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("harmonic tensor at the disc centre") {
    // f = 1 at z = 0: e^{-2eta} = 1/4 and the conformal frame is the chart frame
    KleinChart C(kE3, 0.25, 0.5);
    QuadDiffLocal q;
    q.terms = {{0, {1.0, 0.0}}};
    Mat2 b = harmonic_tensor(q)(C.point_frame(Vec2::Zero()));
    Mat2 want;
    want << 0.25, 0.0, 0.0, -0.25;
    CHECK(testutil::max_abs(b - want) < 1e-15);
    q.terms = {{0, {0.0, 2.0}}};
    want << 0.0, -0.5, -0.5, 0.0;
    CHECK(testutil::max_abs(harmonic_tensor(q)(C.point_frame(Vec2::Zero())) - want) < 1e-15);
}

TEST_CASE("harmonic tensors are traceless, self-adjoint and real-linear") {
    KleinChart C(kBase, 1.0 / 32, 0.2);
    QuadDiffLocal q = sample_q();
    q.center = h2_point_polar(0.3, -1.0);
    auto b = harmonic_tensor(q, C);
    auto bi = harmonic_tensor(q * cplx(0.0, 1.0), C);
    QuadDiffLocal p;
    p.terms = {{3, {0.7, 0.1}}};
    p.center = q.center;
    auto bp = harmonic_tensor(p, C), bsum = harmonic_tensor(q * 2.0 + p, C);
    double lin = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        CHECK(std::abs(b[n].trace()) < 1e-15);
        CHECK(testutil::max_abs(b[n] - b[n].transpose()) < 1e-12);
        // J b_q = -b_{iq}; the relation b_q J = b_{iq} holds
        CHECK(testutil::max_abs(b[n] * J2() - bi[n]) < 1e-12);
        CHECK(testutil::max_abs(J2() * b[n] + bi[n]) < 1e-12);
        lin = std::max(lin, testutil::max_abs(bsum[n] - 2.0 * b[n] - bp[n]));
    }
    CHECK(lin < 1e-12);
    auto z = harmonic_tensor(QuadDiffLocal{}, C);
    CHECK(std::all_of(z.begin(), z.end(), [](const Mat2& m) { return m.isZero(0.0); }));
}

TEST_CASE("harmonic tensors are Codazzi to second order") {
    QuadDiffLocal q = sample_q();
    double r[2];
    int i = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        KleinChart C(kBase, h, 0.3);
        r[i++] = codazzi_residual(harmonic_tensor(q, C), C).max_within(C, 0.6);
    }
    CHECK(r[1] < 2e-3);
    CHECK(r[0] / r[1] > 3.3);
    CHECK(r[0] / r[1] < 4.7);
}

TEST_CASE("Laurent sums are holomorphic") {
    QuadDiffLocal q = sample_q();
    q.terms.push_back({-2, {0.1, 0.0}});
    CHECK(cauchy_riemann_residual(q, {{0.3, 0.1}, {-0.2, 0.5}, {0.05, -0.6}}) < 1e-8);
}

TEST_CASE("disc coordinates") {
    testutil::Gen g(5);
    for (int i = 0; i < 20; ++i) {
        MinkVec c = g.h2_point(1.0), x = g.h2_point(2.0);
        cplx z = disc_coordinate(x, c);
        CHECK(std::norm(z) < 1.0);
        CHECK((from_disc(z, c) - x).norm() < 1e-11 * x.z());
        // |dx| = e^eta |dz|
        double eps = 1e-6;
        MinkVec dx = (from_disc(z + eps, c) - from_disc(z - eps, c)) / (2 * eps);
        CHECK(mink_norm2(dx) == doctest::Approx(poincare_conformal_factor(z)).epsilon(1e-6));
        KleinChart C(c, 0.5, 0.5);
        Mat2 R = conformal_rotation(C.point_frame(C.chart_coords(x)), c);
        CHECK(testutil::max_abs(R.transpose() * R - Mat2::Identity()) < 1e-10);
        CHECK(R.determinant() == doctest::Approx(1.0));
    }
}

TEST_CASE("potential round trip on the grid") {
    double rt[2], fit[2];
    int i = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        KleinChart C(kBase, h, 0.3);
        auto u0 = sample(C, smooth_u);
        auto b = hess_minus_id(u0, C);
        auto P = potential_from_codazzi(b, C);
        auto u = P.u();
        CHECK(u[C.index(0, 0)] == 0.0);
        rt[i] = max_diff(hess_minus_id(u, C), b);
        ScalarField d(u.size());
        for (std::size_t n = 0; n < u.size(); ++n) d[n] = u[n] - u0[n];
        recover_linear(d, C, &fit[i]);
        ++i;
    }
    CHECK(rt[1] < 5e-3);
    CHECK(rt[0] / rt[1] > 2.5);
    CHECK(fit[1] < 2e-4);
    CHECK(fit[0] / fit[1] > 2.5);
}

TEST_CASE("analytic potential differs from the source by a linear potential") {
    KleinChart C(kBase, 1.0 / 32, 0.3);
    auto P = potential_from_codazzi(trivial_tensor(smooth_jet), C);
    CHECK(P.path_residual() < 1e-10);
    auto u = P.u(), u0 = sample(C, smooth_u);
    ScalarField d(u.size());
    for (std::size_t n = 0; n < u.size(); ++n) d[n] = u[n] - u0[n];
    double fit = 1.0;
    recover_linear(d, C, &fit);
    CHECK(fit <= 1e-8);
    // off-grid evaluation agrees with the source up to the same linear potential
    MinkVec t = recover_linear(d, C);
    testutil::Gen g(3);
    for (int i = 0; i < 20; ++i) {
        Vec2 k(g.uniform(-0.45, 0.45), g.uniform(-0.45, 0.45));
        MinkVec x = C.dev(k);
        CHECK(std::abs(P.u_at(x) - smooth_u(x) - mink_dot(t, x)) < 1e-9);
    }
}

TEST_CASE("minus identity integrates to the constant one") {
    KleinChart C(kBase, 1.0 / 64, 0.3);
    auto P = potential_from_codazzi(OperatorField(C.size(), -Mat2::Identity()), C);
    auto u = P.u();
    for (double& v : u) v -= 1.0;
    double fit = 1.0;
    recover_linear(u, C, &fit);
    CHECK(fit < 1e-8);
}

TEST_CASE("non-Codazzi input is rejected") {
    KleinChart C(kBase, 1.0 / 32, 0.3);
    Mat2 d;
    d << 1.0, 0.0, 0.0, 2.0;
    CHECK_THROWS_WITH_AS(potential_from_codazzi(OperatorField(C.size(), d), C), doctest::Contains("not Codazzi"),
                         GeometryError);
    OperatorFn f = [&](const PointFrame&) { return d; };
    CHECK_THROWS_AS(potential_from_codazzi(f, C), GeometryError);
}

TEST_CASE("equivariant generator") {
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    auto pts = near_centre(30, 17);
    KleinChart C(kE3, 1.0 / 32, 0.04);

    SUBCASE("equivariance holds exactly") {
        for (const auto& t : B.h1) {
            EquivariantGenerator E(G, t, 4.0);
            CHECK(E.equivariance_residual(pts) < 1e-11);
        }
    }
    SUBCASE("zero cocycle gives zero") {
        EquivariantGenerator E(G, TransCocycle{});
        auto D = delta_extract(E.tensor(), C, G);
        CHECK(D.t.vec().norm() < 1e-12);
    }
    SUBCASE("coboundaries are invisible in H1") {
        TransCocycle t = coboundary_cocycle(MinkVec(0.4, -0.3, 0.2), G);
        EquivariantGenerator E(G, t);
        auto D = delta_extract(E.tensor(), C, G);
        CHECK(B.h1_coords(D.t).norm() < 1e-8);
    }
    SUBCASE("basis round trip") {
        for (const auto& t : B.h1) {
            EquivariantGenerator E(G, t);
            auto D = delta_extract(E.tensor(), C, G);
            CHECK(D.samples >= 40);
            CHECK(D.fit_residual <= 1e-8);
            CHECK(D.relator_defect < 1e-8);
            CHECK(B.h1_coords(D.t - t).norm() < 1e-6);
        }
    }
}

TEST_CASE("delta of trivial tensors vanishes and delta is linear") {
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    KleinChart C(kE3, 1.0 / 32, 0.04);
    QuotientFunction U(G, {h2_point_polar(0.5, 0.3), h2_point_polar(1.1, 2.0)}, {1.0, -0.7}, 1.0);
    auto D0 = delta_extract(U.tensor(), C, G);
    CHECK(B.h1_coords(D0.t).norm() < 1e-8);

    EquivariantGenerator E1(G, B.h1[0]), E2(G, B.h1[3] * 0.5);
    OperatorFn b1 = E1.tensor(), b2 = E2.tensor(), bu = U.tensor();
    OperatorFn sum = [&](const PointFrame& F) { return b1(F) + b2(F) + bu(F); };
    auto d1 = delta_extract(b1, C, G), d2 = delta_extract(b2, C, G), ds = delta_extract(sum, C, G);
    CHECK((ds.t - d1.t - d2.t - D0.t).vec().norm() < 1e-8);
}

TEST_CASE("grid delta extraction") {
    SurfaceGroup G = build_genus2_octagon();
    CocycleBasis B = cocycle_basis(G);
    KleinChart C(kE3, 1.0 / 128, 0.03);
    EquivariantGenerator E(G, B.h1[2]);
    auto D = delta_extract(sample(C, E.tensor()), C, G);
    CHECK(D.fit_residual < 1e-5);
    CHECK(B.h1_coords(D.t - B.h1[2]).norm() < 1e-4);
}

TEST_CASE("side samples stay inside the radius") {
    SurfaceGroup G = build_genus2_octagon();
    for (int a = 0; a < 4; ++a) {
        auto s = side_samples(G, a, 0.94);
        CHECK(s.size() >= 10);
        for (const auto& x : s) {
            CHECK(klein_project(x, kE3).norm() <= 0.94);
            CHECK(klein_project(G.generators[a].inverse()(x), kE3).norm() <= 0.94);
        }
    }
}

TEST_CASE("developing section: closedness of iota_* b") {
    QuadDiffLocal q = sample_q();
    double r[2];
    int i = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        KleinChart C(kBase, h, 0.3);
        auto b = add(harmonic_tensor(q, C), sample(C, trivial_tensor(smooth_jet)));
        r[i++] = iota_closedness(b, C).max_within(C, 0.6);
        auto w = iota_star_form(b, C);
        for (std::size_t n = 0; n < C.size(); ++n) {
            CHECK(std::abs(mink_dot(w.on_e1[n], C.node(static_cast<int>(n)).x)) < 1e-10 * C.node(n).cosh_r);
            CHECK(std::abs(mink_dot(w.on_e2[n], C.node(static_cast<int>(n)).x)) < 1e-10 * C.node(n).cosh_r);
        }
    }
    CHECK(r[1] < 5e-3);
    CHECK(r[0] / r[1] > 3.3);
    CHECK(r[0] / r[1] < 4.7);

    KleinChart C(kBase, 1.0 / 64, 0.3);
    Mat2 d;
    d << 1.0, 0.0, 0.0, 2.0;
    CHECK(iota_closedness(OperatorField(C.size(), d), C).max > 0.1);
}

TEST_CASE("iota_* of a Hessian is exact") {
    // iota_* b = d(iota_* grad u - u x) with the flat derivative
    double r[2];
    int i = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        KleinChart C(kBase, h, 0.3);
        auto b = sample(C, trivial_tensor(smooth_jet));
        auto w = iota_star_form(b, C);
        std::vector<MinkVec> V(C.size());
        for (std::size_t n = 0; n < C.size(); ++n) {
            const ChartNode& nd = C.node(static_cast<int>(n));
            Jet u = smooth_jet(nd.x);
            // ambient gradient of u projected to T_x H2
            MinkVec g = eta() * u.d;
            g += mink_dot(g, nd.x) * nd.x;
            V[n] = g - u.v * nd.x;
        }
        double worst = 0.0;
        for (std::size_t n = 0; n < C.size(); ++n) {
            const ChartNode& nd = C.node(static_cast<int>(n));
            if (!C.has_collar(static_cast<int>(n), 1)) continue;
            MinkVec dX = (V[C.index(nd.i + 1, nd.j)] - V[C.index(nd.i - 1, nd.j)]) / (2 * h);
            MinkVec dY = (V[C.index(nd.i, nd.j + 1)] - V[C.index(nd.i, nd.j - 1)]) / (2 * h);
            // frame vectors in coordinates are the columns of E
            MinkVec d1 = nd.E(0, 0) * dX + nd.E(1, 0) * dY, d2 = nd.E(0, 1) * dX + nd.E(1, 1) * dY;
            worst = std::max({worst, frame_norm(d1 - w.on_e1[n], nd), frame_norm(d2 - w.on_e2[n], nd)});
        }
        r[i++] = worst;
    }
    CHECK(r[1] < 1e-2);
    CHECK(r[0] / r[1] > 3.3);
    CHECK(r[0] / r[1] < 4.7);
}

TEST_CASE("skew part splits off along the developing section") {
    KleinChart C(kBase, 1.0 / 64, 0.3);
    auto b = harmonic_tensor(sample_q(), C);
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        b[n](0, 1) += 0.3 * std::sin(nd.x.x());
        b[n](1, 0) -= 0.2 * nd.x.y();
    }
    auto lhs = iota_closedness_form(b, C), rhs = iota_splitting(b, C);
    double worst = 0.0, size = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), 2)) continue;
        worst = std::max(worst, frame_norm(lhs[n] - rhs[n], C.node(static_cast<int>(n))));
        size = std::max(size, frame_norm(rhs[n], C.node(static_cast<int>(n))));
    }
    CHECK(size > 0.1);
    CHECK(worst < 5e-3);
}

TEST_CASE("Poincare series") {
    SurfaceGroup G = build_genus2_octagon();
    double prev = 1e9;
    for (double depth : {6.0, 8.0, 10.0}) {
        PoincareSeries S(G, depth, 3);
        double worst = 0.0;
        for (int a = 0; a < 4; ++a)
            for (cplx z : {cplx(0.1, 0.2), cplx(-0.3, 0.1), cplx(0.0, 0.0)}) {
                // theta(alpha z) alpha'(z)^2 = theta(z)
                MinkVec x = from_disc(z, kE3);
                cplx w = disc_coordinate(G.generators[a](x), kE3);
                double e = 1e-6;
                cplx d = (disc_coordinate(G.generators[a](from_disc(z + e, kE3)), kE3) -
                          disc_coordinate(G.generators[a](from_disc(z - e, kE3)), kE3)) /
                         (2 * e);
                auto A = S.evaluate(z), Bv = S.evaluate(w);
                for (int k = 0; k <= 3; ++k) worst = std::max(worst, std::abs(Bv[k] * d * d - A[k]));
            }
        CHECK(worst < prev / 5.0);
        prev = worst;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("harmonic and trivial tensors are orthogonal over the octagon") {
    SurfaceGroup G = build_genus2_octagon();
    auto S = std::make_shared<PoincareSeries>(G, 10.0, 2);
    OctagonQuadrature Q(G, 8);
    KleinChart K(kE3, 0.5, 0.5);
    QuotientFunction U(G, {h2_point_polar(0.5, 0.3), h2_point_polar(1.2, 2.0)}, {1.0, -0.7}, 1.0);
    auto bu = U.tensor();
    std::vector<PointFrame> F;
    std::vector<Mat2> BU;
    std::vector<std::vector<cplx>> th;
    for (const auto& p : Q.points()) {
        F.push_back(K.point_frame(p.k));
        BU.push_back(bu(F.back()));
        th.push_back(S->evaluate(disc_coordinate(p.x, kE3)));
    }
    for (int k = 0; k <= 2; ++k) {
        double I = 0.0, N = 0.0, M = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i) {
            Mat2 b = harmonic_matrix(th[i][k], F[i], kE3);
            I += Q.points()[i].w * (J2() * b * BU[i]).trace();
            N += Q.points()[i].w * (b * b).trace();
            M += Q.points()[i].w * (BU[i] * BU[i]).trace();
        }
        CHECK(N > 0.01);
        CHECK(M > 0.01);
        CHECK(std::abs(I) < 5e-6);
    }
}
