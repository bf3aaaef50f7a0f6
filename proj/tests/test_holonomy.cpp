#include <doctest.h>

#include "clab/holonomy.hpp"
#include "test_util.hpp"

#include <numbers>

using namespace clab;

namespace {

const SurfaceGroup& group() {
    static const SurfaceGroup G = build_genus2_octagon();
    return G;
}

Word random_word(testutil::Gen& g, int len) {
    std::vector<Letter> l;
    for (int i = 0; i < len; ++i)
        l.push_back({static_cast<int>(g.uniform(0, 4)), g.uniform(0, 1) < 0.5 ? 1 : -1});
    return Word(l);
}

TransCocycle random_z1(testutil::Gen& g, const CocycleBasis& B) {
    CocycleVec v = CocycleVec::Zero();
    for (const auto& z : B.z1) v += g.uniform(-1, 1) * z.vec();
    return TransCocycle::from_vec(v);
}

}  // namespace

TEST_CASE("word reduction") {
    Word w({{0, 1}, {1, 1}, {1, -1}, {0, -1}, {2, 1}});
    CHECK(w.size() == 1);
    CHECK((w * w.inverse()).empty());
    CHECK_THROWS_AS(Word({{4, 1}}), GeometryError);
}

TEST_CASE("octagon construction") {
    const SurfaceGroup& G = group();
    CHECK(G.relator_defect() <= 1e-10);
    for (double a : octagon_vertex_angles(G)) CHECK(std::abs(a - std::numbers::pi / 4.0) < 1e-8);
    CHECK(std::abs(std::cosh(octagon_circumradius()) - (3.0 + 2.0 * std::sqrt(2.0))) < 1e-12);
    for (int k = 0; k < 8; ++k) {
        LinIsom w = G.evaluate(G.side_word[k]);
        int p = G.partner[k];
        CHECK((w(G.vertices[p]) - G.vertices[(k + 1) % 8]).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((w(G.vertices[(p + 1) % 8]) - G.vertices[k]).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(LinIsom::isometry_defect(w.matrix()) < 1e-12);
    }
    // the octagon centre maps to a point at distance twice the inradius
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(h2_distance(G.generators[i](G.center()), G.center()) - 2.0 * octagon_inradius()) < 1e-12);
}

TEST_CASE("octagon area by Gauss-Bonnet for the polygon") {
    double sum = 0.0;
    for (double a : octagon_vertex_angles(group())) sum += a;
    CHECK(std::abs((6.0 * std::numbers::pi - sum) - 4.0 * std::numbers::pi) < 1e-8);
}

TEST_CASE("json round trip") {
    const SurfaceGroup& G = group();
    SurfaceGroup H = surface_group_from_json(to_json(G));
    for (int i = 0; i < 4; ++i)
        CHECK(testutil::max_abs(H.generators[i].matrix() - G.generators[i].matrix()) == 0.0);
    TransCocycle t;
    t.values[2] = MinkVec(0.25, -1.5, 3.0);
    CHECK((cocycle_from_json(to_json(t)).vec() - t.vec()).norm() == 0.0);
}

TEST_CASE("cocycle basis dimensions") {
    const SurfaceGroup& G = group();
    CocycleBasis B = cocycle_basis(G);
    CHECK(B.z1.size() == 9);
    CHECK(B.b1.size() == 3);
    CHECK(B.h1.size() == 6);
    CHECK(B.orthogonality_residual <= 1e-10);
    for (const auto& b : B.b1) CHECK(cocycle_relator_defect(b, G) < 1e-10);
    for (const auto& z : B.z1) CHECK(cocycle_relator_defect(z, G) < 1e-10);
}

TEST_CASE("cocycle extension") {
    const SurfaceGroup& G = group();
    CocycleBasis B = cocycle_basis(G);
    testutil::Gen g(21);
    for (int trial = 0; trial < 20; ++trial) {
        TransCocycle t = random_z1(g, B);
        CHECK(cocycle_extend(t, Word(), G).norm() == 0.0);
        Word a = random_word(g, 1 + trial % 5);
        MinkVec ta = cocycle_extend(t, a, G);
        MinkVec tai = cocycle_extend(t, a.inverse(), G);
        double sa = G.evaluate(a).matrix().norm();
        CHECK((tai + G.evaluate(a).inverse()(ta)).cwiseAbs().maxCoeff() < 1e-14 * sa * sa * t.vec().norm());
        // appending the relator (not freely reducible) gives the same element
        Word u = random_word(g, 1), v = random_word(g, 2);
        CHECK((cocycle_extend(t, u, G) - cocycle_extend(t, u * G.relator, G)).cwiseAbs().maxCoeff() < 1e-9);
        // inside a word the representation defect of the relator is amplified by |rho(u)| |t_v|
        MinkVec plain = cocycle_extend(t, u * v, G);
        MinkVec with_rel = cocycle_extend(t, u * G.relator * v, G);
        double amp = G.evaluate(u).matrix().norm() * (1.0 + cocycle_extend(t, v, G).norm());
        CHECK((plain - with_rel).cwiseAbs().maxCoeff() < 1e-9 * amp);
        // linear combinations stay cocycles
        TransCocycle s = t * 0.7 + random_z1(g, B) * (-1.3);
        CHECK(cocycle_relator_defect(s, G) < 1e-10);
    }
}

TEST_CASE("cocycle equivariance under conjugation") {
    const SurfaceGroup& G = group();
    CocycleBasis B = cocycle_basis(G);
    testutil::Gen g(22);
    TransCocycle t = random_z1(g, B);
    Mat3 A = so21_exp(MinkVec(0.3, -0.2, 0.5));
    Mat3 Ai = eta() * A.transpose() * eta();
    SurfaceGroup H = G;
    TransCocycle s;
    for (int i = 0; i < 4; ++i) {
        H.generators[i] = LinIsom::unchecked(A * G.generators[i].matrix() * Ai);
        s.values[i] = A * t.values[i];
    }
    Word w = random_word(g, 7);
    CHECK((cocycle_extend(s, w, H) - A * cocycle_extend(t, w, G)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("coboundaries") {
    const SurfaceGroup& G = group();
    CocycleBasis B = cocycle_basis(G);
    CHECK(coboundary_cocycle(MinkVec::Zero(), G).vec().norm() == 0.0);
    testutil::Gen g(23);
    for (int i = 0; i < 10; ++i) {
        TransCocycle c = coboundary_cocycle(g.vec(1.0).normalized(), G);
        CHECK(cocycle_relator_defect(c, G) < 1e-10);
        CHECK(B.h1_coords(c).cwiseAbs().maxCoeff() <= 1e-10);
    }
    // injectivity: the coboundary map has trivial kernel
    Eigen::Matrix<double, 12, 3> C;
    for (int i = 0; i < 3; ++i) C.col(i) = coboundary_cocycle(MinkVec::Unit(i), G).vec();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    CHECK(svd.singularValues()(2) > 0.1);
}

TEST_CASE("peripheral reduction") {
    MinkVec e3(0, 0, 1);
    LinIsom R = elliptic_rotation(e3, std::numbers::pi / 2.0);
    PeripheralResult r = peripheral_reduction(MinkVec(1, 0, 0), R);
    CHECK(r.trivial);
    CHECK((r.t0 - MinkVec(-0.5, -0.5, 0.0)).norm() < 1e-14);
    PeripheralResult d = peripheral_reduction(e3, R);
    CHECK_FALSE(d.trivial);
    CHECK(std::abs(d.defect - 1.0) < 1e-14);
    CHECK(peripheral_reduction(MinkVec::Zero(), R).t0.norm() == 0.0);
    CHECK_THROWS_AS(peripheral_reduction(MinkVec(1, 0, 0), elliptic_rotation(e3, 2.0 * std::numbers::pi)),
                    GeometryError);
    testutil::Gen g(24);
    for (int i = 0; i < 20; ++i) {
        MinkVec p = g.h2_point(1.5);
        LinIsom Q = elliptic_rotation(p, g.uniform(0.2, 6.0));
        MinkVec t = g.vec(2.0);
        t += mink_dot(t, p) * p;
        PeripheralResult res = peripheral_reduction(t, Q);
        REQUIRE(res.trivial);
        CHECK((Q(res.t0) - res.t0 - t).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("holonomy variation") {
    const SurfaceGroup& G = group();
    AdCocycle c = holonomy_variation([&](double) { return G; }, 1e-3);
    for (const Mat3& m : c.values) CHECK(testutil::max_abs(m) < 1e-12);

    CocycleBasis B = cocycle_basis(G);
    MinkVec gen(0.3, -0.4, 0.2);
    GroupFamily conj = [&](double s) {
        SurfaceGroup H = G;
        Mat3 E = so21_exp(gen, s);
        Mat3 Ei = eta() * E.transpose() * eta();
        for (int i = 0; i < 4; ++i) H.generators[i] = LinIsom::from_matrix(E * G.generators[i].matrix() * Ei, 1e-10);
        return H;
    };
    AdCocycle cc = holonomy_variation(conj, 1e-3);
    TransCocycle tc = cc.as_translation();
    // derivative of the conjugated family is the coboundary of -gen
    CHECK((tc.vec() - coboundary_cocycle(-gen, G).vec()).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(B.h1_coords(tc).cwiseAbs().maxCoeff() < 1e-5);

    GroupFamily tw = twist_family(G);
    CHECK(tw(0.3).relator_defect() < 1e-9);
    AdCocycle a1 = holonomy_variation(tw, 2e-2);
    AdCocycle a2 = holonomy_variation(tw, 1e-2);
    double ratio = a1.cocycle_residual / a2.cocycle_residual;
    CHECK(ratio > 3.3);
    CHECK(ratio < 4.7);
    TransCocycle tt = a2.as_translation();
    CHECK(cocycle_relator_defect(tt, G) < 1e-3);
    CHECK(B.h1_coords(tt).norm() > 0.1);
}

TEST_CASE("element enumeration") {
    const SurfaceGroup& G = group();
    ElementList L(G, 6.0);
    int inside = 0;
    for (const auto& e : L.elements())
        if (e.dist <= 6.0) ++inside;
    // orbit count against the area of the disc divided by the area of the octagon
    double expected = 2.0 * std::numbers::pi * (std::cosh(6.0) - 1.0) / (4.0 * std::numbers::pi);
    CHECK(inside > 0.6 * expected);
    CHECK(inside < 1.4 * expected);
    testutil::Gen g(25);
    CocycleBasis B = cocycle_basis(G);
    TransCocycle t = random_z1(g, B);
    auto vals = L.cocycle_values(t, G);
    for (std::size_t i = 0; i < L.size(); i += 97) {
        Word w = L.word(i);
        CHECK(testutil::max_abs(G.evaluate(w).matrix() - L.elements()[i].m.matrix()) < 1e-8 * std::cosh(L.elements()[i].dist));
        CHECK((cocycle_extend(t, w, G) - vals[i]).cwiseAbs().maxCoeff() < 1e-8 * std::cosh(L.elements()[i].dist));
    }
}
