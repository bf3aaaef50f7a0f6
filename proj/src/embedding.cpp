#include "clab/embedding.hpp"

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <limits>

namespace clab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
T nan_of() {
    if constexpr (std::is_same_v<T, double>)
        return kNaN;
    else
        return T::Constant(kNaN);
}

// central difference of a node field along a coordinate axis; NaN at the rim
template <class T>
T cdiff(const std::vector<T>& f, const KleinChart& C, int n, int axis) {
    const ChartNode& nd = C.node(n);
    int p = axis == 0 ? C.index(nd.i + 1, nd.j) : C.index(nd.i, nd.j + 1);
    int m = axis == 0 ? C.index(nd.i - 1, nd.j) : C.index(nd.i, nd.j - 1);
    if (p < 0 || m < 0) return nan_of<T>();
    return T((f[p] - f[m]) / (2.0 * C.spacing()));
}

Residual collect(const ScalarField& vals, const KleinChart& C, int layers) {
    Residual r;
    r.pointwise.assign(C.size(), kNaN);
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), layers) || !is_valid(vals[n])) continue;
        r.pointwise[n] = vals[n];
        r.max = std::max(r.max, std::abs(vals[n]));
    }
    return r;
}

}  // namespace

EmbeddingData pair_to_data(const OperatorField& b) {
    EmbeddingData D;
    D.I.resize(b.size());
    D.s.resize(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) {
        if (!is_valid(b[n])) {
            D.I[n] = D.s[n] = Mat2::Constant(kNaN);
            continue;
        }
        if (std::abs(b[n].determinant()) < 1e-12) throw GeometryError("pair_to_data: b is not invertible");
        D.I[n] = b[n].transpose() * b[n];
        D.s[n] = b[n].inverse();
    }
    return D;
}

OperatorField data_to_pair(const EmbeddingData& D, std::vector<Mat2>* h) {
    OperatorField b(D.s.size());
    if (h) h->resize(D.s.size());
    for (std::size_t n = 0; n < D.s.size(); ++n) {
        if (!is_valid(D.s[n])) {
            b[n] = Mat2::Constant(kNaN);
            if (h) (*h)[n] = b[n];
            continue;
        }
        if (std::abs(D.s[n].determinant()) < 1e-12) throw GeometryError("data_to_pair: s is not invertible");
        b[n] = D.s[n].inverse();
        if (h) (*h)[n] = D.s[n].transpose() * D.I[n] * D.s[n];
    }
    return b;
}

bool uniformly_convex(const EmbeddingData& D, double M) {
    for (std::size_t n = 0; n < D.s.size(); ++n) {
        if (!is_valid(D.s[n]) || !is_valid(D.I[n])) continue;
        // eigenvalues of s as an I-self-adjoint map
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(D.I[n] * D.s[n], D.I[n]);
        if (es.eigenvalues()(0) <= 1.0 / M || es.eigenvalues()(1) >= M) return false;
    }
    return true;
}

Mat2 frame_form_to_coordinates(const Mat2& F, const ChartNode& nd) {
    Mat2 P = nd.E.transpose() * nd.g;  // frame components of the coordinate vectors
    return P.transpose() * F * P;
}

GaussCodazzi gauss_codazzi_residual(const EmbeddingData& D, const KleinChart& C, int layers) {
    std::vector<Mat2> Ic(C.size()), S(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        Ic[n] = frame_form_to_coordinates(D.I[n], nd);
        S[n] = to_coordinates(D.s[n], nd.E, nd.g);
    }
    ScalarField K = brioschi_curvature(Ic, C);
    ScalarField gauss(C.size(), kNaN), cod(C.size(), kNaN);
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        gauss[n] = D.s[n].determinant() + K[n];
        Mat2 dI[2] = {cdiff(Ic, C, m, 0), cdiff(Ic, C, m, 1)};
        Mat2 dS[2] = {cdiff(S, C, m, 0), cdiff(S, C, m, 1)};
        if (!dI[0].allFinite() || !dI[1].allFinite() || !dS[0].allFinite() || !dS[1].allFinite()) continue;
        Mat2 inv = Ic[n].inverse();
        // Gamma[c](a,b) of I
        std::array<Mat2, 2> Gm;
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double v = 0.0;
                    for (int d = 0; d < 2; ++d) v += inv(c, d) * (dI[a](d, b) + dI[b](d, a) - dI[d](a, b));
                    Gm[c](a, b) = 0.5 * v;
                }
        Vec2 V;
        for (int i = 0; i < 2; ++i) {
            double v = dS[0](i, 1) - dS[1](i, 0);
            for (int k = 0; k < 2; ++k) v += Gm[i](0, k) * S[n](k, 1) - Gm[i](1, k) * S[n](k, 0);
            V(i) = v;
        }
        double det = Ic[n].determinant();
        cod[n] = std::sqrt(V.dot(Ic[n] * V) / det);
    }
    return {collect(gauss, C, layers), collect(cod, C, layers)};
}

MinkVec immersion_at(const Potential& P, const Vec2& k) {
    auto [ub, g] = P.flat(k);
    MinkVec y(g.x(), g.y(), k.dot(g) - ub);
    return P.chart().iso()(y);
}

ImmersionField reconstruct_immersion(const Potential& P) {
    const KleinChart& C = P.chart();
    ImmersionField F;
    F.sigma.assign(C.size(), MinkVec::Constant(kNaN));
    F.G.resize(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        F.G[n] = nd.x;
        double ub = P.ubar()[n];
        if (!is_valid(ub)) continue;
        const Vec2& g = P.grad()[n];
        F.sigma[n] = C.iso()(MinkVec(g.x(), g.y(), nd.k.dot(g) - ub));
    }
    return F;
}

namespace {

void require_positive(const OperatorField& b) {
    for (const Mat2& m : b) {
        if (!is_valid(m)) continue;
        Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (m + m.transpose()));
        if (es.eigenvalues()(0) <= 0.0) throw GeometryError("reconstruct_immersion: b is not positive");
    }
}

}  // namespace

ImmersionField reconstruct_immersion(const OperatorField& b, const KleinChart& C) {
    require_positive(b);
    return reconstruct_immersion(potential_from_codazzi(b, C));
}

ImmersionField reconstruct_immersion(const OperatorFn& b, const KleinChart& C) {
    require_positive(sample(C, b));
    return reconstruct_immersion(potential_from_codazzi(b, C));
}

ImmersionGeometry immersion_geometry(const ImmersionField& F, const KleinChart& C) {
    ImmersionGeometry R;
    const std::size_t N = C.size();
    R.data.I.assign(N, Mat2::Constant(kNaN));
    R.data.s.assign(N, Mat2::Constant(kNaN));
    R.third.assign(N, Mat2::Constant(kNaN));
    R.normal.assign(N, MinkVec::Constant(kNaN));
    R.normal_defect.assign(N, kNaN);
    R.asymmetry.assign(N, kNaN);
    for (std::size_t n = 0; n < N; ++n) {
        int m = static_cast<int>(n);
        const ChartNode& nd = C.node(m);
        MinkVec sx = cdiff(F.sigma, C, m, 0), sy = cdiff(F.sigma, C, m, 1);
        MinkVec gx = cdiff(F.G, C, m, 0), gy = cdiff(F.G, C, m, 1);
        if (!sx.allFinite() || !sy.allFinite() || !gx.allFinite() || !gy.allFinite()) continue;
        // along the h-orthonormal frame
        MinkVec ds[2] = {nd.E(0, 0) * sx + nd.E(1, 0) * sy, nd.E(0, 1) * sx + nd.E(1, 1) * sy};
        MinkVec dG[2] = {nd.E(0, 0) * gx + nd.E(1, 0) * gy, nd.E(0, 1) * gx + nd.E(1, 1) * gy};
        Mat2 I;
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) I(a, c) = mink_dot(ds[a], ds[c]);
        if (!(I(0, 0) > 0.0) || !(I.determinant() > 0.0)) {
            ++R.non_spacelike;
            continue;
        }
        MinkVec nrm = box_product(ds[0], ds[1]);
        nrm /= std::sqrt(-mink_norm2(nrm));
        if (nrm.z() < 0.0) nrm = -nrm;
        R.normal[n] = nrm;
        R.normal_defect[n] = (nrm - F.G[n]).norm();
        // dG(e_a) = sum_c ds(e_c) S(c, a), solved in the I-inner product
        Mat2 rhs;
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) rhs(c, a) = mink_dot(ds[c], dG[a]);
        Mat2 S = I.inverse() * rhs;
        Mat2 M = I * S;
        R.asymmetry[n] = std::abs(M(0, 1) - M(1, 0)) / M.norm();
        M = 0.5 * (M + M.transpose());
        S = I.inverse() * M;
        R.data.I[n] = I;
        R.data.s[n] = S;
        R.third[n] = S.transpose() * I * S;
    }
    return R;
}

ImmersionField normal_flow(const OperatorField& b, const KleinChart& C, double t) {
    OperatorField bt(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) bt[n] = b[n] + t * Mat2::Identity();
    return reconstruct_immersion(bt, C);
}

ImmersionField normal_flow(const OperatorFn& b, const KleinChart& C, double t) {
    return reconstruct_immersion([b, t](const PointFrame& F) -> Mat2 { return b(F) + t * Mat2::Identity(); }, C);
}

double translation_spread(const std::vector<MinkVec>& a, const std::vector<MinkVec>& b, const KleinChart& C,
                          double klein_radius) {
    int base = C.index(0, 0);
    MinkVec c = a[base] - b[base];
    double r = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (C.node(static_cast<int>(n)).k.norm() > klein_radius) continue;
        MinkVec d = a[n] - b[n] - c;
        if (d.allFinite()) r = std::max(r, d.cwiseAbs().maxCoeff());
    }
    return r;
}

ImmersionHolonomy immersion_holonomy(const Potential& P, const SurfaceGroup& G, double tol) {
    const KleinChart& C = P.chart();
    const double rmax = C.radius() - (P.analytic() ? 1.0 : 4.0) * C.spacing();
    ImmersionHolonomy H;
    for (int a = 0; a < 4; ++a) {
        const LinIsom& A = G.generators[a];
        H.linear_defect = std::max(H.linear_defect, LinIsom::isometry_defect(A.matrix()));
        auto pts = side_samples(G, a, rmax);
        if (pts.size() < 10) throw GeometryError("too few sample points inside the chart");
        std::vector<MinkVec> ts;
        for (const auto& x : pts) {
            MinkVec y = A.inverse()(x);
            ts.push_back(immersion_at(P, C.chart_coords(x)) - A(immersion_at(P, C.chart_coords(y))));
        }
        MinkVec mean = MinkVec::Zero();
        for (const auto& t : ts) mean += t;
        mean /= static_cast<double>(ts.size());
        for (const auto& t : ts) H.fit_residual = std::max(H.fit_residual, (t - mean).cwiseAbs().maxCoeff());
        H.t.values[a] = mean;
        H.hol[a] = {A, mean};
    }
    if (!(H.fit_residual <= tol))
        throw GeometryError("immersion holonomy inconsistent: fit residual " + std::to_string(H.fit_residual));
    return H;
}

ImmersionHolonomy immersion_holonomy(const OperatorFn& b, const KleinChart& C, const SurfaceGroup& G, double tol) {
    return immersion_holonomy(potential_from_codazzi(b, C), G, tol);
}

void write_obj(const std::string& path, const ImmersionField& F) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    for (const auto& s : F.sigma)
        if (s.allFinite()) std::fprintf(f, "v %.17g %.17g %.17g\n", s.x(), s.y(), s.z());
    std::fclose(f);
}

}  // namespace clab
