#include "clab/pairing.hpp"

#include <cmath>
#include <fstream>

namespace clab {

PairingDomain::PairingDomain(const SurfaceGroup& G, int order, int refine)
    : Q_(G, order, refine), order_(order), refine_(refine) {
    KleinChart K(G.center(), 0.5, 0.5);
    frames_.reserve(Q_.points().size());
    for (const QuadPoint& p : Q_.points()) frames_.push_back(K.point_frame(p.k));
}

OperatorField PairingDomain::sample(const OperatorFn& b) const {
    OperatorField out(frames_.size());
    for (std::size_t i = 0; i < frames_.size(); ++i) out[i] = b(frames_[i]);
    return out;
}

namespace {

void check_sizes(const OperatorField& b, const OperatorField& bp, const PairingDomain& D) {
    if (b.size() != D.size() || bp.size() != D.size())
        throw std::invalid_argument("operator fields do not match the quadrature");
}

}  // namespace

double trace_pairing(const OperatorField& b, const OperatorField& bp, const PairingDomain& D) {
    check_sizes(b, bp, D);
    const auto& P = D.quadrature().points();
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) s += P[i].w * (J2() * b[i] * bp[i]).trace();
    return s;
}

double wedge_density(const Mat2& b, const Mat2& bp, const PointFrame& F) {
    auto on = [&](const Mat2& m, int c) -> MinkVec { return m(0, c) * F.f1 + m(1, c) * F.f2; };
    return 0.5 * (mink_dot(on(b, 0), on(bp, 1)) - mink_dot(on(b, 1), on(bp, 0)));
}

double omega_F_wedge(const OperatorField& b, const OperatorField& bp, const PairingDomain& D) {
    check_sizes(b, bp, D);
    const auto& P = D.quadrature().points();
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) s += P[i].w * wedge_density(b[i], bp[i], D.frames()[i]);
    return s;
}

double b_form(const Mat3& X, const Mat3& Y) {
    if (!is_mink_skew(X, 1e-10) || !is_mink_skew(Y, 1e-10))
        throw std::invalid_argument("b_form: argument is not in so(2,1)");
    return 0.25 * (X * Y).trace();
}

namespace {

void require_cocycle(const TransCocycle& t, const SurfaceGroup& G) {
    if (cocycle_relator_defect(t, G) > 1e-9 * (1.0 + t.vec().cwiseAbs().maxCoeff()))
        throw GeometryError("relator mismatch: argument is not a cocycle");
}

}  // namespace

double cup_boundary_sum(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G, CupForm form) {
    require_cocycle(t, G);
    require_cocycle(tp, G);
    std::array<MinkVec, 8> eta;
    for (int k = 0; k < 8; ++k) eta[k] = cocycle_extend(tp, G.vertex_word[k], G);
    double s = 0.0;
    for (int k = 0; k < 8; ++k) {
        MinkVec tg = cocycle_extend(t, G.side_word[k], G);
        MinkVec d = eta[(k + 1) % 8] - eta[k];
        s += form == CupForm::minkowski ? mink_dot(tg, d) : b_form(lambda_iso(tg), lambda_iso(d));
    }
    // each pair of sides is counted twice
    return 0.5 * s;
}

double group_cup_pairing(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G, CupForm form,
                         double normalization) {
    // the relator holds only to ~1e-11 in the generator matrices and the raw sum is antisymmetric and
    // blind to coboundaries only through it, so pair the H^1 parts and antisymmetrise
    require_cocycle(t, G);
    require_cocycle(tp, G);
    CocycleBasis B = cocycle_basis(G);
    TransCocycle a = B.h1_projection(t), c = B.h1_projection(tp);
    return normalization * 0.5 * (cup_boundary_sum(a, c, G, form) - cup_boundary_sum(c, a, G, form));
}

double calibrate_cup_normalization(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                                   const PairingDomain& D) {
    double raw = cup_boundary_sum(t, tp, G);
    if (std::abs(raw) < 1e-8) throw std::invalid_argument("calibration pair is degenerate");
    OperatorField b = D.sample(EquivariantGenerator(G, t).tensor());
    OperatorField bp = D.sample(EquivariantGenerator(G, tp).tensor());
    return omega_F_wedge(b, bp, D) / raw;
}

WPResidual wp_pointwise_identities(const QuadDiffLocal& q, const QuadDiffLocal& qp, const OperatorField& b,
                                   const KleinChart& C) {
    if (b.size() != C.size()) throw std::invalid_argument("operator field does not match the chart");
    const MinkVec& c = C.base();
    const cplx I(0.0, 1.0);
    WPResidual out;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!is_valid(b[n])) continue;
        const ChartNode& nd = C.node(n);
        PointFrame F{nd.x, nd.f1, nd.f2};
        cplx z = disc_coordinate(nd.x, c);
        double e2 = poincare_conformal_factor(z);
        cplx f = q.f(z), g = qp.f(z);
        Mat2 bq = harmonic_matrix(f, F, c);
        Mat2 bqp = harmonic_matrix(g, F, c);

        cplx lhs = f * std::conj(g) / e2;
        cplx rhs = 0.5 * cplx((bq * bqp).trace(), (J2() * bq * bqp).trace()) * e2;
        out.wp = std::max(out.wp, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        out.wp_imag_diag = std::max(out.wp_imag_diag, std::abs((J2() * bq * bq).trace()));

        Mat2 b0 = b[n] - 0.5 * b[n].trace() * Mat2::Identity();
        Mat2 R = conformal_rotation(F, c);
        Mat2 m = R.transpose() * b0 * R;
        cplx mu(m(0, 0), m(0, 1));
        // f dz^2 against mu dzbar/dz, as a multiple of dx ^ dy
        cplx contraction = -2.0 * I * f * mu;
        cplx form = cplx((J2() * b0 * bq).trace(), (b0 * bq).trace()) * e2;
        out.cont = std::max(out.cont, std::abs(contraction + form) / std::max(1.0, std::abs(contraction)));
        ++out.nodes;
    }
    return out;
}

RouteAgreement agree(double a, double b, double scale) {
    double s = std::max({std::abs(a), std::abs(b), scale});
    return {a, b, s > 0.0 ? std::abs(a - b) / s : 0.0};
}

bool PairingReport::ratio_ok() const {
    if (degenerate) return true;
    return std::abs(ratio_cup - 0.125) <= tol * 0.125 && std::abs(ratio_trace - 0.125) <= 1e-12;
}

nlohmann::json PairingReport::to_json() const {
    auto route = [](const RouteAgreement& r) { return nlohmann::json{{"a", r.a}, {"b", r.b}, {"rel", r.rel}}; };
    nlohmann::json j{{"cup_minkowski", cup_minkowski},
                     {"omega_B_cup", cup_b},
                     {"omega_F_wedge", wedge},
                     {"trace_integral", trace},
                     {"omega_B_trace", trace_b},
                     {"omega_WP", omega_wp},
                     {"degenerate", degenerate},
                     {"cup_vs_wedge", route(cup_vs_wedge)},
                     {"wedge_vs_trace", route(wedge_vs_trace)},
                     {"cup_vs_trace", route(cup_vs_trace)},
                     {"normalization", normalization},
                     {"quadrature", {{"order", order}, {"refine", refine}, {"points", points}}},
                     {"tol", tol},
                     {"ratio_ok", ratio_ok()}};
    if (degenerate) {
        j["ratio_cup"] = nullptr;
        j["ratio_trace"] = nullptr;
    } else {
        j["ratio_cup"] = ratio_cup;
        j["ratio_trace"] = ratio_trace;
    }
    return j;
}

PairingReport goldman_wp_report(const TransCocycle& t, const TransCocycle& tp, const OperatorField& b,
                                const OperatorField& bp, const SurfaceGroup& G, const PairingDomain& D, double tol,
                                double degenerate_tol) {
    PairingReport r;
    r.cup_minkowski = group_cup_pairing(t, tp, G, CupForm::minkowski);
    r.cup_b = group_cup_pairing(t, tp, G, CupForm::b_lambda);
    r.wedge = omega_F_wedge(b, bp, D);
    r.trace = trace_pairing(b, bp, D);
    r.trace_b = 0.25 * r.trace;
    r.omega_wp = 2.0 * r.trace;
    r.degenerate = std::abs(r.cup_b) < degenerate_tol && std::abs(r.trace) < degenerate_tol;
    if (!r.degenerate && r.omega_wp != 0.0) {
        r.ratio_cup = r.cup_b / r.omega_wp;
        r.ratio_trace = r.trace_b / r.omega_wp;
    } else {
        r.degenerate = true;
    }
    r.cup_vs_wedge = agree(r.cup_minkowski, r.wedge);
    r.wedge_vs_trace = agree(r.wedge, 0.5 * r.trace);
    r.cup_vs_trace = agree(r.cup_b, r.trace_b);
    r.order = D.order();
    r.refine = D.refine();
    r.points = D.size();
    r.tol = tol;
    return r;
}

PairingReport goldman_wp_report(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                                const PairingDomain& D, double tol, double degenerate_tol) {
    OperatorField b = D.sample(EquivariantGenerator(G, t).tensor());
    OperatorField bp = D.sample(EquivariantGenerator(G, tp).tensor());
    return goldman_wp_report(t, tp, b, bp, G, D, tol, degenerate_tol);
}

std::vector<OperatorField> sample_generators(const std::vector<TransCocycle>& basis, const SurfaceGroup& G,
                                             const PairingDomain& D) {
    std::vector<OperatorField> out;
    out.reserve(basis.size());
    for (const TransCocycle& t : basis) out.push_back(D.sample(EquivariantGenerator(G, t).tensor()));
    return out;
}

PairingMatrices pairing_matrices(const std::vector<TransCocycle>& basis, const std::vector<OperatorField>& b,
                                 const SurfaceGroup& G, const PairingDomain& D) {
    const int n = static_cast<int>(basis.size());
    PairingMatrices M;
    M.cup = M.wedge = M.half_trace = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            M.cup(i, j) = group_cup_pairing(basis[i], basis[j], G);
            M.wedge(i, j) = omega_F_wedge(b[i], b[j], D);
            M.half_trace(i, j) = 0.5 * trace_pairing(b[i], b[j], D);
        }
    double scale = std::max({M.cup.cwiseAbs().maxCoeff(), M.wedge.cwiseAbs().maxCoeff(), 1e-300});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double worst = std::max({std::abs(M.cup(i, j) - M.wedge(i, j)), std::abs(M.wedge(i, j) - M.half_trace(i, j)),
                                     std::abs(M.cup(i, j) - M.half_trace(i, j))});
            M.max_rel = std::max(M.max_rel, worst / scale);
        }
    return M;
}

void write_matrices_csv(const std::string& path, const PairingMatrices& M) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "route,i,j,value\n";
    auto dump = [&](const char* name, const Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) out << name << ',' << i << ',' << j << ',' << m(i, j) << '\n';
    };
    dump("cup", M.cup);
    dump("wedge", M.wedge);
    dump("half_trace", M.half_trace);
}

}  // namespace clab
