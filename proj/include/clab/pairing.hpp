#pragma once

#include "clab/codazzi.hpp"

#include <json.hpp>

#include <string>

namespace clab {

// quadrature points of the octagon with their frames
class PairingDomain {
public:
    explicit PairingDomain(const SurfaceGroup& G, int order = 8, int refine = 0);

    const OctagonQuadrature& quadrature() const { return Q_; }
    const std::vector<PointFrame>& frames() const { return frames_; }
    std::size_t size() const { return frames_.size(); }
    int order() const { return order_; }
    int refine() const { return refine_; }
    OperatorField sample(const OperatorFn& b) const;

private:
    OctagonQuadrature Q_;
    std::vector<PointFrame> frames_;
    int order_, refine_;
};

// int tr(J b b') dA
double trace_pairing(const OperatorField& b, const OperatorField& bp, const PairingDomain& D);

// <i_*b ^ i_*b'>(e1, e2) = (<i b e1, i b' e2> - <i b e2, i b' e1>) / 2 from ambient vectors
double wedge_density(const Mat2& b, const Mat2& bp, const PointFrame& F);
double omega_F_wedge(const OperatorField& b, const OperatorField& bp, const PairingDomain& D);

// tr(XY) / 4 on Minkowski-skew matrices
double b_form(const Mat3& X, const Mat3& Y);

enum class CupForm { minkowski, b_lambda };

// sum over the eight sides of <t_{g_k}, t'_{w_{k+1}} - t'_{w_k}> with g_k the side word and w_k the
// vertex words; equals int tr(J b b') for the equivariant tensors.  Throws when either cocycle
// misses the relator
double cup_boundary_sum(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                        CupForm form = CupForm::minkowski);

// frozen value of calibrate_cup_normalization on the fixture pair
constexpr double kCupNormalization = 0.5;

// normalization times the antisymmetrised boundary sum of the H^1 projections
double group_cup_pairing(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                         CupForm form = CupForm::minkowski, double normalization = kCupNormalization);

// omega_F_wedge / cup_boundary_sum for the equivariant tensors of t, t'
double calibrate_cup_normalization(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                                   const PairingDomain& D);

struct WPResidual {
    double wp = 0.0;    // max |f conj(g) e^{-2eta} - (tr(b b') + i tr(J b b'))/2 e^{2eta}|
    double cont = 0.0;  // max |q.Psi(b) + (tr(J b0 b_q) + i tr(b0 b_q)) e^{2eta}|
    double wp_imag_diag = 0.0;  // max |tr(J b_q b_q)|
    int nodes = 0;
};

// coefficients of dx ^ dy in the disc coordinate centred at the chart base
WPResidual wp_pointwise_identities(const QuadDiffLocal& q, const QuadDiffLocal& qp, const OperatorField& b,
                                   const KleinChart& C);

struct RouteAgreement {
    double a = 0.0;
    double b = 0.0;
    double rel = 0.0;
};
RouteAgreement agree(double a, double b, double scale = 0.0);

struct PairingReport {
    double cup_minkowski = 0.0;
    double cup_b = 0.0;     // omega^B, cup route
    double wedge = 0.0;     // omega^F
    double trace = 0.0;     // int tr(J b b')
    double trace_b = 0.0;   // omega^B = trace / 4
    double omega_wp = 0.0;  // 2 trace
    double ratio_cup = 0.0;
    double ratio_trace = 0.0;
    bool degenerate = false;
    RouteAgreement cup_vs_wedge;
    RouteAgreement wedge_vs_trace;
    RouteAgreement cup_vs_trace;
    double normalization = kCupNormalization;
    int order = 0;
    int refine = 0;
    std::size_t points = 0;
    double tol = 0.01;
    bool ratio_ok() const;
    nlohmann::json to_json() const;
};

PairingReport goldman_wp_report(const TransCocycle& t, const TransCocycle& tp, const SurfaceGroup& G,
                                const PairingDomain& D, double tol = 0.01, double degenerate_tol = 1e-8);
// same, reusing sampled tensors
PairingReport goldman_wp_report(const TransCocycle& t, const TransCocycle& tp, const OperatorField& b,
                                const OperatorField& bp, const SurfaceGroup& G, const PairingDomain& D,
                                double tol = 0.01, double degenerate_tol = 1e-8);

struct PairingMatrices {
    Eigen::MatrixXd cup;    // minkowski, calibrated
    Eigen::MatrixXd wedge;  // omega_F
    Eigen::MatrixXd half_trace;
    double max_rel = 0.0;   // worst off-diagonal disagreement, relative to the largest entry
};

// equivariant tensors sampled once per basis element
std::vector<OperatorField> sample_generators(const std::vector<TransCocycle>& basis, const SurfaceGroup& G,
                                             const PairingDomain& D);
PairingMatrices pairing_matrices(const std::vector<TransCocycle>& basis, const std::vector<OperatorField>& b,
                                 const SurfaceGroup& G, const PairingDomain& D);
void write_matrices_csv(const std::string& path, const PairingMatrices& M);

}  // namespace clab
