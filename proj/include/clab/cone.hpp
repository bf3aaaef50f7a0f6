#pragma once

#include "clab/codazzi.hpp"

#include <json.hpp>

namespace clab {

class ConeAngle {
public:
    // theta0 in (0, 2pi)
    explicit ConeAngle(double theta0);
    double theta0() const { return theta0_; }
    double beta() const;
    // theta0 / 2pi
    double ratio() const;
    // (-1 - 2 beta) / (1 + beta): growth of |b_q| for a simple pole
    double alpha() const;

private:
    double theta0_;
};

// e^{2 xi} |z|^{2 beta} of the hyperbolic cone metric; beta = 0 gives 4/(1-|z|^2)^2
double cone_conformal_factor(double beta, double absz);
// r = log((1 + |z|^{1/k})/(1 - |z|^{1/k})), k = 2pi/theta0
double radius_from_conformal(double absz, const ConeAngle& a);
double conformal_from_radius(double r, const ConeAngle& a);

enum class ConeKind { polar, conformal, klein };

struct ConeNode {
    int i = 0;
    int j = 0;
    double r = 0.0;
    double phi = 0.0;    // lifted polar angle, period 2pi
    double theta = 0.0;  // angle in the developed picture, theta0 phi / 2pi
    MinkVec x;           // developing map
};

// punctured disc r in [eps, r0] on a grid uniform in s = log(native radius) and in phi;
// columns cover phi in [-2pi, 4pi] so each period has a full stencil on both sides.
// native radius: r (polar), |z| (conformal), tanh r (klein)
class ConeChart {
public:
    ConeChart(const ConeAngle& a, ConeKind kind, double eps, double r0, int rings, int nphi);

    const ConeAngle& angle() const { return a_; }
    ConeKind kind() const { return kind_; }
    double eps() const { return eps_; }
    double r0() const { return r0_; }
    int rings() const { return rings_; }
    int nphi() const { return nphi_; }
    int columns() const { return 3 * nphi_ + 1; }
    // column of phi = 0; columns [first_column, first_column + nphi) are one period
    int first_column() const { return nphi_; }
    double ds() const { return ds_; }
    double dphi() const;
    std::size_t size() const { return nodes_.size(); }
    int index(int i, int j) const { return i * columns() + j; }
    const ConeNode& node(int idx) const { return nodes_[idx]; }
    const std::vector<ConeNode>& nodes() const { return nodes_; }

    double s(int i) const { return s0_ + i * ds_; }
    double r(int i) const { return ring_r_[i]; }
    double phi(int j) const;
    double native(double r) const;
    double r_of_s(double s) const;
    // dr/ds and d2r/ds2
    std::pair<double, double> r_derivatives(double s) const;

    MinkVec dev(double r, double phi) const;
    // elliptic rotation by theta0 about e3: dev(r, phi + 2pi) = deck(dev(r, phi))
    LinIsom deck() const;

    // coordinate metrics in (s, phi)
    Mat2 metric(int i) const;
    Mat2 h_metric(int i) const;
    Mat2 klein_metric(int i) const;

private:
    ConeAngle a_;
    ConeKind kind_;
    double eps_, r0_;
    int rings_, nphi_;
    double s0_, ds_;
    std::vector<double> ring_r_;
    std::vector<ConeNode> nodes_;
};

ConeChart cone_chart(const ConeAngle& a, ConeKind kind, double eps, double r0 = 1.0, int rings = 160,
                     int nphi = 128);
ConeChart klein_cone_chart(const ConeAngle& a, double eps, double r0 = 1.0, int rings = 160, int nphi = 128);

// length of each ring over one period in the chart metric
std::vector<double> ring_circumference(const ConeChart& C);
// Gauss curvature of the chart metric per ring by centred differences in s; NaN at the ends
std::vector<double> ring_curvature(const ConeChart& C);

struct BiLipschitz {
    double lower = 0.0;
    double upper = 0.0;
};
// lower |v|_gK <= |v|_h <= upper |v|_gK over the chart
BiLipschitz klein_bilipschitz(const ConeChart& C);

// b in the frame (e_r, e_phi / |e_phi|) as a function of (r, phi)
using ConeFn = std::function<Mat2(double r, double phi)>;

OperatorField sample(const ConeChart& C, const ConeFn& b);
// Hess u - u I in the frame (e_r, e_phi/|e_phi|) from centred differences; NaN on the boundary
OperatorField cone_hess_minus_id(const ScalarField& u, const ConeChart& C);
// Euclidean Hessian of ubar for g_K in the basis (d/drho, d/dtheta)
std::vector<Mat2> klein_flat_hessian(const ScalarField& ubar, const ConeChart& C);
// flat Hessian predicted from b at radius r: cosh^3 b_rr, cosh sinh b_rt, sinh^2 b_tt / cosh
Mat2 flat_from_frame(const Mat2& b, double r);
// max |D^2 ubar - flat_from_frame(Hess u - u I)| in g_K-orthonormal components, over r <= rmax
double kleincorr_residual(const ScalarField& u, const ConeChart& C, double rmax = 1e300);

struct PowerFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double r2 = 0.0;
};
// least squares of log y against log x
PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y);

enum class ConeClass { not_l2, l2, bounded, vanishing };
const char* to_string(ConeClass c);

struct HarmonicCone {
    OperatorField b;
    ConeFn fn;
    int lowest_power = 0;
    double predicted_exponent = 0.0;  // |b_q| ~ r^e near the tip
    PowerFit fit;                     // sup of |b_q| per ring against r over the innermost decade
    ConeClass cls = ConeClass::l2;
};

// b_q = lambda^-1 [[Re f, -Im f], [-Im f, -Re f]] in the conformal frame, rotated to the polar frame
ConeFn harmonic_tensor_cone(const QuadDiffLocal& q, const ConeAngle& a);
HarmonicCone harmonic_tensor_cone(const QuadDiffLocal& q, const ConeChart& C);

// int_{r > eps} |b|^2 dA over one period
double cone_l2_norm2(const OperatorField& b, const ConeChart& C, double eps);
// max |b| over rings with r <= rmax
double cone_sup_within(const OperatorField& b, const ConeChart& C, double rmax);

struct LipschitzFit {
    double c5 = 0.0;
    double c6 = 0.0;
    double rel_misfit = 0.0;
};

struct ConePotential {
    ScalarField u;
    ScalarField ubar;
    VectorField grad;  // flat gradient of ubar, developed into the plane
    ScalarField f;     // grad . X - ubar
    double path_residual = 0.0;
    MinkVec t = MinkVec::Zero();  // u(R x) - u(x) = <t, R x>
    double fit_residual = 0.0;
    PeripheralResult reduction;
    std::vector<double> circle_integral;  // per ring, int_{c_r} du
    PowerFit circle_fit;                  // over the innermost decade
    std::vector<double> du_sup;           // per ring, sup |du|_h
    LipschitzFit lipschitz;               // du_sup against c5 + c6 r^{alpha+1}
};

// integrates the flat Hessian of u/cosh r in developed Klein polar coordinates from the base ring;
// throws when the two sweep orders disagree by more than tol
ConePotential peripheral_potential(const ConeFn& b, const ConeChart& C, double tol = 1e-6,
                                   double alpha = 0.0);
ConePotential peripheral_potential(const OperatorField& b, const ConeChart& C, double tol = 1e-2,
                                   double alpha = 0.0);
// adds <t0, x>, making u periodic
ConePotential make_periodic(const ConePotential& P, const ConeChart& C);

struct ConeAngleMeasure {
    double theta = 0.0;
    double slope = 0.0;
    double misfit = 0.0;
    double radius_lo = 0.0;
    double radius_hi = 0.0;
    int samples = 0;
};

// metric in (s, phi) coordinates at every node; distance from the tip by ring marching,
// then the length of the level curve over a decade of radii, extrapolated linearly to 0
ConeAngleMeasure cone_angle_measure(const std::vector<Mat2>& metric, const ConeChart& C, double radius_lo = 0.0);

struct SingularEmbedding {
    ConePotential potential;  // periodic
    double conjugation = 0.0;  // max |phi(x at phi + 2pi) - R phi(x)|
    double lip_min = 0.0;      // extreme singular values of d phi from differences
    double lip_max = 0.0;
    double bound_lower = 0.0;  // a2
    double bound_upper = 0.0;  // a1 cosh^3 r0
    double unifdist = 0.0;     // min |phi(x)| / (a2 rho(x))
    double metric_error = 0.0;  // first fundamental form of (phi, f) against h(b., b.)
    double shape_error = 0.0;   // its shape operator against b^-1
    double f_tip = 0.0;
    PowerFit f_fit;             // |f - f_tip| against rho, innermost decade
    ConeAngleMeasure flat_angle;  // g(D^2 ubar ., D^2 ubar .)
    ConeAngleMeasure I_angle;     // h(b., b.)

    bool conjugation_ok(double tol = 1e-8) const { return conjugation <= tol; }
    bool bilipschitz_ok() const { return lip_min > bound_lower && lip_max < bound_upper; }
    bool unifdist_ok() const { return unifdist >= 1.0; }
    bool orthogonality_ok(double tol = 0.1) const { return f_fit.exponent >= 2.0 - tol && f_fit.r2 >= 0.99; }
};

// b bounded with a2 < b < a1 at every node (GeometryError otherwise)
SingularEmbedding singular_embedding(const ConeFn& b, const ConeChart& C, double a2, double a1);

struct WedgeSurgery {
    double theta = 0.0;
    double theta1 = 0.0;  // at p1 ~ p1'
    double theta2 = 0.0;  // at p2
    // interior angles of the quadrilateral p1 p p1' p2
    double at_p1 = 0.0, at_p = 0.0, at_p1p = 0.0, at_p2 = 0.0;
    Vec2 p1, p1p, p2;
    nlohmann::json describe() const;
};

// wedge with apex at the origin between the rays at angles 0 and theta; p1 at distance d1 on the
// first edge, p2 at distance d2 on the bisector
WedgeSurgery wedge_surgery(const ConeAngle& theta, double d1, double d2);

}  // namespace clab
