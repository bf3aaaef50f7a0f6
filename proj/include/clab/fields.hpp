#pragma once

#include "clab/holonomy.hpp"
#include "clab/mink.hpp"

#include <functional>
#include <string>
#include <vector>

namespace clab {

// orthonormal oriented frame of T_x H2, as ambient vectors
struct PointFrame {
    MinkVec x;
    MinkVec f1;
    MinkVec f2;
};

// self-adjoint operator given pointwise in an orthonormal oriented frame
using OperatorFn = std::function<Mat2(const PointFrame&)>;
using ScalarFn = std::function<double(const MinkVec&)>;

using ScalarField = std::vector<double>;
using VectorField = std::vector<Vec2>;
using OperatorField = std::vector<Mat2>;

// rotation by +pi/2 in the oriented frame; agrees with x [x] v on H2
const Mat2& J2();

// Klein-coordinate geometry, independent of the base point
namespace klein {
Mat2 metric(const Vec2& k);
// Gram-Schmidt of (dX, dY) for the metric; columns are the frame vectors
Mat2 frame(const Vec2& k);
double area_density(const Vec2& k);
double cosh_r(const Vec2& k);
// gamma[c](a, b) = Gamma^c_ab
std::array<Mat2, 2> christoffel(const Vec2& k);
}  // namespace klein

struct ChartNode {
    int i = 0;
    int j = 0;
    Vec2 k;
    MinkVec x;
    Mat2 g;
    Mat2 E;
    MinkVec f1;
    MinkVec f2;
    double cosh_r = 1.0;
    double area = 0.0;  // sqrt(det g) * spacing^2
};

class KleinChart {
public:
    KleinChart(const MinkVec& base, double spacing, double margin);

    const MinkVec& base() const { return base_; }
    const LinIsom& iso() const { return iso_; }
    double spacing() const { return h_; }
    double radius() const { return radius_; }
    int half_width() const { return n_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<ChartNode>& nodes() const { return nodes_; }
    const ChartNode& node(int idx) const { return nodes_[idx]; }
    int index(int i, int j) const;
    // every node of the (2*layers+1)^2 box around idx exists
    bool has_collar(int idx, int layers) const;

    MinkVec dev(const Vec2& k) const;
    Vec2 chart_coords(const MinkVec& x) const;
    PointFrame point_frame(const Vec2& k) const;
    // ambient images of dX, dY
    Eigen::Matrix<double, 3, 2> dev_jacobian(const Vec2& k) const;

    // max |K + 1| over nodes at Klein radius <= r, from the sampled metric
    double curvature_defect(double r) const;

private:
    MinkVec base_;
    LinIsom iso_;
    double h_;
    double radius_;
    int n_;
    std::vector<int> lookup_;
    std::vector<ChartNode> nodes_;
};

ScalarField sample(const KleinChart& C, const ScalarFn& f);
OperatorField sample(const KleinChart& C, const OperatorFn& b);
bool is_valid(const Mat2& m);
bool is_valid(double v);

// b = Hess u - u I through the flat Hessian of u / cosh r; NaN where the stencil is incomplete
OperatorField hess_minus_id(const ScalarField& u, const KleinChart& C);
// same operator through Christoffel symbols
OperatorField hess_minus_id_covariant(const ScalarField& u, const KleinChart& C);

// frame operator -> coordinate endomorphism and back
Mat2 to_coordinates(const Mat2& b, const Mat2& E, const Mat2& g);
Mat2 to_frame(const Mat2& B, const Mat2& E, const Mat2& g);

struct Residual {
    double max = 0.0;
    ScalarField pointwise;  // NaN where not evaluated
    double max_within(const KleinChart& C, double klein_radius) const;
};

// |d^nabla b (e1, e2)| over nodes with a full collar of `layers`
Residual codazzi_residual(const OperatorField& b, const KleinChart& C, int layers = 2);
// d^nabla b(e1,e2) in frame components
VectorField codazzi_form(const OperatorField& b, const KleinChart& C);
// delta b in frame components
VectorField divergence(const OperatorField& b, const KleinChart& C);
Residual divergence_identity_residual(const OperatorField& b, const KleinChart& C, int layers = 2);
// L(b) = -(Lap - 1/2) tr b + delta delta b compared with tr b / 2
Residual lichnerowicz_residual(const OperatorField& b, const KleinChart& C, int layers = 3);

// Gauss curvature of a coordinate metric field by the Brioschi formula with central differences
ScalarField brioschi_curvature(const std::vector<Mat2>& metric, const KleinChart& C);

double max_norm(const OperatorField& b, const KleinChart& C, int layers = 2, double klein_radius = 2.0);
double max_norm(const ScalarField& f, const KleinChart& C, int layers = 2, double klein_radius = 2.0);
OperatorField traceless(const OperatorField& b);
OperatorField apply_J(const OperatorField& b);

// area-weighted node sum over the chart
double integrate(const ScalarField& f, const KleinChart& C);
// polar Gauss rule on the geodesic disc about the base point, f interpolated from the grid
double integrate_disc(const ScalarField& f, const KleinChart& C, double radius);
double interpolate(const ScalarField& f, const KleinChart& C, const Vec2& k, int order = 4);

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b);
// F_i = int_0^i f on unit spacing, sixth order where the line is long enough
std::vector<double> cumulative_integral(const std::vector<double>& f);

struct QuadPoint {
    Vec2 k;
    MinkVec x;
    double w = 0.0;
};

// fan of eight triangles from the centre, composite Gauss rule graded toward the vertices
class OctagonQuadrature {
public:
    explicit OctagonQuadrature(const SurfaceGroup& G, int order = 8, int refine = 0);
    const std::vector<QuadPoint>& points() const { return pts_; }
    double integrate(const std::function<double(const QuadPoint&)>& f) const;

private:
    std::vector<QuadPoint> pts_;
};

// node coordinates plus named columns
void write_csv(const std::string& path, const KleinChart& C, const std::vector<std::string>& names,
               const std::vector<ScalarField>& columns);

}  // namespace clab
