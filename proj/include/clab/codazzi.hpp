#pragma once

#include "clab/fields.hpp"
#include "clab/holonomy.hpp"
#include "clab/jet.hpp"

#include <complex>
#include <memory>

namespace clab {

using cplx = std::complex<double>;

// v(x) = <t, dev(x)>
ScalarField linear_potential(const MinkVec& t, const KleinChart& C);
// t from three well-spread nodes; residual is the max misfit over every other node
MinkVec recover_linear(const ScalarField& v, const KleinChart& C, double* residual = nullptr);

// f(z) dz^2 as a finite Laurent sum in the Poincare disc coordinate centred at `center`
struct QuadDiffLocal {
    std::vector<std::pair<int, cplx>> terms;
    MinkVec center = MinkVec(0.0, 0.0, 1.0);

    cplx f(cplx z) const;
    cplx df(cplx z) const;
    QuadDiffLocal operator*(cplx c) const;
    QuadDiffLocal operator+(const QuadDiffLocal& o) const;
};

// max |df/dzbar| by centred differences at the given points, relative to |f'|
double cauchy_riemann_residual(const QuadDiffLocal& q, const std::vector<cplx>& points, double h = 1e-5);

cplx disc_coordinate(const MinkVec& x, const MinkVec& center);
MinkVec from_disc(cplx z, const MinkVec& center);
// e^{2 eta} of 4|dz|^2/(1-|z|^2)^2
double poincare_conformal_factor(cplx z);
// e^{-2eta} [[Re f, -Im f], [-Im f, -Re f]]
Mat2 conformal_matrix(cplx f, double e2eta);
// rotation R with (frame coords) = R (conformal frame coords)
Mat2 conformal_rotation(const PointFrame& F, const MinkVec& center);
// b_q for the value f(z) at the point of F, expressed in the frame of F
Mat2 harmonic_matrix(cplx f, const PointFrame& F, const MinkVec& center);

OperatorFn harmonic_tensor(const QuadDiffLocal& q);
OperatorField harmonic_tensor(const QuadDiffLocal& q, const KleinChart& C);

// s g E b E^T g: flat Hessian of u/cosh r in Klein coordinates
Mat2 flat_hessian(const Mat2& b, const Vec2& k);

// u with Hess u - u I = b, through the flat Hessian of u / cosh r
class Potential {
public:
    Potential(const KleinChart& C, ScalarField ubar, VectorField grad, double path_residual, OperatorFn b);

    const KleinChart& chart() const { return *C_; }
    const ScalarField& ubar() const { return ubar_; }
    const VectorField& grad() const { return grad_; }
    double path_residual() const { return path_residual_; }
    bool analytic() const { return static_cast<bool>(b_); }

    ScalarField u() const;
    // (u/cosh r, its flat gradient) at a Klein point
    std::pair<double, Vec2> flat(const Vec2& k) const;
    bool covers(const Vec2& k) const;
    double u_at(const MinkVec& x) const;
    double ubar_at(const Vec2& k) const { return flat(k).first; }

private:
    const KleinChart* C_;
    ScalarField ubar_;
    VectorField grad_;
    double path_residual_;
    OperatorFn b_;
    ScalarField gx_, gy_;
    int nearest_valid(const Vec2& k) const;
};

// grid sweep with sixth-order cumulative quadrature; path_residual compares row-first and column-first sweeps
Potential potential_from_codazzi(const OperatorField& b, const KleinChart& C, double tol = 5e-2);
// same sweep with Gauss quadrature of b along each grid segment
Potential potential_from_codazzi(const OperatorFn& b, const KleinChart& C, double tol = 1e-6);

double partition_radius();

// u(x) = sum_g psi(g^-1 x) <t_g, x> with a partition of unity psi; u(x) - u(a^-1 x) = <t_a, x>
class EquivariantGenerator {
public:
    EquivariantGenerator(const SurfaceGroup& G, const TransCocycle& t, double region_radius = 2.5);
    Jet potential(const MinkVec& x) const;
    OperatorFn tensor() const;
    // max |u(x) - u(a^-1 x) - <t_a, x>| over the given points and generators, skipping pairs outside the region
    double equivariance_residual(const std::vector<MinkVec>& pts) const;

private:
    struct Data;
    std::shared_ptr<const Data> d_;
};

// sum over the orbit of weighted bumps; a function on the quotient
class QuotientFunction {
public:
    QuotientFunction(const SurfaceGroup& G, std::vector<MinkVec> centers, std::vector<double> weights,
                     double bump_radius, double region_radius = 2.5);
    Jet operator()(const MinkVec& x) const;
    OperatorFn tensor() const;

private:
    struct Data;
    std::shared_ptr<const Data> d_;
};

// theta_k(z) = sum_g (g z)^k g'(z)^2 over group elements with d(g e3, e3) <= depth
class PoincareSeries {
public:
    PoincareSeries(const SurfaceGroup& G, double depth, int degree);
    std::vector<cplx> evaluate(cplx z) const;
    std::size_t terms() const { return a_.size(); }
    int degree() const { return degree_; }

private:
    std::vector<cplx> a_, b_;
    int degree_;
};

// b_q for q = sum_k c_k theta_k dz^2, disc coordinate centred at e3
OperatorFn quotient_harmonic_tensor(std::shared_ptr<const PoincareSeries> P, std::vector<cplx> coeffs);

struct DeltaResult {
    TransCocycle t;
    double fit_residual = 0.0;  // held-out misfit, max over generators
    double relator_defect = 0.0;
    int samples = 0;
};

// points x near the side that generator i maps onto, with x and a_i^-1 x both at Klein radius <= rmax
std::vector<MinkVec> side_samples(const SurfaceGroup& G, int gen, double rmax, int n = 5);

DeltaResult delta_extract(const Potential& P, const SurfaceGroup& G, double tol = 1e-8);
DeltaResult delta_extract(const OperatorFn& b, const KleinChart& C, const SurfaceGroup& G, double tol = 1e-8);
DeltaResult delta_extract(const OperatorField& b, const KleinChart& C, const SurfaceGroup& G, double tol = 5e-2);

// iota_* b on the frame vectors, as ambient vectors
struct FValuedOneForm {
    std::vector<MinkVec> on_e1;
    std::vector<MinkVec> on_e2;
};

FValuedOneForm iota_star_form(const OperatorField& b, const KleinChart& C);
// d^D(iota_* b)(e1, e2) by differentiating ambient vectors; NaN off the interior
std::vector<MinkVec> iota_closedness_form(const OperatorField& b, const KleinChart& C);
// iota_*(d^nabla b(e1, e2)) + (h(e1, b e2) - h(e2, b e1)) x
std::vector<MinkVec> iota_splitting(const OperatorField& b, const KleinChart& C);
Residual iota_closedness(const OperatorField& b, const KleinChart& C, int layers = 2);
// norm of the components along f1, f2, x
double frame_norm(const MinkVec& v, const ChartNode& nd);

}  // namespace clab
