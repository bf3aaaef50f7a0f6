#pragma once

#include "clab/codazzi.hpp"

#include <string>

namespace clab {

// first fundamental form and shape operator, both in the orthonormal frame of h at each node
struct EmbeddingData {
    std::vector<Mat2> I;
    OperatorField s;
};

// I = h(b., b.), s = b^-1
EmbeddingData pair_to_data(const OperatorField& b);
// b = s^-1; *h receives I(s., s.) when given
OperatorField data_to_pair(const EmbeddingData& D, std::vector<Mat2>* h = nullptr);
// 1/M < s < M at every valid node
bool uniformly_convex(const EmbeddingData& D, double M);

// frame matrix of a form -> its coordinate matrix in the Klein chart
Mat2 frame_form_to_coordinates(const Mat2& F, const ChartNode& nd);

struct GaussCodazzi {
    Residual gauss;    // |det s + K_I|
    Residual codazzi;  // |d^{nabla_I} s| measured with I
};

GaussCodazzi gauss_codazzi_residual(const EmbeddingData& D, const KleinChart& C, int layers = 3);

struct ImmersionField {
    std::vector<MinkVec> sigma;
    std::vector<MinkVec> G;
};

// sigma = dG(grad u) - u G with G = dev; u from the potential
ImmersionField reconstruct_immersion(const Potential& P);
ImmersionField reconstruct_immersion(const OperatorField& b, const KleinChart& C);
ImmersionField reconstruct_immersion(const OperatorFn& b, const KleinChart& C);
// sigma at an arbitrary chart point covered by the potential
MinkVec immersion_at(const Potential& P, const Vec2& k);

struct ImmersionGeometry {
    EmbeddingData data;
    std::vector<MinkVec> normal;  // future unit normal from the frame derivatives of sigma
    ScalarField normal_defect;    // |normal - G|
    ScalarField asymmetry;        // I-asymmetry of the raw shape operator
    std::vector<Mat2> third;      // I(s., s.)
    int non_spacelike = 0;
};

// finite differences of sigma and G on the chart; NaN where the stencil is incomplete
ImmersionGeometry immersion_geometry(const ImmersionField& F, const KleinChart& C);

// reconstruct_immersion(b + t Id)
ImmersionField normal_flow(const OperatorField& b, const KleinChart& C, double t);
ImmersionField normal_flow(const OperatorFn& b, const KleinChart& C, double t);
// max |a - b - (a - b)(base)|: equality up to the translation fixed by the normalisation at the base
double translation_spread(const std::vector<MinkVec>& a, const std::vector<MinkVec>& b, const KleinChart& C,
                          double klein_radius = 2.0);

struct ImmersionHolonomy {
    std::array<AffIsom, 4> hol;
    TransCocycle t;
    double fit_residual = 0.0;  // max spread of sigma(x) - a sigma(a^-1 x) over the samples
    double linear_defect = 0.0;
};

// fit sigma(a x) = hol(a) sigma(x) + t_a; linear parts are the generators by construction
ImmersionHolonomy immersion_holonomy(const Potential& P, const SurfaceGroup& G, double tol = 1e-6);
ImmersionHolonomy immersion_holonomy(const OperatorFn& b, const KleinChart& C, const SurfaceGroup& G,
                                     double tol = 1e-6);

void write_obj(const std::string& path, const ImmersionField& F);

}  // namespace clab
