#pragma once

#include "clab/fields.hpp"

#include <functional>

namespace clab {

// value, Euclidean gradient and Euclidean Hessian of an ambient extension of a function on H2
struct Jet {
    double v = 0.0;
    MinkVec d = MinkVec::Zero();
    Mat3 dd = Mat3::Zero();
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet operator/(const Jet& a, const Jet& b);
// f(a) given f, f', f'' at a.v
Jet chain(const Jet& a, double f, double f1, double f2);

// <t, x>
Jet linear_jet(const MinkVec& t, const MinkVec& x);

using JetFn = std::function<Jet(const MinkVec&)>;

// Hess u - u I in the frame (f1, f2) at x
Mat2 hess_minus_id(const Jet& u, const PointFrame& F);
OperatorFn trivial_tensor(JetFn u);

// (1 - (cosh d - 1)/(cosh R - 1))^8 for d < R, zero outside; C^7 across d = R
Jet bump_jet(const MinkVec& center, double radius, const MinkVec& x);
double bump_value(const MinkVec& center, double radius, const MinkVec& x);

}  // namespace clab
