#include "clab/jet.hpp"

#include <cmath>

namespace clab {

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }

Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }

Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.v * b.d + b.v * a.d,
            a.v * b.dd + b.v * a.dd + a.d * b.d.transpose() + b.d * a.d.transpose()};
}

Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d, s * a.dd}; }

Jet operator/(const Jet& a, const Jet& b) {
    double iv = 1.0 / b.v;
    Jet inv = chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
    return a * inv;
}

Jet chain(const Jet& a, double f, double f1, double f2) {
    return {f, f1 * a.d, f1 * a.dd + f2 * a.d * a.d.transpose()};
}

Jet linear_jet(const MinkVec& t, const MinkVec& x) {
    Jet j;
    j.v = mink_dot(t, x);
    j.d = eta() * t;
    return j;
}

Mat2 hess_minus_id(const Jet& u, const PointFrame& F) {
    // second fundamental form of H2 contributes <v,w> dU(x)
    double c = u.d.dot(F.x) - u.v;
    Mat2 H;
    H(0, 0) = F.f1.dot(u.dd * F.f1) + c;
    H(1, 1) = F.f2.dot(u.dd * F.f2) + c;
    H(0, 1) = H(1, 0) = F.f1.dot(u.dd * F.f2);
    return H;
}

OperatorFn trivial_tensor(JetFn u) {
    return [u = std::move(u)](const PointFrame& F) { return hess_minus_id(u(F.x), F); };
}

namespace {

constexpr int kOrder = 8;

// profile in t = (w - 1)/(W - 1), w = cosh d
void profile(double t, double& f, double& f1, double& f2) {
    if (t >= 1.0) {
        f = f1 = f2 = 0.0;
        return;
    }
    double m = 1.0 - t;
    f = std::pow(m, kOrder);
    f1 = -kOrder * std::pow(m, kOrder - 1);
    f2 = kOrder * (kOrder - 1) * std::pow(m, kOrder - 2);
}

}  // namespace

Jet bump_jet(const MinkVec& center, double radius, const MinkVec& x) {
    double W = std::cosh(radius);
    Jet w;
    w.v = -mink_dot(x, center);
    w.d = -(eta() * center);
    double s = 1.0 / (W - 1.0);
    double f, f1, f2;
    profile((w.v - 1.0) * s, f, f1, f2);
    if (f == 0.0) return Jet{};
    return chain(w, f, f1 * s, f2 * s * s);
}

double bump_value(const MinkVec& center, double radius, const MinkVec& x) {
    double t = (-mink_dot(x, center) - 1.0) / (std::cosh(radius) - 1.0);
    if (t >= 1.0) return 0.0;
    return std::pow(1.0 - t, kOrder);
}

}  // namespace clab
