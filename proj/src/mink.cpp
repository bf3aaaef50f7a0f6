#include "clab/mink.hpp"

#include <algorithm>
#include <cmath>

namespace clab {

const Mat3& eta() {
    static const Mat3 e = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();
    return e;
}

double mink_dot(const MinkVec& u, const MinkVec& v) {
    return u.x() * v.x() + u.y() * v.y() - u.z() * v.z();
}

MinkVec box_product(const MinkVec& u, const MinkVec& v) {
    MinkVec c = u.cross(v);
    return {c.x(), c.y(), -c.z()};
}

Mat3 lambda_iso(const MinkVec& t) {
    Mat3 skew;
    skew << 0.0, -t.z(), t.y(),
            t.z(), 0.0, -t.x(),
            -t.y(), t.x(), 0.0;
    return eta() * skew;
}

MinkVec lambda_inv(const Mat3& X) {
    Mat3 skew = eta() * X;
    return {0.5 * (skew(2, 1) - skew(1, 2)), 0.5 * (skew(0, 2) - skew(2, 0)),
            0.5 * (skew(1, 0) - skew(0, 1))};
}

bool is_mink_skew(const Mat3& X, double tol) {
    Mat3 r = eta() * X + X.transpose() * eta();
    return r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, X.cwiseAbs().maxCoeff());
}

Mat3 so21_exp(const MinkVec& t, double s) {
    Mat3 X = lambda_iso(t);
    Mat3 X2 = X * X;
    double k = mink_norm2(t);
    double scale = t.squaredNorm();
    double a, b;
    if (scale == 0.0) return Mat3::Identity();
    if (std::abs(k) <= 1e-14 * scale) {
        a = s;
        b = 0.5 * s * s;
    } else if (k < 0.0) {
        double w = std::sqrt(-k);
        a = std::sin(w * s) / w;
        b = (1.0 - std::cos(w * s)) / (w * w);
    } else {
        double w = std::sqrt(k);
        a = std::sinh(w * s) / w;
        b = (std::cosh(w * s) - 1.0) / (w * w);
    }
    return Mat3::Identity() + a * X + b * X2;
}

double LinIsom::isometry_defect(const Mat3& m) {
    return (m.transpose() * eta() * m - eta()).cwiseAbs().maxCoeff();
}

LinIsom LinIsom::from_matrix(const Mat3& m, double tol) {
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (!m.allFinite()) throw GeometryError("isometry has non-finite entries");
    if (isometry_defect(m) > tol * scale * scale)
        throw GeometryError("matrix does not preserve the Minkowski form");
    if (std::abs(m.determinant() - 1.0) > tol * scale * scale * scale)
        throw GeometryError("isometry is not orientation preserving");
    if (m(2, 2) <= 0.0) throw GeometryError("isometry is not orthochronous");
    return LinIsom(m);
}

bool on_hyperboloid(const MinkVec& x, double tol) {
    return x.z() > 0.0 && std::abs(mink_norm2(x) + 1.0) <= tol * std::max(1.0, x.z() * x.z());
}

double h2_distance(const MinkVec& x, const MinkVec& y) {
    return std::acosh(std::max(1.0, -mink_dot(x, y)));
}

MinkVec h2_exp(const MinkVec& x, const MinkVec& v) {
    double n2 = mink_norm2(v);
    if (n2 <= 0.0) return x;
    double n = std::sqrt(n2);
    return std::cosh(n) * x + std::sinh(n) / n * v;
}

MinkVec h2_log(const MinkVec& x, const MinkVec& y) {
    double d = h2_distance(x, y);
    MinkVec u = y + mink_dot(x, y) * x;
    double n2 = mink_norm2(u);
    if (n2 <= 0.0 || d == 0.0) return MinkVec::Zero();
    return d / std::sqrt(n2) * u;
}

MinkVec h2_geodesic(const MinkVec& x, const MinkVec& y, double s) {
    return h2_exp(x, s * h2_log(x, y));
}

MinkVec h2_point_polar(double r, double angle) {
    return {std::sinh(r) * std::cos(angle), std::sinh(r) * std::sin(angle), std::cosh(r)};
}

LinIsom boost_to(const MinkVec& p) {
    if (!on_hyperboloid(p, 1e-9)) throw GeometryError("boost target is not on the hyperboloid");
    Eigen::Vector2d n(p.x(), p.y());
    Mat3 m;
    m.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity() + n * n.transpose() / (p.z() + 1.0);
    m.topRightCorner<2, 1>() = n;
    m.bottomLeftCorner<1, 2>() = n.transpose();
    m(2, 2) = p.z();
    return LinIsom::unchecked(m);
}

Vec2 klein_project(const MinkVec& x, const MinkVec& p) {
    MinkVec y = boost_to(p).inverse()(x);
    if (y.z() <= 0.0) throw GeometryError("point not in the half-space seen from the base point");
    return {y.x() / y.z(), y.y() / y.z()};
}

MinkVec klein_unproject(const Vec2& k, const MinkVec& p) {
    double s2 = 1.0 - k.squaredNorm();
    if (s2 <= 0.0) throw GeometryError("Klein point outside the unit disc");
    MinkVec y(k.x(), k.y(), 1.0);
    return boost_to(p)(y / std::sqrt(s2));
}

LinIsom elliptic_rotation(const MinkVec& p, double theta) {
    return LinIsom::unchecked(so21_exp(p, theta));
}

}  // namespace clab
