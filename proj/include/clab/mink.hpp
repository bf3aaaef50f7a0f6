#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace clab {

using MinkVec = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// eta = diag(1, 1, -1)
const Mat3& eta();

double mink_dot(const MinkVec& u, const MinkVec& v);
inline double mink_norm2(const MinkVec& v) { return mink_dot(v, v); }

// <u [x] v, w> = det(u, v, w)
MinkVec box_product(const MinkVec& u, const MinkVec& v);

// Lambda(t) x = t [x] x
Mat3 lambda_iso(const MinkVec& t);
MinkVec lambda_inv(const Mat3& X);
bool is_mink_skew(const Mat3& X, double tol = 1e-12);

// exp(s * Lambda(t)), closed form split by the sign of <t,t>
Mat3 so21_exp(const MinkVec& t, double s = 1.0);

class LinIsom {
public:
    LinIsom() : m_(Mat3::Identity()) {}
    static LinIsom from_matrix(const Mat3& m, double tol = 1e-12);
    // skips validation; for products of validated isometries
    static LinIsom unchecked(const Mat3& m) { return LinIsom(m); }

    const Mat3& matrix() const { return m_; }
    MinkVec operator()(const MinkVec& v) const { return m_ * v; }
    LinIsom operator*(const LinIsom& o) const { return LinIsom(m_ * o.m_); }
    LinIsom inverse() const { return LinIsom(eta() * m_.transpose() * eta()); }

    // max entry of |M^T eta M - eta|
    static double isometry_defect(const Mat3& m);

private:
    explicit LinIsom(const Mat3& m) : m_(m) {}
    Mat3 m_;
};

struct AffIsom {
    LinIsom linear;
    MinkVec translation = MinkVec::Zero();

    MinkVec operator()(const MinkVec& v) const { return linear(v) + translation; }
    AffIsom operator*(const AffIsom& o) const {
        return {linear * o.linear, linear(o.translation) + translation};
    }
    AffIsom inverse() const {
        LinIsom li = linear.inverse();
        return {li, -li(translation)};
    }
};

// hyperboloid model
bool on_hyperboloid(const MinkVec& x, double tol = 1e-10);
double h2_distance(const MinkVec& x, const MinkVec& y);
MinkVec h2_exp(const MinkVec& x, const MinkVec& v);
MinkVec h2_log(const MinkVec& x, const MinkVec& y);
MinkVec h2_geodesic(const MinkVec& x, const MinkVec& y, double s);
MinkVec h2_point_polar(double r, double angle);

// pure boost taking e3 to p
LinIsom boost_to(const MinkVec& p);

Vec2 klein_project(const MinkVec& x, const MinkVec& p);
MinkVec klein_unproject(const Vec2& k, const MinkVec& p);

LinIsom elliptic_rotation(const MinkVec& p, double theta);

}  // namespace clab
