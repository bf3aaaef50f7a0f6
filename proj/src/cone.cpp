#include "clab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec2 e_rho(double th) { return {std::cos(th), std::sin(th)}; }
Vec2 e_th(double th) { return {-std::sin(th), std::cos(th)}; }

Mat2 rot(double a) {
    Mat2 R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

ConeAngle::ConeAngle(double theta0) : theta0_(theta0) {
    if (!(theta0 > 0.0 && theta0 < 2.0 * kPi)) throw GeometryError("cone angle must lie in (0, 2pi)");
}

double ConeAngle::beta() const { return theta0_ / (2.0 * kPi) - 1.0; }
double ConeAngle::ratio() const { return theta0_ / (2.0 * kPi); }
double ConeAngle::alpha() const {
    double b = beta();
    return (-1.0 - 2.0 * b) / (1.0 + b);
}

double cone_conformal_factor(double beta, double absz) {
    double d = 1.0 - std::pow(absz, 2.0 * (1.0 + beta));
    return 4.0 * (1.0 + beta) * (1.0 + beta) * std::pow(absz, 2.0 * beta) / (d * d);
}

double radius_from_conformal(double absz, const ConeAngle& a) {
    double w = std::pow(absz, 1.0 + a.beta());
    return std::log((1.0 + w) / (1.0 - w));
}

double conformal_from_radius(double r, const ConeAngle& a) {
    return std::pow(std::tanh(0.5 * r), 1.0 / (1.0 + a.beta()));
}

ConeChart::ConeChart(const ConeAngle& a, ConeKind kind, double eps, double r0, int rings, int nphi)
    : a_(a), kind_(kind), eps_(eps), r0_(r0), rings_(rings), nphi_(nphi) {
    if (!(eps > 0.0) || !(r0 > eps)) throw GeometryError("cone chart needs 0 < eps < r0");
    if (rings < 8 || nphi < 8) throw GeometryError("cone chart too coarse");
    s0_ = std::log(native(eps));
    ds_ = (std::log(native(r0)) - s0_) / (rings - 1);
    ring_r_.resize(rings);
    for (int i = 0; i < rings; ++i) ring_r_[i] = i == 0 ? eps : (i == rings - 1 ? r0 : r_of_s(s(i)));
    nodes_.reserve(static_cast<std::size_t>(rings) * columns());
    for (int i = 0; i < rings; ++i)
        for (int j = 0; j < columns(); ++j) {
            ConeNode nd;
            nd.i = i;
            nd.j = j;
            nd.r = ring_r_[i];
            nd.phi = phi(j);
            nd.theta = a_.ratio() * nd.phi;
            nd.x = dev(nd.r, nd.phi);
            nodes_.push_back(nd);
        }
}

double ConeChart::dphi() const { return 2.0 * kPi / nphi_; }
double ConeChart::phi(int j) const { return (j - nphi_) * dphi(); }

double ConeChart::native(double r) const {
    switch (kind_) {
        case ConeKind::polar: return r;
        case ConeKind::conformal: return conformal_from_radius(r, a_);
        case ConeKind::klein: return std::tanh(r);
    }
    return r;
}

double ConeChart::r_of_s(double s) const {
    double x = std::exp(s);
    switch (kind_) {
        case ConeKind::polar: return x;
        case ConeKind::conformal: return radius_from_conformal(x, a_);
        case ConeKind::klein: return std::atanh(x);
    }
    return x;
}

std::pair<double, double> ConeChart::r_derivatives(double s) const {
    double x = std::exp(s);
    switch (kind_) {
        case ConeKind::polar: return {x, x};
        case ConeKind::conformal: {
            double k = 1.0 + a_.beta();
            double w = std::pow(x, k), q = 1.0 - w * w;
            double ws = k * w, wss = k * k * w;
            return {2.0 * ws / q, 2.0 * wss / q + 4.0 * w * ws * ws / (q * q)};
        }
        case ConeKind::klein: {
            double q = 1.0 - x * x;
            return {x / q, x * (1.0 + x * x) / (q * q)};
        }
    }
    return {x, x};
}

MinkVec ConeChart::dev(double r, double phi) const { return h2_point_polar(r, a_.ratio() * phi); }

LinIsom ConeChart::deck() const { return elliptic_rotation(MinkVec(0.0, 0.0, 1.0), a_.theta0()); }

Mat2 ConeChart::h_metric(int i) const {
    double r = ring_r_[i], rs = r_derivatives(s(i)).first, c = a_.ratio();
    Mat2 m = Mat2::Zero();
    m(0, 0) = rs * rs;
    m(1, 1) = c * c * std::sinh(r) * std::sinh(r);
    return m;
}

Mat2 ConeChart::klein_metric(int i) const {
    double r = ring_r_[i], rs = r_derivatives(s(i)).first, c = a_.ratio();
    double ch = std::cosh(r), rho = std::tanh(r), rhos = rs / (ch * ch);
    Mat2 m = Mat2::Zero();
    m(0, 0) = rhos * rhos;
    m(1, 1) = c * c * rho * rho;
    return m;
}

Mat2 ConeChart::metric(int i) const { return kind_ == ConeKind::klein ? klein_metric(i) : h_metric(i); }

ConeChart cone_chart(const ConeAngle& a, ConeKind kind, double eps, double r0, int rings, int nphi) {
    return ConeChart(a, kind, eps, r0, rings, nphi);
}

ConeChart klein_cone_chart(const ConeAngle& a, double eps, double r0, int rings, int nphi) {
    return ConeChart(a, ConeKind::klein, eps, r0, rings, nphi);
}

std::vector<double> ring_circumference(const ConeChart& C) {
    std::vector<double> out(C.rings());
    for (int i = 0; i < C.rings(); ++i) out[i] = std::sqrt(C.metric(i)(1, 1)) * 2.0 * kPi;
    return out;
}

std::vector<double> ring_curvature(const ConeChart& C) {
    const int n = C.rings();
    std::vector<double> sqE(n), sqG(n), K(n, kNaN), q(n, kNaN);
    for (int i = 0; i < n; ++i) {
        Mat2 m = C.metric(i);
        sqE[i] = std::sqrt(m(0, 0));
        sqG[i] = std::sqrt(m(1, 1));
    }
    const double h = C.ds();
    for (int i = 1; i + 1 < n; ++i) q[i] = (sqG[i + 1] - sqG[i - 1]) / (2.0 * h) / sqE[i];
    for (int i = 2; i + 2 < n; ++i) K[i] = -(q[i + 1] - q[i - 1]) / (2.0 * h) / (sqE[i] * sqG[i]);
    return K;
}

BiLipschitz klein_bilipschitz(const ConeChart& C) {
    BiLipschitz out{std::numeric_limits<double>::infinity(), 0.0};
    for (int i = 0; i < C.rings(); ++i) {
        Mat2 h = C.h_metric(i), g = C.klein_metric(i);
        for (int a = 0; a < 2; ++a) {
            double l = std::sqrt(h(a, a) / g(a, a));
            out.lower = std::min(out.lower, l);
            out.upper = std::max(out.upper, l);
        }
    }
    return out;
}

OperatorField sample(const ConeChart& C, const ConeFn& b) {
    OperatorField out(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) out[n] = b(C.node(n).r, C.node(n).phi);
    return out;
}

namespace {

struct Derivs {
    double s, ss, p, pp, sp;
};

// centred differences in (s, phi); false on the boundary
bool derivs(const ScalarField& u, const ConeChart& C, int i, int j, Derivs& d) {
    if (i < 1 || i + 1 >= C.rings() || j < 1 || j + 1 >= C.columns()) return false;
    auto at = [&](int a, int b) { return u[C.index(a, b)]; };
    double hs = C.ds(), hp = C.dphi();
    d.s = (at(i + 1, j) - at(i - 1, j)) / (2.0 * hs);
    d.ss = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hs * hs);
    d.p = (at(i, j + 1) - at(i, j - 1)) / (2.0 * hp);
    d.pp = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hp * hp);
    d.sp = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * hs * hp);
    return true;
}

}  // namespace

OperatorField cone_hess_minus_id(const ScalarField& u, const ConeChart& C) {
    OperatorField out(C.size(), Mat2::Constant(kNaN));
    const double c = C.angle().ratio();
    for (int i = 0; i < C.rings(); ++i) {
        auto [rs, rss] = C.r_derivatives(C.s(i));
        double r = C.r(i), sh = std::sinh(r), cth = std::cosh(r) / sh;
        for (int j = 0; j < C.columns(); ++j) {
            Derivs d;
            if (!derivs(u, C, i, j, d)) continue;
            double v = u[C.index(i, j)];
            double ur = d.s / rs, urr = (d.ss - d.s * rss / rs) / (rs * rs);
            double ut = d.p / c, utt = d.pp / (c * c), urt = d.sp / (rs * c);
            Mat2 b;
            b(0, 0) = urr - v;
            b(0, 1) = b(1, 0) = (urt - cth * ut) / sh;
            b(1, 1) = utt / (sh * sh) + cth * ur - v;
            out[C.index(i, j)] = b;
        }
    }
    return out;
}

std::vector<Mat2> klein_flat_hessian(const ScalarField& ubar, const ConeChart& C) {
    std::vector<Mat2> out(C.size(), Mat2::Constant(kNaN));
    const double c = C.angle().ratio();
    for (int i = 0; i < C.rings(); ++i) {
        auto [rs, rss] = C.r_derivatives(C.s(i));
        double r = C.r(i), ch = std::cosh(r), rho = std::tanh(r);
        double ps = rs / (ch * ch), pss = rss / (ch * ch) - 2.0 * rs * rs * rho / (ch * ch);
        for (int j = 0; j < C.columns(); ++j) {
            Derivs d;
            if (!derivs(ubar, C, i, j, d)) continue;
            double up = d.s / ps, upp = (d.ss - d.s * pss / ps) / (ps * ps);
            double ut = d.p / c, utt = d.pp / (c * c), upt = d.sp / (ps * c);
            Mat2 H;
            H(0, 0) = upp;
            H(0, 1) = H(1, 0) = upt - ut / rho;
            H(1, 1) = utt + rho * up;
            out[C.index(i, j)] = H;
        }
    }
    return out;
}

Mat2 flat_from_frame(const Mat2& b, double r) {
    double ch = std::cosh(r), sh = std::sinh(r);
    Mat2 H;
    H(0, 0) = ch * ch * ch * b(0, 0);
    H(0, 1) = ch * sh * b(0, 1);
    H(1, 0) = ch * sh * b(1, 0);
    H(1, 1) = sh * sh * b(1, 1) / ch;
    return H;
}

double kleincorr_residual(const ScalarField& u, const ConeChart& C, double rmax) {
    ScalarField ubar(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) ubar[n] = u[n] / std::cosh(C.node(n).r);
    OperatorField b = cone_hess_minus_id(u, C);
    std::vector<Mat2> H = klein_flat_hessian(ubar, C);
    double worst = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (C.node(n).r > rmax || !is_valid(b[n]) || !is_valid(H[n])) continue;
        double rho = std::tanh(C.node(n).r);
        Mat2 D = H[n] - flat_from_frame(b[n], C.node(n).r);
        Mat2 S = Eigen::Vector2d(1.0, 1.0 / rho).asDiagonal();
        worst = std::max(worst, (S * D * S).cwiseAbs().maxCoeff());
    }
    return worst;
}

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw GeometryError("power fit needs at least three samples");
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw GeometryError("power fit needs positive samples");
        A(k, 0) = 1.0;
        A(k, 1) = std::log(x[k]);
        v(k) = std::log(y[k]);
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(v);
    Eigen::VectorXd res = v - A * c;
    double mean = v.mean(), tot = (v.array() - mean).square().sum();
    PowerFit out;
    out.exponent = c(1);
    out.coefficient = std::exp(c(0));
    // a profile flat to 0.1% has no variance worth explaining
    double spread = v.maxCoeff() - v.minCoeff();
    out.r2 = spread > 1e-3 ? 1.0 - res.squaredNorm() / tot : 1.0;
    return out;
}

const char* to_string(ConeClass c) {
    switch (c) {
        case ConeClass::not_l2: return "not_l2";
        case ConeClass::l2: return "l2";
        case ConeClass::bounded: return "bounded";
        case ConeClass::vanishing: return "vanishing";
    }
    return "?";
}

ConeFn harmonic_tensor_cone(const QuadDiffLocal& q, const ConeAngle& a) {
    return [q, a](double r, double phi) {
        double x = conformal_from_radius(r, a);
        cplx z = std::polar(x, phi);
        Mat2 M = conformal_matrix(q.f(z), cone_conformal_factor(a.beta(), x));
        Mat2 R = rot(phi);
        return Mat2(R.transpose() * M * R);
    };
}

namespace {

// rings with r <= 10 eps, at least three
int inner_decade(const ConeChart& C) {
    int n = 0;
    while (n < C.rings() && C.r(n) <= 10.0 * C.eps() * (1.0 + 1e-12)) ++n;
    return std::max(n, 3);
}

double ring_sup(const OperatorField& b, const ConeChart& C, int i) {
    double m = 0.0;
    for (int j = C.first_column(); j < C.first_column() + C.nphi(); ++j) m = std::max(m, b[C.index(i, j)].norm());
    return m;
}

}  // namespace

HarmonicCone harmonic_tensor_cone(const QuadDiffLocal& q, const ConeChart& C) {
    if (q.terms.empty()) throw GeometryError("empty Laurent expansion");
    HarmonicCone out;
    out.fn = harmonic_tensor_cone(q, C.angle());
    out.b = sample(C, out.fn);
    out.lowest_power = std::numeric_limits<int>::max();
    for (const auto& [k, c] : q.terms)
        if (std::abs(c) > 0.0) out.lowest_power = std::min(out.lowest_power, k);
    const double beta = C.angle().beta();
    double e = (out.lowest_power - 2.0 * beta) / (1.0 + beta);
    out.predicted_exponent = e;
    if (e <= -1.0)
        out.cls = ConeClass::not_l2;
    else if (e < -1e-12)
        out.cls = ConeClass::l2;
    else if (e <= 1e-12)
        out.cls = ConeClass::bounded;
    else
        out.cls = ConeClass::vanishing;
    std::vector<double> rs, ys;
    for (int i = 0; i < inner_decade(C); ++i) {
        rs.push_back(C.r(i));
        ys.push_back(ring_sup(out.b, C, i));
    }
    out.fit = fit_power(rs, ys);
    return out;
}

double cone_l2_norm2(const OperatorField& b, const ConeChart& C, double eps) {
    if (eps < C.eps() * (1.0 - 1e-12)) throw GeometryError("eps below the chart's tip exclusion");
    const double c = C.angle().ratio();
    std::vector<double> g(C.rings());
    for (int i = 0; i < C.rings(); ++i) {
        double sum = 0.0;
        for (int j = C.first_column(); j < C.first_column() + C.nphi(); ++j) sum += b[C.index(i, j)].squaredNorm();
        double rs = C.r_derivatives(C.s(i)).first;
        g[i] = sum * C.dphi() * rs * c * std::sinh(C.r(i));
    }
    double se = std::log(C.native(eps)), total = 0.0;
    for (int i = 0; i + 1 < C.rings(); ++i) {
        double a = C.s(i), bnd = C.s(i + 1);
        if (bnd <= se) continue;
        double ga = g[i], gb = g[i + 1];
        if (a < se) {
            double t = (se - a) / (bnd - a);
            ga = std::exp((1.0 - t) * std::log(ga) + t * std::log(gb));
            a = se;
        }
        // exact for exponentials in s
        double L = bnd - a;
        total += (ga > 0.0 && gb > 0.0 && std::abs(ga - gb) > 1e-14 * gb) ? L * (gb - ga) / std::log(gb / ga)
                                                                          : 0.5 * L * (ga + gb);
    }
    return total;
}

double cone_sup_within(const OperatorField& b, const ConeChart& C, double rmax) {
    double m = 0.0;
    for (int i = 0; i < C.rings() && C.r(i) <= rmax; ++i) m = std::max(m, ring_sup(b, C, i));
    return m;
}

namespace {

// unknowns carried along paths: developed flat gradient and f
struct State {
    Vec2 g = Vec2::Zero();
    double f = 0.0;
    State operator+(const State& o) const { return {g + o.g, f + o.f}; }
    State operator*(double s) const { return {g * s, f * s}; }
};

class ConeSweep {
public:
    ConeSweep(const ConeChart& C, const ConeFn* fn, const OperatorField* field) : C_(C), fn_(fn), field_(field) {}

    Mat2 b(double r, double phi) const { return (*fn_)(r, phi); }

    State radial_rate(double s, double r, double phi, const Mat2& bb) const {
        double rs = C_.r_derivatives(s).first, th = C_.angle().ratio() * phi;
        return {rs * (std::cosh(r) * bb(0, 0) * e_rho(th) + bb(0, 1) * e_th(th)), rs * std::sinh(r) * bb(0, 0)};
    }
    State angular_rate(double r, double phi, const Mat2& bb) const {
        double c = C_.angle().ratio(), th = c * phi, sh = std::sinh(r);
        return {c * sh * (std::cosh(r) * bb(0, 1) * e_rho(th) + bb(1, 1) * e_th(th)), c * sh * sh * bb(0, 1)};
    }

    // integrate along ring i (fixed r) or column j from node `from` to every node in direction dir
    void ring(std::vector<State>& S, int i, int j0, int dir) const {
        const int n = C_.columns();
        if (field_) {
            std::vector<int> js;
            for (int j = j0; j >= 0 && j < n; j += dir) js.push_back(j);
            line(S, js, [&](int j) { return C_.index(i, j); },
                 [&](int j) { return angular_rate(C_.r(i), C_.phi(j), (*field_)[C_.index(i, j)]); },
                 dir * C_.dphi());
            return;
        }
        const auto& gl = gauss_legendre(8, 0.0, 1.0);
        for (int j = j0; j + dir >= 0 && j + dir < n; j += dir) {
            double a = C_.phi(j), h = dir * C_.dphi();
            State acc;
            for (auto [t, w] : gl) {
                double p = a + t * h;
                acc = acc + angular_rate(C_.r(i), p, b(C_.r(i), p)) * (w * h);
            }
            S[C_.index(i, j + dir)] = S[C_.index(i, j)] + acc;
        }
    }

    void column(std::vector<State>& S, int j, int i0, int dir) const {
        const int n = C_.rings();
        if (field_) {
            std::vector<int> is;
            for (int i = i0; i >= 0 && i < n; i += dir) is.push_back(i);
            line(S, is, [&](int i) { return C_.index(i, j); },
                 [&](int i) { return radial_rate(C_.s(i), C_.r(i), C_.phi(j), (*field_)[C_.index(i, j)]); },
                 dir * C_.ds());
            return;
        }
        const auto& gl = gauss_legendre(8, 0.0, 1.0);
        double p = C_.phi(j);
        for (int i = i0; i + dir >= 0 && i + dir < n; i += dir) {
            double a = C_.s(i), h = dir * C_.ds();
            State acc;
            for (auto [t, w] : gl) {
                double s = a + t * h, r = C_.r_of_s(s);
                acc = acc + radial_rate(s, r, p, b(r, p)) * (w * h);
            }
            S[C_.index(i + dir, j)] = S[C_.index(i, j)] + acc;
        }
    }

private:
    template <class Idx, class Rate>
    void line(std::vector<State>& S, const std::vector<int>& ks, Idx idx, Rate rate, double h) const {
        std::vector<double> gx, gy, f;
        for (int k : ks) {
            State r = rate(k);
            gx.push_back(r.g.x());
            gy.push_back(r.g.y());
            f.push_back(r.f);
        }
        auto Gx = cumulative_integral(gx), Gy = cumulative_integral(gy), F = cumulative_integral(f);
        State s0 = S[idx(ks[0])];
        for (std::size_t t = 1; t < ks.size(); ++t)
            S[idx(ks[t])] = s0 + State{Vec2(Gx[t], Gy[t]), F[t]} * h;
    }

    const ConeChart& C_;
    const ConeFn* fn_;
    const OperatorField* field_;
};

ConePotential assemble(const std::vector<State>& S, double path_residual, const ConeChart& C, double alpha) {
    ConePotential P;
    P.path_residual = path_residual;
    const std::size_t N = C.size();
    P.grad.resize(N);
    P.f.resize(N);
    P.ubar.resize(N);
    P.u.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        const ConeNode& nd = C.node(n);
        Vec2 X = std::tanh(nd.r) * e_rho(nd.theta);
        P.grad[n] = S[n].g;
        P.f[n] = S[n].f;
        P.ubar[n] = S[n].g.dot(X) - S[n].f;
        P.u[n] = P.ubar[n] * std::cosh(nd.r);
    }
    // u(R x) - u(x) = <t, R x> between columns one period apart
    const int np = C.nphi();
    const int rows = C.rings() * (C.columns() - np);
    Eigen::MatrixXd A(rows, 3);
    Eigen::VectorXd v(rows);
    int k = 0;
    for (int i = 0; i < C.rings(); ++i)
        for (int j = 0; j + np < C.columns(); ++j, ++k) {
            int a = C.index(i, j), b = C.index(i, j + np);
            MinkVec y = eta() * C.node(b).x;
            A.row(k) = y.transpose();
            v(k) = P.u[b] - P.u[a];
        }
    P.t = A.colPivHouseholderQr().solve(v);
    P.fit_residual = (A * P.t - v).cwiseAbs().maxCoeff();
    P.reduction = peripheral_reduction(P.t, C.deck(), 1e300);
    const int j0 = C.first_column();
    std::vector<double> rs, ci;
    P.circle_integral.resize(C.rings());
    P.du_sup.assign(C.rings(), 0.0);
    for (int i = 0; i < C.rings(); ++i) {
        P.circle_integral[i] = P.u[C.index(i, j0 + np)] - P.u[C.index(i, j0)];
        double r = C.r(i), ch = std::cosh(r), sh = std::sinh(r);
        for (int j = j0; j < j0 + np; ++j) {
            int n = C.index(i, j);
            double th = C.node(n).theta;
            double ur = P.grad[n].dot(e_rho(th)) / ch + P.ubar[n] * sh;
            double ut = P.grad[n].dot(e_th(th));
            P.du_sup[i] = std::max(P.du_sup[i], std::hypot(ur, ut));
        }
    }
    int m = inner_decade(C);
    bool positive = true;
    for (int i = 0; i < m; ++i) {
        rs.push_back(C.r(i));
        ci.push_back(std::abs(P.circle_integral[i]));
        positive = positive && ci.back() > 0.0;
    }
    if (positive) P.circle_fit = fit_power(rs, ci);
    // du_sup ~ c5 + c6 r^{alpha+1}
    Eigen::MatrixXd B(C.rings(), 2);
    Eigen::VectorXd d(C.rings());
    for (int i = 0; i < C.rings(); ++i) {
        B(i, 0) = 1.0;
        B(i, 1) = std::pow(C.r(i), alpha + 1.0);
        d(i) = P.du_sup[i];
    }
    Eigen::Vector2d cc = B.colPivHouseholderQr().solve(d);
    P.lipschitz.c5 = cc(0);
    P.lipschitz.c6 = cc(1);
    double mis = 0.0;
    for (int i = 0; i < C.rings(); ++i) {
        double fit = B.row(i).dot(cc);
        if (d(i) > 0.0) mis = std::max(mis, std::abs(d(i) - fit) / d(i));
    }
    P.lipschitz.rel_misfit = mis;
    return P;
}

ConePotential integrate(const ConeChart& C, const ConeFn* fn, const OperatorField* field, double tol,
                        double alpha) {
    ConeSweep sw(C, fn, field);
    const int ib = C.rings() / 2, j0 = C.first_column();
    std::vector<State> A(C.size()), B(C.size());
    // ring first, then every column
    sw.ring(A, ib, j0, 1);
    sw.ring(A, ib, j0, -1);
    for (int j = 0; j < C.columns(); ++j) {
        sw.column(A, j, ib, 1);
        sw.column(A, j, ib, -1);
    }
    // column first, then every ring
    sw.column(B, j0, ib, 1);
    sw.column(B, j0, ib, -1);
    for (int i = 0; i < C.rings(); ++i) {
        sw.ring(B, i, j0, 1);
        sw.ring(B, i, j0, -1);
    }
    double res = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n)
        res = std::max({res, (A[n].g - B[n].g).cwiseAbs().maxCoeff(), std::abs(A[n].f - B[n].f)});
    if (!(res <= tol)) throw GeometryError("input not Codazzi: path residual " + std::to_string(res));
    return assemble(A, res, C, alpha);
}

}  // namespace

ConePotential peripheral_potential(const ConeFn& b, const ConeChart& C, double tol, double alpha) {
    return integrate(C, &b, nullptr, tol, alpha);
}

ConePotential peripheral_potential(const OperatorField& b, const ConeChart& C, double tol, double alpha) {
    if (b.size() != C.size()) throw GeometryError("field does not match the chart");
    return integrate(C, nullptr, &b, tol, alpha);
}

ConePotential make_periodic(const ConePotential& P, const ConeChart& C) {
    ConePotential Q = P;
    const MinkVec& t0 = P.reduction.t0;
    Vec2 txy(t0.x(), t0.y());
    for (std::size_t n = 0; n < C.size(); ++n) {
        Q.u[n] += mink_dot(t0, C.node(n).x);
        Q.ubar[n] = Q.u[n] / std::cosh(C.node(n).r);
        Q.grad[n] += txy;
        Q.f[n] += t0.z();
    }
    Q.t = P.t - (C.deck().matrix() - Mat3::Identity()) * t0;
    for (std::size_t i = 0; i < Q.circle_integral.size(); ++i)
        Q.circle_integral[i] = Q.u[C.index(static_cast<int>(i), C.first_column() + C.nphi())] -
                               Q.u[C.index(static_cast<int>(i), C.first_column())];
    return Q;
}

ConeAngleMeasure cone_angle_measure(const std::vector<Mat2>& metric, const ConeChart& C, double radius_lo) {
    if (metric.size() != C.size()) throw GeometryError("metric does not match the chart");
    const int nr = C.rings(), np = C.nphi(), j0 = C.first_column();
    const double hs = C.ds(), hp = C.dphi();
    auto M = [&](int i, int j) -> const Mat2& { return metric[C.index(i, j0 + ((j % np) + np) % np)]; };
    auto seglen = [&](int i0, int ja, int i1, int jb) {
        Vec2 d((i1 - i0) * hs, (jb - ja) * hp);
        double la = std::sqrt(d.dot(M(i0, ja) * d)), lb = std::sqrt(d.dot(M(i1, jb) * d));
        if (std::abs(la - lb) <= 1e-14 * lb) return 0.5 * (la + lb);
        return (lb - la) / std::log(lb / la);
    };
    std::vector<std::vector<double>> D(nr, std::vector<double>(np));
    for (int j = 0; j < np; ++j) {
        double l0 = std::sqrt(M(0, j)(0, 0)), l1 = std::sqrt(M(1, j)(0, 0));
        double p = std::log(l1 / l0) / hs;
        if (!(p > 0.0)) throw GeometryError("metric does not shrink toward the tip");
        D[0][j] = l0 / p;
    }
    const int w = std::max(2, np / 16);
    for (int i = 0; i + 1 < nr; ++i) {
        for (int j = 0; j < np; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (int dj = -w; dj <= w; ++dj) best = std::min(best, D[i][((j + dj) % np + np) % np] + seglen(i, j + dj, i + 1, j));
            D[i + 1][j] = best;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < 2 * np; ++j) {
                int a = j % np, b = (j + 1) % np;
                D[i + 1][b] = std::min(D[i + 1][b], D[i + 1][a] + seglen(i + 1, j, i + 1, j + 1));
            }
            for (int j = 2 * np; j > 0; --j) {
                int a = j % np, b = (j - 1) % np;
                D[i + 1][b] = std::min(D[i + 1][b], D[i + 1][a] + seglen(i + 1, j, i + 1, j - 1));
            }
        }
    }
    double inner = 0.0, outer = std::numeric_limits<double>::infinity();
    for (int j = 0; j < np; ++j) {
        inner = std::max(inner, D[0][j]);
        outer = std::min(outer, D[nr - 1][j]);
    }
    ConeAngleMeasure out;
    out.radius_lo = radius_lo > 0.0 ? radius_lo : 5.0 * inner;
    out.radius_hi = 10.0 * out.radius_lo;
    if (out.radius_lo < inner || out.radius_hi > outer)
        throw GeometryError("radius decade not inside the chart: [" + std::to_string(out.radius_lo) + ", " +
                            std::to_string(out.radius_hi) + "] vs [" + std::to_string(inner) + ", " +
                            std::to_string(outer) + "]");
    const int K = 11;
    std::vector<double> R(K), ratio(K);
    for (int k = 0; k < K; ++k) {
        double rad = out.radius_lo * std::pow(10.0, k / (K - 1.0));
        std::vector<double> sc(np);
        for (int j = 0; j < np; ++j) {
            int i = 0;
            while (i + 1 < nr && D[i + 1][j] < rad) ++i;
            double t = std::log(rad / D[i][j]) / std::log(D[i + 1][j] / D[i][j]);
            sc[j] = i + t;  // fractional ring index
        }
        auto Mat = [&](double fi, int j) {
            int i = std::min(static_cast<int>(fi), nr - 2);
            double t = fi - i;
            // metrics near the tip scale like e^{2s}
            return Mat2(((1.0 - t) * M(i, j) * std::exp(2.0 * t * hs) + t * M(i + 1, j) * std::exp(-2.0 * (1.0 - t) * hs)));
        };
        double L = 0.0;
        for (int j = 0; j < np; ++j) {
            int jn = (j + 1) % np;
            Vec2 d((sc[jn] - sc[j]) * hs, hp);
            Mat2 G = 0.5 * (Mat(sc[j], j) + Mat(sc[jn], j + 1));
            L += std::sqrt(d.dot(G * d));
        }
        R[k] = rad;
        ratio[k] = L / rad;
    }
    Eigen::MatrixXd A(K, 2);
    Eigen::VectorXd v(K);
    for (int k = 0; k < K; ++k) {
        A(k, 0) = 1.0;
        A(k, 1) = R[k];
        v(k) = ratio[k];
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(v);
    out.theta = c(0);
    out.slope = c(1);
    out.misfit = (A * c - v).cwiseAbs().maxCoeff();
    out.samples = K;
    if (!(out.misfit <= 0.05 * std::abs(out.theta)) || !(out.theta > 0.0))
        throw GeometryError("cone angle fit did not converge: intercept " + std::to_string(out.theta) + ", misfit " +
                            std::to_string(out.misfit));
    return out;
}

SingularEmbedding singular_embedding(const ConeFn& bfn, const ConeChart& C, double a2, double a1) {
    if (!(a2 > 0.0 && a1 > a2)) throw GeometryError("need 0 < a2 < a1");
    OperatorField b = sample(C, bfn);
    for (std::size_t n = 0; n < C.size(); ++n) {
        Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (b[n] + b[n].transpose()));
        if (!(es.eigenvalues()(0) > a2 && es.eigenvalues()(1) < a1))
            throw GeometryError("positivity bound violated at r = " + std::to_string(C.node(n).r));
    }
    SingularEmbedding E;
    E.potential = make_periodic(peripheral_potential(bfn, C, 1e-6, 0.0), C);
    const ConePotential& P = E.potential;
    const int np = C.nphi(), nr = C.rings(), nc = C.columns();
    const double c = C.angle().ratio();
    Mat2 R = rot(C.angle().theta0());
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j + np < nc; ++j)
            E.conjugation = std::max(E.conjugation, (P.grad[C.index(i, j + np)] - R * P.grad[C.index(i, j)]).norm());

    E.bound_lower = a2;
    E.bound_upper = a1 * std::pow(std::cosh(C.r0()), 3);
    E.lip_min = std::numeric_limits<double>::infinity();
    E.unifdist = std::numeric_limits<double>::infinity();
    std::vector<Mat2> gflat(C.size()), gI(C.size());
    for (int i = 0; i < nr; ++i) {
        auto [rs, rss] = C.r_derivatives(C.s(i));
        (void)rss;
        double r = C.r(i), ch = std::cosh(r), sh = std::sinh(r), rho = std::tanh(r), ps = rs / (ch * ch);
        Mat2 Pm = Eigen::Vector2d(rs, c * sh).asDiagonal();
        for (int j = 0; j < nc; ++j) {
            int n = C.index(i, j);
            const Mat2& bb = b[n];
            double th = C.node(n).theta;
            E.unifdist = std::min(E.unifdist, P.grad[n].norm() / (a2 * rho));
            // exact derivatives of the developed gradient from b
            Vec2 gs = rs * (ch * bb(0, 0) * e_rho(th) + bb(0, 1) * e_th(th));
            Vec2 gp = c * sh * (ch * bb(0, 1) * e_rho(th) + bb(1, 1) * e_th(th));
            Mat2 Gm;
            Gm << gs.dot(gs), gs.dot(gp), gs.dot(gp), gp.dot(gp);
            gflat[n] = Gm;
            gI[n] = Pm.transpose() * bb.transpose() * bb * Pm;
            if (i == 0 || i + 1 == nr || j == 0 || j + 1 == nc) continue;
            // differences of the nodal data
            int up = C.index(i + 1, j), dn = C.index(i - 1, j), lf = C.index(i, j - 1), rt = C.index(i, j + 1);
            Vec2 ds = (P.grad[up] - P.grad[dn]) / (2.0 * C.ds());
            Vec2 dp = (P.grad[rt] - P.grad[lf]) / (2.0 * C.dphi());
            Mat2 Jm;
            Jm.col(0) = ds / ps;
            Jm.col(1) = dp / (c * rho);
            Eigen::JacobiSVD<Mat2> svd(Jm);
            E.lip_min = std::min(E.lip_min, svd.singularValues()(1));
            E.lip_max = std::max(E.lip_max, svd.singularValues()(0));
            auto sig = [&](int m) { return MinkVec(P.grad[m].x(), P.grad[m].y(), P.f[m]); };
            MinkVec ss = (sig(up) - sig(dn)) / (2.0 * C.ds());
            MinkVec sp = (sig(rt) - sig(lf)) / (2.0 * C.dphi());
            Mat2 Ic;
            Ic << mink_dot(ss, ss), mink_dot(ss, sp), mink_dot(ss, sp), mink_dot(sp, sp);
            Mat2 Pi = Pm.inverse();
            Mat2 Ifr = Pi.transpose() * Ic * Pi;
            E.metric_error = std::max(E.metric_error, (Ifr - bb.transpose() * bb).cwiseAbs().maxCoeff());
            MinkVec er(ch * std::cos(th), ch * std::sin(th), sh), et(-std::sin(th), std::cos(th), 0.0);
            MinkVec Ns = rs * er, Np = c * sh * et;
            Mat2 II;
            II << mink_dot(ss, Ns), mink_dot(ss, Np), mink_dot(sp, Ns), mink_dot(sp, Np);
            Mat2 S = Pm * Ic.inverse() * II * Pi;
            E.shape_error = std::max(E.shape_error, (S - bb.inverse()).cwiseAbs().maxCoeff());
        }
    }
    // f at the tip from the two innermost ring means, f - f_tip ~ rho^2
    auto ring_mean = [&](int i) {
        double s = 0.0;
        for (int j = C.first_column(); j < C.first_column() + np; ++j) s += P.f[C.index(i, j)];
        return s / np;
    };
    double q0 = std::pow(std::tanh(C.r(0)), 2), q1 = std::pow(std::tanh(C.r(1)), 2);
    E.f_tip = (q1 * ring_mean(0) - q0 * ring_mean(1)) / (q1 - q0);
    std::vector<double> rr, ff;
    for (int i = 0; i < inner_decade(C); ++i) {
        double m = 0.0;
        for (int j = C.first_column(); j < C.first_column() + np; ++j)
            m = std::max(m, std::abs(P.f[C.index(i, j)] - E.f_tip));
        rr.push_back(std::tanh(C.r(i)));
        ff.push_back(m);
    }
    E.f_fit = fit_power(rr, ff);
    E.flat_angle = cone_angle_measure(gflat, C);
    E.I_angle = cone_angle_measure(gI, C);
    return E;
}

nlohmann::json WedgeSurgery::describe() const {
    return {{"theta", theta},
            {"theta1", theta1},
            {"theta2", theta2},
            {"quadrilateral",
             {{"p1", {p1.x(), p1.y()}}, {"p", {0.0, 0.0}}, {"p1_prime", {p1p.x(), p1p.y()}}, {"p2", {p2.x(), p2.y()}}}},
            {"interior_angles", {{"p1", at_p1}, {"p", at_p}, {"p1_prime", at_p1p}, {"p2", at_p2}}},
            {"gluing",
             {{"p1_p2_to_p1prime_p2", "rotation about p2 by theta2"},
              {"edges_outside_quadrilateral", "rotation about p by theta"}}},
            {"cone_points", {{{"at", "p1 ~ p1'"}, {"angle", theta1}}, {{"at", "p2"}, {"angle", theta2}}}}};
}

WedgeSurgery wedge_surgery(const ConeAngle& theta, double d1, double d2) {
    const double th = theta.theta0();
    if (!(th < kPi)) throw GeometryError("wedge surgery needs theta < pi");
    if (!(d1 > 0.0)) throw GeometryError("p1 must differ from the apex");
    if (!(d2 > 1e-9 * d1)) throw GeometryError("degenerate quadrilateral: p2 too close to the apex");
    WedgeSurgery W;
    W.theta = th;
    W.p1 = Vec2(d1, 0.0);
    W.p1p = d1 * e_rho(th);
    W.p2 = d2 * e_rho(0.5 * th);
    std::array<Vec2, 4> Q{W.p1, Vec2::Zero(), W.p1p, W.p2};
    double area = 0.0;
    for (int k = 0; k < 4; ++k) area += cross2(Q[k], Q[(k + 1) % 4]);
    std::array<double, 4> ang{};
    for (int k = 0; k < 4; ++k) {
        Vec2 prev = Q[(k + 3) % 4] - Q[k], next = Q[(k + 1) % 4] - Q[k];
        double a = std::atan2(prev.y(), prev.x()), b = std::atan2(next.y(), next.x());
        double d = area > 0.0 ? a - b : b - a;
        d = std::fmod(d, 2.0 * kPi);
        if (d < 0.0) d += 2.0 * kPi;
        ang[k] = d;
    }
    W.at_p1 = ang[0];
    W.at_p = ang[1];
    W.at_p1p = ang[2];
    W.at_p2 = ang[3];
    if (std::min({ang[0], ang[2], ang[3]}) < 1e-12) throw GeometryError("degenerate quadrilateral");
    W.theta1 = (kPi - W.at_p1) + (kPi - W.at_p1p);
    W.theta2 = 2.0 * kPi - W.at_p2;
    return W;
}

}  // namespace clab
