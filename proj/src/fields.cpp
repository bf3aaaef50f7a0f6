#include "clab/fields.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

namespace clab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const Mat2 kNaNMat = Mat2::Constant(kNaN);
}  // namespace

const Mat2& J2() {
    static const Mat2 j = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();
    return j;
}

namespace klein {

Mat2 metric(const Vec2& k) {
    double s2 = 1.0 - k.squaredNorm();
    return Mat2::Identity() / s2 + k * k.transpose() / (s2 * s2);
}

Mat2 frame(const Vec2& k) {
    Mat2 g = metric(k);
    Mat2 E;
    double n1 = std::sqrt(g(0, 0));
    Vec2 e1(1.0 / n1, 0.0);
    Vec2 y(0.0, 1.0);
    Vec2 e2 = y - (e1.dot(g * y)) * e1;
    e2 /= std::sqrt(e2.dot(g * e2));
    E.col(0) = e1;
    E.col(1) = e2;
    return E;
}

double area_density(const Vec2& k) { return std::pow(1.0 - k.squaredNorm(), -1.5); }

double cosh_r(const Vec2& k) { return 1.0 / std::sqrt(1.0 - k.squaredNorm()); }

std::array<Mat2, 2> christoffel(const Vec2& k) {
    Vec2 psi = k / (1.0 - k.squaredNorm());
    std::array<Mat2, 2> G;
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) G[c](a, b) = (c == a ? psi(b) : 0.0) + (c == b ? psi(a) : 0.0);
    return G;
}

}  // namespace klein

KleinChart::KleinChart(const MinkVec& base, double spacing, double margin)
    : base_(base), iso_(boost_to(base)), h_(spacing), radius_(1.0 - margin) {
    if (!(spacing > 0.0) || !(margin > 0.0) || !(margin < 1.0))
        throw GeometryError("chart needs spacing > 0 and margin in (0,1)");
    if (margin < 1e-4) throw GeometryError("degenerate metric: margin too small");
    n_ = static_cast<int>(std::floor(radius_ / h_));
    int w = 2 * n_ + 1;
    lookup_.assign(static_cast<std::size_t>(w) * w, -1);
    for (int j = -n_; j <= n_; ++j)
        for (int i = -n_; i <= n_; ++i) {
            Vec2 k(i * h_, j * h_);
            if (k.norm() > radius_) continue;
            ChartNode nd;
            nd.i = i;
            nd.j = j;
            nd.k = k;
            nd.x = dev(k);
            nd.g = klein::metric(k);
            nd.E = klein::frame(k);
            auto Jac = dev_jacobian(k);
            nd.f1 = Jac * nd.E.col(0);
            nd.f2 = Jac * nd.E.col(1);
            nd.cosh_r = klein::cosh_r(k);
            nd.area = klein::area_density(k) * h_ * h_;
            Eigen::SelfAdjointEigenSolver<Mat2> es(nd.g);
            if (es.eigenvalues()(0) <= 0.0 || es.eigenvalues()(1) / es.eigenvalues()(0) > 1e12)
                throw GeometryError("degenerate metric in chart");
            lookup_[static_cast<std::size_t>(j + n_) * w + (i + n_)] = static_cast<int>(nodes_.size());
            nodes_.push_back(nd);
        }
}

int KleinChart::index(int i, int j) const {
    if (i < -n_ || i > n_ || j < -n_ || j > n_) return -1;
    return lookup_[static_cast<std::size_t>(j + n_) * (2 * n_ + 1) + (i + n_)];
}

bool KleinChart::has_collar(int idx, int layers) const {
    const ChartNode& nd = nodes_[idx];
    for (int b = -layers; b <= layers; ++b)
        for (int a = -layers; a <= layers; ++a)
            if (index(nd.i + a, nd.j + b) < 0) return false;
    return true;
}

MinkVec KleinChart::dev(const Vec2& k) const { return klein_unproject(k, base_); }

Vec2 KleinChart::chart_coords(const MinkVec& x) const { return klein_project(x, base_); }

Eigen::Matrix<double, 3, 2> KleinChart::dev_jacobian(const Vec2& k) const {
    double s2 = 1.0 - k.squaredNorm();
    double s = std::sqrt(s2);
    MinkVec y(k.x(), k.y(), 1.0);
    Eigen::Matrix<double, 3, 2> J;
    for (int i = 0; i < 2; ++i) J.col(i) = MinkVec::Unit(i) / s + k(i) * y / (s * s2);
    return iso_.matrix() * J;
}

PointFrame KleinChart::point_frame(const Vec2& k) const {
    Mat2 E = klein::frame(k);
    auto Jac = dev_jacobian(k);
    return {dev(k), Jac * E.col(0), Jac * E.col(1)};
}

double KleinChart::curvature_defect(double r) const {
    std::vector<Mat2> g(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) g[n] = nodes_[n].g;
    ScalarField K = brioschi_curvature(g, *this);
    double worst = 0.0;
    for (std::size_t n = 0; n < nodes_.size(); ++n)
        if (nodes_[n].k.norm() <= r && is_valid(K[n])) worst = std::max(worst, std::abs(K[n] + 1.0));
    return worst;
}

bool is_valid(const Mat2& m) { return m.allFinite(); }
bool is_valid(double v) { return std::isfinite(v); }

ScalarField sample(const KleinChart& C, const ScalarFn& f) {
    ScalarField out(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) out[n] = f(C.node(n).x);
    return out;
}

OperatorField sample(const KleinChart& C, const OperatorFn& b) {
    OperatorField out(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(n);
        out[n] = b({nd.x, nd.f1, nd.f2});
    }
    return out;
}

namespace {

// value at offset (a,b) from node n, or NaN
template <class F>
auto neighbor(const F& f, const KleinChart& C, int n, int a, int b) {
    const ChartNode& nd = C.node(n);
    int m = C.index(nd.i + a, nd.j + b);
    using T = std::decay_t<decltype(f[0])>;
    if (m < 0) {
        if constexpr (std::is_same_v<T, double>) return kNaN;
        else return T(T::Constant(kNaN));
    }
    return f[m];
}

// central differences d/dX, d/dY
template <class F>
std::decay_t<decltype(std::declval<F>()[0])> diff(const F& f, const KleinChart& C, int n, int axis) {
    double h = C.spacing();
    if (axis == 0) return (neighbor(f, C, n, 1, 0) - neighbor(f, C, n, -1, 0)) / (2.0 * h);
    return (neighbor(f, C, n, 0, 1) - neighbor(f, C, n, 0, -1)) / (2.0 * h);
}

Mat2 flat_hessian(const ScalarField& f, const KleinChart& C, int n) {
    double h2 = C.spacing() * C.spacing();
    double c = f[n];
    Mat2 H;
    H(0, 0) = (neighbor(f, C, n, 1, 0) - 2.0 * c + neighbor(f, C, n, -1, 0)) / h2;
    H(1, 1) = (neighbor(f, C, n, 0, 1) - 2.0 * c + neighbor(f, C, n, 0, -1)) / h2;
    H(0, 1) = H(1, 0) = (neighbor(f, C, n, 1, 1) - neighbor(f, C, n, 1, -1) - neighbor(f, C, n, -1, 1) +
                         neighbor(f, C, n, -1, -1)) /
                        (4.0 * h2);
    return H;
}

}  // namespace

OperatorField hess_minus_id(const ScalarField& u, const KleinChart& C) {
    ScalarField ubar(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) ubar[n] = u[n] / C.node(n).cosh_r;
    OperatorField b(C.size(), kNaNMat);
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), 1)) continue;
        const ChartNode& nd = C.node(n);
        Mat2 H = flat_hessian(ubar, C, static_cast<int>(n));
        Mat2 r = nd.cosh_r * nd.E.transpose() * H * nd.E;
        b[n] = 0.5 * (r + r.transpose());
    }
    return b;
}

OperatorField hess_minus_id_covariant(const ScalarField& u, const KleinChart& C) {
    OperatorField b(C.size(), kNaNMat);
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), 1)) continue;
        const ChartNode& nd = C.node(n);
        Mat2 H = flat_hessian(u, C, static_cast<int>(n));
        Vec2 du(diff(u, C, static_cast<int>(n), 0), diff(u, C, static_cast<int>(n), 1));
        auto G = klein::christoffel(nd.k);
        Mat2 hess = H - du(0) * G[0] - du(1) * G[1];
        Mat2 r = nd.E.transpose() * (hess - u[n] * nd.g) * nd.E;
        b[n] = 0.5 * (r + r.transpose());
    }
    return b;
}

Mat2 to_coordinates(const Mat2& b, const Mat2& E, const Mat2& g) { return E * b * E.transpose() * g; }

Mat2 to_frame(const Mat2& B, const Mat2& E, const Mat2& g) { return E.transpose() * g * B * E; }

double Residual::max_within(const KleinChart& C, double klein_radius) const {
    double worst = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n)
        if (C.node(n).k.norm() <= klein_radius && is_valid(pointwise[n]))
            worst = std::max(worst, std::abs(pointwise[n]));
    return worst;
}

namespace {

std::vector<Mat2> coordinate_field(const OperatorField& b, const KleinChart& C) {
    std::vector<Mat2> B(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) B[n] = to_coordinates(b[n], C.node(n).E, C.node(n).g);
    return B;
}

Residual finish(const std::vector<double>& vals, const KleinChart& C, int layers) {
    Residual r;
    r.pointwise.assign(C.size(), kNaN);
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), layers) || !is_valid(vals[n])) continue;
        r.pointwise[n] = vals[n];
        r.max = std::max(r.max, std::abs(vals[n]));
    }
    return r;
}

// (1/sqrt g) d_j (sqrt g g^{jk} w_k) for a coordinate covector field
ScalarField covector_divergence(const VectorField& w, const KleinChart& C) {
    VectorField flux(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(n);
        flux[n] = std::sqrt(nd.g.determinant()) * nd.g.inverse() * w[n];
    }
    ScalarField out(C.size(), kNaN);
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        double d = diff(flux, C, m, 0)(0) + diff(flux, C, m, 1)(1);
        out[n] = d / std::sqrt(C.node(n).g.determinant());
    }
    return out;
}

VectorField coordinate_divergence(const std::vector<Mat2>& B, const KleinChart& C) {
    VectorField out(C.size(), Vec2::Constant(kNaN));
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        const ChartNode& nd = C.node(n);
        Mat2 dX = diff(B, C, m, 0), dY = diff(B, C, m, 1);
        auto G = klein::christoffel(nd.k);
        Vec2 w;
        for (int j = 0; j < 2; ++j) {
            double v = dX(0, j) + dY(1, j);
            for (int i = 0; i < 2; ++i)
                for (int mm = 0; mm < 2; ++mm) v += G[i](i, mm) * B[n](mm, j) - G[mm](i, j) * B[n](i, mm);
            w(j) = v;
        }
        out[n] = w;
    }
    return out;
}

}  // namespace

VectorField codazzi_form(const OperatorField& b, const KleinChart& C) {
    auto B = coordinate_field(b, C);
    VectorField out(C.size(), Vec2::Constant(kNaN));
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        const ChartNode& nd = C.node(n);
        Mat2 dX = diff(B, C, m, 0), dY = diff(B, C, m, 1);
        auto G = klein::christoffel(nd.k);
        Vec2 V;
        for (int i = 0; i < 2; ++i) {
            double v = dX(i, 1) - dY(i, 0);
            for (int mm = 0; mm < 2; ++mm) v += G[i](0, mm) * B[n](mm, 1) - G[i](1, mm) * B[n](mm, 0);
            V(i) = v;
        }
        // d(e1,e2) = d(dX,dY) / sqrt(det g); frame components via E^{-1} = E^T g
        out[n] = nd.E.transpose() * nd.g * V / std::sqrt(nd.g.determinant());
    }
    return out;
}

Residual codazzi_residual(const OperatorField& b, const KleinChart& C, int layers) {
    VectorField V = codazzi_form(b, C);
    std::vector<double> vals(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) vals[n] = V[n].norm();
    return finish(vals, C, layers);
}

VectorField divergence(const OperatorField& b, const KleinChart& C) {
    auto w = coordinate_divergence(coordinate_field(b, C), C);
    VectorField out(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) out[n] = C.node(n).E.transpose() * w[n];
    return out;
}

Residual divergence_identity_residual(const OperatorField& b, const KleinChart& C, int layers) {
    auto B = coordinate_field(b, C);
    auto w = coordinate_divergence(B, C);
    ScalarField tr(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) tr[n] = b[n].trace();
    std::vector<double> vals(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        Vec2 dtr(diff(tr, C, m, 0), diff(tr, C, m, 1));
        Vec2 r = C.node(n).E.transpose() * (w[n] - dtr);
        vals[n] = r.norm();
    }
    return finish(vals, C, layers);
}

Residual lichnerowicz_residual(const OperatorField& b, const KleinChart& C, int layers) {
    auto B = coordinate_field(b, C);
    auto w = coordinate_divergence(B, C);
    ScalarField tr(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) tr[n] = b[n].trace();
    VectorField dtr(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        dtr[n] = Vec2(diff(tr, C, m, 0), diff(tr, C, m, 1));
    }
    ScalarField dd = covector_divergence(w, C);
    ScalarField lap = covector_divergence(dtr, C);
    std::vector<double> vals(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        double L = -(lap[n] - 0.5 * tr[n]) + dd[n];
        vals[n] = L - 0.5 * tr[n];
    }
    return finish(vals, C, layers);
}

ScalarField brioschi_curvature(const std::vector<Mat2>& metric, const KleinChart& C) {
    ScalarField K(C.size(), kNaN);
    double h = C.spacing();
    for (std::size_t n = 0; n < C.size(); ++n) {
        int m = static_cast<int>(n);
        if (!C.has_collar(m, 1)) continue;
        auto comp = [&](int a, int b, int r, int c) { return neighbor(metric, C, m, a, b)(r, c); };
        double E = metric[n](0, 0), F = metric[n](0, 1), G = metric[n](1, 1);
        double Eu = (comp(1, 0, 0, 0) - comp(-1, 0, 0, 0)) / (2 * h);
        double Ev = (comp(0, 1, 0, 0) - comp(0, -1, 0, 0)) / (2 * h);
        double Fu = (comp(1, 0, 0, 1) - comp(-1, 0, 0, 1)) / (2 * h);
        double Fv = (comp(0, 1, 0, 1) - comp(0, -1, 0, 1)) / (2 * h);
        double Gu = (comp(1, 0, 1, 1) - comp(-1, 0, 1, 1)) / (2 * h);
        double Gv = (comp(0, 1, 1, 1) - comp(0, -1, 1, 1)) / (2 * h);
        double Evv = (comp(0, 1, 0, 0) - 2 * E + comp(0, -1, 0, 0)) / (h * h);
        double Guu = (comp(1, 0, 1, 1) - 2 * G + comp(-1, 0, 1, 1)) / (h * h);
        double Fuv = (comp(1, 1, 0, 1) - comp(1, -1, 0, 1) - comp(-1, 1, 0, 1) + comp(-1, -1, 0, 1)) / (4 * h * h);
        Eigen::Matrix3d M1, M2;
        M1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
              Fv - 0.5 * Gu, E, F,
              0.5 * Gv, F, G;
        M2 << 0.0, 0.5 * Ev, 0.5 * Gu,
              0.5 * Ev, E, F,
              0.5 * Gu, F, G;
        double det = E * G - F * F;
        K[n] = (M1.determinant() - M2.determinant()) / (det * det);
    }
    return K;
}

double max_norm(const OperatorField& b, const KleinChart& C, int layers, double klein_radius) {
    double worst = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), layers) || C.node(n).k.norm() > klein_radius) continue;
        if (!is_valid(b[n])) continue;
        worst = std::max(worst, b[n].norm());
    }
    return worst;
}

double max_norm(const ScalarField& f, const KleinChart& C, int layers, double klein_radius) {
    double worst = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), layers) || C.node(n).k.norm() > klein_radius) continue;
        if (!is_valid(f[n])) continue;
        worst = std::max(worst, std::abs(f[n]));
    }
    return worst;
}

OperatorField traceless(const OperatorField& b) {
    OperatorField out(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) out[n] = b[n] - 0.5 * b[n].trace() * Mat2::Identity();
    return out;
}

OperatorField apply_J(const OperatorField& b) {
    OperatorField out(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) out[n] = J2() * b[n];
    return out;
}

double integrate(const ScalarField& f, const KleinChart& C) {
    double s = 0.0;
    for (std::size_t n = 0; n < C.size(); ++n) s += f[n] * C.node(n).area;
    return s;
}

double interpolate(const ScalarField& f, const KleinChart& C, const Vec2& k, int order) {
    double h = C.spacing();
    int i0 = static_cast<int>(std::floor(k.x() / h)) - (order / 2 - 1);
    int j0 = static_cast<int>(std::floor(k.y() / h)) - (order / 2 - 1);
    std::vector<double> wx(order), wy(order);
    for (int a = 0; a < order; ++a) {
        double lx = 1.0, ly = 1.0;
        for (int c = 0; c < order; ++c) {
            if (c == a) continue;
            lx *= (k.x() / h - (i0 + c)) / static_cast<double>(a - c);
            ly *= (k.y() / h - (j0 + c)) / static_cast<double>(a - c);
        }
        wx[a] = lx;
        wy[a] = ly;
    }
    double s = 0.0;
    for (int b = 0; b < order; ++b)
        for (int a = 0; a < order; ++a) {
            int m = C.index(i0 + a, j0 + b);
            if (m < 0 || !is_valid(f[m])) throw GeometryError("interpolation stencil leaves the chart");
            s += wx[a] * wy[b] * f[m];
        }
    return s;
}

namespace {

// weights of int_a^{a+1} over Lagrange interpolation at nodes 0..p-1
std::vector<double> interval_weights(int p, int a) {
    static std::map<std::pair<int, int>, std::vector<double>> cache;
    auto key = std::make_pair(p, a);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Eigen::MatrixXd V(p, p);
    Eigen::VectorXd mom(p);
    for (int m = 0; m < p; ++m) {
        for (int l = 0; l < p; ++l) V(m, l) = std::pow(static_cast<double>(l), m);
        mom(m) = (std::pow(a + 1.0, m + 1) - std::pow(static_cast<double>(a), m + 1)) / (m + 1);
    }
    Eigen::VectorXd w = V.fullPivLu().solve(mom);
    std::vector<double> out(w.data(), w.data() + p);
    cache[key] = out;
    return out;
}

}  // namespace

std::vector<double> cumulative_integral(const std::vector<double>& f) {
    const int m = static_cast<int>(f.size()) - 1;
    std::vector<double> F(f.size(), 0.0);
    if (m < 1) return F;
    const int p = std::min(6, m + 1);
    for (int i = 0; i < m; ++i) {
        int start = std::clamp(i - (p / 2 - 1), 0, m + 1 - p);
        auto w = interval_weights(p, i - start);
        double s = 0.0;
        for (int l = 0; l < p; ++l) s += w[l] * f[start + l];
        F[i + 1] = F[i] + s;
    }
    return F;
}

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
    auto build = [&](const auto& x, const auto& w) {
        std::vector<std::pair<double, double>> out;
        double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (std::size_t i = 0; i < x.size(); ++i) {
            out.push_back({c + r * x[i], r * w[i]});
            if (x[i] != 0.0) out.push_back({c - r * x[i], r * w[i]});
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    using namespace boost::math::quadrature;
    switch (n) {
        case 4: return build(gauss<double, 4>::abscissa(), gauss<double, 4>::weights());
        case 8: return build(gauss<double, 8>::abscissa(), gauss<double, 8>::weights());
        case 12: return build(gauss<double, 12>::abscissa(), gauss<double, 12>::weights());
        case 16: return build(gauss<double, 16>::abscissa(), gauss<double, 16>::weights());
        case 20: return build(gauss<double, 20>::abscissa(), gauss<double, 20>::weights());
        default: throw GeometryError("unsupported Gauss order");
    }
}

double integrate_disc(const ScalarField& f, const KleinChart& C, double radius) {
    if (std::tanh(radius) > C.radius() - 3 * C.spacing()) throw GeometryError("disc not covered by the chart");
    const int panels = 4, nphi = 96;
    double total = 0.0;
    for (int p = 0; p < panels; ++p)
        for (auto [r, wr] : gauss_legendre(8, radius * p / panels, radius * (p + 1) / panels))
            for (int q = 0; q < nphi; ++q) {
                double phi = 2.0 * std::numbers::pi * q / nphi;
                Vec2 k(std::tanh(r) * std::cos(phi), std::tanh(r) * std::sin(phi));
                total += wr * (2.0 * std::numbers::pi / nphi) * std::sinh(r) * interpolate(f, C, k);
            }
    return total;
}

OctagonQuadrature::OctagonQuadrature(const SurfaceGroup& G, int order, int refine) {
    auto V = octagon_klein_vertices(G);
    std::vector<double> lam = {0.0, 0.5, 0.75, 0.875, 0.9375, 0.96875, 0.984375, 1.0};
    std::vector<double> mu = {0.0, 0.03125, 0.0625, 0.125, 0.25, 0.5, 0.75, 0.875, 0.9375, 0.96875, 1.0};
    auto split = [](std::vector<double> v, int times) {
        for (int t = 0; t < times; ++t) {
            std::vector<double> w;
            for (std::size_t i = 0; i + 1 < v.size(); ++i) {
                w.push_back(v[i]);
                w.push_back(0.5 * (v[i] + v[i + 1]));
            }
            w.push_back(v.back());
            v = w;
        }
        return v;
    };
    lam = split(lam, refine);
    mu = split(mu, refine);
    const MinkVec c = G.center();
    for (int t = 0; t < 8; ++t) {
        Vec2 a = V[t], d = V[(t + 1) % 8] - V[t];
        double jac = std::abs(a.x() * d.y() - a.y() * d.x());
        for (std::size_t pl = 0; pl + 1 < lam.size(); ++pl)
            for (auto [l, wl] : gauss_legendre(order, lam[pl], lam[pl + 1]))
                for (std::size_t pm = 0; pm + 1 < mu.size(); ++pm)
                    for (auto [m, wm] : gauss_legendre(order, mu[pm], mu[pm + 1])) {
                        Vec2 k = l * (a + m * d);
                        pts_.push_back({k, klein_unproject(k, c), wl * wm * l * jac * klein::area_density(k)});
                    }
    }
}

double OctagonQuadrature::integrate(const std::function<double(const QuadPoint&)>& f) const {
    double s = 0.0;
    for (const QuadPoint& q : pts_) s += q.w * f(q);
    return s;
}

void write_csv(const std::string& path, const KleinChart& C, const std::vector<std::string>& names,
               const std::vector<ScalarField>& columns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "i,j,kx,ky,x,y,z";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(n);
        out << nd.i << "," << nd.j;
        put(nd.k.x());
        put(nd.k.y());
        put(nd.x.x());
        put(nd.x.y());
        put(nd.x.z());
        for (const auto& col : columns) put(col[n]);
        out << "\n";
    }
}

}  // namespace clab
