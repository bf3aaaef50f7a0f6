#include "clab/codazzi.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace clab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const MinkVec kE3(0.0, 0.0, 1.0);
}  // namespace

ScalarField linear_potential(const MinkVec& t, const KleinChart& C) {
    ScalarField v(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) v[n] = mink_dot(t, C.node(static_cast<int>(n)).x);
    return v;
}

MinkVec recover_linear(const ScalarField& v, const KleinChart& C, double* residual) {
    const double r = 0.8 * C.radius();
    const double h = C.spacing();
    std::array<int, 3> idx{};
    Mat3 A;
    MinkVec rhs;
    for (int a = 0; a < 3; ++a) {
        double ang = M_PI / 2.0 + 2.0 * M_PI * a / 3.0;
        int i = static_cast<int>(std::lround(r * std::cos(ang) / h));
        int j = static_cast<int>(std::lround(r * std::sin(ang) / h));
        idx[a] = C.index(i, j);
        if (idx[a] < 0 || !is_valid(v[idx[a]])) throw GeometryError("recover_linear: anchor node missing");
        // <t, x> = t^T eta x
        A.row(a) = (eta() * C.node(idx[a]).x).transpose();
        rhs(a) = v[idx[a]];
    }
    MinkVec t = A.partialPivLu().solve(rhs);
    if (residual) {
        double res = 0.0;
        for (std::size_t n = 0; n < C.size(); ++n) {
            if (!is_valid(v[n])) continue;
            res = std::max(res, std::abs(mink_dot(t, C.node(static_cast<int>(n)).x) - v[n]));
        }
        *residual = res;
    }
    return t;
}

cplx QuadDiffLocal::f(cplx z) const {
    cplx s = 0.0;
    for (const auto& [k, c] : terms) s += c * std::pow(z, k);
    return s;
}

cplx QuadDiffLocal::df(cplx z) const {
    cplx s = 0.0;
    for (const auto& [k, c] : terms)
        if (k != 0) s += c * static_cast<double>(k) * std::pow(z, k - 1);
    return s;
}

QuadDiffLocal QuadDiffLocal::operator*(cplx c) const {
    QuadDiffLocal q = *this;
    for (auto& t : q.terms) t.second *= c;
    return q;
}

QuadDiffLocal QuadDiffLocal::operator+(const QuadDiffLocal& o) const {
    QuadDiffLocal q = *this;
    for (const auto& t : o.terms) {
        auto it = std::find_if(q.terms.begin(), q.terms.end(), [&](const auto& u) { return u.first == t.first; });
        if (it == q.terms.end())
            q.terms.push_back(t);
        else
            it->second += t.second;
    }
    return q;
}

double cauchy_riemann_residual(const QuadDiffLocal& q, const std::vector<cplx>& points, double h) {
    double worst = 0.0;
    for (cplx z : points) {
        cplx fx = (q.f(z + h) - q.f(z - h)) / (2.0 * h);
        cplx fy = (q.f(z + cplx(0.0, h)) - q.f(z - cplx(0.0, h))) / (2.0 * h);
        cplx dzbar = 0.5 * (fx + cplx(0.0, 1.0) * fy);
        double scale = std::max(std::abs(q.df(z)), 1.0);
        worst = std::max(worst, std::abs(dzbar) / scale);
    }
    return worst;
}

cplx disc_coordinate(const MinkVec& x, const MinkVec& center) {
    MinkVec y = boost_to(center).inverse()(x);
    return cplx(y.x(), y.y()) / (1.0 + y.z());
}

MinkVec from_disc(cplx z, const MinkVec& center) {
    double r2 = std::norm(z);
    if (r2 >= 1.0) throw GeometryError("point outside the Poincare disc");
    MinkVec y(2.0 * z.real(), 2.0 * z.imag(), 1.0 + r2);
    return boost_to(center)(y / (1.0 - r2));
}

double poincare_conformal_factor(cplx z) {
    double d = 1.0 - std::norm(z);
    return 4.0 / (d * d);
}

Mat2 conformal_matrix(cplx f, double e2eta) {
    Mat2 m;
    m << f.real(), -f.imag(), -f.imag(), -f.real();
    return m / e2eta;
}

Mat2 conformal_rotation(const PointFrame& F, const MinkVec& center) {
    cplx z = disc_coordinate(F.x, center);
    double r2 = std::norm(z), d = 1.0 - r2;
    // derivative of the inverse stereographic map along Re z
    MinkVec y(2.0 * z.real(), 2.0 * z.imag(), 1.0 + r2);
    MinkVec dy = (MinkVec(2.0, 0.0, 2.0 * z.real()) * d + y * 2.0 * z.real()) / (d * d);
    MinkVec c1 = boost_to(center)(dy);
    c1 /= std::sqrt(mink_norm2(c1));
    double c = mink_dot(c1, F.f1), s = mink_dot(c1, F.f2);
    Mat2 R;
    R << c, -s, s, c;
    return R;
}

Mat2 harmonic_matrix(cplx f, const PointFrame& F, const MinkVec& center) {
    cplx z = disc_coordinate(F.x, center);
    Mat2 M = conformal_matrix(f, poincare_conformal_factor(z));
    Mat2 R = conformal_rotation(F, center);
    return R * M * R.transpose();
}

OperatorFn harmonic_tensor(const QuadDiffLocal& q) {
    return [q](const PointFrame& F) { return harmonic_matrix(q.f(disc_coordinate(F.x, q.center)), F, q.center); };
}

OperatorField harmonic_tensor(const QuadDiffLocal& q, const KleinChart& C) { return sample(C, harmonic_tensor(q)); }

Mat2 flat_hessian(const Mat2& b, const Vec2& k) {
    double s = std::sqrt(1.0 - k.squaredNorm());
    Mat2 g = klein::metric(k), E = klein::frame(k);
    return s * g * E * b * E.transpose() * g;
}

// ---------------------------------------------------------------------------------------------
// potentials

Potential::Potential(const KleinChart& C, ScalarField ubar, VectorField grad, double path_residual, OperatorFn b)
    : C_(&C), ubar_(std::move(ubar)), grad_(std::move(grad)), path_residual_(path_residual), b_(std::move(b)) {
    gx_.resize(grad_.size());
    gy_.resize(grad_.size());
    for (std::size_t n = 0; n < grad_.size(); ++n) {
        gx_[n] = grad_[n].x();
        gy_[n] = grad_[n].y();
    }
}

ScalarField Potential::u() const {
    ScalarField out(ubar_.size());
    for (std::size_t n = 0; n < ubar_.size(); ++n) out[n] = ubar_[n] * C_->node(static_cast<int>(n)).cosh_r;
    return out;
}

int Potential::nearest_valid(const Vec2& k) const {
    const double h = C_->spacing();
    int i0 = static_cast<int>(std::lround(k.x() / h)), j0 = static_cast<int>(std::lround(k.y() / h));
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= 3 && best < 0; ++ring)
        for (int b = -ring; b <= ring; ++b)
            for (int a = -ring; a <= ring; ++a) {
                int m = C_->index(i0 + a, j0 + b);
                if (m < 0 || !is_valid(ubar_[m])) continue;
                double d = (C_->node(m).k - k).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = m;
                }
            }
    return best;
}

std::pair<double, Vec2> Potential::flat(const Vec2& k) const {
    if (!b_) {
        double v = interpolate(ubar_, *C_, k, 6);
        return {v, Vec2(interpolate(gx_, *C_, k, 6), interpolate(gy_, *C_, k, 6))};
    }
    if (k.norm() > C_->radius()) throw GeometryError("point outside the potential's chart");
    int n = nearest_valid(k);
    if (n < 0) throw GeometryError("point outside the potential's chart");
    const ChartNode& nd = C_->node(n);
    Vec2 d = k - nd.k;
    double v = ubar_[n] + d.dot(grad_[n]);
    Vec2 g = grad_[n];
    if (d.squaredNorm() > 0.0)
        for (const auto& [tau, w] : gauss_legendre(8, 0.0, 1.0)) {
            Vec2 kq = nd.k + tau * d;
            Mat2 H = flat_hessian(b_(C_->point_frame(kq)), kq);
            Vec2 Hd = H * d;
            g += w * Hd;
            v += w * (1.0 - tau) * d.dot(Hd);
        }
    return {v, g};
}

bool Potential::covers(const Vec2& k) const {
    try {
        flat(k);
        return true;
    } catch (const GeometryError&) {
        return false;
    }
}

double Potential::u_at(const MinkVec& x) const {
    Vec2 k = C_->chart_coords(x);
    return flat(k).first * klein::cosh_r(k);
}

namespace {

struct Sweep {
    const KleinChart& C;
    // grid: flat Hessians at nodes; analytic: b evaluated on demand
    const std::vector<Mat2>* H = nullptr;
    const OperatorFn* b = nullptr;
    ScalarField ubar;
    VectorField grad;

    Sweep(const KleinChart& C_) : C(C_), ubar(C_.size(), kNaN), grad(C_.size(), Vec2::Constant(kNaN)) {}

    bool usable(int m) const { return m >= 0 && (!H || is_valid((*H)[m])); }

    // nodes from (i,j) stepping along axis with sign s, while usable
    std::vector<int> line(int i, int j, int axis, int s) const {
        std::vector<int> out;
        for (int t = 0;; ++t) {
            int m = axis == 0 ? C.index(i + s * t, j) : C.index(i, j + s * t);
            if (!usable(m)) break;
            out.push_back(m);
        }
        return out;
    }

    // carry (ubar, grad) from the first node of the line to the rest
    void carry(const std::vector<int>& nodes, int axis, int s) {
        if (nodes.size() < 2) return;
        const double step = s * C.spacing();
        const int first = nodes[0];
        if (H) {
            std::vector<double> hx(nodes.size()), hy(nodes.size());
            for (std::size_t t = 0; t < nodes.size(); ++t) {
                hx[t] = (*H)[nodes[t]](0, axis);
                hy[t] = (*H)[nodes[t]](1, axis);
            }
            auto Fx = cumulative_integral(hx), Fy = cumulative_integral(hy);
            std::vector<double> ga(nodes.size());
            for (std::size_t t = 0; t < nodes.size(); ++t) {
                grad[nodes[t]] = grad[first] + step * Vec2(Fx[t], Fy[t]);
                ga[t] = grad[nodes[t]](axis);
            }
            auto U = cumulative_integral(ga);
            for (std::size_t t = 1; t < nodes.size(); ++t) ubar[nodes[t]] = ubar[first] + step * U[t];
            return;
        }
        static const auto gq = gauss_legendre(8, 0.0, 1.0);
        for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
            int a = nodes[t], c = nodes[t + 1];
            const Vec2& ka = C.node(a).k;
            Vec2 d = Vec2::Zero();
            d(axis) = step;
            Vec2 g = grad[a];
            double v = ubar[a] + d.dot(g);
            for (const auto& [tau, w] : gq) {
                Vec2 kq = ka + tau * d;
                Vec2 Hd = flat_hessian((*b)(C.point_frame(kq)), kq) * d;
                g += w * Hd;
                v += w * (1.0 - tau) * d.dot(Hd);
            }
            grad[c] = g;
            ubar[c] = v;
        }
    }

    // first along `axis` through the base node, then along the other axis from every reached node
    void run(int axis, int every = 1) {
        int b0 = C.index(0, 0);
        if (!usable(b0)) throw GeometryError("base node has no operator value");
        ubar[b0] = 0.0;
        grad[b0] = Vec2::Zero();
        int other = 1 - axis;
        std::vector<int> spine{b0};
        for (int s : {1, -1}) {
            auto l = line(0, 0, axis, s);
            carry(l, axis, s);
            spine.insert(spine.end(), l.begin() + std::min<std::size_t>(1, l.size()), l.end());
        }
        for (int m : spine) {
            const ChartNode& nd = C.node(m);
            int pos = axis == 0 ? nd.i : nd.j;
            if (pos % every != 0) continue;
            for (int s : {1, -1}) carry(line(nd.i, nd.j, other, s), other, s);
        }
    }
};

double path_difference(const Sweep& A, const Sweep& B) {
    double r = 0.0;
    for (std::size_t n = 0; n < A.ubar.size(); ++n) {
        if (!is_valid(A.ubar[n]) || !is_valid(B.ubar[n])) continue;
        r = std::max(r, std::abs(A.ubar[n] - B.ubar[n]));
        r = std::max(r, (A.grad[n] - B.grad[n]).cwiseAbs().maxCoeff());
    }
    return r;
}

}  // namespace

Potential potential_from_codazzi(const OperatorField& b, const KleinChart& C, double tol) {
    std::vector<Mat2> H(C.size());
    for (std::size_t n = 0; n < C.size(); ++n)
        H[n] = is_valid(b[n]) ? flat_hessian(b[n], C.node(static_cast<int>(n)).k) : Mat2::Constant(kNaN);
    Sweep A(C), B(C);
    A.H = B.H = &H;
    A.run(0);
    B.run(1);
    double res = path_difference(A, B);
    if (!(res <= tol)) throw GeometryError("input not Codazzi: path residual " + std::to_string(res));
    return Potential(C, std::move(A.ubar), std::move(A.grad), res, nullptr);
}

Potential potential_from_codazzi(const OperatorFn& b, const KleinChart& C, double tol) {
    Sweep A(C), B(C);
    A.b = B.b = &b;
    A.run(0);
    B.run(1, 8);
    double res = path_difference(A, B);
    if (!(res <= tol)) throw GeometryError("input not Codazzi: path residual " + std::to_string(res));
    return Potential(C, std::move(A.ubar), std::move(A.grad), res, b);
}

// ---------------------------------------------------------------------------------------------
// equivariant generator and quotient functions

double partition_radius() { return octagon_circumradius() + 0.5 * octagon_inradius(); }

struct EquivariantGenerator::Data {
    SurfaceGroup G;
    TransCocycle t;
    std::vector<MinkVec> centers;
    std::vector<MinkVec> tvals;
    double cosh_rho = 1.0;
    double rho = 0.0;
    double region = 0.0;
};

EquivariantGenerator::EquivariantGenerator(const SurfaceGroup& G, const TransCocycle& t, double region_radius) {
    auto d = std::make_shared<Data>();
    d->G = G;
    d->t = t;
    d->rho = partition_radius();
    d->cosh_rho = std::cosh(d->rho);
    d->region = region_radius;
    ElementList L(G, region_radius + d->rho);
    d->tvals = L.cocycle_values(t, G);
    for (const auto& e : L.elements()) d->centers.push_back(e.m(kE3));
    d_ = d;
}

Jet EquivariantGenerator::potential(const MinkVec& x) const {
    Jet num, den;
    for (std::size_t i = 0; i < d_->centers.size(); ++i) {
        if (-mink_dot(x, d_->centers[i]) >= d_->cosh_rho) continue;
        Jet chi = bump_jet(d_->centers[i], d_->rho, x);
        num = num + chi * linear_jet(d_->tvals[i], x);
        den = den + chi;
    }
    if (!(den.v > 0.0)) throw GeometryError("equivariant generator: point outside the partition support");
    return num / den;
}

OperatorFn EquivariantGenerator::tensor() const {
    auto self = *this;
    return trivial_tensor([self](const MinkVec& x) { return self.potential(x); });
}

double EquivariantGenerator::equivariance_residual(const std::vector<MinkVec>& pts) const {
    double r = 0.0;
    for (int a = 0; a < 4; ++a) {
        LinIsom inv = d_->G.generators[a].inverse();
        for (const auto& x : pts) {
            if (h2_distance(x, kE3) > d_->region || h2_distance(inv(x), kE3) > d_->region) continue;
            double v = potential(x).v - potential(inv(x)).v - mink_dot(d_->t.values[a], x);
            r = std::max(r, std::abs(v));
        }
    }
    return r;
}

struct QuotientFunction::Data {
    std::vector<MinkVec> centers;
    std::vector<double> weights;
    double radius = 0.0;
    double cosh_radius = 1.0;
};

QuotientFunction::QuotientFunction(const SurfaceGroup& G, std::vector<MinkVec> centers, std::vector<double> weights,
                                   double bump_radius, double region_radius) {
    if (centers.size() != weights.size()) throw std::invalid_argument("centers and weights differ in length");
    auto d = std::make_shared<Data>();
    d->radius = bump_radius;
    d->cosh_radius = std::cosh(bump_radius);
    double reach = 0.0;
    for (const auto& c : centers) reach = std::max(reach, h2_distance(c, kE3));
    ElementList L(G, region_radius + bump_radius + reach);
    for (const auto& e : L.elements())
        for (std::size_t j = 0; j < centers.size(); ++j) {
            d->centers.push_back(e.m(centers[j]));
            d->weights.push_back(weights[j]);
        }
    d_ = d;
}

Jet QuotientFunction::operator()(const MinkVec& x) const {
    Jet s;
    for (std::size_t i = 0; i < d_->centers.size(); ++i) {
        if (-mink_dot(x, d_->centers[i]) >= d_->cosh_radius) continue;
        s = s + d_->weights[i] * bump_jet(d_->centers[i], d_->radius, x);
    }
    return s;
}

OperatorFn QuotientFunction::tensor() const {
    auto self = *this;
    return trivial_tensor([self](const MinkVec& x) { return self(x); });
}

// ---------------------------------------------------------------------------------------------
// Poincare series

PoincareSeries::PoincareSeries(const SurfaceGroup& G, double depth, int degree) : degree_(degree) {
    ElementList L(G, depth);
    for (const auto& e : L.elements()) {
        if (e.dist > depth) continue;
        const Mat3& m = e.m.matrix();
        MinkVec X = m.col(2);
        MinkVec v = 2.0 * m.col(0);
        cplx w0 = cplx(X.x(), X.y()) / (1.0 + X.z());
        // image of d/dz at 0 under the Mobius map
        cplx dz = cplx(v.x(), v.y()) / (1.0 + X.z()) - cplx(X.x(), X.y()) * v.z() / ((1.0 + X.z()) * (1.0 + X.z()));
        cplx abar = 1.0 / std::sqrt(dz);
        a_.push_back(std::conj(abar));
        b_.push_back(w0 * abar);
    }
}

std::vector<cplx> PoincareSeries::evaluate(cplx z) const {
    // real arithmetic: std::complex products go through the slow Annex G path
    std::vector<double> re(degree_ + 1, 0.0), im(degree_ + 1, 0.0);
    const double x = z.real(), y = z.imag();
    for (std::size_t i = 0; i < a_.size(); ++i) {
        const double ar = a_[i].real(), ai = a_[i].imag(), br = b_[i].real(), bi = b_[i].imag();
        // den = conj(b) z + conj(a), num = a z + b
        double dr = br * x + bi * y + ar, di = br * y - bi * x - ai;
        double nr = ar * x - ai * y + br, ni = ar * y + ai * x + bi;
        double m = 1.0 / (dr * dr + di * di);
        double ir = dr * m, ii = -di * m;
        double wr = nr * ir - ni * ii, wi = nr * ii + ni * ir;
        double sr = ir * ir - ii * ii, si = 2.0 * ir * ii;
        double pr = sr * sr - si * si, pi = 2.0 * sr * si;
        for (int k = 0; k <= degree_; ++k) {
            re[k] += pr;
            im[k] += pi;
            double t = pr * wr - pi * wi;
            pi = pr * wi + pi * wr;
            pr = t;
        }
    }
    std::vector<cplx> out(degree_ + 1);
    for (int k = 0; k <= degree_; ++k) out[k] = cplx(re[k], im[k]);
    return out;
}

OperatorFn quotient_harmonic_tensor(std::shared_ptr<const PoincareSeries> P, std::vector<cplx> coeffs) {
    return [P = std::move(P), coeffs = std::move(coeffs)](const PointFrame& F) {
        cplx z = disc_coordinate(F.x, kE3);
        auto th = P->evaluate(z);
        cplx f = 0.0;
        for (std::size_t k = 0; k < coeffs.size() && k < th.size(); ++k) f += coeffs[k] * th[k];
        return harmonic_matrix(f, F, kE3);
    };
}

// ---------------------------------------------------------------------------------------------
// delta

std::vector<MinkVec> side_samples(const SurfaceGroup& G, int gen, double rmax, int n) {
    int side = -1;
    for (int k = 0; k < 8 && side < 0; ++k) {
        const auto& w = G.side_word[k];
        if (w.size() != 1 || w.letters()[0].gen != gen) continue;
        // alpha^-1 x should land near the partner side
        side = w.letters()[0].exp == 1 ? k : G.partner[k];
    }
    if (side < 0) throw GeometryError("no side is paired by this generator");
    const MinkVec& p = G.vertices[side];
    const MinkVec& q = G.vertices[(side + 1) % 8];
    MinkVec m = h2_geodesic(p, q, 0.5);
    MinkVec tau = h2_log(m, q);
    tau /= std::sqrt(mink_norm2(tau));
    MinkVec nu = box_product(m, tau);
    LinIsom inv = G.generators[gen].inverse();
    std::vector<MinkVec> out;
    for (int ia = 0; ia < n; ++ia)
        for (int ib = 0; ib < n; ++ib) {
            double a = n > 1 ? -0.12 + 0.24 * ia / (n - 1) : 0.0;
            double b = n > 1 ? -0.25 + 0.5 * ib / (n - 1) : 0.0;
            MinkVec x = h2_exp(m, a * nu + b * tau);
            if (klein_project(x, kE3).norm() > rmax) continue;
            if (klein_project(inv(x), kE3).norm() > rmax) continue;
            out.push_back(x);
        }
    return out;
}

namespace {

using DiffFn = std::function<double(const MinkVec&)>;

DeltaResult fit_delta(const DiffFn& u, const SurfaceGroup& G, double rmax, double tol) {
    DeltaResult R;
    for (int a = 0; a < 4; ++a) {
        auto pts = side_samples(G, a, rmax);
        if (pts.size() < 10) throw GeometryError("too few sample points inside the chart");
        LinIsom inv = G.generators[a].inverse();
        std::vector<double> dv(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) dv[i] = u(pts[i]) - u(inv(pts[i]));
        // anchors: the best-conditioned triple
        std::array<std::size_t, 3> best{0, 1, 2};
        double bdet = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                for (std::size_t k = j + 1; k < pts.size(); ++k) {
                    Mat3 M;
                    M << pts[i], pts[j], pts[k];
                    double d = std::abs(M.determinant());
                    if (d > bdet) {
                        bdet = d;
                        best = {i, j, k};
                    }
                }
        Mat3 A;
        MinkVec rhs;
        for (int r = 0; r < 3; ++r) {
            A.row(r) = (eta() * pts[best[r]]).transpose();
            rhs(r) = dv[best[r]];
        }
        MinkVec t = A.fullPivLu().solve(rhs);
        double res = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best[0] || i == best[1] || i == best[2]) continue;
            res = std::max(res, std::abs(mink_dot(t, pts[i]) - dv[i]));
        }
        R.t.values[a] = t;
        R.fit_residual = std::max(R.fit_residual, res);
        R.samples += static_cast<int>(pts.size());
    }
    R.relator_defect = cocycle_relator_defect(R.t, G);
    if (!(R.fit_residual <= tol))
        throw GeometryError("not equivariant-Codazzi: fit residual " + std::to_string(R.fit_residual));
    return R;
}

}  // namespace

DeltaResult delta_extract(const Potential& P, const SurfaceGroup& G, double tol) {
    const KleinChart& C = P.chart();
    if ((C.base() - kE3).norm() > 1e-12) throw GeometryError("delta_extract needs a chart based at the octagon centre");
    double rmax = C.radius() - (P.analytic() ? 1.0 : 4.0) * C.spacing();
    return fit_delta([&](const MinkVec& x) { return P.u_at(x); }, G, rmax, tol);
}

DeltaResult delta_extract(const OperatorFn& b, const KleinChart& C, const SurfaceGroup& G, double tol) {
    return delta_extract(potential_from_codazzi(b, C, std::max(tol, 1e-6)), G, tol);
}

DeltaResult delta_extract(const OperatorField& b, const KleinChart& C, const SurfaceGroup& G, double tol) {
    return delta_extract(potential_from_codazzi(b, C, std::max(tol, 5e-2)), G, tol);
}

// ---------------------------------------------------------------------------------------------
// developing section

double frame_norm(const MinkVec& v, const ChartNode& nd) {
    double a = mink_dot(v, nd.f1), b = mink_dot(v, nd.f2), c = mink_dot(v, nd.x);
    return std::sqrt(a * a + b * b + c * c);
}

FValuedOneForm iota_star_form(const OperatorField& b, const KleinChart& C) {
    FValuedOneForm w;
    w.on_e1.resize(C.size());
    w.on_e2.resize(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        const Mat2& m = b[n];
        w.on_e1[n] = m(0, 0) * nd.f1 + m(1, 0) * nd.f2;
        w.on_e2[n] = m(0, 1) * nd.f1 + m(1, 1) * nd.f2;
    }
    return w;
}

std::vector<MinkVec> iota_closedness_form(const OperatorField& b, const KleinChart& C) {
    // omega(d_i) as ambient vectors, then the flat exterior derivative in coordinates
    std::vector<MinkVec> wx(C.size()), wy(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        if (!is_valid(b[n])) {
            wx[n] = wy[n] = MinkVec::Constant(kNaN);
            continue;
        }
        Mat2 B = to_coordinates(b[n], nd.E, nd.g);
        auto Jac = C.dev_jacobian(nd.k);
        wx[n] = Jac * B.col(0);
        wy[n] = Jac * B.col(1);
    }
    const double h = C.spacing();
    std::vector<MinkVec> out(C.size(), MinkVec::Constant(kNaN));
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        int xp = C.index(nd.i + 1, nd.j), xm = C.index(nd.i - 1, nd.j);
        int yp = C.index(nd.i, nd.j + 1), ym = C.index(nd.i, nd.j - 1);
        if (xp < 0 || xm < 0 || yp < 0 || ym < 0) continue;
        MinkVec d = (wy[xp] - wy[xm] - wx[yp] + wx[ym]) / (2.0 * h);
        out[n] = d / std::sqrt(nd.g.determinant());
    }
    return out;
}

std::vector<MinkVec> iota_splitting(const OperatorField& b, const KleinChart& C) {
    VectorField V = codazzi_form(b, C);
    std::vector<MinkVec> out(C.size());
    for (std::size_t n = 0; n < C.size(); ++n) {
        const ChartNode& nd = C.node(static_cast<int>(n));
        out[n] = V[n](0) * nd.f1 + V[n](1) * nd.f2 + (b[n](0, 1) - b[n](1, 0)) * nd.x;
    }
    return out;
}

Residual iota_closedness(const OperatorField& b, const KleinChart& C, int layers) {
    auto w = iota_closedness_form(b, C);
    Residual R;
    R.pointwise.assign(C.size(), kNaN);
    for (std::size_t n = 0; n < C.size(); ++n) {
        if (!C.has_collar(static_cast<int>(n), layers) || !w[n].allFinite()) continue;
        R.pointwise[n] = frame_norm(w[n], C.node(static_cast<int>(n)));
        R.max = std::max(R.max, R.pointwise[n]);
    }
    return R;
}

}  // namespace clab
