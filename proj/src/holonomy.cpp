#include "clab/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <unordered_map>

namespace clab {

Word::Word(std::vector<Letter> letters) {
    for (const Letter& l : letters) {
        if (l.gen < 0 || l.gen > 3 || (l.exp != 1 && l.exp != -1))
            throw GeometryError("invalid letter in word");
        if (!letters_.empty() && letters_.back().gen == l.gen && letters_.back().exp == -l.exp)
            letters_.pop_back();
        else
            letters_.push_back(l);
    }
}

Word Word::operator*(const Word& o) const {
    std::vector<Letter> all = letters_;
    all.insert(all.end(), o.letters_.begin(), o.letters_.end());
    return Word(std::move(all));
}

Word Word::inverse() const {
    std::vector<Letter> inv;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) inv.push_back({it->gen, -it->exp});
    return Word(std::move(inv));
}

Word commutator_relator() {
    return Word({{0, 1}, {1, 1}, {0, -1}, {1, -1}, {2, 1}, {3, 1}, {2, -1}, {3, -1}});
}

LinIsom SurfaceGroup::letter(const Letter& l) const {
    return l.exp > 0 ? generators[l.gen] : generators[l.gen].inverse();
}

LinIsom SurfaceGroup::evaluate(const Word& w) const {
    Mat3 m = Mat3::Identity();
    for (const Letter& l : w.letters()) m = m * letter(l).matrix();
    return LinIsom::unchecked(m);
}

double SurfaceGroup::relator_defect() const {
    return (evaluate(relator).matrix() - Mat3::Identity()).cwiseAbs().maxCoeff();
}

namespace {

const double kCot = 1.0 + std::numbers::sqrt2;  // cot(pi/8)

Mat3 rotation_z(double a) {
    Mat3 m = Mat3::Identity();
    m(0, 0) = std::cos(a);
    m(0, 1) = -std::sin(a);
    m(1, 0) = std::sin(a);
    m(1, 1) = std::cos(a);
    return m;
}

// boost along direction angle a with cosh = ch, sinh = sh
Mat3 boost_dir(double a, double ch, double sh) {
    Eigen::Vector2d u(std::cos(a), std::sin(a));
    Mat3 m = Mat3::Identity();
    m.topLeftCorner<2, 2>() += (ch - 1.0) * u * u.transpose();
    m.topRightCorner<2, 1>() = sh * u;
    m.bottomLeftCorner<1, 2>() = sh * u.transpose();
    m(2, 2) = ch;
    return m;
}

void attach_combinatorics(SurfaceGroup& G) {
    // g_k maps side k+2 onto side k for k in {0,1,4,5}; a1=g0, b1=g1^-1, a2=g4, b2=g5^-1
    const int first[4] = {0, 1, 4, 5};
    const Letter as_letter[4] = {{0, 1}, {1, -1}, {2, 1}, {3, -1}};
    for (int i = 0; i < 4; ++i) {
        int k = first[i];
        G.side_word[k] = Word({as_letter[i]});
        G.partner[k] = k + 2;
        G.side_word[k + 2] = G.side_word[k].inverse();
        G.partner[k + 2] = k;
    }
    std::array<bool, 8> known{};
    known[0] = true;
    G.vertex_word[0] = Word();
    for (int sweep = 0; sweep < 16; ++sweep) {
        for (int k = 0; k < 8; ++k) {
            int p = G.partner[k];
            const Word& w = G.side_word[k];
            int pairs[2][2] = {{p, (k + 1) % 8}, {(p + 1) % 8, k}};
            for (auto& pr : pairs) {
                int from = pr[0], to = pr[1];
                if (known[from] && !known[to]) {
                    G.vertex_word[to] = w * G.vertex_word[from];
                    known[to] = true;
                } else if (known[to] && !known[from]) {
                    G.vertex_word[from] = w.inverse() * G.vertex_word[to];
                    known[from] = true;
                }
            }
        }
    }
    for (bool b : known)
        if (!b) throw GeometryError("octagon vertices do not form a single cycle");
}

void validate(const SurfaceGroup& G) {
    for (const LinIsom& g : G.generators) LinIsom::from_matrix(g.matrix(), 1e-12);
    if (G.relator_defect() > 1e-10) throw GeometryError("relator defect exceeds 1e-10");
    for (int k = 0; k < 8; ++k) {
        LinIsom w = G.evaluate(G.side_word[k]);
        int p = G.partner[k];
        double e1 = (w(G.vertices[p]) - G.vertices[(k + 1) % 8]).cwiseAbs().maxCoeff();
        double e2 = (w(G.vertices[(p + 1) % 8]) - G.vertices[k]).cwiseAbs().maxCoeff();
        if (std::max(e1, e2) > 1e-10) throw GeometryError("side pairing does not match endpoints");
        double e3 = (G.evaluate(G.vertex_word[k])(G.vertices[0]) - G.vertices[k]).cwiseAbs().maxCoeff();
        if (e3 > 1e-10) throw GeometryError("vertex word does not reach its vertex");
    }
    double sum = 0.0;
    for (double a : octagon_vertex_angles(G)) sum += a;
    if (std::abs(sum - 2.0 * std::numbers::pi) > 1e-8) throw GeometryError("vertex angles do not sum to 2pi");
}

}  // namespace

double octagon_circumradius() { return std::acosh(kCot * kCot); }
double octagon_inradius() { return std::acosh(kCot); }

SurfaceGroup build_genus2_octagon() {
    SurfaceGroup G;
    double ch = 2.0 * kCot * kCot - 1.0;
    double sh = 2.0 * kCot * std::sqrt(kCot * kCot - 1.0);
    double chR = kCot * kCot;
    double shR = std::sqrt(chR * chR - 1.0);
    for (int k = 0; k < 8; ++k) {
        double a = k * std::numbers::pi / 4.0;
        G.vertices[k] = MinkVec(shR * std::cos(a), shR * std::sin(a), chR);
    }
    const int first[4] = {0, 1, 4, 5};
    std::array<Mat3, 4> g;
    for (int i = 0; i < 4; ++i)
        g[i] = boost_dir((first[i] + 0.5) * std::numbers::pi / 4.0, ch, sh) * rotation_z(std::numbers::pi / 2.0);
    G.generators[0] = LinIsom::from_matrix(g[0]);
    G.generators[1] = LinIsom::from_matrix(g[1]).inverse();
    G.generators[2] = LinIsom::from_matrix(g[2]);
    G.generators[3] = LinIsom::from_matrix(g[3]).inverse();
    G.relator = commutator_relator();
    attach_combinatorics(G);
    validate(G);
    return G;
}

std::array<double, 8> octagon_vertex_angles(const SurfaceGroup& G) {
    std::array<double, 8> out{};
    for (int k = 0; k < 8; ++k) {
        const MinkVec& v = G.vertices[k];
        MinkVec a = h2_log(v, G.vertices[(k + 1) % 8]);
        MinkVec b = h2_log(v, G.vertices[(k + 7) % 8]);
        double c = mink_dot(a, b) / std::sqrt(mink_norm2(a) * mink_norm2(b));
        out[k] = std::acos(std::clamp(c, -1.0, 1.0));
    }
    return out;
}

std::array<Vec2, 8> octagon_klein_vertices(const SurfaceGroup& G) {
    std::array<Vec2, 8> out;
    for (int k = 0; k < 8; ++k) out[k] = klein_project(G.vertices[k], G.center());
    return out;
}

bool in_octagon(const SurfaceGroup& G, const MinkVec& x, double slack) {
    Vec2 p = klein_project(x, G.center());
    auto v = octagon_klein_vertices(G);
    for (int k = 0; k < 8; ++k) {
        Vec2 e = v[(k + 1) % 8] - v[k];
        Vec2 d = p - v[k];
        if (e.x() * d.y() - e.y() * d.x() < -slack * e.norm()) return false;
    }
    return true;
}

CocycleVec TransCocycle::vec() const {
    CocycleVec v;
    for (int i = 0; i < 4; ++i) v.segment<3>(3 * i) = values[i];
    return v;
}

TransCocycle TransCocycle::from_vec(const CocycleVec& v) {
    TransCocycle t;
    for (int i = 0; i < 4; ++i) t.values[i] = v.segment<3>(3 * i);
    return t;
}

TransCocycle TransCocycle::operator+(const TransCocycle& o) const { return from_vec(vec() + o.vec()); }
TransCocycle TransCocycle::operator-(const TransCocycle& o) const { return from_vec(vec() - o.vec()); }
TransCocycle TransCocycle::operator*(double s) const { return from_vec(vec() * s); }

MinkVec cocycle_letter(const TransCocycle& t, const Letter& l, const SurfaceGroup& G) {
    if (l.exp > 0) return t.values[l.gen];
    return -(G.generators[l.gen].inverse()(t.values[l.gen]));
}

MinkVec cocycle_extend(const TransCocycle& t, const Word& w, const SurfaceGroup& G) {
    MinkVec acc = MinkVec::Zero();
    Mat3 prefix = Mat3::Identity();
    for (const Letter& l : w.letters()) {
        acc += prefix * cocycle_letter(t, l, G);
        prefix = prefix * G.letter(l).matrix();
    }
    return acc;
}

double cocycle_relator_defect(const TransCocycle& t, const SurfaceGroup& G) {
    return cocycle_extend(t, G.relator, G).cwiseAbs().maxCoeff();
}

Eigen::Matrix<double, 3, 12> relator_constraint(const SurfaceGroup& G) {
    Eigen::Matrix<double, 3, 12> R;
    for (int j = 0; j < 12; ++j) {
        CocycleVec e = CocycleVec::Zero();
        e(j) = 1.0;
        R.col(j) = cocycle_extend(TransCocycle::from_vec(e), G.relator, G);
    }
    return R;
}

TransCocycle coboundary_cocycle(const MinkVec& t0, const SurfaceGroup& G) {
    TransCocycle t;
    for (int i = 0; i < 4; ++i) t.values[i] = G.generators[i](t0) - t0;
    return t;
}

namespace {

int numerical_rank(const Eigen::VectorXd& s, double tol) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++r;
    return r;
}

std::vector<TransCocycle> columns(const Eigen::MatrixXd& M) {
    std::vector<TransCocycle> out;
    for (int j = 0; j < M.cols(); ++j) out.push_back(TransCocycle::from_vec(M.col(j)));
    return out;
}

}  // namespace

CocycleBasis cocycle_basis(const SurfaceGroup& G, double rank_tol) {
    Eigen::MatrixXd R = relator_constraint(G);
    Eigen::JacobiSVD<Eigen::MatrixXd> svdR(R, Eigen::ComputeFullV);
    int rR = numerical_rank(svdR.singularValues(), rank_tol);
    Eigen::MatrixXd Z = svdR.matrixV().rightCols(12 - rR);

    Eigen::MatrixXd C(12, 3);
    for (int i = 0; i < 3; ++i) C.col(i) = coboundary_cocycle(MinkVec::Unit(i), G).vec();
    Eigen::JacobiSVD<Eigen::MatrixXd> svdC(C, Eigen::ComputeThinU);
    int rC = numerical_rank(svdC.singularValues(), rank_tol);
    Eigen::MatrixXd B = svdC.matrixU().leftCols(rC);

    Eigen::MatrixXd Q = Z - B * (B.transpose() * Z);
    Eigen::JacobiSVD<Eigen::MatrixXd> svdQ(Q, Eigen::ComputeThinU);
    int rQ = numerical_rank(svdQ.singularValues(), rank_tol);
    Eigen::MatrixXd H = svdQ.matrixU().leftCols(rQ);

    if (Z.cols() != 9 || rC != 3 || rQ != 6)
        throw GeometryError("cocycle ranks (" + std::to_string(Z.cols()) + ", " + std::to_string(rC) + ", " +
                            std::to_string(rQ) + ") differ from (9, 3, 6)");

    CocycleBasis out;
    out.z1 = columns(Z);
    out.b1 = columns(B);
    out.h1 = columns(H);
    double res = (H.transpose() * B).cwiseAbs().maxCoeff();
    res = std::max(res, (H.transpose() * H - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff());
    res = std::max(res, (Z.transpose() * Z - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff());
    res = std::max(res, (R * H).cwiseAbs().maxCoeff());
    res = std::max(res, (B - Z * (Z.transpose() * B)).cwiseAbs().maxCoeff());
    out.orthogonality_residual = res;
    return out;
}

Eigen::VectorXd CocycleBasis::h1_coords(const TransCocycle& t) const {
    Eigen::VectorXd c(h1.size());
    CocycleVec v = t.vec();
    for (std::size_t i = 0; i < h1.size(); ++i) c(i) = h1[i].vec().dot(v);
    return c;
}

TransCocycle CocycleBasis::h1_projection(const TransCocycle& t) const {
    Eigen::VectorXd c = h1_coords(t);
    CocycleVec v = CocycleVec::Zero();
    for (std::size_t i = 0; i < h1.size(); ++i) v += c(i) * h1[i].vec();
    return TransCocycle::from_vec(v);
}

namespace {

MinkVec fixed_vector(const Mat3& A) {
    Eigen::JacobiSVD<Mat3> svd(A - Mat3::Identity(), Eigen::ComputeFullV);
    return svd.matrixV().col(2);
}

}  // namespace

MinkVec elliptic_axis(const LinIsom& R) {
    MinkVec p = fixed_vector(R.matrix());
    double n2 = mink_norm2(p);
    if (n2 >= 0.0) throw GeometryError("isometry is not elliptic");
    p /= std::sqrt(-n2);
    if (p.z() < 0.0) p = -p;
    return p;
}

MinkVec hyperbolic_axis(const LinIsom& A) {
    MinkVec n = fixed_vector(A.matrix());
    double n2 = mink_norm2(n);
    if (n2 <= 0.0) throw GeometryError("isometry is not hyperbolic");
    return n / std::sqrt(n2);
}

PeripheralResult peripheral_reduction(const MinkVec& t, const LinIsom& R, double tol) {
    if ((R.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12)
        throw GeometryError("rotation angle is a multiple of 2pi");
    PeripheralResult out;
    out.axis = elliptic_axis(R);
    const MinkVec& p = out.axis;
    out.defect = mink_dot(t, p) / mink_dot(p, p);
    out.trivial = std::abs(out.defect) <= tol;
    Mat3 frame = boost_to(p).matrix();
    Eigen::Matrix<double, 3, 2> A;
    A.col(0) = (R.matrix() - Mat3::Identity()) * frame.col(0);
    A.col(1) = (R.matrix() - Mat3::Identity()) * frame.col(1);
    MinkVec tp = t + mink_dot(t, p) * p;  // component in p-perp
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(tp);
    out.t0 = c(0) * frame.col(0) + c(1) * frame.col(1);
    return out;
}

TransCocycle AdCocycle::as_translation() const {
    TransCocycle t;
    for (int i = 0; i < 4; ++i) {
        Mat3 X = values[i];
        Mat3 skew = 0.5 * (X - eta() * X.transpose() * eta());
        t.values[i] = lambda_inv(skew);
    }
    return t;
}

AdCocycle holonomy_variation(const GroupFamily& family, double h) {
    if (!(h > 0.0)) throw GeometryError("step must be positive");
    SurfaceGroup g0 = family(0.0), gp = family(h), gm = family(-h);
    for (const SurfaceGroup* g : {&g0, &gp, &gm})
        for (const LinIsom& a : g->generators) {
            double scale = std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
            if (LinIsom::isometry_defect(a.matrix()) > 1e-10 * scale * scale)
                throw GeometryError("family member is not an isometry");
        }
    auto tau = [&](const Word& w) -> Mat3 {
        Mat3 d = (gp.evaluate(w).matrix() - gm.evaluate(w).matrix()) / (2.0 * h);
        return d * g0.evaluate(w).inverse().matrix();
    };
    AdCocycle out;
    for (int i = 0; i < 4; ++i) out.values[i] = tau(Word::gen(i));
    double res = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Mat3 a = g0.generators[i].matrix();
            Mat3 lhs = tau(Word::gen(i) * Word::gen(j));
            Mat3 rhs = out.values[i] + a * out.values[j] * g0.generators[i].inverse().matrix();
            res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    out.cocycle_residual = res;
    return out;
}

GroupFamily twist_family(const SurfaceGroup& G) {
    Word c({{0, 1}, {1, 1}, {0, -1}, {1, -1}});
    MinkVec axis = hyperbolic_axis(G.evaluate(c));
    return [G, axis](double s) {
        SurfaceGroup out = G;
        Mat3 E = so21_exp(axis, s);
        Mat3 Ei = eta() * E.transpose() * eta();
        out.generators[2] = LinIsom::from_matrix(E * G.generators[2].matrix() * Ei, 1e-10);
        out.generators[3] = LinIsom::from_matrix(E * G.generators[3].matrix() * Ei, 1e-10);
        return out;
    };
}

ElementList::ElementList(const SurfaceGroup& G, double radius) : radius_(radius) {
    const double prune = radius + octagon_circumradius();
    auto key = [](long long a, long long b, long long c) {
        return static_cast<std::uint64_t>(a * 73856093LL) ^ static_cast<std::uint64_t>(b * 19349663LL) ^
               static_cast<std::uint64_t>(c * 83492791LL);
    };
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    std::vector<MinkVec> pts;
    std::vector<GroupElement> all;
    auto find = [&](const MinkVec& x) {
        long long cx = std::llround(std::floor(x.x())), cy = std::llround(std::floor(x.y())),
                  cz = std::llround(std::floor(x.z()));
        for (long long a = -1; a <= 1; ++a)
            for (long long b = -1; b <= 1; ++b)
                for (long long c = -1; c <= 1; ++c) {
                    auto it = grid.find(key(cx + a, cy + b, cz + c));
                    if (it == grid.end()) continue;
                    for (int idx : it->second)
                        if ((pts[idx] - x).norm() < 1.0) return idx;
                }
        return -1;
    };
    auto insert = [&](const MinkVec& x, int idx) {
        grid[key(std::llround(std::floor(x.x())), std::llround(std::floor(x.y())), std::llround(std::floor(x.z())))]
            .push_back(idx);
    };
    const MinkVec e3(0.0, 0.0, 1.0);
    all.push_back({LinIsom(), -1, {}, 0.0});
    pts.push_back(e3);
    insert(e3, 0);
    std::deque<int> queue{0};
    const Letter letters[8] = {{0, 1}, {0, -1}, {1, 1}, {1, -1}, {2, 1}, {2, -1}, {3, 1}, {3, -1}};
    std::array<Mat3, 8> lm;
    for (int i = 0; i < 8; ++i) lm[i] = G.letter(letters[i]).matrix();
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int i = 0; i < 8; ++i) {
            Mat3 m = all[cur].m.matrix() * lm[i];
            MinkVec x = m.col(2);
            double d = h2_distance(x, e3);
            if (d > prune) continue;
            if (find(x) >= 0) continue;
            int idx = static_cast<int>(all.size());
            all.push_back({LinIsom::unchecked(m), cur, letters[i], d});
            pts.push_back(x);
            insert(x, idx);
            queue.push_back(idx);
        }
    }
    // keep elements within the radius plus their ancestors so parent links stay valid
    std::vector<char> keep(all.size(), 0);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].dist > radius) continue;
        for (int j = static_cast<int>(i); j >= 0 && !keep[j]; j = all[j].parent) keep[j] = 1;
    }
    std::vector<int> remap(all.size(), -1);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!keep[i]) continue;
        remap[i] = static_cast<int>(elems_.size());
        GroupElement e = all[i];
        e.parent = e.parent >= 0 ? remap[e.parent] : -1;
        elems_.push_back(e);
    }
}

std::vector<MinkVec> ElementList::cocycle_values(const TransCocycle& t, const SurfaceGroup& G) const {
    std::vector<MinkVec> out(elems_.size(), MinkVec::Zero());
    for (std::size_t i = 1; i < elems_.size(); ++i) {
        const GroupElement& e = elems_[i];
        out[i] = out[e.parent] + elems_[e.parent].m(cocycle_letter(t, e.last, G));
    }
    return out;
}

Word ElementList::word(std::size_t i) const {
    std::vector<Letter> rev;
    for (int j = static_cast<int>(i); j > 0; j = elems_[j].parent) rev.push_back(elems_[j].last);
    return Word(std::vector<Letter>(rev.rbegin(), rev.rend()));
}

nlohmann::json to_json(const SurfaceGroup& G) {
    nlohmann::json j;
    for (const LinIsom& g : G.generators) {
        nlohmann::json row = nlohmann::json::array();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) row.push_back(g.matrix()(r, c));
        j["generators"].push_back(row);
    }
    for (const Letter& l : G.relator.letters()) j["relator"].push_back({l.gen, l.exp});
    for (const MinkVec& v : G.vertices) j["vertices"].push_back({v.x(), v.y(), v.z()});
    return j;
}

SurfaceGroup surface_group_from_json(const nlohmann::json& j) {
    SurfaceGroup G;
    for (int i = 0; i < 4; ++i) {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m(r, c) = j.at("generators").at(i).at(3 * r + c).get<double>();
        G.generators[i] = LinIsom::from_matrix(m);
    }
    std::vector<Letter> rel;
    for (const auto& l : j.at("relator")) rel.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
    G.relator = Word(rel);
    for (int k = 0; k < 8; ++k)
        for (int c = 0; c < 3; ++c) G.vertices[k](c) = j.at("vertices").at(k).at(c).get<double>();
    attach_combinatorics(G);
    validate(G);
    return G;
}

nlohmann::json to_json(const TransCocycle& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const MinkVec& v : t.values) j.push_back({v.x(), v.y(), v.z()});
    return j;
}

TransCocycle cocycle_from_json(const nlohmann::json& j) {
    TransCocycle t;
    for (int i = 0; i < 4; ++i)
        for (int c = 0; c < 3; ++c) t.values[i](c) = j.at(i).at(c).get<double>();
    return t;
}

}  // namespace clab
