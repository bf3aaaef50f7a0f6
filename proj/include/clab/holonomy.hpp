#pragma once

#include "clab/mink.hpp"

#include <array>
#include <functional>
#include <json.hpp>
#include <vector>

namespace clab {

struct Letter {
    int gen = 0;
    int exp = 1;
    bool operator==(const Letter& o) const { return gen == o.gen && exp == o.exp; }
};

// freely reduced word in the generators a1, b1, a2, b2 (indices 0..3)
class Word {
public:
    Word() = default;
    explicit Word(std::vector<Letter> letters);
    static Word gen(int g, int e = 1) { return Word({Letter{g, e}}); }

    const std::vector<Letter>& letters() const { return letters_; }
    bool empty() const { return letters_.empty(); }
    std::size_t size() const { return letters_.size(); }
    Word operator*(const Word& o) const;
    Word inverse() const;
    bool operator==(const Word& o) const { return letters_ == o.letters_; }

private:
    std::vector<Letter> letters_;
};

// [a1,b1][a2,b2]
Word commutator_relator();

struct SurfaceGroup {
    std::array<LinIsom, 4> generators;
    Word relator;
    std::array<MinkVec, 8> vertices;  // counter-clockwise, side k = [v_k, v_k+1]
    // side_word[k] maps side partner[k] onto side k, sending the partner's start to the end of side k
    std::array<Word, 8> side_word;
    std::array<int, 8> partner{};
    // vertex_word[k] maps v_0 to v_k
    std::array<Word, 8> vertex_word;

    LinIsom evaluate(const Word& w) const;
    LinIsom letter(const Letter& l) const;
    double relator_defect() const;
    MinkVec center() const { return MinkVec(0.0, 0.0, 1.0); }
};

// regular octagon with vertex angle pi/4 centred at e3
SurfaceGroup build_genus2_octagon();
double octagon_circumradius();
double octagon_inradius();
std::array<double, 8> octagon_vertex_angles(const SurfaceGroup& G);
// Klein coordinates of the octagon vertices (the octagon is a Euclidean polygon there)
std::array<Vec2, 8> octagon_klein_vertices(const SurfaceGroup& G);
bool in_octagon(const SurfaceGroup& G, const MinkVec& x, double slack = 0.0);

using CocycleVec = Eigen::Matrix<double, 12, 1>;

struct TransCocycle {
    std::array<MinkVec, 4> values{MinkVec::Zero(), MinkVec::Zero(), MinkVec::Zero(), MinkVec::Zero()};

    CocycleVec vec() const;
    static TransCocycle from_vec(const CocycleVec& v);
    TransCocycle operator+(const TransCocycle& o) const;
    TransCocycle operator-(const TransCocycle& o) const;
    TransCocycle operator*(double s) const;
};

MinkVec cocycle_letter(const TransCocycle& t, const Letter& l, const SurfaceGroup& G);
MinkVec cocycle_extend(const TransCocycle& t, const Word& w, const SurfaceGroup& G);
double cocycle_relator_defect(const TransCocycle& t, const SurfaceGroup& G);
// 3x12 matrix of t -> t_relator
Eigen::Matrix<double, 3, 12> relator_constraint(const SurfaceGroup& G);

struct CocycleBasis {
    std::vector<TransCocycle> z1;
    std::vector<TransCocycle> b1;
    std::vector<TransCocycle> h1;
    double orthogonality_residual = 0.0;

    // coordinates of the H1 component of a cocycle
    Eigen::VectorXd h1_coords(const TransCocycle& t) const;
    TransCocycle h1_projection(const TransCocycle& t) const;
};

CocycleBasis cocycle_basis(const SurfaceGroup& G, double rank_tol = 1e-8);
TransCocycle coboundary_cocycle(const MinkVec& t0, const SurfaceGroup& G);

struct PeripheralResult {
    bool trivial = false;
    MinkVec t0 = MinkVec::Zero();
    double defect = 0.0;
    MinkVec axis = MinkVec::Zero();
};

PeripheralResult peripheral_reduction(const MinkVec& t, const LinIsom& R, double tol = 1e-10);
MinkVec elliptic_axis(const LinIsom& R);

struct AdCocycle {
    std::array<Mat3, 4> values;
    // tau_ab - tau_a - Ad(a) tau_b over all ordered generator pairs
    double cocycle_residual = 0.0;
    TransCocycle as_translation() const;
};

using GroupFamily = std::function<SurfaceGroup(double)>;
AdCocycle holonomy_variation(const GroupFamily& family, double h);
// conjugates a2, b2 by exp(s Lambda(axis of [a1,b1]))
GroupFamily twist_family(const SurfaceGroup& G);
MinkVec hyperbolic_axis(const LinIsom& A);

// group elements reachable by side crossings, with d(g e3, e3) <= radius
struct GroupElement {
    LinIsom m;
    int parent = -1;
    Letter last{};
    double dist = 0.0;
};

class ElementList {
public:
    ElementList(const SurfaceGroup& G, double radius);
    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    double radius() const { return radius_; }
    // t_g for every listed element, in list order
    std::vector<MinkVec> cocycle_values(const TransCocycle& t, const SurfaceGroup& G) const;
    Word word(std::size_t i) const;

private:
    std::vector<GroupElement> elems_;
    double radius_;
};

nlohmann::json to_json(const SurfaceGroup& G);
SurfaceGroup surface_group_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TransCocycle& t);
TransCocycle cocycle_from_json(const nlohmann::json& j);

}  // namespace clab
