#include "kvfem/fem_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kvfem {

P2BasisEval p2_basis_at(Point ref) {
  const double l0 = 1.0 - ref.x - ref.y;
  const double l1 = ref.x;
  const double l2 = ref.y;
  constexpr std::array<double, 2> g0{-1.0, -1.0};
  constexpr std::array<double, 2> g1{1.0, 0.0};
  constexpr std::array<double, 2> g2{0.0, 1.0};

  P2BasisEval out;
  out.values = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
                4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
  for (std::size_t d = 0; d < 2; ++d) {
    out.gradients[0][d] = (4.0 * l0 - 1.0) * g0[d];
    out.gradients[1][d] = (4.0 * l1 - 1.0) * g1[d];
    out.gradients[2][d] = (4.0 * l2 - 1.0) * g2[d];
    out.gradients[3][d] = 4.0 * (l0 * g1[d] + l1 * g0[d]);
    out.gradients[4][d] = 4.0 * (l1 * g2[d] + l2 * g1[d]);
    out.gradients[5][d] = 4.0 * (l2 * g0[d] + l0 * g2[d]);
  }
  return out;
}

const std::array<Point, kP2NodesPerCell>& p2_reference_nodes() {
  static const std::array<Point, kP2NodesPerCell> nodes{
      Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0},
      Point{0.5, 0.0}, Point{0.5, 0.5}, Point{0.0, 0.5}};
  return nodes;
}

namespace {

// Rules are tabulated with weights normalized to 1 and scaled by 1/2 here.
class RuleBuilder {
 public:
  explicit RuleBuilder(int degree) { rule_.degree = degree; }

  RuleBuilder& centroid(double w) {
    add({1.0 / 3.0, 1.0 / 3.0}, w);
    return *this;
  }
  // Orbit of (a, a, 1 - 2a).
  RuleBuilder& orbit3(double a, double w) {
    const double b = 1.0 - 2.0 * a;
    add({a, a}, w);
    add({b, a}, w);
    add({a, b}, w);
    return *this;
  }
  // Orbit of (a, b, 1 - a - b).
  RuleBuilder& orbit6(double a, double b, double w) {
    const double c = 1.0 - a - b;
    add({a, b}, w);
    add({b, a}, w);
    add({b, c}, w);
    add({c, b}, w);
    add({c, a}, w);
    add({a, c}, w);
    return *this;
  }
  QuadratureRule build() { return rule_; }

 private:
  void add(Point p, double w) {
    rule_.points.push_back(p);
    rule_.weights.push_back(0.5 * w);
  }
  QuadratureRule rule_;
};

const QuadratureRule& rule_degree2() {
  static const QuadratureRule r = RuleBuilder(2).orbit3(1.0 / 6.0, 1.0 / 3.0).build();
  return r;
}

const QuadratureRule& rule_degree4() {
  static const QuadratureRule r = RuleBuilder(4)
                                      .orbit3(0.445948490915965, 0.223381589678011)
                                      .orbit3(0.091576213509771, 0.109951743655322)
                                      .build();
  return r;
}

const QuadratureRule& rule_degree5() {
  static const QuadratureRule r = [] {
    const double s15 = std::sqrt(15.0);
    return RuleBuilder(5)
        .centroid(9.0 / 40.0)
        .orbit3((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0)
        .orbit3((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0)
        .build();
  }();
  return r;
}

const QuadratureRule& rule_degree6() {
  static const QuadratureRule r = RuleBuilder(6)
                                      .orbit3(0.249286745170910, 0.116786275726379)
                                      .orbit3(0.063089014491502, 0.050844906370207)
                                      .orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374)
                                      .build();
  return r;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
  switch (degree) {
    case 2:
      return rule_degree2();
    case 3:
    case 4:
      return rule_degree4();
    case 5:
      return rule_degree5();
    case 6:
      return rule_degree6();
    default:
      throw std::invalid_argument("no triangle quadrature rule of degree " + std::to_string(degree));
  }
}

DofMap::DofMap(const TriMesh& mesh) : n_pressure_(mesh.n_cells()) {
  const std::size_t nvert = mesh.n_vertices();
  nodes_ = mesh.vertices();
  nodes_.reserve(nvert + mesh.n_edges());
  for (const auto& e : mesh.edges()) {
    const Point& a = mesh.vertices()[e[0]];
    const Point& b = mesh.vertices()[e[1]];
    nodes_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }

  cell_dofs_.resize(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& tri = mesh.triangles()[c];
    const auto& edges = mesh.cell_edges(c);
    cell_dofs_[c] = {tri[0], tri[1], tri[2], nvert + edges[0], nvert + edges[1], nvert + edges[2]};
  }

  dirichlet_mask_.assign(nodes_.size(), false);
  for (std::size_t v = 0; v < nvert; ++v) dirichlet_mask_[v] = mesh.is_boundary_vertex(v);
  for (const auto& be : mesh.boundary_edges()) dirichlet_mask_[nvert + be.edge] = true;
  for (std::size_t d = 0; d < nodes_.size(); ++d) {
    if (dirichlet_mask_[d]) dirichlet_dofs_.push_back(d);
  }
}

}  // namespace kvfem
