#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adapttikh {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

/// Edge of a conforming triangulation. Interior edges have two adjacent
/// triangles (tri[0] < tri[1]), boundary edges one (tri[1] == -1).
struct Edge {
  std::array<int, 2> v{-1, -1};
  std::array<int, 2> tri{-1, -1};
  bool boundary = false;
};

/// Conforming 2D triangulation with newest-vertex-bisection metadata and
/// elementwise control/observation masks. Treat as immutable after
/// construction; refinement produces a new mesh.
class Mesh {
public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  // Local index (0..2) of the bisection edge; local edge i is opposite
  // vertex i, i.e. it connects vertices (i+1)%3 and (i+2)%3.
  std::vector<int> refinement_edge;
  std::vector<std::uint8_t> in_omega_c;  // per triangle
  std::vector<std::uint8_t> in_omega_o;  // per triangle

  // Derived connectivity, filled by build().
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges;  // edge id of local edge i
  std::vector<std::uint8_t> boundary_vertex;
  std::vector<double> h;  // element diameter = longest edge length

  /// Finalizes a mesh from vertices/triangles (+ optional masks and
  /// refinement edges; defaults: everything in both subdomains, longest
  /// edge). Throws std::invalid_argument on non-conforming input.
  static std::shared_ptr<const Mesh> build(
      std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
      std::vector<std::uint8_t> in_omega_c = {},
      std::vector<std::uint8_t> in_omega_o = {},
      std::vector<int> refinement_edge = {});

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  double total_area() const;
  double min_angle() const;  // radians
  double h_min() const;
  double h_max() const;

  /// Constant gradients of the three P1 hat functions on triangle t.
  std::array<Vec2, 3> hat_gradients(int t) const;

  /// Gradient of the P1 function with the given nodal values on triangle t.
  Vec2 p1_gradient(int t, std::span<const double> nodal) const;

  /// Checks all structural invariants; throws std::logic_error on failure.
  void validate() const;
};

struct RefinementResult {
  std::shared_ptr<const Mesh> mesh;
  std::vector<int> parent;  // per new triangle: source triangle in the input
  // Per new vertex: the endpoints of the bisected edge it was created on;
  // {i, i} for vertices carried over from the input mesh.
  std::vector<std::array<int, 2>> vertex_parents;
};

/// Triangulates the inscribed regular n-gon of the circle of the given
/// radius (fan from the origin), then applies `levels` uniform refinements.
std::shared_ptr<const Mesh> make_disk_mesh(int n_boundary, double radius,
                                           int levels);

/// Newest-vertex bisection of the marked triangles with conforming closure.
/// Every marked triangle is bisected at least once; masks are inherited.
RefinementResult refine(const Mesh& mesh, std::span<const int> marked);

/// Bisects every edge; each triangle splits into four (red-equivalent).
RefinementResult uniform_refine(const Mesh& mesh);

/// Jump of the normal gradient of a P1 function across an interior edge,
/// oriented by the outward normal of the lower-indexed adjacent triangle.
/// Returns 0 on boundary edges.
double edge_jump_normal_gradient(const Mesh& mesh,
                                 std::span<const double> nodal, int edge);

/// Text format: "nv nt", nv lines "x y bflag", nt lines "i j k c o".
/// Coordinates are written with 17 significant digits (value round-trip).
void write_mesh(const Mesh& mesh, const std::string& path);
std::shared_ptr<const Mesh> read_mesh(const std::string& path);
void write_mesh_stream(const Mesh& mesh, std::ostream& os);
std::shared_ptr<const Mesh> read_mesh_stream(std::istream& is);

}  // namespace adapttikh
