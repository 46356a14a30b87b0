#include "adapttikh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace adapttikh {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

int longest_local_edge(const std::vector<Vec2>& vs,
                       const std::array<int, 3>& t) {
  int best = 0;
  double best_len = -1.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = vs[t[(i + 1) % 3]];
    const Vec2 b = vs[t[(i + 2) % 3]];
    const double len = norm(b - a);
    if (len > best_len + 1e-15 * (1.0 + best_len)) {
      best_len = len;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::shared_ptr<const Mesh> Mesh::build(
    std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
    std::vector<std::uint8_t> in_omega_c, std::vector<std::uint8_t> in_omega_o,
    std::vector<int> refinement_edge) {
  auto mesh = std::make_shared<Mesh>();
  mesh->vertices = std::move(vertices);
  mesh->triangles = std::move(triangles);
  const int nt = mesh->num_triangles();
  mesh->in_omega_c =
      in_omega_c.empty() ? std::vector<std::uint8_t>(nt, 1) : std::move(in_omega_c);
  mesh->in_omega_o =
      in_omega_o.empty() ? std::vector<std::uint8_t>(nt, 1) : std::move(in_omega_o);
  if (refinement_edge.empty()) {
    refinement_edge.resize(nt);
    for (int t = 0; t < nt; ++t)
      refinement_edge[t] = longest_local_edge(mesh->vertices, mesh->triangles[t]);
  }
  mesh->refinement_edge = std::move(refinement_edge);

  if (static_cast<int>(mesh->in_omega_c.size()) != nt ||
      static_cast<int>(mesh->in_omega_o.size()) != nt ||
      static_cast<int>(mesh->refinement_edge.size()) != nt)
    throw std::invalid_argument("mesh: per-triangle array size mismatch");

  // Derive edges in first-seen order (deterministic).
  std::map<std::pair<int, int>, int> edge_id;
  mesh->tri_edges.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh->triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3];
      int b = tri[(i + 2) % 3];
      if (a == b || a < 0 || b < 0 || a >= mesh->num_vertices() ||
          b >= mesh->num_vertices())
        throw std::invalid_argument("mesh: bad vertex index in triangle");
      const auto key = std::minmax(a, b);
      auto it = edge_id.find(key);
      if (it == edge_id.end()) {
        Edge e;
        e.v = {key.first, key.second};
        e.tri = {t, -1};
        mesh->edges.push_back(e);
        it = edge_id.emplace(key, static_cast<int>(mesh->edges.size()) - 1).first;
      } else {
        Edge& e = mesh->edges[it->second];
        if (e.tri[1] != -1)
          throw std::invalid_argument("mesh: edge shared by more than 2 triangles");
        e.tri[1] = t;
      }
      mesh->tri_edges[t][i] = it->second;
    }
  }
  for (Edge& e : mesh->edges) e.boundary = (e.tri[1] == -1);

  mesh->boundary_vertex.assign(mesh->num_vertices(), 0);
  for (const Edge& e : mesh->edges)
    if (e.boundary) {
      mesh->boundary_vertex[e.v[0]] = 1;
      mesh->boundary_vertex[e.v[1]] = 1;
    }

  mesh->h.assign(nt, 0.0);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh->triangles[t];
    double hk = 0.0;
    for (int i = 0; i < 3; ++i)
      hk = std::max(hk, norm(mesh->vertices[tri[(i + 2) % 3]] -
                             mesh->vertices[tri[(i + 1) % 3]]));
    mesh->h[t] = hk;
    if (signed_area(mesh->vertices[tri[0]], mesh->vertices[tri[1]],
                    mesh->vertices[tri[2]]) <= 0.0)
      throw std::invalid_argument("mesh: non-positive triangle area");
  }
  return mesh;
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::min_angle() const {
  double best = std::numbers::pi;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles[t];
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = vertices[tri[(i + 1) % 3]] - vertices[tri[i]];
      const Vec2 v = vertices[tri[(i + 2) % 3]] - vertices[tri[i]];
      best = std::min(best, std::atan2(std::abs(cross(u, v)), dot(u, v)));
    }
  }
  return best;
}

double Mesh::h_min() const {
  double v = h.empty() ? 0.0 : h[0];
  for (double hk : h) v = std::min(v, hk);
  return v;
}

double Mesh::h_max() const {
  double v = 0.0;
  for (double hk : h) v = std::max(v, hk);
  return v;
}

std::array<Vec2, 3> Mesh::hat_gradients(int t) const {
  const auto& tri = triangles[t];
  const Vec2 p0 = vertices[tri[0]], p1 = vertices[tri[1]], p2 = vertices[tri[2]];
  const double a2 = 2.0 * signed_area(p0, p1, p2);
  // grad phi_i = perpendicular of the opposite edge / (2 area)
  return {Vec2{(p1.y - p2.y) / a2, (p2.x - p1.x) / a2},
          Vec2{(p2.y - p0.y) / a2, (p0.x - p2.x) / a2},
          Vec2{(p0.y - p1.y) / a2, (p1.x - p0.x) / a2}};
}

Vec2 Mesh::p1_gradient(int t, std::span<const double> nodal) const {
  const auto g = hat_gradients(t);
  const auto& tri = triangles[t];
  Vec2 r{0.0, 0.0};
  for (int i = 0; i < 3; ++i) r = r + nodal[tri[i]] * g[i];
  return r;
}

void Mesh::validate() const {
  const int nt = num_triangles();
  if (static_cast<int>(in_omega_c.size()) != nt ||
      static_cast<int>(in_omega_o.size()) != nt ||
      static_cast<int>(refinement_edge.size()) != nt ||
      static_cast<int>(h.size()) != nt)
    throw std::logic_error("mesh: inconsistent array sizes");
  for (int t = 0; t < nt; ++t) {
    if (triangle_area(t) <= 0.0) throw std::logic_error("mesh: area <= 0");
    if (refinement_edge[t] < 0 || refinement_edge[t] > 2)
      throw std::logic_error("mesh: bad refinement edge");
    double hk = 0.0;
    for (int i = 0; i < 3; ++i)
      hk = std::max(hk, norm(vertices[triangles[t][(i + 2) % 3]] -
                             vertices[triangles[t][(i + 1) % 3]]));
    if (std::abs(hk - h[t]) > 1e-14 * hk)
      throw std::logic_error("mesh: h differs from longest edge");
  }
  for (const Edge& e : edges) {
    if (e.tri[0] < 0) throw std::logic_error("mesh: edge without triangle");
    if (e.boundary != (e.tri[1] == -1))
      throw std::logic_error("mesh: wrong boundary flag");
  }
  for (int v = 0; v < num_vertices(); ++v) {
    bool on_bdry = false;
    for (const Edge& e : edges)
      if (e.boundary && (e.v[0] == v || e.v[1] == v)) on_bdry = true;
    if (on_bdry != static_cast<bool>(boundary_vertex[v]))
      throw std::logic_error("mesh: wrong boundary vertex flag");
  }
}

std::shared_ptr<const Mesh> make_disk_mesh(int n_boundary, double radius,
                                           int levels) {
  if (n_boundary < 3)
    throw std::invalid_argument("make_disk_mesh: n_boundary must be >= 3");
  if (radius <= 0.0)
    throw std::invalid_argument("make_disk_mesh: radius must be positive");
  if (levels < 0)
    throw std::invalid_argument("make_disk_mesh: levels must be >= 0");

  std::vector<Vec2> vs;
  vs.push_back({0.0, 0.0});
  for (int k = 0; k < n_boundary; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_boundary;
    vs.push_back({radius * std::cos(phi), radius * std::sin(phi)});
  }
  std::vector<std::array<int, 3>> tris;
  for (int k = 0; k < n_boundary; ++k)
    tris.push_back({0, 1 + k, 1 + (k + 1) % n_boundary});

  auto mesh = Mesh::build(std::move(vs), std::move(tris));
  for (int l = 0; l < levels; ++l) mesh = uniform_refine(*mesh).mesh;
  return mesh;
}

namespace {

// Shared state of one refinement pass.
struct Refiner {
  const Mesh& in;
  std::vector<char> edge_marked;
  std::vector<int> edge_midpoint;        // new vertex id per marked edge
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 2>> vertex_parents;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> ref_edge;
  std::vector<std::uint8_t> mask_c, mask_o;
  std::vector<int> parent;

  explicit Refiner(const Mesh& m) : in(m), edge_marked(m.edges.size(), 0) {}

  void close_marks() {
    // A triangle with any marked edge must have its refinement edge marked;
    // iterate to a fixpoint so the bisection cascade stays conforming.
    bool changed = true;
    while (changed) {
      changed = false;
      for (int t = 0; t < in.num_triangles(); ++t) {
        const int re = in.tri_edges[t][in.refinement_edge[t]];
        if (edge_marked[re]) continue;
        for (int i = 0; i < 3; ++i)
          if (edge_marked[in.tri_edges[t][i]]) {
            edge_marked[re] = 1;
            changed = true;
            break;
          }
      }
    }
  }

  void create_midpoints() {
    vertices = in.vertices;
    vertex_parents.resize(in.num_vertices());
    for (int v = 0; v < in.num_vertices(); ++v) vertex_parents[v] = {v, v};
    edge_midpoint.assign(in.edges.size(), -1);
    for (int e = 0; e < static_cast<int>(in.edges.size()); ++e)
      if (edge_marked[e]) {
        const Edge& ed = in.edges[e];
        vertices.push_back(0.5 * (in.vertices[ed.v[0]] + in.vertices[ed.v[1]]));
        vertex_parents.push_back({ed.v[0], ed.v[1]});
        edge_midpoint[e] = static_cast<int>(vertices.size()) - 1;
      }
  }

  void emit(std::array<int, 3> tri, int re, int src) {
    tris.push_back(tri);
    ref_edge.push_back(re);
    mask_c.push_back(in.in_omega_c[src]);
    mask_o.push_back(in.in_omega_o[src]);
    parent.push_back(src);
  }

  // Bisects (peak, a, b) at edge (a, b); child refinement edges oppose the
  // new vertex. `ea`/`eb` are the input-mesh edge ids of (peak,a)/(b,peak),
  // or -1 for edges created by an earlier bisection (never marked).
  void bisect(int peak, int a, int b, int mid, int ea, int eb, int src) {
    // child 1: (mid, peak, a), outer edge (peak, a)
    if (ea >= 0 && edge_marked[ea])
      bisect(mid, peak, a, edge_midpoint[ea], -1, -1, src);
    else
      emit({mid, peak, a}, 0, src);
    // child 2: (mid, b, peak), outer edge (b, peak)
    if (eb >= 0 && edge_marked[eb])
      bisect(mid, b, peak, edge_midpoint[eb], -1, -1, src);
    else
      emit({mid, b, peak}, 0, src);
  }

  RefinementResult run() {
    close_marks();
    create_midpoints();
    for (int t = 0; t < in.num_triangles(); ++t) {
      const int r = in.refinement_edge[t];
      const int re = in.tri_edges[t][r];
      if (!edge_marked[re]) {
        emit(in.triangles[t], r, t);
        continue;
      }
      const int peak = in.triangles[t][r];
      const int a = in.triangles[t][(r + 1) % 3];
      const int b = in.triangles[t][(r + 2) % 3];
      // Outer edges: (peak, a) is opposite b, (b, peak) is opposite a.
      bisect(peak, a, b, edge_midpoint[re], in.tri_edges[t][(r + 2) % 3],
             in.tri_edges[t][(r + 1) % 3], t);
    }
    RefinementResult result;
    result.mesh = Mesh::build(std::move(vertices), std::move(tris),
                              std::move(mask_c), std::move(mask_o),
                              std::move(ref_edge));
    result.parent = std::move(parent);
    result.vertex_parents = std::move(vertex_parents);
    return result;
  }
};

}  // namespace

RefinementResult refine(const Mesh& mesh, std::span<const int> marked) {
  Refiner r(mesh);
  for (int t : marked) {
    if (t < 0 || t >= mesh.num_triangles())
      throw std::invalid_argument("refine: unknown triangle id");
    r.edge_marked[mesh.tri_edges[t][mesh.refinement_edge[t]]] = 1;
  }
  return r.run();
}

RefinementResult uniform_refine(const Mesh& mesh) {
  Refiner r(mesh);
  std::fill(r.edge_marked.begin(), r.edge_marked.end(), 1);
  return r.run();
}

double edge_jump_normal_gradient(const Mesh& mesh,
                                 std::span<const double> nodal, int edge) {
  if (edge < 0 || edge >= static_cast<int>(mesh.edges.size()))
    throw std::invalid_argument("edge_jump_normal_gradient: bad edge id");
  const Edge& e = mesh.edges[edge];
  if (e.boundary) return 0.0;  // jumps enter estimators on interior edges only
  const int t0 = std::min(e.tri[0], e.tri[1]);
  const int t1 = std::max(e.tri[0], e.tri[1]);
  const Vec2 tangent = mesh.vertices[e.v[1]] - mesh.vertices[e.v[0]];
  Vec2 nu{tangent.y, -tangent.x};  // some normal; orient outward of t0
  // The vertex of t0 opposite this edge fixes the outward direction.
  const auto& tri = mesh.triangles[t0];
  int opp = tri[0];
  for (int i = 0; i < 3; ++i)
    if (tri[i] != e.v[0] && tri[i] != e.v[1]) opp = tri[i];
  if (dot(nu, mesh.vertices[opp] - mesh.vertices[e.v[0]]) > 0.0)
    nu = -1.0 * nu;
  nu = (1.0 / norm(nu)) * nu;
  const Vec2 g0 = mesh.p1_gradient(t0, nodal);
  const Vec2 g1 = mesh.p1_gradient(t1, nodal);
  return dot(g0 - g1, nu);
}

void write_mesh_stream(const Mesh& mesh, std::ostream& os) {
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  char buf[64];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d", mesh.vertices[v].x,
                  mesh.vertices[v].y, static_cast<int>(mesh.boundary_vertex[v]));
    os << buf << '\n';
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' '
       << static_cast<int>(mesh.in_omega_c[t]) << ' '
       << static_cast<int>(mesh.in_omega_o[t]) << '\n';
  }
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_mesh: cannot open " + path);
  write_mesh_stream(mesh, os);
  if (!os) throw std::runtime_error("write_mesh: write failed for " + path);
}

std::shared_ptr<const Mesh> read_mesh_stream(std::istream& is) {
  int nv = 0, nt = 0;
  if (!(is >> nv >> nt) || nv < 3 || nt < 1)
    throw std::invalid_argument("read_mesh: bad header");
  std::vector<Vec2> vs(nv);
  std::vector<int> bflag(nv);
  for (int v = 0; v < nv; ++v)
    if (!(is >> vs[v].x >> vs[v].y >> bflag[v]))
      throw std::invalid_argument("read_mesh: bad vertex line");
  std::vector<std::array<int, 3>> tris(nt);
  std::vector<std::uint8_t> mc(nt), mo(nt);
  for (int t = 0; t < nt; ++t) {
    int c = 0, o = 0;
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2] >> c >> o))
      throw std::invalid_argument("read_mesh: bad triangle line");
    mc[t] = static_cast<std::uint8_t>(c != 0);
    mo[t] = static_cast<std::uint8_t>(o != 0);
  }
  auto mesh = Mesh::build(std::move(vs), std::move(tris), std::move(mc),
                          std::move(mo));
  for (int v = 0; v < nv; ++v)
    if (static_cast<int>(mesh->boundary_vertex[v]) != bflag[v])
      throw std::invalid_argument("read_mesh: boundary flag inconsistent with topology");
  return mesh;
}

std::shared_ptr<const Mesh> read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_mesh: cannot open " + path);
  return read_mesh_stream(is);
}

}  // namespace adapttikh
