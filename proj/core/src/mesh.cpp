#include "hardyfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace hardyfem {

namespace {

constexpr double kOriginTol = 1e-14;

double signed_volume_3d(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                        const Vec3& p3) {
  Mat3 d;
  d.col(0) = p1 - p0;
  d.col(1) = p2 - p0;
  d.col(2) = p3 - p0;
  return d.determinant() / 6.0;
}

void fix_orientation(SimplicialMesh& mesh, std::array<int, 4>& cell) {
  if (mesh.dim == 1) {
    if (mesh.vertices[cell[0]].x() > mesh.vertices[cell[1]].x())
      std::swap(cell[0], cell[1]);
    return;
  }
  const double v = signed_volume_3d(mesh.vertices[cell[0]], mesh.vertices[cell[1]],
                                    mesh.vertices[cell[2]], mesh.vertices[cell[3]]);
  if (v < 0.0) std::swap(cell[2], cell[3]);
}

// Facet incidence over the whole mesh: vertex indices sorted per facet.
std::map<std::array<int, 3>, int> facet_counts(const SimplicialMesh& mesh) {
  std::map<std::array<int, 3>, int> counts;
  if (mesh.dim == 1) {
    for (const auto& c : mesh.cells) {
      counts[{c[0], -1, -1}]++;
      counts[{c[1], -1, -1}]++;
    }
    return counts;
  }
  for (const auto& c : mesh.cells) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f{};
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) f[k++] = c[i];
      std::sort(f.begin(), f.end());
      counts[f]++;
    }
  }
  return counts;
}

void recompute_boundary_flags_3d(SimplicialMesh& mesh) {
  mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
  for (const auto& [facet, count] : facet_counts(mesh)) {
    if (count == 1)
      for (int v : facet) mesh.boundary_vertex[v] = 1;
  }
}

SimplicialMesh refine_interval(const SimplicialMesh& mesh) {
  SimplicialMesh fine;
  fine.dim = 1;
  fine.domain_tag = mesh.domain_tag;
  fine.level = mesh.level + 1;
  fine.vertices = mesh.vertices;
  fine.boundary_vertex = mesh.boundary_vertex;
  for (const auto& c : mesh.cells) {
    const Vec3 mid = 0.5 * (mesh.vertices[c[0]] + mesh.vertices[c[1]]);
    const int m = fine.n_vertices();
    fine.vertices.push_back(mid);
    fine.boundary_vertex.push_back(0);
    fine.cells.push_back({c[0], m, -1, -1});
    fine.cells.push_back({m, c[1], -1, -1});
  }
  for (auto& c : fine.cells) fix_orientation(fine, c);
  return fine;
}

SimplicialMesh refine_tet(const SimplicialMesh& mesh) {
  SimplicialMesh fine;
  fine.dim = 3;
  fine.domain_tag = mesh.domain_tag;
  fine.level = mesh.level + 1;
  fine.vertices = mesh.vertices;

  std::map<std::pair<int, int>, int> midpoint;
  auto mid_of = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = midpoint.find({a, b});
    if (it != midpoint.end()) return it->second;
    const int m = fine.n_vertices();
    fine.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    midpoint[{a, b}] = m;
    return m;
  };

  for (const auto& cell : mesh.cells) {
    std::array<int, 4> v{cell[0], cell[1], cell[2], cell[3]};
    std::sort(v.begin(), v.end());
    // m[i][j] = midpoint of edge (v_i, v_j)
    int m01 = mid_of(v[0], v[1]), m02 = mid_of(v[0], v[2]), m03 = mid_of(v[0], v[3]);
    int m12 = mid_of(v[1], v[2]), m13 = mid_of(v[1], v[3]), m23 = mid_of(v[2], v[3]);

    fine.cells.push_back({v[0], m01, m02, m03});
    fine.cells.push_back({v[1], m01, m12, m13});
    fine.cells.push_back({v[2], m02, m12, m23});
    fine.cells.push_back({v[3], m03, m13, m23});

    // The interior octahedron is split along one of its three diagonals.
    // Shortest diagonal keeps the family shape-regular; ties are broken by
    // the lowest global vertex index pair so the choice is deterministic.
    struct Diag {
      int a, b;           // diagonal endpoints
      int c0, c1, c2, c3; // equatorial cycle around it
    };
    const Diag candidates[3] = {
        {m01, m23, m02, m03, m13, m12},
        {m02, m13, m01, m03, m23, m12},
        {m03, m12, m01, m02, m23, m13},
    };
    int best = 0;
    double best_len = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_key{0, 0};
    for (int i = 0; i < 3; ++i) {
      const Diag& d = candidates[i];
      const double len = (fine.vertices[d.a] - fine.vertices[d.b]).norm();
      std::pair<int, int> key{std::min(d.a, d.b), std::max(d.a, d.b)};
      if (len < best_len * (1.0 - 1e-12) ||
          (len <= best_len * (1.0 + 1e-12) && key < best_key)) {
        best = i;
        best_len = len;
        best_key = key;
      }
    }
    const Diag& d = candidates[best];
    const int cyc[4] = {d.c0, d.c1, d.c2, d.c3};
    for (int i = 0; i < 4; ++i)
      fine.cells.push_back({d.a, d.b, cyc[i], cyc[(i + 1) % 4]});
  }

  for (auto& c : fine.cells) fix_orientation(fine, c);
  recompute_boundary_flags_3d(fine);
  return fine;
}

}  // namespace

std::string to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::interval: return "interval";
    case DomainTag::ball_projected: return "ball_projected";
    case DomainTag::ball_polyhedral: return "ball_polyhedral";
  }
  return "unknown";
}

DomainTag domain_tag_from_string(const std::string& s) {
  if (s == "interval") return DomainTag::interval;
  if (s == "ball_projected") return DomainTag::ball_projected;
  if (s == "ball_polyhedral") return DomainTag::ball_polyhedral;
  throw std::invalid_argument("unknown domain tag: " + s);
}

SimplicialMesh build_interval_mesh(int n_cells, double grading) {
  if (n_cells < 2) throw std::invalid_argument("build_interval_mesh: n_cells must be >= 2");
  if (grading < 1.0)
    throw std::invalid_argument("build_interval_mesh: grading < 1 grades away from r=0");
  SimplicialMesh mesh;
  mesh.dim = 1;
  mesh.domain_tag = DomainTag::interval;
  mesh.level = 0;
  mesh.vertices.reserve(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    const double t = static_cast<double>(i) / n_cells;
    mesh.vertices.emplace_back(std::pow(t, grading), 0.0, 0.0);
  }
  mesh.vertices.back().x() = 1.0;
  for (int i = 0; i < n_cells; ++i) mesh.cells.push_back({i, i + 1, -1, -1});
  mesh.boundary_vertex.assign(n_cells + 1, 0);
  mesh.boundary_vertex.back() = 1;  // r=0 stays an interior dof
  return mesh;
}

SimplicialMesh build_ball_mesh(int level, BoundaryRule boundary) {
  if (level < 0) throw std::invalid_argument("build_ball_mesh: level must be >= 0");
  SimplicialMesh mesh;
  mesh.dim = 3;
  mesh.domain_tag = boundary == BoundaryRule::projected ? DomainTag::ball_projected
                                                        : DomainTag::ball_polyhedral;
  mesh.level = 0;
  // Octahedron inscribed in the unit sphere: origin plus the six axis points.
  mesh.vertices = {Vec3(0, 0, 0),  Vec3(1, 0, 0),  Vec3(-1, 0, 0),
                   Vec3(0, 1, 0),  Vec3(0, -1, 0), Vec3(0, 0, 1),
                   Vec3(0, 0, -1)};
  for (int sx : {1, 2})
    for (int sy : {3, 4})
      for (int sz : {5, 6}) {
        std::array<int, 4> c{0, sx, sy, sz};
        fix_orientation(mesh, c);
        mesh.cells.push_back(c);
      }
  mesh.boundary_vertex = {0, 1, 1, 1, 1, 1, 1};

  for (int k = 0; k < level; ++k) {
    const DomainTag tag = mesh.domain_tag;
    mesh = refine_tet(mesh);
    mesh.domain_tag = tag;
    if (boundary == BoundaryRule::projected) project_boundary_to_sphere(mesh);
  }
  return mesh;
}

SimplicialMesh refine_uniform(const SimplicialMesh& mesh) {
  if (mesh.dim == 1) return refine_interval(mesh);
  if (mesh.dim == 3) return refine_tet(mesh);
  throw std::invalid_argument("refine_uniform: unsupported dimension");
}

void project_boundary_to_sphere(SimplicialMesh& mesh) {
  if (mesh.dim != 3)
    throw std::invalid_argument("project_boundary_to_sphere: 3D meshes only");
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (!mesh.boundary_vertex[i]) continue;
    const double r = mesh.vertices[i].norm();
    if (r <= kOriginTol)
      throw std::runtime_error("project_boundary_to_sphere: boundary vertex at origin");
    mesh.vertices[i] /= r;
  }
}

MeshQuality quality(const SimplicialMesh& mesh) {
  MeshQuality q;
  q.h = 0.0;
  q.h_min = std::numeric_limits<double>::infinity();
  q.sigma = 0.0;
  q.per_cell.reserve(mesh.cells.size());
  const int nv = mesh.verts_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    double diam = 0.0;
    for (int i = 0; i < nv; ++i)
      for (int j = i + 1; j < nv; ++j)
        diam = std::max(diam, (mesh.vertices[cell[i]] - mesh.vertices[cell[j]]).norm());

    double rho;
    if (mesh.dim == 1) {
      const double len = std::abs(mesh.vertices[cell[1]].x() - mesh.vertices[cell[0]].x());
      if (len <= 0.0)
        throw std::runtime_error("quality: degenerate cell " + std::to_string(c));
      rho = 0.5 * len;
    } else {
      const Vec3& p0 = mesh.vertices[cell[0]];
      const Vec3& p1 = mesh.vertices[cell[1]];
      const Vec3& p2 = mesh.vertices[cell[2]];
      const Vec3& p3 = mesh.vertices[cell[3]];
      const double vol = signed_volume_3d(p0, p1, p2, p3);
      if (vol <= 0.0)
        throw std::runtime_error("quality: degenerate cell " + std::to_string(c));
      auto face_area = [](const Vec3& a, const Vec3& b, const Vec3& c2) {
        return 0.5 * (b - a).cross(c2 - a).norm();
      };
      const double surf = face_area(p1, p2, p3) + face_area(p0, p2, p3) +
                          face_area(p0, p1, p3) + face_area(p0, p1, p2);
      rho = 3.0 * vol / surf;
    }
    q.per_cell.emplace_back(diam, rho);
    q.h = std::max(q.h, diam);
    q.h_min = std::min(q.h_min, diam);
    q.sigma = std::max(q.sigma, diam / rho);
  }
  q.quasi_uniform_ratio = q.h_min / q.h;
  return q;
}

AffineCellMap cell_map(const SimplicialMesh& mesh, int cell_index) {
  if (cell_index < 0 || cell_index >= mesh.n_cells())
    throw std::invalid_argument("cell_map: cell index out of range");
  const auto& cell = mesh.cells[cell_index];
  AffineCellMap m;
  m.dim = mesh.dim;
  m.b = mesh.vertices[cell[0]];
  for (int i = 0; i < mesh.dim; ++i)
    m.B.col(i) = mesh.vertices[cell[i + 1]] - mesh.vertices[cell[0]];
  const double det = mesh.dim == 1 ? m.B(0, 0) : m.B.determinant();
  if (std::abs(det) < 1e-300)
    throw std::runtime_error("cell_map: degenerate cell " + std::to_string(cell_index));
  m.det_abs = std::abs(det);
  return m;
}

double cell_volume(const SimplicialMesh& mesh, int cell_index) {
  const auto& cell = mesh.cells[cell_index];
  if (mesh.dim == 1)
    return std::abs(mesh.vertices[cell[1]].x() - mesh.vertices[cell[0]].x());
  return signed_volume_3d(mesh.vertices[cell[0]], mesh.vertices[cell[1]],
                          mesh.vertices[cell[2]], mesh.vertices[cell[3]]);
}

double total_volume(const SimplicialMesh& mesh) {
  double v = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) v += cell_volume(mesh, c);
  return v;
}

std::string validate_mesh(const SimplicialMesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 3) return "dimension must be 1 or 3";
  if (mesh.boundary_vertex.size() != mesh.vertices.size())
    return "boundary flag count does not match vertex count";

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double v = cell_volume(mesh, c);
    const bool positive =
        mesh.dim == 1
            ? mesh.vertices[mesh.cells[c][1]].x() > mesh.vertices[mesh.cells[c][0]].x()
            : signed_volume_3d(mesh.vertices[mesh.cells[c][0]], mesh.vertices[mesh.cells[c][1]],
                               mesh.vertices[mesh.cells[c][2]],
                               mesh.vertices[mesh.cells[c][3]]) > 0.0;
    if (!positive || v <= 0.0)
      return "cell " + std::to_string(c) + " has non-positive volume";
  }

  std::vector<std::uint8_t> topo_boundary(mesh.vertices.size(), 0);
  for (const auto& [facet, count] : facet_counts(mesh)) {
    if (count > 2)
      return "facet shared by " + std::to_string(count) + " cells";
    if (count == 1)
      for (int v : facet)
        if (v >= 0) topo_boundary[v] = 1;
  }

  int origin = -1;
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const double r = mesh.dim == 1 ? std::abs(mesh.vertices[i].x()) : mesh.vertices[i].norm();
    if (r <= kOriginTol) origin = i;
    const double bound_tol = 1.0 + 1e-12;
    if (mesh.dim == 3 && mesh.vertices[i].norm() > bound_tol)
      return "vertex " + std::to_string(i) + " outside the closed unit ball";
    if (mesh.dim == 1 &&
        (mesh.vertices[i].x() < -1e-15 || mesh.vertices[i].x() > bound_tol))
      return "vertex " + std::to_string(i) + " outside [0,1]";
  }
  if (origin < 0) return "the origin is not a mesh vertex";
  if (mesh.boundary_vertex[origin]) return "the origin vertex is boundary-flagged";

  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (mesh.boundary_vertex[i] && !topo_boundary[i])
      return "vertex " + std::to_string(i) + " flagged boundary but interior";
    if (!mesh.boundary_vertex[i] && topo_boundary[i] && i != origin)
      return "vertex " + std::to_string(i) + " on the boundary but unflagged";
    // The r=0 endpoint of a radial interval mesh is deliberately unflagged.
  }
  return {};
}

bool is_origin_vertex(const SimplicialMesh& mesh, int vertex_index) {
  const Vec3& v = mesh.vertices[vertex_index];
  return (mesh.dim == 1 ? std::abs(v.x()) : v.norm()) <= kOriginTol;
}

int origin_vertex(const SimplicialMesh& mesh) {
  for (int i = 0; i < mesh.n_vertices(); ++i)
    if (is_origin_vertex(mesh, i)) return i;
  throw std::runtime_error("origin_vertex: mesh has no vertex at the origin");
}

void write_mesh(std::ostream& os, const SimplicialMesh& mesh) {
  char buf[64];
  os << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << ' '
     << mesh.level << ' ' << to_string(mesh.domain_tag) << '\n';
  for (const auto& v : mesh.vertices) {
    for (int d = 0; d < mesh.dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[d]);
      os << (d ? " " : "") << buf;
    }
    os << '\n';
  }
  for (const auto& c : mesh.cells) {
    for (int i = 0; i <= mesh.dim; ++i) os << (i ? " " : "") << c[i];
    os << '\n';
  }
  for (int i = 0; i < mesh.n_vertices(); ++i)
    os << (i ? " " : "") << int(mesh.boundary_vertex[i]);
  os << '\n';
}

SimplicialMesh read_mesh(std::istream& is) {
  SimplicialMesh mesh;
  int nv = 0, nc = 0;
  std::string tag;
  if (!(is >> mesh.dim >> nv >> nc >> mesh.level >> tag))
    throw std::runtime_error("read_mesh: bad header");
  if (mesh.dim != 1 && mesh.dim != 3) throw std::runtime_error("read_mesh: bad dimension");
  mesh.domain_tag = domain_tag_from_string(tag);
  mesh.vertices.assign(nv, Vec3::Zero());
  for (int i = 0; i < nv; ++i)
    for (int d = 0; d < mesh.dim; ++d)
      if (!(is >> mesh.vertices[i][d])) throw std::runtime_error("read_mesh: bad coordinates");
  mesh.cells.assign(nc, {-1, -1, -1, -1});
  for (int i = 0; i < nc; ++i)
    for (int d = 0; d <= mesh.dim; ++d)
      if (!(is >> mesh.cells[i][d])) throw std::runtime_error("read_mesh: bad cell indices");
  mesh.boundary_vertex.assign(nv, 0);
  for (int i = 0; i < nv; ++i) {
    int f = 0;
    if (!(is >> f)) throw std::runtime_error("read_mesh: bad boundary flags");
    mesh.boundary_vertex[i] = static_cast<std::uint8_t>(f != 0);
  }
  return mesh;
}

void write_mesh_file(const std::string& path, const SimplicialMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_mesh(os, mesh);
}

SimplicialMesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_mesh(is);
}

}  // namespace hardyfem
