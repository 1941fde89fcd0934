#pragma once

// Conforming simplicial meshes of the unit interval (radial coordinate) and
// the unit ball, with the origin always present as a mesh vertex.  The 3D
// family starts from the regular octahedron inscribed in the unit sphere,
// split into 8 tetrahedra that share the origin, and is refined uniformly
// (red refinement, 8 children per tetrahedron).

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hardyfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class DomainTag { interval, ball_projected, ball_polyhedral };

enum class BoundaryRule { projected, polyhedral };

std::string to_string(DomainTag tag);
DomainTag domain_tag_from_string(const std::string& s);

/// Conforming simplicial partition in dimension 1 or 3.  1D meshes store the
/// radial coordinate in the x component; the r=0 vertex is an interior
/// degree of freedom of the radial problem and is never boundary-flagged.
struct SimplicialMesh {
  int dim = 0;
  DomainTag domain_tag = DomainTag::interval;
  int level = 0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;  // dim+1 valid entries, rest -1
  std::vector<std::uint8_t> boundary_vertex;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int verts_per_cell() const { return dim + 1; }
};

struct MeshQuality {
  double h = 0.0;      // max cell diameter
  double h_min = 0.0;  // min cell diameter
  std::vector<std::pair<double, double>> per_cell;  // (h_T, rho_T)
  double sigma = 0.0;                // max h_T / rho_T
  double quasi_uniform_ratio = 0.0;  // h_min / h
};

/// Affine map F_T(x_hat) = B x_hat + b from the reference simplex
/// (origin plus unit basis vertices) onto a mesh cell.
struct AffineCellMap {
  int dim = 0;
  Mat3 B = Mat3::Identity();  // unused rows/cols stay identity
  Vec3 b = Vec3::Zero();
  double det_abs = 0.0;  // |T| / |T_ref|

  Vec3 map(const Vec3& ref) const { return B * ref + b; }
  /// Physical vertices of the cell, p0 = offset, p_i = offset + column i.
  Vec3 vertex(int i) const { return i == 0 ? b : Vec3(b + B.col(i - 1)); }
};

/// Uniform or graded partition of [0,1] with vertices r_i = (i/n)^grading.
/// Only r=1 is boundary-flagged.  grading < 1 is rejected (it would grade
/// away from the singularity at r=0).
SimplicialMesh build_interval_mesh(int n_cells, double grading = 1.0);

/// Octahedron-based tetrahedral mesh of the unit ball.  Level 0 is the
/// inscribed regular octahedron split into 8 tetrahedra around the origin;
/// each level applies red refinement.  With BoundaryRule::projected the
/// boundary vertices are radially projected onto the unit sphere after each
/// refinement (B_h strictly inside B); with polyhedral the octahedron is kept
/// fixed, so the P1 spaces are nested across levels.
SimplicialMesh build_ball_mesh(int level, BoundaryRule boundary);

/// One step of red refinement (midpoint bisection in 1D, 8 children per
/// tetrahedron in 3D).  No boundary projection is applied, so on polyhedral
/// domains the coarse P1 space is a subspace of the fine one.
SimplicialMesh refine_uniform(const SimplicialMesh& mesh);

/// Radially projects boundary vertices onto the unit sphere (3D only).
void project_boundary_to_sphere(SimplicialMesh& mesh);

/// Exact per-cell diameters and insphere radii (3*volume/surface in 3D,
/// half-length in 1D).  Throws on degenerate cells, naming the cell index.
MeshQuality quality(const SimplicialMesh& mesh);

AffineCellMap cell_map(const SimplicialMesh& mesh, int cell_index);

double cell_volume(const SimplicialMesh& mesh, int cell_index);

/// Sum of cell volumes.
double total_volume(const SimplicialMesh& mesh);

/// Checks positivity of cell volumes, facet conformity (every facet shared
/// by exactly two cells or on the boundary), boundary flags against facet
/// incidence, and containment in the closed unit ball / interval.  Returns
/// an empty string when valid, otherwise a description of the first problem.
std::string validate_mesh(const SimplicialMesh& mesh);

/// True if the given vertex is the origin (used to locate singular cells).
bool is_origin_vertex(const SimplicialMesh& mesh, int vertex_index);

/// Index of the origin vertex; throws if absent.
int origin_vertex(const SimplicialMesh& mesh);

// Line-oriented text format: header "dim nv nc level domain_tag", nv
// coordinate lines, nc index lines, one line of nv boundary flags.
// Coordinates round-trip exactly at 17 significant digits.
void write_mesh(std::ostream& os, const SimplicialMesh& mesh);
SimplicialMesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const SimplicialMesh& mesh);
SimplicialMesh read_mesh_file(const std::string& path);

}  // namespace hardyfem
