#pragma once

#include <array>
#include <numbers>
#include <vector>

#include <Eigen/SparseCore>

namespace lodgpe
{

/// Lattice point of (0,pi)^d. The second coordinate is zero in 1D.
using Point = std::array<double, 2>;

/// Vertex indices of a simplex. Segments use the first two slots and
/// store -1 in the third.
using Simplex = std::array<int, 3>;

/**
 * Uniform dyadic simplicial mesh of the interval (0,pi) or the square
 * (0,pi)^2 with 2^level cells per axis.
 *
 * Vertices are numbered row-major by (iy, ix). In 2D every lattice cell with
 * corners v00, v10, v11, v01 is split along the v00-v11 diagonal into
 * (v00, v10, v11) and (v00, v11, v01); cell c owns simplices 2c and 2c+1.
 * Interior vertices carry degrees of freedom, numbered in vertex order.
 */
class Mesh
{
public:
  Mesh(int dim, int level);

  int dim() const { return dim_; }
  int level() const { return level_; }
  int cells_per_axis() const { return 1 << level_; }
  /// Lattice spacing 2^-level * pi (the diameter is sqrt(dim) times this).
  double width() const { return std::numbers::pi / cells_per_axis(); }
  int vertices_per_simplex() const { return dim_ + 1; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_simplices() const { return static_cast<int>(simplices_.size()); }
  int num_dofs() const { return static_cast<int>(interior_nodes_.size()); }

  const std::vector<Point> &vertices() const { return vertices_; }
  const std::vector<Simplex> &simplices() const { return simplices_; }
  const std::vector<int> &interior_nodes() const { return interior_nodes_; }

  bool is_boundary(int vertex) const { return boundary_[vertex] != 0; }
  /// Position of the vertex in interior_nodes(), or -1 on the boundary.
  int dof_of(int vertex) const { return dof_of_[vertex]; }

  int vertex_index(int ix, int iy = 0) const;
  std::array<int, 2> lattice_of(int vertex) const;

  double measure(int simplex) const;
  Point centroid(int simplex) const;
  /// Simplices containing the vertex, ascending.
  std::vector<int> incident_simplices(int vertex) const;
  /// Simplex containing the point; points on shared faces resolve to the
  /// simplex of the lower lattice cell.
  int locate(const Point &x) const;

private:
  int dim_;
  int level_;
  std::vector<Point> vertices_;
  std::vector<Simplex> simplices_;
  std::vector<char> boundary_;
  std::vector<int> interior_nodes_;
  std::vector<int> dof_of_;
  std::vector<int> incidence_offsets_;
  std::vector<int> incidence_;
};

Mesh build_uniform_mesh(int dim, int level);

/// Nested pair of uniform meshes.
struct MeshHierarchy
{
  Mesh coarse;
  Mesh fine;
  /// Coarse simplex containing each fine simplex.
  std::vector<int> parent_of;
  /// Fine simplices of each coarse simplex, ascending.
  std::vector<std::vector<int>> children_of;
  /// Fine interior dofs x coarse interior dofs; column z holds the fine
  /// nodal values of the coarse hat function of dof z.
  Eigen::SparseMatrix<double> prolongation;
};

MeshHierarchy build_hierarchy(int dim, int coarse_level, int fine_level);

/// Nodal patch of k coarse layers around a coarse interior vertex.
struct Patch
{
  int center = -1; ///< coarse vertex index
  int k = 0;
  std::vector<int> elements;                 ///< coarse simplices, ascending
  std::vector<int> fine_dofs;                ///< fine dofs strictly inside
  std::vector<int> constrained_coarse_nodes; ///< coarse dofs, ascending
};

/// Patch of the coarse vertex `center`. The constrained nodes are the coarse
/// interior vertices of patch elements, i.e. the hats whose support overlaps
/// the patch with positive measure.
Patch node_patch(const MeshHierarchy &hierarchy, int center, int k);

/// Smallest k for which every patch of this coarse mesh covers the domain.
int saturating_k(const Mesh &coarse);

} // namespace lodgpe
