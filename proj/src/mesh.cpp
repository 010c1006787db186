#include <lodgpe/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lodgpe
{

Mesh::Mesh(int dim, int level)
  : dim_(dim)
  , level_(level)
{
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("mesh dimension must be 1 or 2, got " +
                                std::to_string(dim));
  if (level < 1)
    throw std::invalid_argument("mesh level must be >= 1, got " +
                                std::to_string(level));

  const int    n  = cells_per_axis();
  const double dx = width();
  const int    ny = dim == 2 ? n + 1 : 1;

  vertices_.reserve(static_cast<std::size_t>((n + 1) * ny));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix <= n; ++ix)
      vertices_.push_back({ix * dx, dim == 2 ? iy * dx : 0.0});

  // exact endpoints, so boundary tests below are exact comparisons
  for (auto &v : vertices_)
    for (int d = 0; d < dim; ++d)
      {
        const int i = static_cast<int>(std::lround(v[d] / dx));
        if (i == n)
          v[d] = std::numbers::pi;
      }

  if (dim == 1)
    {
      for (int i = 0; i < n; ++i)
        simplices_.push_back({i, i + 1, -1});
    }
  else
    {
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          {
            const int v00 = vertex_index(ix, iy);
            const int v10 = vertex_index(ix + 1, iy);
            const int v11 = vertex_index(ix + 1, iy + 1);
            const int v01 = vertex_index(ix, iy + 1);
            simplices_.push_back({v00, v10, v11});
            simplices_.push_back({v00, v11, v01});
          }
    }

  boundary_.assign(vertices_.size(), 0);
  dof_of_.assign(vertices_.size(), -1);
  for (int v = 0; v < num_vertices(); ++v)
    {
      const auto ij = lattice_of(v);
      bool       on_boundary = false;
      for (int d = 0; d < dim; ++d)
        on_boundary = on_boundary || ij[d] == 0 || ij[d] == n;
      boundary_[v] = on_boundary ? 1 : 0;
      if (!on_boundary)
        {
          dof_of_[v] = static_cast<int>(interior_nodes_.size());
          interior_nodes_.push_back(v);
        }
    }

  incidence_offsets_.assign(vertices_.size() + 1, 0);
  const int nv = vertices_per_simplex();
  for (const auto &s : simplices_)
    for (int a = 0; a < nv; ++a)
      ++incidence_offsets_[s[a] + 1];
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    incidence_offsets_[v + 1] += incidence_offsets_[v];
  incidence_.resize(incidence_offsets_.back());
  auto fill = incidence_offsets_;
  for (int e = 0; e < num_simplices(); ++e)
    for (int a = 0; a < nv; ++a)
      incidence_[fill[simplices_[e][a]]++] = e;
}

int
Mesh::vertex_index(int ix, int iy) const
{
  return iy * (cells_per_axis() + 1) + ix;
}

std::array<int, 2>
Mesh::lattice_of(int vertex) const
{
  const int stride = cells_per_axis() + 1;
  return {vertex % stride, vertex / stride};
}

double
Mesh::measure(int simplex) const
{
  const auto &s = simplices_[simplex];
  const auto &a = vertices_[s[0]];
  const auto &b = vertices_[s[1]];
  if (dim_ == 1)
    return std::abs(b[0] - a[0]);
  const auto &c = vertices_[s[2]];
  return 0.5 *
         std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

Point
Mesh::centroid(int simplex) const
{
  const auto &s  = simplices_[simplex];
  const int   nv = vertices_per_simplex();
  Point       c{0.0, 0.0};
  for (int a = 0; a < nv; ++a)
    for (int d = 0; d < 2; ++d)
      c[d] += vertices_[s[a]][d] / nv;
  return c;
}

std::vector<int>
Mesh::incident_simplices(int vertex) const
{
  return {incidence_.begin() + incidence_offsets_[vertex],
          incidence_.begin() + incidence_offsets_[vertex + 1]};
}

int
Mesh::locate(const Point &x) const
{
  const int    n  = cells_per_axis();
  const double dx = width();
  auto         cell_of = [&](double t) {
    const int i = static_cast<int>(std::floor(t / dx));
    return std::clamp(i, 0, n - 1);
  };
  const int ix = cell_of(x[0]);
  if (dim_ == 1)
    return ix;
  const int    iy = cell_of(x[1]);
  const double s  = x[0] / dx - ix;
  const double t  = x[1] / dx - iy;
  const int    c  = iy * n + ix;
  return s >= t ? 2 * c : 2 * c + 1;
}

Mesh
build_uniform_mesh(int dim, int level)
{
  return Mesh(dim, level);
}

MeshHierarchy
build_hierarchy(int dim, int coarse_level, int fine_level)
{
  if (coarse_level < 1 || coarse_level > fine_level)
    throw std::invalid_argument("hierarchy requires 1 <= coarse_level <= "
                                "fine_level, got " +
                                std::to_string(coarse_level) + ", " +
                                std::to_string(fine_level));

  MeshHierarchy h{Mesh(dim, coarse_level), Mesh(dim, fine_level), {}, {}, {}};
  const Mesh   &coarse = h.coarse;
  const Mesh   &fine   = h.fine;

  h.parent_of.resize(fine.num_simplices());
  h.children_of.resize(coarse.num_simplices());
  for (int e = 0; e < fine.num_simplices(); ++e)
    {
      const int parent = coarse.locate(fine.centroid(e));
      h.parent_of[e]   = parent;
      h.children_of[parent].push_back(e);
    }

  // Nodal values of the coarse hats at the fine interior vertices, by
  // barycentric evaluation inside the containing coarse simplex.
  std::vector<Eigen::Triplet<double>> entries;
  const int                           ratio = 1 << (fine_level - coarse_level);
  for (int j = 0; j < fine.num_dofs(); ++j)
    {
      const int vertex = fine.interior_nodes()[j];
      const auto ij    = fine.lattice_of(vertex);
      // exact lattice arithmetic in units of the coarse spacing
      const int ix = ij[0] / ratio, rx = ij[0] % ratio;
      const int iy = ij[1] / ratio, ry = ij[1] % ratio;
      const double s = static_cast<double>(rx) / ratio;
      const double t = static_cast<double>(ry) / ratio;

      auto add = [&](int cx, int cy, double w) {
        if (w == 0.0)
          return;
        const int dof = coarse.dof_of(coarse.vertex_index(cx, cy));
        if (dof >= 0)
          entries.emplace_back(j, dof, w);
      };
      if (dim == 1)
        {
          add(ix, 0, 1.0 - s);
          if (rx != 0)
            add(ix + 1, 0, s);
        }
      else if (s >= t)
        {
          add(ix, iy, 1.0 - s);
          if (rx != 0)
            add(ix + 1, iy, s - t);
          if (ry != 0)
            add(ix + 1, iy + 1, t);
        }
      else
        {
          add(ix, iy, 1.0 - t);
          add(ix, iy + 1, t - s);
          if (rx != 0)
            add(ix + 1, iy + 1, s);
        }
    }
  h.prolongation.resize(fine.num_dofs(), coarse.num_dofs());
  h.prolongation.setFromTriplets(entries.begin(), entries.end());
  h.prolongation.makeCompressed();
  return h;
}

Patch
node_patch(const MeshHierarchy &hierarchy, int center, int k)
{
  const Mesh &coarse = hierarchy.coarse;
  const Mesh &fine   = hierarchy.fine;
  if (center < 0 || center >= coarse.num_vertices() ||
      coarse.is_boundary(center))
    throw std::invalid_argument("patch center must be an interior coarse "
                                "vertex, got " +
                                std::to_string(center));
  if (k < 1)
    throw std::invalid_argument("patch layer count must be >= 1, got " +
                                std::to_string(k));

  const int         nv = coarse.vertices_per_simplex();
  std::vector<char> in_patch(coarse.num_simplices(), 0);
  std::vector<char> touched(coarse.num_vertices(), 0);
  std::vector<int>  frontier{center};
  touched[center] = 1;
  for (int layer = 1; layer <= k; ++layer)
    {
      std::vector<int> next;
      for (int v : frontier)
        for (int e : coarse.incident_simplices(v))
          if (!in_patch[e])
            {
              in_patch[e] = 1;
              for (int a = 0; a < nv; ++a)
                {
                  const int w = coarse.simplices()[e][a];
                  if (!touched[w])
                    {
                      touched[w] = 1;
                      next.push_back(w);
                    }
                }
            }
      frontier = std::move(next);
    }

  Patch p;
  p.center = center;
  p.k      = k;
  for (int e = 0; e < coarse.num_simplices(); ++e)
    if (in_patch[e])
      p.elements.push_back(e);

  for (int v = 0; v < coarse.num_vertices(); ++v)
    if (touched[v] && !coarse.is_boundary(v))
      p.constrained_coarse_nodes.push_back(coarse.dof_of(v));

  // fine interior vertices all of whose incident fine simplices descend
  // from patch elements lie strictly inside the patch
  const int         fnv = fine.vertices_per_simplex();
  std::vector<char> seen(fine.num_vertices(), 0);
  for (int e : p.elements)
    for (int child : hierarchy.children_of[e])
      for (int a = 0; a < fnv; ++a)
        {
          const int v = fine.simplices()[child][a];
          if (seen[v] || fine.is_boundary(v))
            continue;
          seen[v]     = 1;
          bool inside = true;
          for (int f : fine.incident_simplices(v))
            inside = inside && in_patch[hierarchy.parent_of[f]];
          if (inside)
            p.fine_dofs.push_back(fine.dof_of(v));
        }
  std::sort(p.fine_dofs.begin(), p.fine_dofs.end());
  return p;
}

int
saturating_k(const Mesh &coarse)
{
  const int n = coarse.cells_per_axis();
  if (coarse.dim() == 1)
    return std::max(1, n - 1);
  return 2 * n - 2;
}

} // namespace lodgpe
