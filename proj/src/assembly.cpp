#include <lodgpe/assembly.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace lodgpe
{

namespace
{

using Triplets = std::vector<Eigen::Triplet<double>>;

QuadRule
make_rule_1d()
{
  // 3-point Gauss-Legendre on [0,1]
  const double r = 0.5 * std::sqrt(0.6);
  QuadRule     q;
  for (double t : {0.5 - r, 0.5, 0.5 + r})
    q.barycentric.push_back({1.0 - t, t, 0.0});
  q.weights           = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  q.reference_measure = 1.0;
  return q;
}

QuadRule
make_rule_2d()
{
  // symmetric 6-point rule of degree 4
  const double a1 = 0.445948490915964886318329253883;
  const double w1 = 0.223381589678011465944827307725;
  const double a2 = 0.091576213509770743459571463402;
  const double w2 = 0.109951743655321867388505925609;
  QuadRule     q;
  for (const auto &[a, w] : {std::pair{a1, w1}, std::pair{a2, w2}})
    {
      const double b = 1.0 - 2.0 * a;
      for (const std::array<double, 3> l : {std::array{b, a, a},
                                            std::array{a, b, a},
                                            std::array{a, a, b}})
        {
          q.barycentric.push_back(l);
          q.weights.push_back(0.5 * w);
        }
    }
  q.reference_measure = 0.5;
  return q;
}

/// Gradients of the barycentric coordinates of a simplex.
std::array<std::array<double, 2>, 3>
shape_gradients(const Mesh &mesh, int e)
{
  const auto &s = mesh.simplices()[e];
  const auto &v = mesh.vertices();
  if (mesh.dim() == 1)
    {
      const double len = v[s[1]][0] - v[s[0]][0];
      return {{{-1.0 / len, 0.0}, {1.0 / len, 0.0}, {0.0, 0.0}}};
    }
  const double x10 = v[s[1]][0] - v[s[0]][0], y10 = v[s[1]][1] - v[s[0]][1];
  const double x20 = v[s[2]][0] - v[s[0]][0], y20 = v[s[2]][1] - v[s[0]][1];
  const double det = x10 * y20 - x20 * y10;
  const std::array<double, 2> g1{y20 / det, -x20 / det};
  const std::array<double, 2> g2{-y10 / det, x10 / det};
  return {{{-g1[0] - g2[0], -g1[1] - g2[1]}, g1, g2}};
}

Point
quadrature_point(const Mesh &mesh, int e, const std::array<double, 3> &l)
{
  const auto &s = mesh.simplices()[e];
  Point       x{0.0, 0.0};
  for (int a = 0; a < mesh.vertices_per_simplex(); ++a)
    for (int d = 0; d < 2; ++d)
      x[d] += l[a] * mesh.vertices()[s[a]][d];
  return x;
}

/// Row/column index of a simplex vertex in the assembled matrix, or -1.
int
index_of(const Mesh &mesh, int vertex, DofSet dofs)
{
  return dofs == DofSet::interior ? mesh.dof_of(vertex) : vertex;
}

int
matrix_size(const Mesh &mesh, DofSet dofs)
{
  return dofs == DofSet::interior ? mesh.num_dofs() : mesh.num_vertices();
}

using Reaction = std::function<double(int, int, const Point &)>;

/// Element matrix of A grad . grad (if diffusion is given) plus the
/// quadrature-weighted reaction term (if given).
void
element_matrix(const Mesh &mesh, int e, const Diffusion *diffusion,
               const Reaction &reaction, double (&local)[3][3])
{
  const QuadRule &q     = quad_rule(mesh.dim());
  const int       nv    = mesh.vertices_per_simplex();
  const double    meas  = mesh.measure(e);
  const double    scale = meas / q.reference_measure;
  for (auto &row : local)
    for (double &v : row)
      v = 0.0;

  if (diffusion)
    {
      const double coef = (*diffusion)(mesh.centroid(e), mesh.dim());
      const auto   g    = shape_gradients(mesh, e);
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          local[a][b] += coef * meas * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
    }
  if (reaction)
    for (int p = 0; p < q.size(); ++p)
      {
        const auto  &l = q.barycentric[p];
        const double r =
          reaction(e, p, quadrature_point(mesh, e, l)) * q.weights[p] * scale;
        if (r == 0.0)
          continue;
        for (int a = 0; a < nv; ++a)
          for (int b = 0; b < nv; ++b)
            local[a][b] += r * l[a] * l[b];
      }
}

Reaction
potential_reaction(const Mesh &mesh, const ProblemSpec &spec)
{
  if (std::holds_alternative<potential::Zero>(spec.potential))
    return {};
  return [&mesh, &spec](int, int, const Point &x) {
    return potential_eval(spec.potential, x, mesh.dim());
  };
}

SparseSym
assemble(const Mesh &mesh, const Diffusion *diffusion,
         const Reaction &reaction, DofSet dofs)
{
  const int nv = mesh.vertices_per_simplex();
  Triplets  entries;
  entries.reserve(static_cast<std::size_t>(mesh.num_simplices() * nv * nv));

  double local[3][3];
  for (int e = 0; e < mesh.num_simplices(); ++e)
    {
      element_matrix(mesh, e, diffusion, reaction, local);
      const auto &s = mesh.simplices()[e];
      for (int a = 0; a < nv; ++a)
        {
          const int i = index_of(mesh, s[a], dofs);
          if (i < 0)
            continue;
          for (int b = 0; b < nv; ++b)
            {
              const int j = index_of(mesh, s[b], dofs);
              if (j >= 0 && local[a][b] != 0.0)
                entries.emplace_back(i, j, local[a][b]);
            }
        }
    }

  const int          n = matrix_size(mesh, dofs);
  SparseSym::Storage m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return SparseSym(std::move(m));
}

} // namespace

double
Diffusion::operator()(const Point &x, int dim) const
{
  if (cell_values.empty())
    return constant;
  const int    n  = 1 << level;
  const double dx = std::numbers::pi / n;
  auto         cell = [&](double t) {
    return std::clamp(static_cast<int>(std::floor(t / dx)), 0, n - 1);
  };
  const int ix = cell(x[0]);
  const int iy = dim == 2 ? cell(x[1]) : 0;
  return cell_values[static_cast<std::size_t>(iy * n + ix)];
}

double
Diffusion::min_value() const
{
  return cell_values.empty()
           ? constant
           : *std::min_element(cell_values.begin(), cell_values.end());
}

double
Diffusion::max_value() const
{
  return cell_values.empty()
           ? constant
           : *std::max_element(cell_values.begin(), cell_values.end());
}

double
potential_eval(const PotentialSpec &spec, const Point &x, int dim)
{
  return std::visit(
    [&](const auto &p) -> double {
      using T = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<T, potential::Zero>)
        return 0.0;
      else if constexpr (std::is_same_v<T, potential::Harmonic>)
        return dim == 2 ? x[0] * x[0] + x[1] * x[1] : x[0] * x[0];
      else
        {
          for (int d = 0; d < dim; ++d)
            {
              const double t = p.wells * x[d] / std::numbers::pi;
              const double u = t - std::floor(t);
              if (!(u > 0.25 && u < 0.75))
                return p.bt;
            }
          return 0.0;
        }
    },
    spec);
}

void
ProblemSpec::validate() const
{
  if (!(beta >= 0.0))
    throw std::invalid_argument("beta must be non-negative");
  if (!(diffusion.min_value() > 0.0))
    throw std::invalid_argument("diffusion must be bounded below by a "
                                "positive constant");
  const std::size_t n = std::size_t{1} << diffusion.level;
  if (!diffusion.cell_values.empty() && diffusion.cell_values.size() != n &&
      diffusion.cell_values.size() != n * n)
    throw std::invalid_argument("diffusion cell values do not match level");
  if (const auto *w = std::get_if<potential::PeriodicWells>(&potential))
    {
      if (!(w->bt >= 0.0))
        throw std::invalid_argument("well height must be non-negative");
      if (w->wells < 1)
        throw std::invalid_argument("well count must be >= 1");
    }
}

const QuadRule &
quad_rule(int dim)
{
  static const QuadRule rule1 = make_rule_1d();
  static const QuadRule rule2 = make_rule_2d();
  if (dim == 1)
    return rule1;
  if (dim == 2)
    return rule2;
  throw std::invalid_argument("quadrature: dimension must be 1 or 2");
}

SparseSym
assemble_bilinear(const Mesh &mesh, const ProblemSpec &spec, DofSet dofs)
{
  return assemble(mesh, &spec.diffusion, potential_reaction(mesh, spec), dofs);
}

SparseSym
assemble_laplace(const Mesh &mesh)
{
  const Diffusion unit;
  return assemble(mesh, &unit, {}, DofSet::interior);
}

SparseSym
assemble_mass(const Mesh &mesh, DofSet dofs)
{
  return assemble(
    mesh, nullptr, [](int, int, const Point &) { return 1.0; }, dofs);
}

SparseSym
assemble_density_mass(const Mesh &mesh, const QuadratureField &rho)
{
  const int nq = quad_rule(mesh.dim()).size();
  if (rho.size() != static_cast<Eigen::Index>(mesh.num_simplices()) * nq)
    throw std::invalid_argument("density: expected one value per quadrature "
                                "point");
  if ((rho.array() < 0.0).any())
    throw std::invalid_argument("density: negative values");
  return assemble(
    mesh,
    nullptr,
    [&](int e, int p, const Point &) { return rho[e * nq + p]; },
    DofSet::interior);
}

Vector
element_energies(const Mesh &mesh, const ProblemSpec &spec, const Vector &u)
{
  if (u.size() != mesh.num_dofs())
    throw std::invalid_argument("element_energies: coefficient count mismatch");
  const int      nv       = mesh.vertices_per_simplex();
  const Reaction reaction = potential_reaction(mesh, spec);
  Vector         out(mesh.num_simplices());
  double         local[3][3];
  for (int e = 0; e < mesh.num_simplices(); ++e)
    {
      element_matrix(mesh, e, &spec.diffusion, reaction, local);
      double nodal[3] = {};
      for (int a = 0; a < nv; ++a)
        {
          const int dof = mesh.dof_of(mesh.simplices()[e][a]);
          nodal[a]      = dof >= 0 ? u[dof] : 0.0;
        }
      double value = 0.0;
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          value += nodal[a] * local[a][b] * nodal[b];
      out[e] = value;
    }
  return out;
}

QuadratureField
evaluate_at_quadrature(const Mesh &mesh, const Vector &u)
{
  if (u.size() != mesh.num_dofs())
    throw std::invalid_argument("evaluate: coefficient count mismatch");
  const QuadRule &q  = quad_rule(mesh.dim());
  const int       nv = mesh.vertices_per_simplex();
  QuadratureField values(static_cast<Eigen::Index>(mesh.num_simplices()) *
                         q.size());
  for (int e = 0; e < mesh.num_simplices(); ++e)
    {
      double nodal[3] = {};
      for (int a = 0; a < nv; ++a)
        {
          const int dof = mesh.dof_of(mesh.simplices()[e][a]);
          nodal[a]      = dof >= 0 ? u[dof] : 0.0;
        }
      for (int p = 0; p < q.size(); ++p)
        {
          double value = 0.0;
          for (int a = 0; a < nv; ++a)
            value += q.barycentric[p][a] * nodal[a];
          values[e * q.size() + p] = value;
        }
    }
  return values;
}

double
integrate(const Mesh &mesh, const QuadratureField &g)
{
  const QuadRule &q   = quad_rule(mesh.dim());
  double          sum = 0.0;
  for (int e = 0; e < mesh.num_simplices(); ++e)
    {
      double local = 0.0;
      for (int p = 0; p < q.size(); ++p)
        local += q.weights[p] * g[e * q.size() + p];
      sum += local * mesh.measure(e) / q.reference_measure;
    }
  return sum;
}

Vector
load_vector(const Mesh &mesh, const QuadratureField &g)
{
  const QuadRule &q  = quad_rule(mesh.dim());
  const int       nv = mesh.vertices_per_simplex();
  Vector          f  = Vector::Zero(mesh.num_dofs());
  for (int e = 0; e < mesh.num_simplices(); ++e)
    {
      const double scale = mesh.measure(e) / q.reference_measure;
      for (int a = 0; a < nv; ++a)
        {
          const int dof = mesh.dof_of(mesh.simplices()[e][a]);
          if (dof < 0)
            continue;
          double local = 0.0;
          for (int p = 0; p < q.size(); ++p)
            local += q.weights[p] * g[e * q.size() + p] * q.barycentric[p][a];
          f[dof] += local * scale;
        }
    }
  return f;
}

FineProblem::FineProblem(Mesh mesh, ProblemSpec spec)
  : mesh_(std::move(mesh))
  , spec_(std::move(spec))
{
  spec_.validate();
  a_       = assemble_bilinear(mesh_, spec_);
  laplace_ = assemble_laplace(mesh_);
  mass_    = assemble_mass(mesh_);
}

double
FineProblem::quartic(const Vector &u) const
{
  const QuadratureField values = evaluate_at_quadrature(mesh_, u);
  return integrate(mesh_, values.array().square().square().matrix());
}

double
FineProblem::energy(const Vector &u) const
{
  double e = 0.5 * a_.form(u, u);
  if (spec_.beta != 0.0)
    e += 0.25 * spec_.beta * quartic(u);
  return e;
}

double
FineProblem::lambda(const Vector &u) const
{
  const double norm2 = mass_.form(u, u);
  if (!(norm2 > 0.0))
    throw std::invalid_argument("lambda: zero state");
  double numerator = a_.form(u, u);
  if (spec_.beta != 0.0)
    numerator += spec_.beta * quartic(u);
  return numerator / norm2;
}

Vector
FineProblem::cubic_load(const Vector &u) const
{
  const QuadratureField values = evaluate_at_quadrature(mesh_, u);
  return load_vector(mesh_, values.array().cube().matrix());
}

double
FineProblem::l2_norm(const Vector &u) const
{
  return std::sqrt(std::max(0.0, mass_.form(u, u)));
}

ErrorNorms
FineProblem::error_norms(const Vector &u, const Vector &v) const
{
  if (u.size() != v.size() || u.size() != mesh_.num_dofs())
    throw std::invalid_argument("error_norms: dimension mismatch");
  const Vector e = u - v;
  return {std::sqrt(std::max(0.0, mass_.form(e, e))),
          std::sqrt(std::max(0.0, laplace_.form(e, e))),
          std::sqrt(std::max(0.0, a_.form(e, e)))};
}

double
energy(const ProblemSpec &spec, const Mesh &mesh, const Vector &u)
{
  return FineProblem(mesh, spec).energy(u);
}

double
lambda_from_state(const ProblemSpec &spec, const Mesh &mesh, const Vector &u)
{
  return FineProblem(mesh, spec).lambda(u);
}

ErrorNorms
error_norms(const ProblemSpec &spec, const Mesh &mesh, const Vector &u,
            const Vector &v)
{
  return FineProblem(mesh, spec).error_norms(u, v);
}

} // namespace lodgpe
