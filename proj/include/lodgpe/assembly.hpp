#pragma once

#include <array>
#include <variant>
#include <vector>

#include <lodgpe/linalg.hpp>
#include <lodgpe/mesh.hpp>

namespace lodgpe
{

/// Scalar diffusion coefficient: a constant, or piecewise constant on the
/// cells of a uniform lattice of the given level (values row-major).
struct Diffusion
{
  double              constant = 1.0;
  int                 level    = 0;
  std::vector<double> cell_values;

  double operator()(const Point &x, int dim) const;
  double min_value() const;
  double max_value() const;
};

namespace potential
{
struct Zero
{};
/// b(x) = sum_i x_i^2
struct Harmonic
{};
/// Periodic array of square wells: zero in the middle half of each of the
/// L^d lattice cells, height `bt` elsewhere.
struct PeriodicWells
{
  double bt    = 100.0;
  int    wells = 4;
};
} // namespace potential

using PotentialSpec =
  std::variant<potential::Zero, potential::Harmonic, potential::PeriodicWells>;

double potential_eval(const PotentialSpec &spec, const Point &x, int dim = 2);

struct ProblemSpec
{
  Diffusion     diffusion;
  PotentialSpec potential = potential::Zero{};
  double        beta      = 0.0;

  /// Throws std::invalid_argument on negative beta, non-positive diffusion
  /// or invalid well parameters.
  void validate() const;
};

/// Quadrature on the reference simplex, exact for polynomials of degree 4.
/// Weights sum to the reference measure (1 in 1D, 1/2 in 2D).
struct QuadRule
{
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double>                weights;
  double                             reference_measure = 1.0;

  int size() const { return static_cast<int>(weights.size()); }
};

const QuadRule &quad_rule(int dim);

/// Values at every quadrature point of every simplex, simplex-major.
using QuadratureField = Vector;

enum class DofSet
{
  interior,    ///< homogeneous Dirichlet: interior vertices only
  all_vertices ///< every vertex, before boundary elimination
};

/// Matrix of a(v,w) = int A grad v . grad w + int b v w.
SparseSym assemble_bilinear(const Mesh &mesh, const ProblemSpec &spec,
                            DofSet dofs = DofSet::interior);
/// Matrix of int grad v . grad w.
SparseSym assemble_laplace(const Mesh &mesh);
/// Consistent P1 mass matrix.
SparseSym assemble_mass(const Mesh &mesh, DofSet dofs = DofSet::interior);
/// Matrix of int rho v w; throws std::invalid_argument on negative rho.
SparseSym assemble_density_mass(const Mesh &mesh, const QuadratureField &rho);

/// a(u,u) restricted to each simplex.
Vector element_energies(const Mesh &mesh, const ProblemSpec &spec,
                        const Vector &u);

/// Finite element function u (interior coefficients) at the quadrature
/// points.
QuadratureField evaluate_at_quadrature(const Mesh &mesh, const Vector &u);
/// int g over the domain.
double integrate(const Mesh &mesh, const QuadratureField &g);
/// (g, phi_j) for every interior dof j.
Vector load_vector(const Mesh &mesh, const QuadratureField &g);

struct ErrorNorms
{
  double l2          = 0.0;
  double h1_semi     = 0.0;
  double energy_norm = 0.0;
};

/**
 * Mesh, coefficients and the assembled linear operators of one fine space.
 * Holds everything the nonlinear functionals need so callers can evaluate
 * them repeatedly without reassembly.
 */
class FineProblem
{
public:
  FineProblem(Mesh mesh, ProblemSpec spec);

  const Mesh        &mesh() const { return mesh_; }
  const ProblemSpec &spec() const { return spec_; }
  const SparseSym   &a_matrix() const { return a_; }
  const SparseSym   &laplace() const { return laplace_; }
  const SparseSym   &mass() const { return mass_; }

  /// int |u|^4
  double quartic(const Vector &u) const;
  double energy(const Vector &u) const;
  /// (2 E(u) + beta/2 ||u||_L4^4) / ||u||_L2^2
  double lambda(const Vector &u) const;
  /// (|u|^2 u, phi_j) for every dof j
  Vector cubic_load(const Vector &u) const;
  double l2_norm(const Vector &u) const;
  ErrorNorms error_norms(const Vector &u, const Vector &v) const;

private:
  Mesh        mesh_;
  ProblemSpec spec_;
  SparseSym   a_;
  SparseSym   laplace_;
  SparseSym   mass_;
};

double     energy(const ProblemSpec &spec, const Mesh &mesh, const Vector &u);
double     lambda_from_state(const ProblemSpec &spec, const Mesh &mesh,
                             const Vector &u);
ErrorNorms error_norms(const ProblemSpec &spec, const Mesh &mesh,
                       const Vector &u, const Vector &v);

} // namespace lodgpe
