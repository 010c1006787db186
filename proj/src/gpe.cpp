#include <lodgpe/gpe.hpp>

#include <algorithm>
#include <cmath>

namespace lodgpe
{

DiscreteSpace::DiscreteSpace(const FineProblem      &problem,
                             const CoarseSpaceBasis *basis)
  : problem_(&problem)
  , basis_(basis)
  , stiffness_(restrict_matrix(problem.a_matrix()))
  , mass_(restrict_matrix(problem.mass()))
{}

DiscreteSpace
DiscreteSpace::fine(const FineProblem &problem)
{
  return DiscreteSpace(problem, nullptr);
}

DiscreteSpace
DiscreteSpace::lod(const FineProblem &problem, const CoarseSpaceBasis &basis)
{
  if (basis.basis.rows() != problem.mesh().num_dofs())
    throw std::invalid_argument("lod space: basis does not live on the fine "
                                "mesh of the problem");
  return DiscreteSpace(problem, &basis);
}

int
DiscreteSpace::dimension() const
{
  return basis_ ? basis_->dimension() : problem_->mesh().num_dofs();
}

Vector
DiscreteSpace::lift(const Vector &coefficients) const
{
  return basis_ ? basis_->lift(coefficients) : coefficients;
}

Vector
DiscreteSpace::restrict_load(const Vector &fine_load) const
{
  return basis_ ? Vector(basis_->basis.transpose() * fine_load) : fine_load;
}

SpaceMatrix
DiscreteSpace::restrict_matrix(const SparseSym &fine_matrix) const
{
  if (!basis_)
    return fine_matrix;
  return coarse_operator(basis_->basis, fine_matrix);
}

Eigenpair
smallest_eigenpair(const SpaceMatrix &k, const SpaceMatrix &m, double tol,
                   const std::optional<Vector> &guess)
{
  if (const auto *ks = std::get_if<SparseSym>(&k))
    return smallest_eigenpair(*ks, std::get<SparseSym>(m), tol, guess);
  return smallest_eigenpair(std::get<DenseSym>(k), std::get<DenseSym>(m), tol);
}

namespace
{

SpaceMatrix
add_scaled(const SpaceMatrix &a, double alpha, const SpaceMatrix &b)
{
  return std::visit(
    [&](const auto &lhs) -> SpaceMatrix {
      using T = std::decay_t<decltype(lhs)>;
      return lhs + alpha * std::get<T>(b);
    },
    a);
}

/// Mixture components lighter than this no longer affect the density.
constexpr double negligible_weight = 1e-18;

Vector
apply(const SpaceMatrix &a, const Vector &x)
{
  return std::visit([&](const auto &mat) -> Vector { return mat * x; }, a);
}

double
form(const SpaceMatrix &a, const Vector &x)
{
  return std::visit([&](const auto &m) { return x.dot(m * x); }, a);
}

void
fix_fine_sign(Vector &coefficients, Vector &fine)
{
  Eigen::Index i = 0;
  fine.cwiseAbs().maxCoeff(&i);
  if (fine[i] < 0.0)
    {
      coefficients = -coefficients;
      fine         = -fine;
    }
}

} // namespace

GroundState
oda_minimize(const DiscreteSpace &space, const OdaOptions &options)
{
  if (!(options.eps > 0.0))
    throw std::invalid_argument("oda: eps must be positive");

  const FineProblem &problem = space.problem();
  const Mesh        &mesh    = problem.mesh();
  const double       beta    = problem.spec().beta;
  const SpaceMatrix &k       = space.stiffness();
  const SpaceMatrix &m       = space.mass();

  auto density_of = [&](const Vector &coefficients) -> QuadratureField {
    return evaluate_at_quadrature(mesh, space.lift(coefficients))
      .array()
      .square()
      .matrix();
  };
  auto relaxed_energy = [&](double linear, const QuadratureField &rho) {
    return 0.5 * linear +
           0.25 * beta * integrate(mesh, rho.array().square().matrix());
  };

  // The relaxed state is a convex mixture sum_i c_i u_i u_i^T of pure
  // states; rho and `linear` are its density and its value of u^T K u.
  struct Component
  {
    double weight;
    Vector state;
  };
  Eigenpair              state = smallest_eigenpair(k, m, options.eigen_tol, {});
  std::vector<Component> mixture{{1.0, state.vector}};
  QuadratureField        rho     = density_of(state.vector);
  double                 linear  = form(k, state.vector);
  double                 current = relaxed_energy(linear, rho);

  GroundState result;
  result.energy_trace.push_back(current);

  for (int it = 1; it <= options.max_iterations; ++it)
    {
      const SpaceMatrix op =
        beta != 0.0
          ? add_scaled(k, beta,
                       space.restrict_matrix(assemble_density_mass(mesh, rho)))
          : k;
      state = smallest_eigenpair(op, m, options.eigen_tol, state.vector);
      const Vector &next_state = state.vector;

      // With H the linearized operator and l the Rayleigh quotient of the new
      // state, the energy slope towards it is -1/2 sum_i c_i u_i^T (H - l M)
      // u_i. Each term is evaluated on u_i minus the new state, which keeps
      // the slope accurate long after energy differences drown in roundoff.
      const Vector h_next    = apply(op, next_state);
      const Vector m_next    = apply(m, next_state);
      const double rayleigh  = next_state.dot(h_next) / next_state.dot(m_next);
      const Vector residual  = h_next - rayleigh * m_next;
      double       gap_total = 0.0;
      for (const Component &c : mixture)
        {
          const double sign  = c.state.dot(m_next) < 0.0 ? -1.0 : 1.0;
          const Vector diff  = c.state - sign * next_state;
          const Vector shift = apply(op, diff) - rayleigh * apply(m, diff);
          gap_total += c.weight * (diff.dot(shift) + 2.0 * sign *
                                                       diff.dot(residual));
        }
      const double slope = -0.5 * std::max(0.0, gap_total);

      const QuadratureField candidate        = density_of(next_state);
      const double          candidate_linear = form(k, next_state);
      const QuadratureField step             = candidate - rho;
      const double step_norm2 = integrate(mesh, step.array().square().matrix());
      const double curvature  = 0.25 * beta * step_norm2;
      const double t =
        curvature > 0.0 ? std::clamp(-slope / (2.0 * curvature), 0.0, 1.0)
                        : 1.0;

      linear += t * (candidate_linear - linear);
      rho += t * step;
      // mixtures of squares stay pointwise nonnegative up to roundoff
      rho = rho.cwiseMax(0.0);

      if (t >= 1.0)
        mixture.clear();
      double kept = 0.0;
      std::erase_if(mixture, [&](Component &c) {
        c.weight *= 1.0 - t;
        return c.weight < negligible_weight;
      });
      mixture.push_back({t, next_state});
      for (const Component &c : mixture)
        kept += c.weight;
      for (Component &c : mixture)
        c.weight /= kept;

      current = relaxed_energy(linear, rho);
      result.energy_trace.push_back(current);
      result.residual = slope;

      const double decrement = -(t * slope + t * t * curvature);
      if (decrement <= options.eps &&
          std::sqrt(std::max(0.0, step_norm2)) <= options.density_tol)
        {
          result.iterations = it;
          break;
        }
      if (it == options.max_iterations)
        throw OdaError("oda: no convergence after " + std::to_string(it) +
                         " iterations",
                       result.energy_trace);
    }

  result.coefficients      = state.vector;
  result.fine_coefficients = space.lift(state.vector);
  fix_fine_sign(result.coefficients, result.fine_coefficients);
  const double norm = problem.l2_norm(result.fine_coefficients);
  result.coefficients /= norm;
  result.fine_coefficients /= norm;
  result.normalized = result.fine_coefficients;
  result.energy     = problem.energy(result.fine_coefficients);
  result.lambda     = problem.lambda(result.fine_coefficients);
  return result;
}

double
state_residual(const DiscreteSpace &space, const GroundState &state)
{
  const FineProblem &problem = space.problem();
  const Vector      &u       = state.fine_coefficients;
  Vector             r       = problem.a_matrix() * u -
                 state.lambda * (problem.mass() * u);
  if (problem.spec().beta != 0.0)
    r += problem.spec().beta * problem.cubic_load(u);
  return space.restrict_load(r).norm();
}

GroundState
postprocess(const FineProblem &fine, const GroundState &coarse, double cg_tol)
{
  const Vector &u = coarse.fine_coefficients;
  if (u.size() != fine.mesh().num_dofs())
    throw std::invalid_argument("postprocess: coarse state is not lifted to "
                                "the fine mesh");
  Vector rhs = coarse.lambda * (fine.mass() * u);
  if (fine.spec().beta != 0.0)
    rhs -= fine.spec().beta * fine.cubic_load(u);

  GroundState post;
  post.fine_coefficients = solve_spd(fine.a_matrix(), rhs, cg_tol);
  post.coefficients      = post.fine_coefficients;
  post.normalized =
    post.fine_coefficients / fine.l2_norm(post.fine_coefficients);
  post.lambda       = fine.lambda(post.fine_coefficients);
  post.energy       = fine.energy(post.fine_coefficients);
  post.iterations   = coarse.iterations;
  post.energy_trace = coarse.energy_trace;
  return post;
}

} // namespace lodgpe
