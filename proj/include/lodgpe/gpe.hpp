#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <lodgpe/assembly.hpp>
#include <lodgpe/linalg.hpp>
#include <lodgpe/lod.hpp>

namespace lodgpe
{

/// Operator in the coordinates of a discrete space: sparse on the fine
/// space, dense on the multiscale space.
using SpaceMatrix = std::variant<SparseSym, DenseSym>;

/**
 * Trial space of a ground-state computation: either the full fine P1 space
 * or the span of a multiscale basis, both represented through their lift to
 * fine coefficients. Non-owning: the fine problem and the basis must outlive
 * the space.
 */
class DiscreteSpace
{
public:
  static DiscreteSpace fine(const FineProblem &problem);
  static DiscreteSpace lod(const FineProblem      &problem,
                           const CoarseSpaceBasis &basis);

  bool               is_fine() const { return basis_ == nullptr; }
  int                dimension() const;
  const FineProblem &problem() const { return *problem_; }

  const SpaceMatrix &stiffness() const { return stiffness_; }
  const SpaceMatrix &mass() const { return mass_; }

  Vector      lift(const Vector &coefficients) const;
  /// Transpose of lift: fine load vector to space coordinates.
  Vector      restrict_load(const Vector &fine_load) const;
  SpaceMatrix restrict_matrix(const SparseSym &fine_matrix) const;

private:
  DiscreteSpace(const FineProblem &problem, const CoarseSpaceBasis *basis);

  const FineProblem      *problem_;
  const CoarseSpaceBasis *basis_;
  SpaceMatrix             stiffness_;
  SpaceMatrix             mass_;
};

Eigenpair smallest_eigenpair(const SpaceMatrix &k, const SpaceMatrix &m,
                             double tol, const std::optional<Vector> &guess);

struct GroundState
{
  Vector              coefficients;      ///< space coordinates
  Vector              fine_coefficients; ///< lifted (raw for post-processing)
  Vector              normalized;        ///< fine, unit L2 norm
  double              lambda     = 0.0;
  double              energy     = 0.0;
  int                 iterations = 0;
  std::vector<double> energy_trace;
  /// slope of the damped energy along the last search segment
  double              residual = 0.0;
};

struct OdaOptions
{
  /// stop once one step lowers the energy by at most this much ...
  double eps = 1e-14;
  /// ... and the undamped density update is this small in L2
  double density_tol    = 1e-10;
  int    max_iterations = 10000;
  double eigen_tol      = default_eigen_tol;
};

/// The iteration cap was hit; carries the energies recorded so far.
class OdaError : public SolverError
{
public:
  OdaError(const std::string &what, std::vector<double> trace)
    : SolverError(what, trace.empty() ? 0.0 : trace.back())
    , trace_(std::move(trace))
  {}

  const std::vector<double> &energy_trace() const { return trace_; }

private:
  std::vector<double> trace_;
};

/**
 * Optimal damping iteration for the discrete ground state.
 *
 * Mixes densities rho (values at fine quadrature points) and linear energies
 * T = u^T K u of successive aufbau states. Each step solves the linear
 * eigenproblem of K + beta M[rho] and moves along the segment towards the new
 * pure state by the exact minimizer of the energy, which is quadratic along
 * the segment. Returns the pure eigenstate of the last linearized operator.
 */
GroundState oda_minimize(const DiscreteSpace &space,
                         const OdaOptions    &options = {});

/// ||K u + beta N(u) - lambda M u||_2 in space coordinates, N the cubic load.
double state_residual(const DiscreteSpace &space, const GroundState &state);

/**
 * Two-grid correction on the fine space: solves
 * a(w, phi) = lambda (u, phi) - beta (|u|^2 u, phi) for the given coarse
 * state (u, lambda). The result keeps the raw w in fine_coefficients, its
 * normalization in `normalized`, and lambda = (2E(w) + beta/2 |w|_4^4)/|w|^2.
 */
GroundState postprocess(const FineProblem &fine, const GroundState &coarse,
                        double cg_tol = default_spd_tol);

} // namespace lodgpe
