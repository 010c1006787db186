#pragma once

#include <lodgpe/linalg.hpp>
#include <lodgpe/mesh.hpp>

namespace lodgpe
{

/**
 * Weighted Clement quasi-interpolation onto the coarse P1 space:
 * coefficient z of I_H v is (v, Phi_z) / (1, Phi_z).
 *
 * `pairing` is the constraint matrix C with C(z, j) = (phi_j, Phi_z) over
 * fine interior dofs j. Its kernel is the fine-scale space used throughout.
 */
struct ClementOperator
{
  Vector                      node_weights; ///< (1, Phi_z) per coarse dof
  Eigen::SparseMatrix<double> pairing;      ///< coarse dofs x fine dofs
};

ClementOperator build_clement(const MeshHierarchy &hierarchy);
/// Same operator, reusing an already assembled fine mass matrix.
ClementOperator build_clement(const MeshHierarchy &hierarchy,
                              const SparseSym     &fine_mass);

Vector clement_interpolate(const ClementOperator &op, const Vector &v);

/// Fine nodal coefficients of a coarse P1 function.
Vector prolongate(const MeshHierarchy &hierarchy, const Vector &coarse);

} // namespace lodgpe
