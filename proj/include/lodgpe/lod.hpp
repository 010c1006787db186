#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <lodgpe/assembly.hpp>
#include <lodgpe/interpolation.hpp>
#include <lodgpe/linalg.hpp>
#include <lodgpe/mesh.hpp>

namespace lodgpe
{

/// A corrector solve failed; carries the coarse vertex and its patch size.
class CorrectorError : public SolverError
{
public:
  CorrectorError(int node, int patch_dofs, const SolverError &cause)
    : SolverError("corrector of coarse vertex " + std::to_string(node) +
                    " (" + std::to_string(patch_dofs) +
                    " patch dofs) failed: " + cause.what(),
                  cause.residual())
    , node_(node)
  {}

  int node() const { return node_; }

private:
  int node_;
};

/**
 * Localized corrector Psi_{z,k}: the fine-space function supported in the
 * patch of k layers around coarse vertex `z` with
 * a(Psi, v) = a(Phi_z, v) for every v in the Clement kernel on that patch.
 * Returned as fine interior coefficients, zero outside the patch.
 */
Vector compute_corrector(const MeshHierarchy   &hierarchy,
                         const SparseSym       &a_matrix,
                         const ClementOperator &clement,
                         int                    z,
                         int                    k);

/// Corrector of the ideal (unlocalized) decomposition.
Vector compute_global_corrector(const MeshHierarchy   &hierarchy,
                                const SparseSym       &a_matrix,
                                const ClementOperator &clement,
                                int                    z);

/// Fine-grid representation of the localized multiscale space.
struct CoarseSpaceBasis
{
  int k = 0;
  /// fine dofs x coarse dofs; column z is prolongate(Phi_z) - Psi_{z,k}
  Eigen::SparseMatrix<double> basis;
  /// the Psi_{z,k} alone
  Eigen::SparseMatrix<double> correctors;

  int dimension() const { return static_cast<int>(basis.cols()); }
  Vector lift(const Vector &coefficients) const { return basis * coefficients; }
};

struct BasisOptions
{
  /// Build correctors from the diffusion term only.
  bool corrector_drop_potential = false;
  int  threads                  = 0;
};

CoarseSpaceBasis build_coarse_basis(const MeshHierarchy &hierarchy,
                                    const ProblemSpec   &spec,
                                    int                  k,
                                    const BasisOptions  &options = {});

/// Same, with the corrector operator and Clement pairing supplied.
CoarseSpaceBasis build_coarse_basis(const MeshHierarchy   &hierarchy,
                                    const SparseSym       &a_matrix,
                                    const ClementOperator &clement,
                                    int                    k,
                                    int                    threads = 0);

/// Galerkin restriction B^T S B.
DenseSym coarse_operator(const Eigen::SparseMatrix<double> &basis,
                         const SparseSym                   &s);

struct DecayProfile
{
  int                 node = -1;
  std::vector<int>    k;
  /// energy norm of the global corrector outside the k-patch
  std::vector<double> tail;
  /// energy norm of global minus localized corrector
  std::vector<double> localization_error;
  double              global_norm = 0.0;
  /// geometric-mean ratio of consecutive tails
  double              theta = 0.0;
};

DecayProfile decay_profile(const MeshHierarchy &hierarchy,
                           const ProblemSpec   &spec,
                           int                  z,
                           int                  k_max);

/// Coarse interior vertex closest to the domain center.
int center_node(const Mesh &coarse);

} // namespace lodgpe
