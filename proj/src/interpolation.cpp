#include <lodgpe/interpolation.hpp>

#include <lodgpe/assembly.hpp>

#include <stdexcept>

namespace lodgpe
{

ClementOperator
build_clement(const MeshHierarchy &hierarchy)
{
  return build_clement(hierarchy, assemble_mass(hierarchy.fine));
}

ClementOperator
build_clement(const MeshHierarchy &hierarchy, const SparseSym &fine_mass)
{
  const Mesh &coarse = hierarchy.coarse;
  if (fine_mass.size() != hierarchy.fine.num_dofs())
    throw std::invalid_argument("clement: fine mass has wrong dimension");

  const QuadratureField ones = QuadratureField::Ones(
    static_cast<Eigen::Index>(coarse.num_simplices()) *
    quad_rule(coarse.dim()).size());

  ClementOperator op;
  op.node_weights = load_vector(coarse, ones);
  // the coarse hats are exact fine P1 functions, so (phi_j, Phi_z) is the
  // fine mass matrix applied to the prolongated hat
  op.pairing = Eigen::SparseMatrix<double>(
    hierarchy.prolongation.transpose() * fine_mass.matrix());
  op.pairing.prune(0.0);
  op.pairing.makeCompressed();
  return op;
}

Vector
clement_interpolate(const ClementOperator &op, const Vector &v)
{
  if (v.size() != op.pairing.cols())
    throw std::invalid_argument("clement_interpolate: dimension mismatch");
  return (op.pairing * v).cwiseQuotient(op.node_weights);
}

Vector
prolongate(const MeshHierarchy &hierarchy, const Vector &coarse)
{
  if (coarse.size() != hierarchy.prolongation.cols())
    throw std::invalid_argument("prolongate: dimension mismatch");
  return hierarchy.prolongation * coarse;
}

} // namespace lodgpe
