#include <lodgpe/lod.hpp>

#include <lodgpe/parallel.hpp>

#include <cmath>
#include <limits>

namespace lodgpe
{

namespace
{

/// Clement pairing rows of `rows` restricted to the columns `cols`.
Eigen::SparseMatrix<double>
constraint_block(const Eigen::SparseMatrix<double> &pairing,
                 const std::vector<int>            &rows,
                 const std::vector<int>            &cols)
{
  std::vector<int> local_row(static_cast<std::size_t>(pairing.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    local_row[rows[i]] = static_cast<int>(i);

  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(pairing, cols[j]); it;
         ++it)
      if (local_row[it.row()] >= 0)
        entries.emplace_back(local_row[it.row()], static_cast<int>(j),
                             it.value());
  Eigen::SparseMatrix<double> block(static_cast<Eigen::Index>(rows.size()),
                                    static_cast<Eigen::Index>(cols.size()));
  block.setFromTriplets(entries.begin(), entries.end());
  return block;
}

Vector
corrector_on_patch(const MeshHierarchy   &hierarchy,
                   const SparseSym       &a_matrix,
                   const ClementOperator &clement,
                   const Patch           &patch)
{
  const Mesh &coarse = hierarchy.coarse;
  const int   z_dof  = coarse.dof_of(patch.center);
  Vector      psi    = Vector::Zero(hierarchy.fine.num_dofs());
  if (patch.fine_dofs.empty())
    return psi;

  const Vector hat  = hierarchy.prolongation.col(z_dof);
  const Vector load = a_matrix * hat;
  Vector       rhs(static_cast<Eigen::Index>(patch.fine_dofs.size()));
  for (std::size_t i = 0; i < patch.fine_dofs.size(); ++i)
    rhs[static_cast<Eigen::Index>(i)] = load[patch.fine_dofs[i]];

  const SparseSym local = a_matrix.restricted(patch.fine_dofs);
  const auto      c     = constraint_block(
    clement.pairing, patch.constrained_coarse_nodes, patch.fine_dofs);

  Vector x;
  try
    {
      // overlapping hat supports make rows dependent when the fine mesh
      // adds few vertices per coarse element (e.g. h = H)
      x = solve_constrained(local, c, rhs, RedundantRows::drop);
    }
  catch (const SolverError &err)
    {
      throw CorrectorError(patch.center,
                           static_cast<int>(patch.fine_dofs.size()),
                           err);
    }
  for (std::size_t i = 0; i < patch.fine_dofs.size(); ++i)
    psi[patch.fine_dofs[i]] = x[static_cast<Eigen::Index>(i)];
  return psi;
}

} // namespace

Vector
compute_corrector(const MeshHierarchy   &hierarchy,
                  const SparseSym       &a_matrix,
                  const ClementOperator &clement,
                  int                    z,
                  int                    k)
{
  return corrector_on_patch(hierarchy, a_matrix, clement,
                            node_patch(hierarchy, z, k));
}

Vector
compute_global_corrector(const MeshHierarchy   &hierarchy,
                         const SparseSym       &a_matrix,
                         const ClementOperator &clement,
                         int                    z)
{
  return compute_corrector(hierarchy, a_matrix, clement, z,
                           saturating_k(hierarchy.coarse));
}

CoarseSpaceBasis
build_coarse_basis(const MeshHierarchy &hierarchy,
                   const ProblemSpec   &spec,
                   int                  k,
                   const BasisOptions  &options)
{
  ProblemSpec corrector_spec = spec;
  if (options.corrector_drop_potential)
    corrector_spec.potential = potential::Zero{};
  const SparseSym a    = assemble_bilinear(hierarchy.fine, corrector_spec);
  const SparseSym mass = assemble_mass(hierarchy.fine);
  return build_coarse_basis(hierarchy, a, build_clement(hierarchy, mass), k,
                            options.threads);
}

CoarseSpaceBasis
build_coarse_basis(const MeshHierarchy   &hierarchy,
                   const SparseSym       &a_matrix,
                   const ClementOperator &clement,
                   int                    k,
                   int                    threads)
{
  if (k < 1)
    throw std::invalid_argument("localization parameter must be >= 1");
  const Mesh &coarse = hierarchy.coarse;
  const int   n      = coarse.num_dofs();

  std::vector<Vector> columns(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int z) {
    columns[z] = compute_corrector(hierarchy, a_matrix, clement,
                                   coarse.interior_nodes()[z], k);
  });

  std::vector<Eigen::Triplet<double>> psi_entries;
  for (int z = 0; z < n; ++z)
    for (Eigen::Index i = 0; i < columns[z].size(); ++i)
      if (columns[z][i] != 0.0)
        psi_entries.emplace_back(static_cast<int>(i), z, columns[z][i]);

  CoarseSpaceBasis basis;
  basis.k = k;
  basis.correctors.resize(hierarchy.fine.num_dofs(), n);
  basis.correctors.setFromTriplets(psi_entries.begin(), psi_entries.end());
  basis.basis = hierarchy.prolongation - basis.correctors;
  basis.basis.prune(0.0);
  basis.basis.makeCompressed();
  return basis;
}

DenseSym
coarse_operator(const Eigen::SparseMatrix<double> &basis, const SparseSym &s)
{
  if (basis.rows() != s.size())
    throw std::invalid_argument("coarse_operator: dimension mismatch");
  const Eigen::MatrixXd sb = s.matrix() * basis;
  return DenseSym(basis.transpose() * sb);
}

DecayProfile
decay_profile(const MeshHierarchy &hierarchy,
              const ProblemSpec   &spec,
              int                  z,
              int                  k_max)
{
  if (k_max < 2)
    throw std::invalid_argument("decay_profile: k_max must be >= 2");
  const SparseSym       a       = assemble_bilinear(hierarchy.fine, spec);
  const ClementOperator clement = build_clement(hierarchy);
  const Vector global = compute_global_corrector(hierarchy, a, clement, z);
  const Vector element_energy =
    element_energies(hierarchy.fine, spec, global);

  DecayProfile profile;
  profile.node        = z;
  profile.global_norm = std::sqrt(std::max(0.0, a.form(global, global)));

  for (int k = 1; k <= k_max; ++k)
    {
      const Patch       patch = node_patch(hierarchy, z, k);
      std::vector<char> in_patch(hierarchy.coarse.num_simplices(), 0);
      for (int e : patch.elements)
        in_patch[e] = 1;
      double outside = 0.0;
      for (int e = 0; e < hierarchy.fine.num_simplices(); ++e)
        if (!in_patch[hierarchy.parent_of[e]])
          outside += element_energy[e];

      const Vector local = corrector_on_patch(hierarchy, a, clement, patch);
      const Vector diff  = global - local;
      profile.k.push_back(k);
      profile.tail.push_back(std::sqrt(std::max(0.0, outside)));
      profile.localization_error.push_back(
        std::sqrt(std::max(0.0, a.form(diff, diff))));
    }

  // geometric mean over the tails above the numerical floor
  const double floor = 1e-12 * std::max(profile.global_norm, 1e-300);
  int          first = -1, last = -1;
  for (std::size_t i = 0; i < profile.tail.size(); ++i)
    if (profile.tail[i] > floor)
      {
        if (first < 0)
          first = static_cast<int>(i);
        last = static_cast<int>(i);
      }
  profile.theta =
    (first >= 0 && last > first)
      ? std::pow(profile.tail[last] / profile.tail[first],
                 1.0 / static_cast<double>(last - first))
      : 0.0;
  return profile;
}

int
center_node(const Mesh &coarse)
{
  const double c    = 0.5 * std::numbers::pi;
  int          best = -1;
  double       dist = std::numeric_limits<double>::infinity();
  for (int v : coarse.interior_nodes())
    {
      const auto  &x = coarse.vertices()[v];
      const double d = std::hypot(x[0] - c, coarse.dim() == 2 ? x[1] - c : 0.0);
      if (d < dist - 1e-12)
        {
          dist = d;
          best = v;
        }
    }
  return best;
}

} // namespace lodgpe
