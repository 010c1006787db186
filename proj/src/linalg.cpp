#include <lodgpe/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace lodgpe
{

namespace
{

using Storage = SparseSym::Storage;

constexpr int    eigen_max_iterations  = 500;
constexpr int    dense_eigen_threshold = 512;
constexpr int    subspace_block        = 24;
constexpr double rank_tol              = 1e-13;

void
fix_sign(Vector &v)
{
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v[i] < 0.0)
    v = -v;
}

/// Columns of y made M-orthonormal; near-dependent directions are discarded.
Eigen::MatrixXd
m_orthonormalize(const Eigen::MatrixXd &y, const Storage &m)
{
  Eigen::MatrixXd basis = y;
  for (int pass = 0; pass < 2; ++pass)
    {
      const Eigen::MatrixXd gram = basis.transpose() * (m * basis);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (gram + gram.transpose()));
      const auto  &d      = es.eigenvalues();
      const double cutoff = 1e-14 * d.maxCoeff();
      int          keep   = 0;
      for (Eigen::Index i = 0; i < d.size(); ++i)
        keep += d[i] > cutoff ? 1 : 0;
      Eigen::MatrixXd transform(basis.cols(), keep);
      int             col = 0;
      // descending, so the dominant directions lead
      for (Eigen::Index i = d.size() - 1; i >= 0; --i)
        if (d[i] > cutoff)
          transform.col(col++) = es.eigenvectors().col(i) / std::sqrt(d[i]);
      basis = basis * transform;
    }
  return basis;
}

} // namespace

SparseSym::SparseSym(Storage m)
  : m_(std::move(m))
{
  m_.prune(0.0);
  m_.makeCompressed();
}

SparseSym
SparseSym::restricted(const std::vector<int> &indices) const
{
  std::vector<int> local(static_cast<std::size_t>(size()), -1);
  for (std::size_t i = 0; i < indices.size(); ++i)
    local[indices[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> entries;
  for (int col : indices)
    for (Storage::InnerIterator it(m_, col); it; ++it)
      if (local[it.row()] >= 0)
        entries.emplace_back(local[it.row()], local[col], it.value());
  Storage sub(static_cast<Eigen::Index>(indices.size()),
              static_cast<Eigen::Index>(indices.size()));
  sub.setFromTriplets(entries.begin(), entries.end());
  return SparseSym(std::move(sub));
}

SparseSym
operator+(const SparseSym &a, const SparseSym &b)
{
  return SparseSym(a.matrix() + b.matrix());
}

SparseSym
operator*(double alpha, const SparseSym &a)
{
  return SparseSym(alpha * a.matrix());
}

DenseSym::DenseSym(Eigen::MatrixXd m)
  : m_(0.5 * (m + m.transpose()))
{}

DenseSym
operator+(const DenseSym &a, const DenseSym &b)
{
  return DenseSym(a.matrix() + b.matrix());
}

DenseSym
operator*(double alpha, const DenseSym &a)
{
  return DenseSym(alpha * a.matrix());
}

Vector
solve_spd(const SparseSym &a, const Vector &rhs, double tol)
{
  if (a.size() != rhs.size())
    throw std::invalid_argument("solve_spd: dimension mismatch");
  if (!(tol > 0.0 && tol < 1.0))
    throw std::invalid_argument("solve_spd: tolerance must lie in (0,1)");
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0)
    return Vector::Zero(rhs.size());

  Eigen::ConjugateGradient<Storage,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
    cg;
  const Eigen::Index cap = 50 * a.size();
  cg.setMaxIterations(cap);
  cg.setTolerance(tol);
  cg.compute(a.matrix());

  // the recursive CG residual can drift from the true one; restart from the
  // current iterate until the true residual meets the contract
  Vector       x        = Vector::Zero(rhs.size());
  double       residual = 1.0;
  Eigen::Index used     = 0;
  while (used < cap)
    {
      cg.setMaxIterations(cap - used);
      x = cg.solveWithGuess(rhs, x);
      used += std::max<Eigen::Index>(cg.iterations(), 1);
      residual = (rhs - a * x).norm() / rhs_norm;
      if (residual <= tol)
        return x;
      if (cg.info() == Eigen::NoConvergence)
        break;
    }
  throw SolverError("conjugate gradients did not converge: relative residual " +
                      std::to_string(residual),
                    residual);
}

Vector
solve_constrained(const SparseSym &k, const Eigen::SparseMatrix<double> &c,
                  const Vector &f, RedundantRows redundant)
{
  if (k.size() != f.size() || (c.rows() > 0 && c.cols() != k.size()))
    throw std::invalid_argument("solve_constrained: dimension mismatch");

  Eigen::SimplicialLLT<Storage> llt(k.matrix());
  if (llt.info() != Eigen::Success)
    throw SolverError("constrained solve: operator is not positive definite",
                      0.0);
  const Vector x0 = llt.solve(f);
  if (c.rows() == 0)
    return x0;

  const Eigen::MatrixXd ct = Eigen::MatrixXd(c.transpose());
  const Eigen::MatrixXd y  = llt.solve(ct);
  Eigen::MatrixXd       s  = c * y;
  s                        = 0.5 * (s + s.transpose());

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  const Vector                 d      = ldlt.vectorD();
  const double                 dmax   = d.cwiseAbs().maxCoeff();
  const double                 cutoff = rank_tol * dmax;
  const bool deficient = dmax == 0.0 || (d.array() <= cutoff).any();
  if (deficient && redundant == RedundantRows::reject)
    throw SolverError("constrained solve: constraint matrix is rank deficient",
                      d.minCoeff() / std::max(dmax, 1e-300));

  auto multiplier = [&](const Vector &g) -> Vector {
    if (!deficient)
      return ldlt.solve(g);
    // pseudo-inverse on the numerically nonzero pivots; any solution of the
    // consistent system S mu = g yields the same primal vector
    Vector z = ldlt.transpositionsP() * g;
    ldlt.matrixL().solveInPlace(z);
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z[i] = d[i] > cutoff ? z[i] / d[i] : 0.0;
    ldlt.matrixU().solveInPlace(z);
    return ldlt.transpositionsP().transpose() * z;
  };

  Vector x = x0 - y * multiplier(c * x0);
  x -= y * multiplier(c * x);

  const double violation = (c * x).cwiseAbs().maxCoeff();
  const double scale     = std::max(x.norm(), 1e-6 * x0.norm());
  if (violation > 1e-10 * scale)
    throw SolverError("constrained solve: constraint violation " +
                        std::to_string(violation),
                      violation / std::max(scale, 1e-300));
  return x;
}

Eigenpair
smallest_eigenpair(const DenseSym &k, const DenseSym &m, double tol)
{
  if (k.size() != m.size() || k.size() == 0)
    throw std::invalid_argument("smallest_eigenpair: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> chol(m.matrix());
  if (chol.info() != Eigen::Success)
    throw SolverError("eigenpair: mass matrix is not positive definite", 0.0);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
    k.matrix(), m.matrix(), Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw SolverError("eigenpair: dense generalized solver failed", 0.0);

  Eigenpair pair;
  pair.value      = es.eigenvalues()[0];
  pair.vector     = es.eigenvectors().col(0);
  pair.iterations = 1;
  pair.vector /= std::sqrt(pair.vector.dot(m * pair.vector));
  fix_sign(pair.vector);

  auto residual_of = [&](const Eigenpair &p) {
    const Vector kv = k * p.vector;
    return (kv - p.value * (m * p.vector)).norm() / std::max(kv.norm(), 1e-300);
  };
  double residual = residual_of(pair);
  // The reduction to standard form loses accuracy on ill-conditioned pairs;
  // a few inverse iteration steps recover the residual when K is definite.
  if (residual > tol)
    {
      Eigen::LDLT<Eigen::MatrixXd> kfac(k.matrix());
      for (int step = 0; step < 4 && residual > tol && kfac.isPositive() &&
                         kfac.info() == Eigen::Success;
           ++step)
        {
          Eigenpair next;
          next.vector = kfac.solve(m * pair.vector);
          next.vector /= std::sqrt(next.vector.dot(m * next.vector));
          fix_sign(next.vector);
          next.value      = next.vector.dot(k * next.vector);
          next.iterations = pair.iterations + 1;
          pair            = next;
          residual        = residual_of(pair);
        }
    }
  if (residual > tol)
    throw SolverError("eigenpair: dense residual " + std::to_string(residual) +
                        " above tolerance",
                      pair.value);
  return pair;
}

Eigenpair
smallest_eigenpair(const SparseSym &k, const SparseSym &m, double tol,
                   const std::optional<Vector> &guess)
{
  const Eigen::Index n = k.size();
  if (m.size() != n || n == 0)
    throw std::invalid_argument("smallest_eigenpair: dimension mismatch");
  if (n <= dense_eigen_threshold)
    return smallest_eigenpair(DenseSym(Eigen::MatrixXd(k.matrix())),
                              DenseSym(Eigen::MatrixXd(m.matrix())),
                              tol);

  Eigen::SimplicialLLT<Storage> mass_check(m.matrix());
  if (mass_check.info() != Eigen::Success)
    throw SolverError("eigenpair: mass matrix is not positive definite", 0.0);
  Eigen::SimplicialLLT<Storage> inverse(k.matrix());
  if (inverse.info() != Eigen::Success)
    throw SolverError("eigenpair: operator is not positive definite", 0.0);

  // block inverse iteration with Rayleigh-Ritz; the block width separates
  // the wanted eigenvalue from clusters below the block
  const Eigen::Index width = std::min<Eigen::Index>(n, subspace_block);
  Eigen::MatrixXd    x(n, width);
  x.col(0) = guess && guess->size() == n ? *guess : Vector::Ones(n);
  std::mt19937_64 rng(0x5eed);
  for (Eigen::Index j = 1; j < width; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      x(i, j) = std::ldexp(static_cast<double>(rng() >> 11), -53) - 0.5;

  double rayleigh = 0.0;
  for (int it = 1; it <= eigen_max_iterations; ++it)
    {
      const Eigen::MatrixXd y     = inverse.solve(m.matrix() * x);
      const Eigen::MatrixXd basis = m_orthonormalize(y, m.matrix());
      const Eigen::MatrixXd reduced =
        basis.transpose() * (k.matrix() * basis);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (reduced + reduced.transpose()));
      x = basis * es.eigenvectors();

      rayleigh        = es.eigenvalues()[0];
      Vector       v  = x.col(0);
      const Vector kv = k * v;
      const double residual =
        (kv - rayleigh * (m * v)).norm() / std::max(kv.norm(), 1e-300);
      if (residual <= tol)
        {
          v /= std::sqrt(v.dot(m * v));
          fix_sign(v);
          return {rayleigh, std::move(v), it};
        }
    }
  throw SolverError("eigenpair: inverse iteration did not converge, last "
                    "Rayleigh quotient " +
                      std::to_string(rayleigh),
                    rayleigh);
}

} // namespace lodgpe
