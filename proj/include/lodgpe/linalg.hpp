#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace lodgpe
{

using Vector = Eigen::VectorXd;

/// Raised by the solvers when they cannot deliver their residual contract.
class SolverError : public std::runtime_error
{
public:
  SolverError(const std::string &what, double residual)
    : std::runtime_error(what)
    , residual_(residual)
  {}

  /// Last relative residual (or Rayleigh quotient for eigensolvers).
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Symmetric sparse matrix with the full pattern stored.
class SparseSym
{
public:
  using Storage = Eigen::SparseMatrix<double>;

  SparseSym() = default;
  /// Takes ownership; the input is compressed and explicit zeros pruned.
  explicit SparseSym(Storage m);

  Eigen::Index size() const { return m_.rows(); }
  const Storage &matrix() const { return m_; }

  Vector operator*(const Vector &x) const { return m_ * x; }
  double form(const Vector &x, const Vector &y) const { return x.dot(m_ * y); }

  /// Principal submatrix on the given (ascending) indices.
  SparseSym restricted(const std::vector<int> &indices) const;

private:
  Storage m_;
};

SparseSym operator+(const SparseSym &a, const SparseSym &b);
SparseSym operator*(double alpha, const SparseSym &a);

/// Small dense symmetric matrix; symmetrized on construction.
class DenseSym
{
public:
  DenseSym() = default;
  explicit DenseSym(Eigen::MatrixXd m);

  Eigen::Index size() const { return m_.rows(); }
  const Eigen::MatrixXd &matrix() const { return m_; }

  Vector operator*(const Vector &x) const { return m_ * x; }

private:
  Eigen::MatrixXd m_;
};

DenseSym operator+(const DenseSym &a, const DenseSym &b);
DenseSym operator*(double alpha, const DenseSym &a);

inline constexpr double default_spd_tol = 1e-12;

/// Diagonally preconditioned conjugate gradients from a zero initial guess.
/// Guarantees ||A x - rhs|| <= tol ||rhs|| or throws SolverError after
/// 50 n iterations.
Vector solve_spd(const SparseSym &a, const Vector &rhs,
                 double tol = default_spd_tol);

/// How solve_constrained treats linearly dependent constraint rows.
enum class RedundantRows
{
  reject, ///< throw SolverError
  drop    ///< solve on the range of the constraints
};

/**
 * Minimizes ½ x^T K x - f^T x subject to C x = 0, i.e. returns the
 * K-orthogonal projection of K^{-1} f onto kernel(C), through the Schur
 * complement C K^{-1} C^T on the multipliers. K is factored once by a sparse
 * Cholesky decomposition.
 *
 * The result satisfies ||C x||_inf <= 1e-10 ||x||_2; a violation throws.
 */
Vector solve_constrained(const SparseSym &k,
                         const Eigen::SparseMatrix<double> &c,
                         const Vector &f,
                         RedundantRows redundant = RedundantRows::reject);

struct Eigenpair
{
  double value = 0.0;
  Vector vector;
  int    iterations = 0;
};

inline constexpr double default_eigen_tol = 1e-11;

/**
 * Smallest eigenpair of K v = lambda M v for symmetric K and SPD M.
 *
 * The returned vector is M-normalized with its largest-magnitude entry
 * positive and satisfies ||K v - lambda M v|| <= tol ||K v||.
 * The sparse overload requires K positive definite (it iterates on K^{-1} M);
 * `guess` seeds the iteration.
 */
Eigenpair smallest_eigenpair(const SparseSym &k, const SparseSym &m,
                             double tol = default_eigen_tol,
                             const std::optional<Vector> &guess = {});
Eigenpair smallest_eigenpair(const DenseSym &k, const DenseSym &m,
                             double tol = default_eigen_tol);

} // namespace lodgpe
