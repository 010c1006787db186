#include <lodgpe/assembly.hpp>
#include <lodgpe/linalg.hpp>

#include <doctest.h>

#include "support.hpp"

#include <cstring>

using namespace lodgpe;
using testing::pi;

namespace
{

SparseSym
sparse(const Eigen::MatrixXd &dense)
{
  return SparseSym(dense.sparseView());
}

/// Direct tridiagonal solve (Thomas algorithm) for a symmetric tridiagonal
/// matrix given by its diagonal and off-diagonal.
Vector
thomas(std::vector<double> diag, const std::vector<double> &off, Vector rhs)
{
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i)
    {
      const double w = off[i - 1] / diag[i - 1];
      diag[i] -= w * off[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
  Vector x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

Eigen::MatrixXd
random_spd(int n)
{
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    {
      for (int j = 0; j < i; ++j)
        l(i, j) = testing::uniform();
      l(i, i) = 1.0 + testing::uniform(0.0, 1.0);
    }
  return l * l.transpose();
}

/// Basis of kernel(c) as columns.
Eigen::MatrixXd
kernel_basis(const Eigen::MatrixXd &c)
{
  Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  return lu.kernel();
}

bool
bit_equal(const Vector &a, const Vector &b)
{
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

} // namespace

TEST_CASE("sparse symmetric storage")
{
  Eigen::MatrixXd d(3, 3);
  d << 2, 0, 1, 0, 3, 0, 1, 0, 4;
  const SparseSym s = sparse(d);
  CHECK(s.matrix().nonZeros() == 5);
  CHECK(Eigen::MatrixXd(s.matrix()) == d);
  const Eigen::MatrixXd t = Eigen::MatrixXd(s.matrix()).transpose();
  CHECK(t == d);

  Eigen::MatrixXd skew(2, 2);
  skew << 1, 2, 2.0 + 1e-13, 1;
  const DenseSym sym(skew);
  CHECK(sym.matrix()(0, 1) == sym.matrix()(1, 0));
}

TEST_CASE("spd solves")
{
  SUBCASE("identity")
  {
    const SparseSym id = sparse(Eigen::MatrixXd::Identity(5, 5));
    Vector          rhs(5);
    rhs << 1, 2, 3, 4, 5;
    CHECK((solve_spd(id, rhs) - rhs).norm() <= 1e-14);
  }
  SUBCASE("diagonal")
  {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 4;
    const Vector x = solve_spd(sparse(d), Vector{{2.0, 8.0}});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("zero right-hand side")
  {
    const Vector x = solve_spd(sparse(random_spd(4)), Vector::Zero(4));
    CHECK(x.norm() == 0.0);
  }
  SUBCASE("1D Poisson against the Thomas algorithm")
  {
    const Mesh      mesh = build_uniform_mesh(1, 3);
    const SparseSym k    = assemble_laplace(mesh);
    const SparseSym m    = assemble_mass(mesh);
    const Vector    rhs  = m * Vector::Ones(mesh.num_dofs());
    const int       n    = mesh.num_dofs();
    const double    h    = mesh.width();
    std::vector<double> diag(n, 2.0 / h), off(n - 1, -1.0 / h);
    const Vector        direct = thomas(diag, off, rhs);
    CHECK((solve_spd(k, rhs) - direct).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("random systems meet the residual contract")
  {
    for (int sample = 0; sample < 20; ++sample)
      {
        const int       n   = 2 + sample * 48 / 19;
        const SparseSym a   = sparse(random_spd(n));
        const Vector    rhs = testing::random_vector(n);
        for (double tol : {1e-8, 1e-12})
          {
            const Vector x = solve_spd(a, rhs, tol);
            CHECK((a * x - rhs).norm() <= tol * rhs.norm());
          }
      }
  }
  SUBCASE("breakdown is reported")
  {
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    CHECK_THROWS_AS(solve_spd(sparse(d), Vector{{1.0, 0.0}}), SolverError);
  }
  SUBCASE("bad tolerance and shape")
  {
    const SparseSym id = sparse(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(solve_spd(id, Vector::Ones(2), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_spd(id, Vector::Ones(3)), std::invalid_argument);
  }
}

TEST_CASE("constrained solves")
{
  SUBCASE("no constraints")
  {
    const SparseSym                   id = sparse(Eigen::MatrixXd::Identity(3, 3));
    const Eigen::SparseMatrix<double> c(0, 3);
    const Vector                      f = testing::random_vector(3);
    CHECK((solve_constrained(id, c, f) - f).norm() <= 1e-14);
  }
  SUBCASE("hand-solved KKT system")
  {
    const SparseSym id = sparse(Eigen::MatrixXd::Identity(2, 2));
    Eigen::MatrixXd c(1, 2);
    c << 1, 1;
    const Vector x = solve_constrained(id, c.sparseView(), Vector{{1.0, 0.0}});
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-0.5).epsilon(1e-14));
  }
  SUBCASE("projection removes the constrained coordinate")
  {
    const SparseSym id = sparse(Eigen::MatrixXd::Identity(3, 3));
    Eigen::MatrixXd c(1, 3);
    c << 1, 0, 0;
    const Vector x = solve_constrained(id, c.sparseView(), Vector::Ones(3));
    CHECK(std::abs(x[0]) <= 1e-15);
    CHECK(x[1] == doctest::Approx(1.0));
    CHECK(x[2] == doctest::Approx(1.0));
  }
  SUBCASE("dependent rows")
  {
    const SparseSym id = sparse(Eigen::MatrixXd::Identity(3, 3));
    Eigen::MatrixXd c(2, 3);
    c << 1, 1, 0, 2, 2, 0;
    CHECK_THROWS_AS(solve_constrained(id, c.sparseView(), Vector::Ones(3)),
                    SolverError);
    const Vector x = solve_constrained(id, c.sparseView(), Vector{{1.0, 0.0, 1.0}},
                                       RedundantRows::drop);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(-0.5));
    CHECK(x[2] == doctest::Approx(1.0));
  }
  SUBCASE("kernel membership and Galerkin orthogonality on random data")
  {
    for (int sample = 0; sample < 10; ++sample)
      {
        const int       n = 12 + sample;
        const int       r = 1 + sample % 5;
        const SparseSym k = sparse(random_spd(n));
        Eigen::MatrixXd c(r, n);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < n; ++j)
            c(i, j) = testing::uniform();
        const Vector f = testing::random_vector(n);
        const Vector x = solve_constrained(k, c.sparseView(), f);
        CHECK((c * x).cwiseAbs().maxCoeff() <= 1e-10 * x.norm());
        const Eigen::MatrixXd kernel = kernel_basis(c);
        for (int t = 0; t < 10; ++t)
          {
            const Vector w  = kernel * testing::random_vector(kernel.cols());
            const double lhs = x.dot(k * w);
            const double rhs = f.dot(w);
            CHECK(std::abs(lhs - rhs) <=
                  1e-10 * std::max(1.0, std::abs(rhs)) * w.norm());
          }
      }
  }
}

TEST_CASE("smallest eigenpairs")
{
  SUBCASE("diagonal pair")
  {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 2);
    k(0, 0) = 2;
    k(1, 1) = 5;
    const Eigenpair p =
      smallest_eigenpair(sparse(k), sparse(Eigen::MatrixXd::Identity(2, 2)));
    CHECK(p.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(p.vector[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(p.vector[1]) <= 1e-14);
  }
  SUBCASE("1D closed form on dense and sparse paths")
  {
    for (int level : {2, 4, 6, 8, 10})
      {
        const Mesh      mesh = build_uniform_mesh(1, level);
        const double    h    = mesh.width();
        const double    expected =
          6.0 / (h * h) * (1.0 - std::cos(h)) / (2.0 + std::cos(h));
        // the residual floor grows like h^-2 in double precision
        const double    tol = level < 10 ? default_eigen_tol : 1e-9;
        const Eigenpair p =
          smallest_eigenpair(assemble_laplace(mesh), assemble_mass(mesh), tol);
        CHECK(std::abs(p.value - expected) <= 1e-10);
      }
  }
  SUBCASE("2D Laplacian tends to 2 at second order")
  {
    std::vector<double> errors;
    for (int level = 2; level <= 5; ++level)
      {
        const Mesh mesh = build_uniform_mesh(2, level);
        errors.push_back(
          smallest_eigenpair(assemble_laplace(mesh), assemble_mass(mesh)).value -
          2.0);
      }
    for (std::size_t i = 1; i < errors.size(); ++i)
      {
        CHECK(errors[i] > 0.0);
        CHECK(errors[i - 1] / errors[i] == doctest::Approx(4.0).epsilon(0.1));
      }
  }
  SUBCASE("contract: residual, normalization, sign, minimality")
  {
    const Mesh      mesh = build_uniform_mesh(2, 5); // sparse path
    ProblemSpec     spec;
    spec.potential     = potential::PeriodicWells{};
    const SparseSym k  = assemble_bilinear(mesh, spec);
    const SparseSym m  = assemble_mass(mesh);
    const Eigenpair p  = smallest_eigenpair(k, m, 1e-11);
    const Vector    kv = k * p.vector;
    CHECK((kv - p.value * (m * p.vector)).norm() <= 1e-11 * kv.norm());
    CHECK(m.form(p.vector, p.vector) == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::Index i;
    p.vector.cwiseAbs().maxCoeff(&i);
    CHECK(p.vector[i] > 0.0);
    for (int sample = 0; sample < 20; ++sample)
      {
        Vector v = testing::random_vector(k.size());
        v /= std::sqrt(m.form(v, v));
        CHECK(p.value <= k.form(v, v));
      }
    // the dense path agrees
    const Eigenpair d =
      smallest_eigenpair(DenseSym(Eigen::MatrixXd(k.matrix())),
                         DenseSym(Eigen::MatrixXd(m.matrix())));
    CHECK(testing::relative(d.value, p.value) <= 1e-11);
  }
  SUBCASE("deterministic")
  {
    const Mesh      mesh = build_uniform_mesh(2, 5);
    const SparseSym k    = assemble_laplace(mesh);
    const SparseSym m    = assemble_mass(mesh);
    const Eigenpair a    = smallest_eigenpair(k, m);
    const Eigenpair b    = smallest_eigenpair(k, m);
    CHECK(a.value == b.value);
    CHECK(bit_equal(a.vector, b.vector));
  }
  SUBCASE("indefinite mass is detected")
  {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    m(2, 2)           = -1.0;
    CHECK_THROWS_AS(smallest_eigenpair(sparse(Eigen::MatrixXd::Identity(3, 3)),
                                       sparse(m)),
                    SolverError);
    Eigen::MatrixXd big = Eigen::MatrixXd::Identity(600, 600);
    big(599, 599)       = -1.0;
    CHECK_THROWS_AS(
      smallest_eigenpair(sparse(Eigen::MatrixXd::Identity(600, 600)),
                         sparse(big)),
      SolverError);
  }
}
