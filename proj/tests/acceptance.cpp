// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <lodgpe/study.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "support.hpp"

using namespace lodgpe;
using testing::pi;

namespace
{

using Clock = std::chrono::steady_clock;

struct Verdict
{
  bool        pass = true;
  std::string detail;

  void require(bool condition, const std::string &what)
  {
    if (!condition)
      {
        pass = false;
        detail += " [failed: " + what + "]";
      }
  }
  void note(const char *format, double value)
  {
    char buffer[128];
    std::snprintf(buffer, sizeof buffer, format, value);
    detail += buffer;
  }
};

double
elapsed(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ProblemSpec
harmonic(double beta)
{
  ProblemSpec spec;
  spec.potential = potential::Harmonic{};
  spec.beta      = beta;
  return spec;
}

ProblemSpec
wells()
{
  ProblemSpec spec;
  spec.potential = potential::PeriodicWells{100.0, 4};
  spec.beta      = 4.0;
  return spec;
}

double
energy_norm(const SparseSym &a, const Vector &v)
{
  return std::sqrt(std::max(0.0, a.form(v, v)));
}

/// Global corrector of coarse vertex z from the dense saddle system
/// [K C^T; C 0] [psi; mu] = [K P e_z; 0].
Vector
kkt_corrector(const MeshHierarchy &h, const SparseSym &a,
              const ClementOperator &op, int vertex)
{
  const int       n = static_cast<int>(a.size());
  const int       c = static_cast<int>(op.pairing.rows());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + c, n + c);
  kkt.topLeftCorner(n, n)     = Eigen::MatrixXd(a.matrix());
  kkt.topRightCorner(n, c)    = Eigen::MatrixXd(op.pairing.transpose());
  kkt.bottomLeftCorner(c, n)  = Eigen::MatrixXd(op.pairing);
  Vector e                    = Vector::Zero(h.coarse.num_dofs());
  e[h.coarse.dof_of(vertex)]  = 1.0;
  Vector rhs                  = Vector::Zero(n + c);
  rhs.head(n)                 = a * Vector(h.prolongation * e);
  return kkt.fullPivLu().solve(rhs).head(n);
}

Verdict
linear_sanity()
{
  Verdict    v;
  const auto start = Clock::now();
  for (int dim : {1, 2})
    {
      const double        exact = dim;
      std::vector<double> hs, errors;
      for (int level = 3; level <= 6; ++level)
        {
          const FineProblem p(build_uniform_mesh(dim, level), ProblemSpec{});
          const GroundState s = oda_minimize(DiscreteSpace::fine(p));
          hs.push_back(p.mesh().width());
          errors.push_back(s.lambda - exact);
        }
      const double order = loglog_slope(hs, errors);
      v.note(dim == 1 ? "order 1D %.3f" : ", order 2D %.3f", order);
      v.require(std::abs(order - 2.0) <= 0.2, "order 2 +- 0.2");
    }
  const double seconds = elapsed(start);
  v.note(", %.1f s", seconds);
  v.require(seconds < 30.0, "runtime < 30 s");
  return v;
}

Verdict
orthogonality()
{
  Verdict                v;
  const MeshHierarchy    h    = build_hierarchy(2, 2, 4);
  const FineProblem      p(h.fine, harmonic(1.0));
  const ClementOperator  op   = build_clement(h, p.mass());
  const CoarseSpaceBasis basis =
    build_coarse_basis(h, p.a_matrix(), op, saturating_k(h.coarse));
  double worst_l2 = 0.0, worst_a = 0.0;
  for (int sample = 0; sample < 20; ++sample)
    {
      const Vector vf = solve_constrained(
        p.mass(), op.pairing, p.mass() * testing::random_vector(p.mass().size()));
      const Vector vh =
        prolongate(h, testing::random_vector(h.coarse.num_dofs()));
      const Vector vc = basis.lift(testing::random_vector(basis.dimension()));
      worst_l2 = std::max(worst_l2, std::abs(p.mass().form(vh, vf)) /
                                      (p.l2_norm(vh) * p.l2_norm(vf)));
      worst_a  = std::max(worst_a, std::abs(p.a_matrix().form(vc, vf)) /
                                    (energy_norm(p.a_matrix(), vc) *
                                     energy_norm(p.a_matrix(), vf)));
    }
  v.note("L2 %.2e", worst_l2);
  v.note(", a %.2e", worst_a);
  v.require(worst_l2 <= 1e-9, "L2 orthogonality");
  v.require(worst_a <= 1e-9, "a-orthogonality");
  return v;
}

/// sup over v^c = B x and v^f in the Clement kernel of
/// |(v^c, v^f)| / (||grad v^c|| ||grad v^f||).
double
quasi_orthogonality_constant(int coarse_level, int fine_level)
{
  const MeshHierarchy    h = build_hierarchy(2, coarse_level, fine_level);
  const FineProblem      p(h.fine, harmonic(0.0));
  const ClementOperator  op    = build_clement(h, p.mass());
  const CoarseSpaceBasis basis = build_coarse_basis(
    h, assemble_bilinear(h.fine, harmonic(1.0)), op, 2 * coarse_level);
  const int       n = basis.dimension();
  Eigen::MatrixXd g(p.mass().size(), n), w(p.mass().size(), n);
  for (int z = 0; z < n; ++z)
    {
      g.col(z) = p.mass() * Vector(basis.basis.col(z));
      // the best fine partner of M b_z in the gradient norm
      w.col(z) = solve_constrained(p.laplace(), op.pairing, g.col(z));
    }
  const Eigen::MatrixXd pairing = g.transpose() * w;
  const Eigen::MatrixXd gradient =
    Eigen::MatrixXd(basis.basis.transpose() *
                    (p.laplace().matrix() * basis.basis));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
    0.5 * (pairing + pairing.transpose()),
    0.5 * (gradient + gradient.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Verdict
quasi_orthogonality()
{
  Verdict             v;
  const auto          start = Clock::now();
  std::vector<double> constants;
  for (int m = 1; m <= 3; ++m)
    constants.push_back(quasi_orthogonality_constant(m, 5));
  v.note("constants %.3e", constants[0]);
  v.note(" %.3e", constants[1]);
  v.note(" %.3e", constants[2]);
  for (std::size_t i = 1; i < constants.size(); ++i)
    {
      v.note(i == 1 ? ", shrink %.2f" : " %.2f", constants[i - 1] / constants[i]);
      v.require(constants[i - 1] >= 3.0 * constants[i], "shrink >= 3x");
    }
  const double seconds = elapsed(start);
  v.note(", %.1f s", seconds);
  v.require(seconds < 120.0, "runtime < 2 min");
  return v;
}

Verdict
decay()
{
  Verdict             v;
  const MeshHierarchy h = build_hierarchy(2, 3, 5);
  const DecayProfile  p =
    decay_profile(h, harmonic(1.0), center_node(h.coarse),
                  saturating_k(h.coarse));
  bool monotone = true;
  for (std::size_t i = 1; i < p.tail.size(); ++i)
    monotone = monotone && p.tail[i] <= p.tail[i - 1];
  const double ratio = p.localization_error[3] / p.localization_error[0];
  v.note("theta %.3f", p.theta);
  v.note(", error(k=4)/error(k=1) %.2e", ratio);
  v.require(monotone, "monotone tails");
  v.require(p.theta < 0.9, "theta < 0.9");
  v.require(ratio <= 0.1, "localization error ratio <= 0.1");
  return v;
}

StudyConfig
study_config(const char *text)
{
  return parse_config(text);
}

Verdict
harmonic_study()
{
  Verdict           v;
  const auto        start  = Clock::now();
  const StudyConfig config = study_config("domain_dim = 2\nfine_level = 6\n"
                                          "coarse_levels = 1, 2, 3, 4\n"
                                          "k_rule = 2m\n"
                                          "potential.type = harmonic\n"
                                          "beta = 1\n");
  const StudyTable  t      = run_convergence_study(config).front();
  const double      seconds = elapsed(start);
  v.note("pre lambda %.2f", t.pre.lambda);
  v.note(", L2 %.2f", t.pre.l2);
  v.note(", H1 %.2f", t.pre.h1);
  v.note(", post lambda %.2f", t.post.lambda);
  v.note(", %.1f s", seconds);
  v.require(t.pre.lambda >= 2.7, "pre lambda slope >= 2.7");
  v.require(t.pre.l2 >= 2.5, "L2 slope >= 2.5");
  v.require(t.pre.h1 >= 1.7, "H1 slope >= 1.7");
  v.require(t.post.lambda >= 3.5, "post lambda slope >= 3.5");
  v.require(seconds < 15 * 60.0, "runtime < 15 min");
  return v;
}

Verdict
wells_study()
{
  Verdict           v;
  const auto        start  = Clock::now();
  const StudyConfig config = study_config("domain_dim = 2\nfine_level = 6\n"
                                          "coarse_levels = 1, 2, 3, 4\n"
                                          "k_rule = m\n"
                                          "potential.type = periodic_wells\n"
                                          "potential.bt = 100\n"
                                          "potential.L = 4\n"
                                          "beta = 4\n");
  const StudyTable  t      = run_convergence_study(config).front();
  const double      seconds = elapsed(start);
  bool              monotone = true;
  for (std::size_t i = 2; i < t.rows.size(); ++i)
    {
      const StudyRow &now = t.rows[i], &before = t.rows[i - 2];
      monotone = monotone && now.err_h1 < before.err_h1 &&
                 now.err_l2 < before.err_l2 &&
                 now.err_lambda < before.err_lambda;
    }
  v.note("post lambda %.2f", t.post.lambda);
  v.note(", pre lambda %.2f", t.pre.lambda);
  v.note(", %.1f s", seconds);
  v.require(monotone, "monotone error columns");
  v.require(t.post.lambda >= 3.0, "post lambda slope >= 3.0");
  v.require(seconds < 20 * 60.0, "runtime < 20 min");
  return v;
}

struct Solved
{
  std::unique_ptr<FineProblem> problem;
  GroundState                  fine;
};

Verdict
solver_identities(const std::vector<Solved> &fine_states)
{
  Verdict v;
  int     states = 0;
  double  worst_norm = 0.0, worst_lambda = 0.0, worst_trace = 0.0;
  auto    check = [&](const FineProblem &p, const GroundState &s) {
    const double beta = p.spec().beta;
    const Vector &u   = s.fine_coefficients;
    worst_norm        = std::max(worst_norm, std::abs(p.l2_norm(u) - 1.0));
    worst_lambda =
      std::max(worst_lambda,
               std::abs(s.lambda - (2.0 * s.energy + 0.5 * beta * p.quartic(u))));
    if (beta > 0.0)
      v.require(s.lambda < 4.0 * s.energy, "lambda < 4E");
    for (std::size_t i = 1; i < s.energy_trace.size(); ++i)
      worst_trace =
        std::max(worst_trace, s.energy_trace[i] - s.energy_trace[i - 1]);
    ++states;
  };
  for (const Solved &f : fine_states)
    {
      check(*f.problem, f.fine);
      for (int m = 1; m <= 4; ++m)
        {
          const MeshHierarchy h =
            build_hierarchy(2, m, f.problem->mesh().level());
          const bool wells_problem = std::holds_alternative<
            potential::PeriodicWells>(f.problem->spec().potential);
          const CoarseSpaceBasis basis = build_coarse_basis(
            h, f.problem->a_matrix(), build_clement(h, f.problem->mass()),
            wells_problem ? m : 2 * m);
          check(*f.problem,
                oda_minimize(DiscreteSpace::lod(*f.problem, basis)));
        }
    }
  v.note("%.0f states", states);
  v.note(", |norm - 1| %.1e", worst_norm);
  v.note(", lambda identity %.1e", worst_lambda);
  v.note(", largest trace increase %.1e", worst_trace);
  v.require(worst_norm <= 1e-10, "unit L2 norm");
  v.require(worst_lambda <= 1e-10, "lambda identity");
  v.require(worst_trace <= 1e-12, "energy trace nonincreasing");
  return v;
}

Verdict
fixed_point(const std::vector<Solved> &fine_states)
{
  Verdict v;
  double  worst = 0.0;
  for (const Solved &f : fine_states)
    {
      const GroundState post = postprocess(*f.problem, f.fine);
      worst                  = std::max(
        worst, energy_norm(f.problem->a_matrix(),
                           post.fine_coefficients - f.fine.fine_coefficients));
    }
  v.note("energy-norm distance %.2e", worst);
  v.require(worst <= 1e-9, "fixed point to 1e-9");
  return v;
}

Verdict
oracles()
{
  Verdict     v;
  ProblemSpec spec;
  spec.beta        = 1.0;
  const Mesh line  = build_uniform_mesh(1, 1);
  const Vector hat = Vector::Ones(1);
  double       hand = 0.0;
  hand = std::max(hand, std::abs(assemble_bilinear(line, spec).matrix().coeff(0, 0) -
                                 4.0 / pi));
  hand = std::max(hand,
                  std::abs(assemble_mass(line).matrix().coeff(0, 0) - pi / 3.0));
  hand = std::max(hand, std::abs(energy(spec, line, hat) -
                                 (2.0 / pi + pi / 20.0)));
  hand = std::max(hand, std::abs(lambda_from_state(spec, line, hat) -
                                 (4.0 / pi + pi / 5.0) / (pi / 3.0)));
  v.note("hand values %.1e", hand);
  v.require(hand <= 1e-12, "1D hand values");

  const MeshHierarchy   h = build_hierarchy(2, 2, 4);
  const SparseSym       a = assemble_bilinear(h.fine, harmonic(1.0));
  const ClementOperator op = build_clement(h);
  double                corrector = 0.0;
  for (int vertex : h.coarse.interior_nodes())
    corrector = std::max(
      corrector,
      energy_norm(a, compute_corrector(h, a, op, vertex, saturating_k(h.coarse)) -
                       kkt_corrector(h, a, op, vertex)));
  v.note(", saturated corrector %.1e", corrector);
  v.require(corrector <= 1e-9, "saturated corrector");

  double tridiagonal = 0.0;
  for (int level = 2; level <= 8; ++level)
    {
      const Mesh   mesh = build_uniform_mesh(1, level);
      const double w    = mesh.width();
      const double expected =
        6.0 / (w * w) * (1.0 - std::cos(w)) / (2.0 + std::cos(w));
      tridiagonal = std::max(
        tridiagonal,
        std::abs(smallest_eigenpair(assemble_laplace(mesh), assemble_mass(mesh))
                   .value -
                 expected));
    }
  v.note(", tridiagonal eigenvalue %.1e", tridiagonal);
  v.require(tridiagonal <= 1e-10, "closed-form eigenvalue");
  return v;
}

} // namespace

int
main()
{
  std::vector<Solved> fine_states;
  for (const ProblemSpec &spec : {harmonic(1.0), wells()})
    {
      Solved s;
      s.problem =
        std::make_unique<FineProblem>(build_uniform_mesh(2, 6), spec);
      s.fine = oda_minimize(DiscreteSpace::fine(*s.problem));
      fine_states.push_back(std::move(s));
    }

  const std::vector<std::pair<const char *, std::function<Verdict()>>>
    criteria = {
      {"linear sanity", linear_sanity},
      {"decomposition orthogonality", orthogonality},
      {"quasi-orthogonality scaling", quasi_orthogonality},
      {"exponential decay", decay},
      {"harmonic convergence study", harmonic_study},
      {"periodic-well convergence study", wells_study},
      {"solver identities", [&] { return solver_identities(fine_states); }},
      {"post-processing fixed point", [&] { return fixed_point(fine_states); }},
      {"oracle equivalences", oracles},
    };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i)
    {
      Verdict v;
      try
        {
          v = criteria[i].second();
        }
      catch (const std::exception &e)
        {
          v.pass   = false;
          v.detail = std::string(" threw: ") + e.what();
        }
      all = all && v.pass;
      std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                  criteria[i].first, v.detail.c_str());
      std::fflush(stdout);
    }
  return all ? 0 : 1;
}
