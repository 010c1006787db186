#include <lodgpe/study.hpp>

#include <lodgpe/state_io.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

namespace lodgpe
{

namespace
{

using Clock = std::chrono::steady_clock;

double
seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

OdaOptions
oda_options(const StudyConfig &config)
{
  OdaOptions o;
  o.eps            = config.oda_eps;
  o.density_tol    = config.oda_density_tol;
  o.max_iterations = config.oda_max_iterations;
  return o;
}

void
say(const StudyOptions &options, const std::string &text)
{
  if (options.log)
    *options.log << text << std::endl;
}

/// Measures fine-mesh states against the reference, prolongating them to the
/// reference level when that is finer.
class Comparator
{
public:
  Comparator(const StudyConfig &config, ReferenceSolution reference)
    : config_(config)
    , reference_(std::move(reference))
    , problem_(build_uniform_mesh(config.domain_dim, reference_.level),
               config.problem)
  {}

  struct Errors
  {
    double h1;
    double l2;
    double lambda;
  };

  Errors
  compare(int level, const Vector &u, double lambda)
  {
    Vector on_ref = u;
    if (level != reference_.level)
      on_ref = transfer(level) * u;
    if (on_ref.size() != reference_.state.size())
      throw std::invalid_argument("reference: state size mismatch");
    // ground states are unique up to sign
    if (reference_.state.dot(problem_.mass() * on_ref) < 0.0)
      on_ref = -on_ref;
    const ErrorNorms e = problem_.error_norms(reference_.state, on_ref);
    return {std::hypot(e.l2, e.h1_semi), e.l2,
            std::abs(reference_.lambda - lambda)};
  }

private:
  const Eigen::SparseMatrix<double> &
  transfer(int level)
  {
    auto it = transfers_.find(level);
    if (it == transfers_.end())
      it = transfers_
             .emplace(level, build_hierarchy(config_.domain_dim, level,
                                             reference_.level)
                               .prolongation)
             .first;
    return it->second;
  }

  const StudyConfig                          &config_;
  ReferenceSolution                           reference_;
  FineProblem                                 problem_;
  std::map<int, Eigen::SparseMatrix<double>> transfers_;
};

ReferenceSolution
solve_reference_level(const StudyConfig  &config,
                      int                 level,
                      const StudyOptions &options)
{
  const auto  start = Clock::now();
  FineProblem problem(build_uniform_mesh(config.domain_dim, level),
                      config.problem);
  GroundState state = solve_fine(problem, config);
  char        text[128];
  std::snprintf(text, sizeof text,
                "fine ground state: level %d, lambda %.12g, %d iterations, "
                "%.2f s",
                level, state.lambda, state.iterations, seconds_since(start));
  say(options, text);
  return {level, state.lambda, std::move(state.normalized)};
}

int
finest_level(const StudyConfig &config)
{
  if (config.fine_levels.empty())
    return config.fine_level;
  return *std::max_element(config.fine_levels.begin(),
                           config.fine_levels.end());
}

/// Pre and post rows for one (coarse, fine) pair, appended to `table`.
void
study_pair(const StudyConfig  &config,
           const FineProblem  &fine,
           int                 coarse_level,
           int                 k,
           Comparator         &comparator,
           StudyTable         &table,
           std::size_t         table_index,
           const StudyOptions &options)
{
  const int dim   = config.domain_dim;
  const int level = fine.mesh().level();
  auto      start = Clock::now();

  const MeshHierarchy hierarchy = build_hierarchy(dim, coarse_level, level);
  BasisOptions        basis_options;
  basis_options.corrector_drop_potential = config.corrector_drop_potential;
  basis_options.threads                  = options.threads;
  const CoarseSpaceBasis basis =
    build_coarse_basis(hierarchy, config.problem, k, basis_options);
  const DiscreteSpace space = DiscreteSpace::lod(fine, basis);
  const GroundState   coarse_state = oda_minimize(space, oda_options(config));

  StudyRow pre;
  pre.H          = hierarchy.coarse.width();
  pre.h          = fine.mesh().width();
  pre.k          = k;
  pre.dim_coarse = basis.dimension();
  pre.lambda     = coarse_state.lambda;
  pre.energy     = coarse_state.energy;
  pre.iterations = coarse_state.iterations;
  const auto pre_err =
    comparator.compare(level, coarse_state.normalized, coarse_state.lambda);
  pre.err_h1     = pre_err.h1;
  pre.err_l2     = pre_err.l2;
  pre.err_lambda = pre_err.lambda;
  pre.seconds    = seconds_since(start);
  table.rows.push_back(pre);
  if (options.on_row)
    options.on_row(table_index, pre);

  start                  = Clock::now();
  const GroundState post = postprocess(fine, coarse_state, config.cg_tol);
  StudyRow          row  = pre;
  row.post               = true;
  row.lambda             = post.lambda;
  row.energy             = post.energy;
  row.iterations         = post.iterations;
  // the correction is compared without renormalization
  const auto post_err =
    comparator.compare(level, post.fine_coefficients, post.lambda);
  row.err_h1     = post_err.h1;
  row.err_l2     = post_err.l2;
  row.err_lambda = post_err.lambda;
  const auto normalized_err =
    comparator.compare(level, post.normalized, post.lambda);
  row.err_h1_normalized = normalized_err.h1;
  row.err_l2_normalized = normalized_err.l2;
  row.seconds           = seconds_since(start);
  table.rows.push_back(row);
  if (options.on_row)
    options.on_row(table_index, row);

  char text[160];
  std::snprintf(text, sizeof text,
                "H = pi/%d, h = pi/%d, k = %d: lambda %.12g -> %.12g, "
                "errors %.3e -> %.3e",
                1 << coarse_level, 1 << level, k, pre.lambda, row.lambda,
                pre.err_lambda, row.err_lambda);
  say(options, text);
}

} // namespace

GroundState
solve_fine(const FineProblem &problem, const StudyConfig &config)
{
  return oda_minimize(DiscreteSpace::fine(problem), oda_options(config));
}

ReferenceSolution
reference_solution(const StudyConfig &config, const StudyOptions &options)
{
  const int finest = finest_level(config);
  switch (config.reference.kind)
    {
      case Reference::Kind::same_fine:
        return solve_reference_level(config, finest, options);
      case Reference::Kind::extrapolated:
        {
          const ReferenceSolution lower =
            solve_reference_level(config, finest + 1, options);
          ReferenceSolution upper =
            solve_reference_level(config, finest + 2, options);
          upper.lambda = (4.0 * upper.lambda - lower.lambda) / 3.0;
          return upper;
        }
      case Reference::Kind::file:
        {
          StoredState stored = load_state(config.reference.path);
          if (stored.dim != config.domain_dim || stored.level < finest)
            throw IoError("reference state '" + config.reference.path +
                          "' must have dim=" +
                          std::to_string(config.domain_dim) +
                          " and level >= " + std::to_string(finest));
          const FineProblem problem(
            build_uniform_mesh(stored.dim, stored.level), config.problem);
          if (stored.coefficients.size() != problem.mesh().num_dofs())
            throw IoError("reference state '" + config.reference.path +
                          "': count does not match its mesh");
          Vector state = stored.coefficients;
          state /= problem.l2_norm(state);
          return {stored.level, problem.lambda(state), std::move(state)};
        }
    }
  throw std::logic_error("unknown reference kind");
}

std::vector<StudyTable>
run_convergence_study(const StudyConfig &config, const StudyOptions &options)
{
  config.problem.validate();
  std::vector<StudyTable> tables;

  if (config.fine_levels.empty())
    {
      // the same-level reference doubles as the fine problem of every row
      const FineProblem fine(
        build_uniform_mesh(config.domain_dim, config.fine_level),
        config.problem);
      Comparator comparator(config, reference_solution(config, options));
      StudyTable &table = tables.emplace_back();
      for (std::size_t i = 0; i < config.coarse_levels.size(); ++i)
        {
          const int m = config.coarse_levels[i];
          study_pair(config, fine, m, config.k_rule.k_for(m, i), comparator,
                     table, 0, options);
        }
      fit_slopes(table);
      return tables;
    }

  std::unique_ptr<Comparator> shared;
  if (config.reference.kind != Reference::Kind::same_fine)
    shared = std::make_unique<Comparator>(config,
                                          reference_solution(config, options));

  for (std::size_t i = 0; i < config.coarse_levels.size(); ++i)
    tables.emplace_back().fixed_coarse_level = config.coarse_levels[i];

  for (int level : config.fine_levels)
    {
      const FineProblem fine(build_uniform_mesh(config.domain_dim, level),
                             config.problem);
      std::unique_ptr<Comparator> own;
      if (!shared)
        {
          StudyConfig at_level = config;
          at_level.fine_levels.clear();
          at_level.fine_level = level;
          own                 = std::make_unique<Comparator>(
            config, solve_reference_level(at_level, level, options));
        }
      Comparator &comparator = shared ? *shared : *own;
      for (std::size_t i = 0; i < config.coarse_levels.size(); ++i)
        {
          const int m = config.coarse_levels[i];
          if (m > level)
            continue;
          study_pair(config, fine, m, config.k_rule.k_for(m, i), comparator,
                     tables[i], i, options);
        }
    }
  for (StudyTable &table : tables)
    fit_slopes(table);
  return tables;
}

double
loglog_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i]))
      points.emplace_back(std::log(x[i]), std::log(y[i]));
  if (points.size() < 2)
    return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (const auto &[px, py] : points)
    {
      mx += px;
      my += py;
    }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto &[px, py] : points)
    {
      sxy += (px - mx) * (py - my);
      sxx += (px - mx) * (px - mx);
    }
  if (sxx == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

void
fit_slopes(StudyTable &table)
{
  const bool sweep_h = table.fixed_coarse_level >= 0;
  for (bool post : {false, true})
    {
      std::vector<double> size, h1, l2, lambda;
      for (const StudyRow &row : table.rows)
        if (row.post == post)
          {
            size.push_back(sweep_h ? row.h : row.H);
            h1.push_back(row.err_h1);
            l2.push_back(row.err_l2);
            lambda.push_back(row.err_lambda);
          }
      SlopeFit &fit = post ? table.post : table.pre;
      fit.h1        = loglog_slope(size, h1);
      fit.l2        = loglog_slope(size, l2);
      fit.lambda    = loglog_slope(size, lambda);
    }
}

void
write_csv_row(std::ostream &out, const StudyRow &row)
{
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%d,%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.3f\n",
                row.H, row.h, row.k, row.dim_coarse, row.lambda, row.energy,
                row.iterations, row.err_h1, row.err_l2, row.err_lambda,
                row.seconds);
  out << buf;
}

void
write_csv_slopes(std::ostream &out, const StudyTable &table)
{
  const char *axis = table.fixed_coarse_level >= 0 ? "h" : "H";
  char        buf[256];
  out << "# rows per mesh pair: coarse state, then post-processed\n";
  for (const auto &[name, fit] :
       {std::pair{"pre", table.pre}, std::pair{"post", table.post}})
    {
      std::snprintf(buf, sizeof buf,
                    "# slope %s vs %s: err_h1 %.4f err_l2 %.4f "
                    "err_lambda %.4f\n",
                    name, axis, fit.h1, fit.l2, fit.lambda);
      out << buf;
    }
  for (const StudyRow &row : table.rows)
    if (row.post)
      {
        std::snprintf(buf, sizeof buf,
                      "# normalized post H=%.17g h=%.17g: err_h1 %.17g "
                      "err_l2 %.17g\n",
                      row.H, row.h, row.err_h1_normalized,
                      row.err_l2_normalized);
        out << buf;
      }
}

void
write_csv(std::ostream &out, const StudyTable &table)
{
  out << study_csv_header << '\n';
  for (const StudyRow &row : table.rows)
    write_csv_row(out, row);
  write_csv_slopes(out, table);
}

DecayProfile
run_decay_study(const StudyConfig &config)
{
  config.problem.validate();
  const int coarse_level =
    config.decay_coarse_level > 0
      ? config.decay_coarse_level
      : *std::max_element(config.coarse_levels.begin(),
                          config.coarse_levels.end());
  const MeshHierarchy hierarchy =
    build_hierarchy(config.domain_dim, coarse_level, config.fine_level);
  const Mesh &coarse = hierarchy.coarse;

  int node = config.decay_node;
  if (node < 0)
    node = center_node(coarse);
  else if (node >= coarse.num_vertices() || coarse.is_boundary(node))
    throw std::invalid_argument("decay.node must be an interior vertex of "
                                "the coarse mesh");
  const int k_max =
    config.decay_k_max > 0 ? config.decay_k_max
                           : std::max(2, saturating_k(coarse));

  ProblemSpec spec = config.problem;
  if (config.corrector_drop_potential)
    spec.potential = potential::Zero{};
  return decay_profile(hierarchy, spec, node, k_max);
}

void
write_decay_csv(std::ostream &out, const DecayProfile &profile)
{
  out << "k,tail_norm,localization_error\n";
  char buf[128];
  for (std::size_t i = 0; i < profile.k.size(); ++i)
    {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", profile.k[i],
                    profile.tail[i], profile.localization_error[i]);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "# node %d, global corrector norm %.17g\n",
                profile.node, profile.global_norm);
  out << buf;
  std::snprintf(buf, sizeof buf, "# theta %.6f\n", profile.theta);
  out << buf;
}

} // namespace lodgpe
