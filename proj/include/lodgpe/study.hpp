#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <lodgpe/config.hpp>
#include <lodgpe/gpe.hpp>
#include <lodgpe/lod.hpp>

namespace lodgpe
{

struct StudyRow
{
  double H          = 0.0;
  double h          = 0.0;
  int    k          = 0;
  int    dim_coarse = 0;
  double lambda     = 0.0;
  double energy     = 0.0;
  int    iterations = 0;
  double err_h1     = 0.0;
  double err_l2     = 0.0;
  double err_lambda = 0.0;
  double seconds    = 0.0;
  /// false: coarse state, true: after the fine-scale correction
  bool   post = false;
  /// post rows: errors of the renormalized correction (CSV comments only)
  double err_h1_normalized = 0.0;
  double err_l2_normalized = 0.0;
};

inline constexpr const char *study_csv_header =
  "H,h,k,dim_coarse,lambda,energy,iterations,err_h1,err_l2,err_lambda,seconds";

/// Least-squares slopes of log(error) against log(mesh size).
struct SlopeFit
{
  double h1     = 0.0;
  double l2     = 0.0;
  double lambda = 0.0;
};

struct StudyTable
{
  /// -1 for the ladder over coarse levels at fixed fine level; otherwise the
  /// fixed coarse level of a sweep over fine levels
  int                   fixed_coarse_level = -1;
  std::vector<StudyRow> rows;
  SlopeFit              pre;
  SlopeFit              post;
};

struct ReferenceSolution
{
  int    level  = 0;
  double lambda = 0.0;
  Vector state; ///< unit L2 norm, interior coefficients on `level`
};

struct StudyOptions
{
  int threads = 0;
  /// called for every finished row with the index of its table
  std::function<void(std::size_t, const StudyRow &)> on_row;
  /// progress messages; may be null
  std::ostream *log = nullptr;
};

/// Ground state of the full fine problem.
GroundState solve_fine(const FineProblem &problem, const StudyConfig &config);

ReferenceSolution reference_solution(const StudyConfig &config,
                                     const StudyOptions &options = {});

/**
 * For every coarse level: LOD basis, coarse ground state and its
 * fine-scale correction, each compared with the reference on the fine mesh.
 * With `fine_levels` set, one table per coarse level sweeps the fine level
 * instead.
 */
std::vector<StudyTable> run_convergence_study(const StudyConfig  &config,
                                              const StudyOptions &options = {});

/// OLS slope of log(y) over log(x); points with y <= 0 are skipped. NaN if
/// fewer than two points remain.
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

/// Fills the slope fields of the table from its rows.
void fit_slopes(StudyTable &table);

void write_csv_row(std::ostream &out, const StudyRow &row);
/// Slope summary and normalized post errors as `#` comment lines.
void write_csv_slopes(std::ostream &out, const StudyTable &table);
void write_csv(std::ostream &out, const StudyTable &table);

DecayProfile run_decay_study(const StudyConfig &config);
void         write_decay_csv(std::ostream &out, const DecayProfile &profile);

} // namespace lodgpe
