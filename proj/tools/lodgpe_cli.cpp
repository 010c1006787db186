// Command line front end: ground states, convergence tables and corrector
// decay studies driven by a config file.

#include <lodgpe/state_io.hpp>
#include <lodgpe/study.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

using namespace lodgpe;

namespace
{

enum Exit
{
  ok            = 0,
  config_error  = 2,
  solver_error  = 3,
  io_error      = 4,
  usage_error   = 1
};

struct Common
{
  std::string config_path;
  std::string output;
  int         threads = 0;
  std::uint64_t seed  = 0;
  bool        full    = false;
};

StudyConfig
load(const Common &common)
{
  StudyConfig config = load_config(common.config_path);
  if (common.full)
    {
      // full-scale runs use h = pi/128
      config.fine_level = 7;
      for (int m : config.coarse_levels)
        if (m > config.fine_level)
          throw ConfigError(0, "coarse level above the full fine level");
    }
  if (!common.output.empty())
    config.output_path = common.output;
  config.problem.validate();
  return config;
}

std::string
table_path(const std::string &base, int coarse_level)
{
  const std::string tag = "_H" + std::to_string(1 << coarse_level);
  const auto        dot = base.rfind('.');
  const auto        sep = base.rfind('/');
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep))
    return base + tag;
  return base.substr(0, dot) + tag + base.substr(dot);
}

std::ofstream
open_output(const std::string &path)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  return out;
}

int
cmd_solve(const Common &common)
{
  const StudyConfig config = load(common);
  const FineProblem problem(
    build_uniform_mesh(config.domain_dim, config.fine_level), config.problem);
  const GroundState state = solve_fine(problem, config);
  std::printf("level %d (%d dofs): lambda %.15g energy %.15g iterations %d\n",
              config.fine_level, problem.mesh().num_dofs(), state.lambda,
              state.energy, state.iterations);
  if (!config.output_path.empty())
    {
      save_state(config.output_path, problem.mesh(), state.normalized);
      std::printf("state written to %s\n", config.output_path.c_str());
    }
  return ok;
}

int
cmd_converge(const Common &common)
{
  const StudyConfig config = load(common);
  const bool        sweep  = !config.fine_levels.empty();

  // one stream per table; rows are flushed as they finish so a failed run
  // leaves the completed part on disk
  std::vector<std::unique_ptr<std::ofstream>> files;
  std::vector<std::ostream *>                 streams;
  const std::size_t tables = sweep ? config.coarse_levels.size() : 1;
  for (std::size_t i = 0; i < tables; ++i)
    {
      if (config.output_path.empty())
        streams.push_back(&std::cout);
      else
        {
          const std::string path =
            sweep ? table_path(config.output_path, config.coarse_levels[i])
                  : config.output_path;
          files.push_back(std::make_unique<std::ofstream>(open_output(path)));
          streams.push_back(files.back().get());
        }
      if (sweep && config.output_path.empty())
        *streams[i] << "# H = pi/" << (1 << config.coarse_levels[i]) << '\n';
      if (!sweep || !config.output_path.empty())
        *streams[i] << study_csv_header << '\n' << std::flush;
    }

  StudyOptions options;
  options.threads = common.threads;
  options.log     = &std::cerr;
  std::vector<bool> started(tables, false);
  options.on_row = [&](std::size_t table, const StudyRow &row) {
    std::ostream &out = *streams[table];
    if (sweep && config.output_path.empty() && !started[table])
      out << study_csv_header << '\n';
    started[table] = true;
    write_csv_row(out, row);
    out.flush();
  };

  const std::vector<StudyTable> result = run_convergence_study(config, options);
  for (std::size_t i = 0; i < result.size(); ++i)
    {
      write_csv_slopes(*streams[i], result[i]);
      streams[i]->flush();
      if (!*streams[i])
        throw IoError("failed writing the study output");
    }
  return ok;
}

int
cmd_decay(const Common &common)
{
  const StudyConfig  config  = load(common);
  const DecayProfile profile = run_decay_study(config);
  if (config.output_path.empty())
    write_decay_csv(std::cout, profile);
  else
    {
      std::ofstream out = open_output(config.output_path);
      write_decay_csv(out, profile);
      if (!out)
        throw IoError("failed writing '" + config.output_path + "'");
    }
  return ok;
}

int
cmd_info(const Common &common)
{
  const StudyConfig config = load(common);
  const Mesh fine = build_uniform_mesh(config.domain_dim, config.fine_level);
  std::printf("domain (0,pi)^%d, potential %s, beta %g, diffusion %g\n",
              config.domain_dim, potential_name(config.problem.potential).c_str(),
              config.problem.beta, config.problem.diffusion.constant);
  std::printf("fine mesh: h = pi/%d, %d simplices, %d dofs\n",
              fine.cells_per_axis(), fine.num_simplices(), fine.num_dofs());
  for (std::size_t i = 0; i < config.coarse_levels.size(); ++i)
    {
      const int  m      = config.coarse_levels[i];
      const int  k      = config.k_rule.k_for(m, i);
      const Mesh coarse = build_uniform_mesh(config.domain_dim, m);
      std::printf("coarse H = pi/%d: %d dofs, k = %d (saturates at %d)\n",
                  coarse.cells_per_axis(), coarse.num_dofs(), k,
                  saturating_k(coarse));
    }
  for (int level : config.fine_levels)
    std::printf("fine sweep level %d: h = pi/%d\n", level, 1 << level);
  return ok;
}

} // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"Two-level ground states of the Gross-Pitaevskii equation"};
  app.require_subcommand(1);

  Common common;
  auto   add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", common.config_path, "configuration file")
      ->required();
    cmd->add_option("--output", common.output,
                    "output file (overrides output_path)");
    cmd->add_option("--threads", common.threads,
                    "worker threads for corrector solves (0 = serial)")
      ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", common.seed, "reserved");
    cmd->add_flag("--full", common.full, "fine level 7 (h = pi/128)");
  };

  CLI::App *solve =
    app.add_subcommand("solve", "fine ground state; --output stores it");
  CLI::App *converge =
    app.add_subcommand("converge", "coarse and post-processed error table");
  CLI::App *decay =
    app.add_subcommand("decay", "corrector tail norms over patch layers");
  CLI::App *info = app.add_subcommand("info", "mesh and space sizes");
  for (CLI::App *cmd : {solve, converge, decay, info})
    add_common(cmd);

  try
    {
      app.parse(argc, argv);
    }
  catch (const CLI::ParseError &e)
    {
      return app.exit(e) == 0 ? ok : usage_error;
    }

  try
    {
      if (solve->parsed())
        return cmd_solve(common);
      if (converge->parsed())
        return cmd_converge(common);
      if (decay->parsed())
        return cmd_decay(common);
      return cmd_info(common);
    }
  catch (const ConfigError &e)
    {
      std::cerr << "config error: " << e.what() << '\n';
      return config_error;
    }
  catch (const IoError &e)
    {
      std::cerr << "i/o error: " << e.what() << '\n';
      return io_error;
    }
  catch (const SolverError &e)
    {
      std::cerr << "solver failure: " << e.what() << '\n';
      return solver_error;
    }
  catch (const std::invalid_argument &e)
    {
      std::cerr << "config error: " << e.what() << '\n';
      return config_error;
    }
  catch (const std::exception &e)
    {
      std::cerr << "solver failure: " << e.what() << '\n';
      return solver_error;
    }
}
