#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <lodgpe/assembly.hpp>

namespace lodgpe
{

/// Invalid configuration text; line() is 0 for whole-file problems such as
/// a missing mandatory key.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(int line, const std::string &what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what)
    , line_(line)
  {}

  int line() const { return line_; }

private:
  int line_;
};

/// Failed file access or malformed data file.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Localization parameter per coarse level m (H = 2^-m pi).
struct KRule
{
  enum class Kind
  {
    two_m,
    m,
    list
  };
  Kind             kind = Kind::two_m;
  std::vector<int> values; ///< for Kind::list, one per coarse level

  int k_for(int coarse_level, std::size_t index) const;
};

struct Reference
{
  enum class Kind
  {
    same_fine,
    extrapolated,
    file
  };
  Kind        kind = Kind::same_fine;
  std::string path;
};

struct StudyConfig
{
  int              domain_dim = 2;
  int              fine_level = 0;
  std::vector<int> coarse_levels;
  /// optional sweep over fine levels (one table per coarse level)
  std::vector<int> fine_levels;
  KRule            k_rule;
  ProblemSpec      problem;
  bool             corrector_drop_potential = false;
  double           oda_eps                  = 1e-14;
  double           oda_density_tol          = 1e-10;
  int              oda_max_iterations       = 10000;
  double           cg_tol                   = 1e-12;
  Reference        reference;
  std::string      output_path;
  int              decay_coarse_level = 0; ///< 0: largest coarse level
  int              decay_k_max        = 0; ///< 0: saturating
  int              decay_node         = -1; ///< -1: nearest to the center
};

/**
 * Parses `key = value` lines. `#` starts a comment; nested settings use
 * dotted keys (potential.type). Lists are comma separated, optionally in
 * brackets. Mandatory: domain_dim, fine_level, coarse_levels,
 * potential.type, beta. Unknown and duplicate keys are errors.
 */
StudyConfig parse_config(std::string_view text);
StudyConfig load_config(const std::string &path);

std::string potential_name(const PotentialSpec &spec);

} // namespace lodgpe
