#include <lodgpe/config.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lodgpe
{

namespace
{

std::string_view
trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry
{
  std::string value;
  int         line;
};

const std::set<std::string, std::less<>> known_keys = {
  "domain_dim",
  "fine_level",
  "coarse_levels",
  "fine_levels",
  "k_rule",
  "potential.type",
  "potential.bt",
  "potential.L",
  "beta",
  "diffusion",
  "corrector_drop_potential",
  "oda_eps",
  "oda_density_tol",
  "oda_max_iterations",
  "cg_tol",
  "reference",
  "output_path",
  "decay.coarse_level",
  "decay.k_max",
  "decay.node",
};

int
to_int(const Entry &e, std::string_view text)
{
  int        value = 0;
  const auto s     = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(e.line, "expected an integer, got '" + std::string(s) +
                                "'");
  return value;
}

double
to_double(const Entry &e)
{
  double     value = 0.0;
  const auto s     = trim(e.value);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(e.line, "expected a number, got '" + std::string(s) +
                                "'");
  return value;
}

std::vector<int>
to_int_list(const Entry &e)
{
  std::string_view s = trim(e.value);
  if (!s.empty() && s.front() == '[')
    {
      if (s.back() != ']')
        throw ConfigError(e.line, "unterminated list");
      s = trim(s.substr(1, s.size() - 2));
    }
  std::vector<int> values;
  while (!s.empty())
    {
      const auto comma = s.find(',');
      values.push_back(to_int(e, s.substr(0, comma)));
      if (comma == std::string_view::npos)
        break;
      s = trim(s.substr(comma + 1));
      if (s.empty())
        throw ConfigError(e.line, "trailing comma in list");
    }
  if (values.empty())
    throw ConfigError(e.line, "empty list");
  return values;
}

bool
to_bool(const Entry &e)
{
  const auto s = trim(e.value);
  if (s == "true" || s == "1")
    return true;
  if (s == "false" || s == "0")
    return false;
  throw ConfigError(e.line, "expected true or false, got '" + std::string(s) +
                              "'");
}

std::string
to_string(const Entry &e)
{
  std::string_view s = trim(e.value);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

} // namespace

int
KRule::k_for(int coarse_level, std::size_t index) const
{
  switch (kind)
    {
      case Kind::two_m:
        return 2 * coarse_level;
      case Kind::m:
        return coarse_level;
      case Kind::list:
        return values.at(index);
    }
  return 2 * coarse_level;
}

std::string
potential_name(const PotentialSpec &spec)
{
  switch (spec.index())
    {
      case 0:
        return "zero";
      case 1:
        return "harmonic";
      default:
        return "periodic_wells";
    }
}

StudyConfig
parse_config(std::string_view text)
{
  std::map<std::string, Entry, std::less<>> entries;
  std::istringstream                         in{std::string(text)};
  std::string                                raw;
  int                                        line = 0;
  while (std::getline(in, raw))
    {
      ++line;
      std::string_view s = raw;
      if (const auto hash = s.find('#'); hash != std::string_view::npos)
        s = s.substr(0, hash);
      s = trim(s);
      if (s.empty())
        continue;
      const auto eq = s.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(line, "expected 'key = value'");
      const std::string key(trim(s.substr(0, eq)));
      const auto        value = trim(s.substr(eq + 1));
      if (key.empty())
        throw ConfigError(line, "missing key");
      if (!known_keys.contains(key))
        throw ConfigError(line, "unknown key '" + key + "'");
      if (value.empty())
        throw ConfigError(line, "missing value for '" + key + "'");
      if (const auto it = entries.find(key); it != entries.end())
        throw ConfigError(line, "duplicate key '" + key +
                                  "' (first set on line " +
                                  std::to_string(it->second.line) + ")");
      entries.emplace(key, Entry{std::string(value), line});
    }

  for (const char *key :
       {"domain_dim", "fine_level", "coarse_levels", "potential.type", "beta"})
    if (!entries.contains(key))
      throw ConfigError(0, std::string("missing mandatory key '") + key + "'");

  auto get = [&](std::string_view key) -> const Entry * {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  StudyConfig cfg;
  const Entry &dim = *get("domain_dim");
  cfg.domain_dim   = to_int(dim, dim.value);
  if (cfg.domain_dim != 1 && cfg.domain_dim != 2)
    throw ConfigError(dim.line, "domain_dim must be 1 or 2");

  const Entry &fine = *get("fine_level");
  cfg.fine_level    = to_int(fine, fine.value);
  if (cfg.fine_level < 1)
    throw ConfigError(fine.line, "fine_level must be >= 1");

  const Entry &coarse = *get("coarse_levels");
  cfg.coarse_levels   = to_int_list(coarse);
  for (int m : cfg.coarse_levels)
    if (m < 1 || m > cfg.fine_level)
      throw ConfigError(coarse.line,
                        "coarse levels must lie in [1, fine_level]");

  if (const Entry *e = get("fine_levels"))
    {
      cfg.fine_levels = to_int_list(*e);
      for (int m : cfg.fine_levels)
        if (m < *std::max_element(cfg.coarse_levels.begin(),
                                  cfg.coarse_levels.end()))
          throw ConfigError(e->line,
                            "fine levels must not be below a coarse level");
    }

  if (const Entry *e = get("k_rule"))
    {
      const std::string rule = to_string(*e);
      if (rule == "2m")
        cfg.k_rule.kind = KRule::Kind::two_m;
      else if (rule == "m")
        cfg.k_rule.kind = KRule::Kind::m;
      else
        {
          cfg.k_rule.kind   = KRule::Kind::list;
          cfg.k_rule.values = to_int_list(*e);
          if (cfg.k_rule.values.size() != cfg.coarse_levels.size())
            throw ConfigError(e->line, "k_rule list needs one entry per "
                                       "coarse level");
          for (int k : cfg.k_rule.values)
            if (k < 1)
              throw ConfigError(e->line, "localization parameter must be "
                                         ">= 1");
        }
    }

  const Entry      &type = *get("potential.type");
  const std::string name = to_string(type);
  if (name == "zero")
    cfg.problem.potential = potential::Zero{};
  else if (name == "harmonic")
    cfg.problem.potential = potential::Harmonic{};
  else if (name == "periodic_wells")
    {
      potential::PeriodicWells wells;
      if (const Entry *e = get("potential.bt"))
        wells.bt = to_double(*e);
      if (const Entry *e = get("potential.L"))
        wells.wells = to_int(*e, e->value);
      if (wells.bt < 0.0)
        throw ConfigError(get("potential.bt")->line,
                          "potential.bt must be non-negative");
      if (wells.wells < 1)
        throw ConfigError(get("potential.L")->line, "potential.L must be >= 1");
      cfg.problem.potential = wells;
    }
  else
    throw ConfigError(type.line, "unknown potential type '" + name +
                                   "' (zero, harmonic, periodic_wells)");
  if (name != "periodic_wells")
    for (const char *key : {"potential.bt", "potential.L"})
      if (const Entry *e = get(key))
        throw ConfigError(e->line, std::string(key) +
                                     " only applies to periodic_wells");

  const Entry &beta = *get("beta");
  cfg.problem.beta  = to_double(beta);
  if (!(cfg.problem.beta >= 0.0))
    throw ConfigError(beta.line, "beta must be non-negative");

  if (const Entry *e = get("diffusion"))
    {
      cfg.problem.diffusion.constant = to_double(*e);
      if (!(cfg.problem.diffusion.constant > 0.0))
        throw ConfigError(e->line, "diffusion must be positive");
    }
  if (const Entry *e = get("corrector_drop_potential"))
    cfg.corrector_drop_potential = to_bool(*e);

  auto positive = [&](const char *key, double &target) {
    if (const Entry *e = get(key))
      {
        target = to_double(*e);
        if (!(target > 0.0))
          throw ConfigError(e->line, std::string(key) + " must be positive");
      }
  };
  positive("oda_eps", cfg.oda_eps);
  positive("oda_density_tol", cfg.oda_density_tol);
  positive("cg_tol", cfg.cg_tol);
  if (cfg.cg_tol >= 1.0)
    throw ConfigError(get("cg_tol")->line, "cg_tol must be below 1");
  if (const Entry *e = get("oda_max_iterations"))
    {
      cfg.oda_max_iterations = to_int(*e, e->value);
      if (cfg.oda_max_iterations < 1)
        throw ConfigError(e->line, "oda_max_iterations must be positive");
    }

  if (const Entry *e = get("reference"))
    {
      const std::string ref = to_string(*e);
      if (ref == "same_fine")
        cfg.reference.kind = Reference::Kind::same_fine;
      else if (ref == "extrapolated")
        cfg.reference.kind = Reference::Kind::extrapolated;
      else
        {
          cfg.reference.kind = Reference::Kind::file;
          cfg.reference.path = ref;
        }
    }
  if (const Entry *e = get("output_path"))
    cfg.output_path = to_string(*e);

  if (const Entry *e = get("decay.coarse_level"))
    {
      cfg.decay_coarse_level = to_int(*e, e->value);
      if (cfg.decay_coarse_level < 1 ||
          cfg.decay_coarse_level > cfg.fine_level)
        throw ConfigError(e->line, "decay.coarse_level must lie in "
                                   "[1, fine_level]");
    }
  if (const Entry *e = get("decay.k_max"))
    {
      cfg.decay_k_max = to_int(*e, e->value);
      if (cfg.decay_k_max < 2)
        throw ConfigError(e->line, "decay.k_max must be >= 2");
    }
  if (const Entry *e = get("decay.node"))
    cfg.decay_node = to_int(*e, e->value);

  return cfg;
}

StudyConfig
load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

} // namespace lodgpe
