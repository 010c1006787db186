#include <lodgpe/state_io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lodgpe
{

void
save_state(const std::string &path, const Mesh &mesh,
           const Vector &coefficients)
{
  if (coefficients.size() != mesh.num_dofs())
    throw std::invalid_argument("save_state: " +
                                std::to_string(coefficients.size()) +
                                " coefficients for a mesh with " +
                                std::to_string(mesh.num_dofs()) + " dofs");
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write state file '" + path + "'");
  out << "gpe-state v1 dim=" << mesh.dim() << " level=" << mesh.level()
      << " n=" << coefficients.size() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    {
      std::snprintf(buf, sizeof buf, "%.17g", coefficients[i]);
      out << buf << '\n';
    }
  if (!out)
    throw IoError("failed writing state file '" + path + "'");
}

StoredState
load_state(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open state file '" + path + "'");
  std::string header;
  std::getline(in, header);
  StoredState state;
  long        n = -1;
  char        tail;
  if (std::sscanf(header.c_str(), "gpe-state v1 dim=%d level=%d n=%ld %c",
                  &state.dim, &state.level, &n, &tail) != 3 ||
      n < 0)
    throw IoError("state file '" + path + "': bad header '" + header + "'");

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  std::string line;
  while (std::getline(in, line))
    {
      if (line.empty())
        continue;
      std::size_t used = 0;
      double      v    = 0.0;
      try
        {
          v = std::stod(line, &used);
        }
      catch (const std::exception &)
        {
          used = 0;
        }
      if (used == 0 || line.find_first_not_of(" \t\r", used) !=
                         std::string::npos)
        throw IoError("state file '" + path + "': bad value '" + line + "'");
      values.push_back(v);
    }
  if (static_cast<long>(values.size()) != n)
    throw IoError("state file '" + path + "': header announces " +
                  std::to_string(n) + " values, found " +
                  std::to_string(values.size()));
  state.coefficients =
    Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(n));
  return state;
}

Vector
load_state(const std::string &path, const Mesh &mesh)
{
  StoredState state = load_state(path);
  if (state.dim != mesh.dim() || state.level != mesh.level())
    throw IoError("state file '" + path + "' was written for dim=" +
                  std::to_string(state.dim) +
                  " level=" + std::to_string(state.level) +
                  ", expected dim=" + std::to_string(mesh.dim()) +
                  " level=" + std::to_string(mesh.level()));
  if (state.coefficients.size() != mesh.num_dofs())
    throw IoError("state file '" + path + "': count does not match the mesh");
  return state.coefficients;
}

} // namespace lodgpe
