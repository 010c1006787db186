#pragma once

#include <string>

#include <lodgpe/config.hpp>
#include <lodgpe/linalg.hpp>
#include <lodgpe/mesh.hpp>

namespace lodgpe
{

/// Interior coefficients of a finite element state together with the mesh
/// they belong to.
struct StoredState
{
  int    dim   = 0;
  int    level = 0;
  Vector coefficients;
};

/**
 * Text format: `gpe-state v1 dim=<d> level=<m> n=<count>` followed by one
 * coefficient per line with 17 significant digits, in mesh dof order.
 */
void        save_state(const std::string &path, const Mesh &mesh,
                       const Vector &coefficients);
StoredState load_state(const std::string &path);
/// Also checks that the file was written for `mesh`.
Vector      load_state(const std::string &path, const Mesh &mesh);

} // namespace lodgpe
