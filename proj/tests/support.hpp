#pragma once

#include <lodgpe/linalg.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace testing
{

inline constexpr double pi = std::numbers::pi;

/// Seeded generator so every run sees the same samples.
inline std::mt19937_64 &
rng()
{
  static std::mt19937_64 engine(20240611);
  return engine;
}

inline double
uniform(double lo = -1.0, double hi = 1.0)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline lodgpe::Vector
random_vector(Eigen::Index n)
{
  lodgpe::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = uniform();
  return v;
}

inline double
relative(double a, double b)
{
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace testing
