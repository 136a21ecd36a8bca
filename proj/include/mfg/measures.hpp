#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

/// Player distribution: nonnegative nodal density with unit quadrature mass.
///
/// Only normalize() and uniform() produce a Density, so every instance holds
/// the invariant for the grid it was built on.
class Density {
 public:
  static Density uniform(const Grid& grid);

  /// Takes ownership of nonnegative values whose mass is already close to 1;
  /// values are rescaled only when the relative mass drift exceeds 1e-12.
  static Density adopt(Field values, const Grid& grid);

  std::span<const double> values() const { return values_; }
  const Field& field() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

  operator std::span<const double>() const { return values_; }

 private:
  explicit Density(Field values) : values_(std::move(values)) {}
  friend Density normalize(std::span<const double> raw, const Grid& grid);

  Field values_;
};

/// Rescales a nonnegative field to unit mass.
/// Throws std::invalid_argument on negative or non-finite entries, or when the
/// field carries no mass.
Density normalize(std::span<const double> raw, const Grid& grid);

/// Quadrature of |a - b|. Accepts densities or signed fields.
double tv_distance(std::span<const double> a, std::span<const double> b,
                   const Grid& grid);

/// W1 on [0,1] via the CDF formula, int_0^1 |M_a(x) - M_b(x)| dx, with
/// cumulative masses accumulated by the trapezoid rule. 1D only.
double w1_distance_1d(std::span<const double> a, std::span<const double> b,
                      const Grid& grid);

inline constexpr double kDefaultSupportThreshold = 1e-9;

/// Nodes carrying density above rel_threshold * max(m).
std::vector<std::size_t> support(std::span<const double> m,
                                 double rel_threshold = kDefaultSupportThreshold);

/// Seedable stream of uniform doubles.
///
/// Engine is std::mt19937_64. The engine seed is splitmix64(base_seed) mixed
/// with splitmix64(stream + 1), so (base_seed, stream) pairs give independent,
/// reproducible streams. Doubles take the top 53 bits of each draw, which keeps
/// the sequence identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t base_seed, std::uint64_t stream = 0);

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Random initial density max{0, sum_{j=1}^5 a_j sin(b_j pi x)} with
/// a_j, b_j ~ U[1,10], normalised. Deterministic in seed. A draw with no
/// positive part is redrawn on the next stream; after 100 failed draws the
/// call throws std::runtime_error. 1D only.
Density random_density(std::uint64_t seed, const Grid& grid);

}  // namespace mfg
