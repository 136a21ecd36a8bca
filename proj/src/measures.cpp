#include "mfg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfg {

Density Density::uniform(const Grid& grid) {
  return normalize(Field(grid.size(), 1.0), grid);
}

Density Density::adopt(Field values, const Grid& grid) {
  const double mass = integrate(values, grid);
  if (std::abs(mass - 1.0) > 1e-12) return normalize(values, grid);
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("Density::adopt: entries must be finite and >= 0");
    }
  }
  return Density(std::move(values));
}

Density normalize(std::span<const double> raw, const Grid& grid) {
  check_shape(raw, grid, "normalize");
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("normalize: entries must be finite and >= 0");
    }
  }
  const double mass = integrate(raw, grid);
  if (!(mass > 0.0)) {
    throw std::invalid_argument("normalize: field carries no mass");
  }
  Field out(raw.begin(), raw.end());
  for (double& v : out) v /= mass;
  return Density(std::move(out));
}

double tv_distance(std::span<const double> a, std::span<const double> b,
                   const Grid& grid) {
  check_shape(a, grid, "tv_distance");
  check_shape(b, grid, "tv_distance");
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += w[k] * std::abs(a[k] - b[k]);
  return sum;
}

double w1_distance_1d(std::span<const double> a, std::span<const double> b,
                      const Grid& grid) {
  if (grid.dim() != 1) {
    throw std::invalid_argument("w1_distance_1d: grid must be one-dimensional");
  }
  check_shape(a, grid, "w1_distance_1d");
  check_shape(b, grid, "w1_distance_1d");
  const double dx = grid.spacing();
  // D(x) = M_a(x) - M_b(x), integrated in |.| by the trapezoid rule.
  double cdf_gap = 0.0;
  double prev = 0.0;
  double total = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    const double da0 = a[k - 1] - b[k - 1];
    const double da1 = a[k] - b[k];
    cdf_gap += 0.5 * dx * (da0 + da1);
    total += 0.5 * dx * (std::abs(prev) + std::abs(cdf_gap));
    prev = cdf_gap;
  }
  return total;
}

std::vector<std::size_t> support(std::span<const double> m, double rel_threshold) {
  if (rel_threshold < 0.0 || rel_threshold >= 1.0) {
    throw std::invalid_argument("support: threshold must lie in [0, 1)");
  }
  std::vector<std::size_t> nodes;
  if (m.empty()) return nodes;
  const double peak = *std::max_element(m.begin(), m.end());
  if (!(peak > 0.0)) return nodes;
  const double cut = rel_threshold * peak;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] > cut) nodes.push_back(k);
  }
  return nodes;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t base_seed, std::uint64_t stream)
    : engine_(splitmix64(base_seed) ^ splitmix64(stream + 1)) {}

double Rng::uniform(double lo, double hi) {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Density random_density(std::uint64_t seed, const Grid& grid) {
  if (grid.dim() != 1) {
    throw std::invalid_argument(
        "random_density: random initialisers are only defined in 1D");
  }
  constexpr int kTerms = 5;
  constexpr int kMaxDraws = 100;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Rng rng(seed, static_cast<std::uint64_t>(draw));
    double amp[kTerms];
    double freq[kTerms];
    for (int j = 0; j < kTerms; ++j) {
      amp[j] = rng.uniform(1.0, 10.0);
      freq[j] = rng.uniform(1.0, 10.0);
    }
    Field raw = grid.sample([&](double x, double) {
      double s = 0.0;
      for (int j = 0; j < kTerms; ++j) {
        s += amp[j] * std::sin(freq[j] * std::numbers::pi * x);
      }
      return std::max(0.0, s);
    });
    if (integrate(raw, grid) > 0.0) return normalize(raw, grid);
  }
  throw std::runtime_error("random_density: no positive draw for seed " +
                           std::to_string(seed));
}

}  // namespace mfg
