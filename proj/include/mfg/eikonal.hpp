#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

/// Discrete argmax of a payoff field: nodes within zeta of the maximum.
struct TargetSet {
  std::vector<std::size_t> nodes;
  double zeta = 0.0;
};

/// Default tie tolerance 1e-10 * (1 + |max theta|).
double default_target_tolerance(std::span<const double> theta);

/// {k : theta_k >= max theta - zeta}; zeta defaults to
/// default_target_tolerance(theta). Never empty for a nonempty field.
TargetSet extract_target(std::span<const double> theta,
                         std::optional<double> zeta = std::nullopt);

/// Distance to the target set as the viscosity solution of |grad v| = 1,
/// v = 0 on the target nodes.
///
/// 1D is Dijkstra on the line (exact). 2D uses fast marching with the
/// semi-Lagrangian update over the eight triangles around a node: the new
/// value minimises (interpolated value on the far edge) + (distance to it),
/// using accepted vertices only. Nodes are accepted in nondecreasing order.
Field solve_eikonal(const Grid& grid, const TargetSet& target);

/// Brute-force min over target nodes of the Euclidean distance (test oracle
/// and debugging aid; O(N * |target|)).
Field brute_force_distance(const Grid& grid, const TargetSet& target);

}  // namespace mfg
