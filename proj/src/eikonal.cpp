#include "mfg/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace mfg {

double default_target_tolerance(std::span<const double> theta) {
  if (theta.empty()) return 0.0;
  const double top = *std::max_element(theta.begin(), theta.end());
  return 1e-10 * (1.0 + std::abs(top));
}

TargetSet extract_target(std::span<const double> theta, std::optional<double> zeta) {
  TargetSet target;
  if (theta.empty()) return target;
  target.zeta = zeta.value_or(default_target_tolerance(theta));
  if (!(target.zeta >= 0.0)) {
    throw std::invalid_argument("extract_target: tolerance must be >= 0");
  }
  const double top = *std::max_element(theta.begin(), theta.end());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (theta[k] >= top - target.zeta) target.nodes.push_back(k);
  }
  return target;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Best value reachable through the triangle (node, axis neighbour a,
// diagonal neighbour b); a is at distance h, b at h*sqrt(2), and the edge a-b
// has length h.
double triangle_update(double va, double vb, double h) {
  double best = std::min(va + h, vb + std::sqrt(2.0) * h);
  if (std::isfinite(va) && std::isfinite(vb)) {
    const double delta = vb - va;
    if (delta < 0.0 && -delta < h) {
      const double r = -delta / h;
      const double s = r / std::sqrt(1.0 - r * r);
      if (s <= 1.0) best = std::min(best, va + s * delta + h * std::sqrt(1.0 + s * s));
    }
  }
  return best;
}

}  // namespace

Field solve_eikonal(const Grid& grid, const TargetSet& target) {
  if (target.nodes.empty()) {
    throw std::invalid_argument("solve_eikonal: empty target set");
  }
  const std::size_t size = grid.size();
  const int n = grid.intervals();
  const double h = grid.spacing();
  Field v(size, kInf);
  std::vector<char> accepted(size, 0);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t k : target.nodes) {
    if (k >= size) throw std::invalid_argument("solve_eikonal: target node out of range");
    v[k] = 0.0;
    heap.emplace(0.0, k);
  }

  auto value_at = [&](int i, int j) -> double {
    if (i < 0 || i > n || j < 0 || j > n) return kInf;
    const std::size_t k = grid.index(i, j);
    return accepted[k] ? v[k] : kInf;
  };

  auto update_2d = [&](int i, int j) {
    double best = kInf;
    static constexpr int kAxes[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& axis : kAxes) {
      const int ai = i + axis[0];
      const int aj = j + axis[1];
      const double va = value_at(ai, aj);
      // Perpendicular offsets for the two triangles sharing this axis edge.
      for (int side : {-1, 1}) {
        const int bi = ai + side * axis[1];
        const int bj = aj + side * axis[0];
        const double vb = value_at(bi, bj);
        if (!std::isfinite(va) && !std::isfinite(vb)) continue;
        best = std::min(best, triangle_update(va, vb, h));
      }
    }
    return best;
  };

  while (!heap.empty()) {
    const auto [value, k] = heap.top();
    heap.pop();
    if (accepted[k] || value > v[k]) continue;
    accepted[k] = 1;
    const int i = grid.ix(k);
    if (grid.dim() == 1) {
      for (int ni : {i - 1, i + 1}) {
        if (ni < 0 || ni > n) continue;
        const auto nk = static_cast<std::size_t>(ni);
        if (accepted[nk]) continue;
        const double cand = v[k] + h;
        if (cand < v[nk]) {
          v[nk] = cand;
          heap.emplace(cand, nk);
        }
      }
      continue;
    }
    const int j = grid.iy(k);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = i + di;
        const int nj = j + dj;
        if (ni < 0 || ni > n || nj < 0 || nj > n) continue;
        const std::size_t nk = grid.index(ni, nj);
        if (accepted[nk]) continue;
        const double cand = update_2d(ni, nj);
        if (cand < v[nk]) {
          v[nk] = cand;
          heap.emplace(cand, nk);
        }
      }
    }
  }
  return v;
}

Field brute_force_distance(const Grid& grid, const TargetSet& target) {
  Field out(grid.size(), kInf);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t t : target.nodes) {
      const double dx = grid.x(k) - grid.x(t);
      const double dy = grid.y(k) - grid.y(t);
      out[k] = std::min(out[k], std::sqrt(dx * dx + dy * dy));
    }
  }
  return out;
}

}  // namespace mfg
