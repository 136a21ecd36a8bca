#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfg {

/// Nodal values on a grid (payoff, distance, coefficients, raw masses).
using Field = std::vector<double>;

/// Uniform node-centred grid on [0,1]^dim with n intervals per axis.
///
/// Nodes are stored x-fastest: node (i, j) lives at index i + (n + 1) * j.
/// Quadrature is trapezoidal in 1D and the plain rectangle rule
/// (weight dx*dx at every node, boundary included) in 2D, so the 2D weights
/// sum to (1 + dx)^2 rather than 1.
class Grid {
 public:
  Grid(int dim, int n);

  int dim() const { return dim_; }
  /// Intervals per axis.
  int intervals() const { return n_; }
  /// Nodes per axis.
  int nodes_per_axis() const { return n_ + 1; }
  std::size_t size() const { return weights_.size(); }
  double spacing() const { return dx_; }

  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t k) const { return weights_[k]; }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(j);
  }
  int ix(std::size_t k) const { return static_cast<int>(k % (n_ + 1)); }
  int iy(std::size_t k) const { return static_cast<int>(k / (n_ + 1)); }
  double x(std::size_t k) const { return ix(k) * dx_; }
  double y(std::size_t k) const { return dim_ == 2 ? iy(k) * dx_ : 0.0; }

  /// Evaluates fn(x, y) at every node (y = 0 in 1D).
  template <typename Fn>
  Field sample(Fn&& fn) const {
    Field out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fn(x(k), y(k));
    return out;
  }

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  int n_;
  double dx_;
  std::vector<double> weights_;
};

/// Throws std::invalid_argument unless dim is 1 or 2 and n_per_axis >= 2.
Grid make_grid(int dim, int n_per_axis);

/// Default resolution used by the reference experiments: 1000 (1D), 100 (2D).
int default_intervals(int dim);

/// Quadrature sum_k w_k f_k. Throws std::invalid_argument on size mismatch.
double integrate(std::span<const double> field, const Grid& grid);

/// Throws std::invalid_argument if field does not have one value per node.
void check_shape(std::span<const double> field, const Grid& grid,
                 const char* what);

}  // namespace mfg
