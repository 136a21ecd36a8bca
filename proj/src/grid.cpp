#include "mfg/grid.hpp"

#include <stdexcept>
#include <string>

namespace mfg {

Grid::Grid(int dim, int n) : dim_(dim), n_(n), dx_(1.0 / n) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("grid dimension must be 1 or 2, got " +
                                std::to_string(dim));
  }
  if (n < 2) {
    throw std::invalid_argument("grid needs at least 2 intervals per axis, got " +
                                std::to_string(n));
  }
  const auto per_axis = static_cast<std::size_t>(n + 1);
  if (dim == 1) {
    weights_.assign(per_axis, dx_);
    weights_.front() = weights_.back() = 0.5 * dx_;
  } else {
    weights_.assign(per_axis * per_axis, dx_ * dx_);
  }
}

Grid make_grid(int dim, int n_per_axis) { return Grid(dim, n_per_axis); }

int default_intervals(int dim) { return dim == 2 ? 100 : 1000; }

void check_shape(std::span<const double> field, const Grid& grid,
                 const char* what) {
  if (field.size() != grid.size()) {
    throw std::invalid_argument(std::string(what) + ": field has " +
                                std::to_string(field.size()) +
                                " values, grid has " +
                                std::to_string(grid.size()) + " nodes");
  }
}

double integrate(std::span<const double> field, const Grid& grid) {
  check_shape(field, grid, "integrate");
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) sum += w[k] * field[k];
  return sum;
}

}  // namespace mfg
