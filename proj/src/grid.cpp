#include "srde/grid.hpp"

#include <algorithm>
#include <cmath>

#include "srde/errors.hpp"

namespace srde {

Grid::Grid(int dim_, int n_, double length_) : dim(dim_), n(n_), length(length_) {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid dimension must be 1 or 2");
  if (n < 4 || n % 2 != 0) throw InvalidArgument("grid needs an even number of points per axis, at least 4");
  if (!(length > 0)) throw InvalidArgument("grid period must be positive");
}

std::array<double, 2> Grid::point(std::size_t flat) const {
  if (dim == 1) return {coordinate(int(flat)), 0.0};
  return {coordinate(int(flat / std::size_t(n))), coordinate(int(flat % std::size_t(n)))};
}

double sup_norm(const Field& u) {
  double s = 0;
  for (double x : u) s = std::max(s, std::abs(x));
  return s;
}

double max_value(const Field& u) { return u.empty() ? 0.0 : *std::max_element(u.begin(), u.end()); }

double min_value(const Field& u) { return u.empty() ? 0.0 : *std::min_element(u.begin(), u.end()); }

double lp_norm(const Field& u, double p, const Grid& grid) {
  if (p < 1) throw InvalidArgument("L_p norm needs p >= 1");
  double s = 0;
  for (double x : u) s += std::pow(std::abs(x), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

double positive_power_integral(const Field& u, double q, const Grid& grid) {
  double s = 0;
  for (double x : u)
    if (x > 0) s += std::pow(x, q);
  return s * grid.cell_volume();
}

}  // namespace srde
