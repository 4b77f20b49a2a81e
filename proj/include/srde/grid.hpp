#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace srde {

using Field = std::vector<double>;

/// Uniform periodic grid on the torus [-L/2, L/2)^d, d in {1, 2}.
/// Index layout is row-major with the last axis fastest.
struct Grid {
  int dim = 1;
  int n = 256;        // points per axis
  double length = 16; // period L

  Grid() = default;
  Grid(int dim_, int n_, double length_);

  std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n); }
  double dx() const { return length / n; }
  double cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }

  double coordinate(int i) const { return -0.5 * length + i * dx(); }
  std::array<double, 2> point(std::size_t flat) const;

  bool operator==(const Grid&) const = default;
};

/// Neumaier compensated sum; reductions use it so results are reproducible.
struct CompensatedSum {
  double sum = 0, comp = 0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

double sup_norm(const Field& u);
double max_value(const Field& u);
double min_value(const Field& u);
/// Grid L_p norm (sum |u|^p * cell volume)^(1/p).
double lp_norm(const Field& u, double p, const Grid& grid);
/// Grid integral of the positive part raised to q.
double positive_power_integral(const Field& u, double q, const Grid& grid);

}  // namespace srde
