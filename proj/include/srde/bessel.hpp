#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace srde {

/// Bessel potential kernel R_n on R^d (d = 1, 2): the convolution kernel of
/// (1 - Laplacian)^{-n/2}, normalised so that its integral is one.
class BesselKernel {
 public:
  BesselKernel(double order, int dim);

  double order() const { return order_; }
  int dim() const { return dim_; }
  /// True when R_n is unbounded at the origin (n <= d).
  bool singular_at_origin() const { return order_ <= dim_; }

  /// R_n at radius r, by quadrature. Refuses r < 1e-6 for singular orders.
  double radial(double r) const;
  /// dR_n/dr at r > 0.
  double radial_derivative(double r) const;
  /// Integral of R_n over the segment [a, b] of the real line (d = 1 only).
  double segment_integral(double a, double b) const;

  double operator()(std::span<const double> x) const;

 private:
  double scaled_integral(double r, bool derivative) const;

  double order_;
  int dim_;
  double prefactor_;  // (4 pi)^{-d/2} / Gamma(n/2)
};

/// Radii below this are refused for singular kernels.
inline constexpr double kSingularRadius = 1e-6;

double bessel_eval(const BesselKernel& kernel, std::span<const double> x);

/// Log-spaced radial table of R_n with monotone cubic interpolation in
/// (log r, log R). Immutable once built; share through radial_table().
class RadialTable {
 public:
  static constexpr double kMinRadius = kSingularRadius;
  static constexpr double kMaxRadius = 60.0;

  explicit RadialTable(const BesselKernel& kernel, int nodes = 1400);

  const BesselKernel& kernel() const { return kernel_; }
  double operator()(double r) const;

  /// Integral over R^d of R_n(|x|) g(|x|) dx, where g behaves like r^{g_exponent}
  /// near the origin. Small radii are closed with the local power law.
  template <class G>
  double integrate_against(G&& g, double g_exponent) const;

  const std::vector<double>& log_radii() const { return log_r_; }
  const std::vector<double>& log_values() const { return log_v_; }
  const std::vector<double>& log_slopes() const { return slope_; }

 private:
  double interpolate_log(double log_r) const;

  BesselKernel kernel_;
  std::vector<double> log_r_, log_v_, slope_;
  double step_;
};

/// Shared table for (order, dim); built once, then reused by all callers.
std::shared_ptr<const RadialTable> radial_table(double order, int dim);

/// max over points of |(R_n * R_n)(x) - R_{2n}(x)|, with the convolution done
/// on a grid of spacing h (d = 1). Throws ResolutionError when the grid
/// cannot reach `tolerance` (estimated by halving the resolution).
double convolution_identity_residual(double order, int dim, std::span<const double> points,
                                     double h = 1.0 / 1024, double tolerance = 1e-3);

/// Grid convolution (R_n * R_n)(x) for d = 1.
double self_convolution(const RadialTable& table, double x, double h);

// ---------------------------------------------------------------------------

template <class G>
double RadialTable::integrate_against(G&& g, double g_exponent) const {
  const int d = kernel_.dim();
  const double surface = d == 1 ? 2.0 : 2.0 * 3.14159265358979323846;
  // Composite Simpson in s = log r over the table range.
  const std::size_t n = log_r_.size();
  const int sub = 4;
  const std::size_t panels = (n - 1) * sub;  // even
  const double hs = step_ / sub;
  double sum = 0;
  for (std::size_t i = 0; i <= panels; ++i) {
    const double s = log_r_.front() + hs * double(i);
    const double r = std::exp(s);
    const double f = std::exp(interpolate_log(s) + d * s) * g(r);
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f;
  }
  sum *= hs / 3.0;
  // Closure on [0, r_min] with the two leading terms of R_n at the origin,
  // A r^{p1} + B r^{p2} (A log(1/r) + B when n = d), fitted at two nodes.
  const double n_minus_d = kernel_.order() - d;
  const double r0 = std::exp(log_r_.front());
  const double r1 = std::exp(log_r_[8]);
  const double v0 = std::exp(log_v_.front()), v1 = std::exp(log_v_[8]);
  const double e = g_exponent + d;
  double tail = 0;
  if (std::abs(n_minus_d) < 1e-12) {
    const double a = (v0 - v1) / std::log(r1 / r0);
    const double b = v0 - a * std::log(1 / r0);
    if (e <= 0) return std::numeric_limits<double>::infinity();
    // int_0^r0 (a log(1/r) + b) r^{e-1} dr
    tail = std::pow(r0, e) * (a * (std::log(1 / r0) / e + 1 / (e * e)) + b / e);
  } else {
    const double p1 = std::min(n_minus_d, 0.0);
    const double p2 = n_minus_d < 0 ? 0.0 : std::min(n_minus_d, 2.0);
    const double m00 = std::pow(r0, p1), m01 = std::pow(r0, p2);
    const double m10 = std::pow(r1, p1), m11 = std::pow(r1, p2);
    const double det = m00 * m11 - m01 * m10;
    const double a = (v0 * m11 - m01 * v1) / det;
    const double b = (m00 * v1 - v0 * m10) / det;
    if (p1 + e <= 0) return std::numeric_limits<double>::infinity();
    tail = a * std::pow(r0, p1 + e) / (p1 + e) + b * std::pow(r0, p2 + e) / (p2 + e);
  }
  tail *= g(r0) * std::pow(r0, -g_exponent);
  return surface * (sum + tail);
}

}  // namespace srde
