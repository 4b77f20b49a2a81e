#include "srde/bessel.hpp"

#include <algorithm>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "srde/errors.hpp"

namespace srde {

namespace {

using std::numbers::pi;

// Root y > 0 of y^2 - a y - c = 0 (c >= 0), computed without cancellation.
double positive_root(double a, double c) {
  const double disc = std::sqrt(a * a + 4 * c);
  if (a >= 0) return 0.5 * (a + disc);
  return 2 * c / (disc - a);
}

// Boost 1.74's integrate() is not const-qualified; one instance per thread.
boost::math::quadrature::sinh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::sinh_sinh<double> q(10);
  return q;
}

}  // namespace

BesselKernel::BesselKernel(double order, int dim) : order_(order), dim_(dim) {
  if (!(order > 0) || !std::isfinite(order)) throw InvalidArgument("Bessel kernel order must be positive");
  if (dim != 1 && dim != 2) throw InvalidArgument("Bessel kernels are provided for d = 1, 2");
  prefactor_ = std::pow(4 * pi, -0.5 * dim) / std::tgamma(0.5 * order);
}

// (1 + |xi|^2)^{-n/2} = Gamma(n/2)^{-1} int t^{n/2-1} e^{-t} e^{-t |xi|^2} dt turns the
// inverse Fourier integral into a positive integral over the heat kernel:
//   R_n(r) = (4 pi)^{-d/2} / Gamma(n/2) int_0^inf t^{(n-d)/2-1} exp(-t - r^2/(4t)) dt.
// With t = exp(s*+u) centred on the peak of the integrand, sinh-sinh quadrature
// converges double-exponentially.
double BesselKernel::scaled_integral(double r, bool derivative) const {
  const double a = 0.5 * (order_ - dim_) - (derivative ? 1.0 : 0.0);
  const double c = 0.25 * r * r;
  const double y = positive_root(a, c);
  const double s0 = std::log(y);
  auto log_integrand = [&](double s) { return a * s - std::exp(s) - c * std::exp(-s); };
  const double peak = log_integrand(s0);
  auto f = [&](double u) {
    const double v = std::exp(log_integrand(s0 + u) - peak);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0;
  const double value = integrator().integrate(f, 1e-13, &err);
  if (!std::isfinite(value)) throw QuadratureError("Bessel kernel quadrature did not converge");
  const double scale = derivative ? -0.5 * r : 1.0;
  return scale * prefactor_ * value * std::exp(peak);
}

double BesselKernel::radial(double r) const {
  r = std::abs(r);
  if (r == 0 || (r < kSingularRadius && singular_at_origin())) {
    if (singular_at_origin())
      throw SingularInput("R_n is singular at the origin for n <= d");
    // Closed evaluation of the same integral at r = 0.
    return prefactor_ * std::tgamma(0.5 * (order_ - dim_));
  }
  return scaled_integral(r, false);
}

double BesselKernel::radial_derivative(double r) const {
  if (!(r > 0)) throw SingularInput("radial derivative requested at the origin");
  return scaled_integral(r, true);
}

double BesselKernel::segment_integral(double a, double b) const {
  if (dim_ != 1) throw InvalidArgument("segment integrals are defined for d = 1");
  if (b < a) return -segment_integral(b, a);
  if (a < 0 && b > 0) return segment_integral(0, -a) + segment_integral(0, b);
  if (b <= 0) return segment_integral(-b, -a);
  // 0 <= a < b. int_a^b (4 pi t)^{-1/2} e^{-y^2/4t} dy = (erfc(A) - erfc(B)) / 2.
  const double n2 = 0.5 * order_;
  const double s0 = std::log(std::max(0.25 * b * b, 1e-300));
  auto f = [&](double u) {
    const double s = s0 + u;
    const double t = std::exp(s);
    const double ia = 0.5 * a / std::sqrt(t), ib = 0.5 * b / std::sqrt(t);
    const double bracket = 0.5 * (std::erfc(ia) - std::erfc(ib));
    const double v = std::exp(n2 * s - t) * bracket;
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0;
  const double value = integrator().integrate(f, 1e-13, &err);
  return value / std::tgamma(n2);
}

double BesselKernel::operator()(std::span<const double> x) const {
  double r2 = 0;
  for (double xi : x) r2 += xi * xi;
  return radial(std::sqrt(r2));
}

double bessel_eval(const BesselKernel& kernel, std::span<const double> x) {
  if (int(x.size()) != kernel.dim()) throw InvalidArgument("point dimension does not match the kernel");
  return kernel(x);
}

// ---------------------------------------------------------------------------

RadialTable::RadialTable(const BesselKernel& kernel, int nodes) : kernel_(kernel) {
  if (nodes < 16) throw InvalidArgument("radial table needs at least 16 nodes");
  const double lo = std::log(kMinRadius), hi = std::log(kMaxRadius);
  step_ = (hi - lo) / (nodes - 1);
  log_r_.resize(nodes);
  log_v_.resize(nodes);
  slope_.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double s = lo + step_ * i;
    const double r = std::exp(s);
    const double v = kernel_.radial(r);
    log_r_[i] = s;
    log_v_[i] = std::log(v);
    slope_[i] = r * kernel_.radial_derivative(r) / v;
  }
  // Fritsch-Carlson limiter: keeps the interpolant monotone between nodes.
  for (int i = 0; i + 1 < nodes; ++i) {
    const double delta = (log_v_[i + 1] - log_v_[i]) / step_;
    if (delta == 0) {
      slope_[i] = slope_[i + 1] = 0;
      continue;
    }
    const double alpha = slope_[i] / delta, beta = slope_[i + 1] / delta;
    const double norm = alpha * alpha + beta * beta;
    if (alpha < 0) slope_[i] = 0;
    if (beta < 0) slope_[i + 1] = 0;
    if (norm > 9) {
      const double tau = 3 / std::sqrt(norm);
      slope_[i] = tau * alpha * delta;
      slope_[i + 1] = tau * beta * delta;
    }
  }
}

double RadialTable::interpolate_log(double s) const {
  const double pos = (s - log_r_.front()) / step_;
  std::size_t i = std::size_t(std::clamp(pos, 0.0, double(log_r_.size() - 2)));
  const double t = pos - double(i);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * log_v_[i] + h10 * step_ * slope_[i] + h01 * log_v_[i + 1] + h11 * step_ * slope_[i + 1];
}

double RadialTable::operator()(double r) const {
  r = std::abs(r);
  if (r < kMinRadius || r > kMaxRadius) return kernel_.radial(r);
  return std::exp(interpolate_log(std::log(r)));
}

std::shared_ptr<const RadialTable> radial_table(double order, int dim) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::shared_ptr<const RadialTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(order, dim);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto table = std::make_shared<const RadialTable>(BesselKernel(order, dim));
  cache.emplace(key, table);
  return table;
}

// ---------------------------------------------------------------------------

// (R*R)(x) = 2 int_{y <= x/2} R(y) R(x - y) dy for x >= 0 by symmetry y -> x - y, so the
// second factor stays away from its singularity. Cells are aligned to y = 0; near the
// origin each cell carries the exact integral of R, farther out the midpoint value.
double self_convolution(const RadialTable& table, double x, double h) {
  const BesselKernel& kernel = table.kernel();
  if (kernel.dim() != 1) throw InvalidArgument("grid convolution is implemented for d = 1");
  x = std::abs(x);
  const double upper = 0.5 * x;
  const double reach = 45.0 + x;
  const long first = long(std::floor(-reach / h));
  const double near = 2.0;
  double sum = 0, comp = 0;
  for (long j = first;; ++j) {
    const double lo = double(j) * h;
    if (lo >= upper) break;
    const double hi = std::min(double(j + 1) * h, upper);
    const double mid = 0.5 * (lo + hi);
    const double weight =
        std::abs(mid) < near ? kernel.segment_integral(lo, hi) : table(mid) * (hi - lo);
    const double term = weight * table(x - mid);
    // Neumaier summation keeps the 10^5-term sum reproducible to the last digits.
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return 2 * (sum + comp);
}

double convolution_identity_residual(double order, int dim, std::span<const double> points, double h,
                                     double tolerance) {
  if (!(order > 0)) throw InvalidArgument("kernel order must be positive");
  if (dim != 1) throw InvalidArgument("convolution identity check is implemented for d = 1");
  if (!(h > 0)) throw InvalidArgument("grid spacing must be positive");
  auto table = radial_table(order, dim);
  const BesselKernel doubled(2 * order, dim);
  double residual = 0;
  for (double x : points) {
    if (std::abs(x) < kSingularRadius && order <= dim)
      throw SingularInput("x = 0 excluded: R_n * R_n and R_2n both diverge or the convolution is singular");
    const double fine = self_convolution(*table, x, h);
    const double coarse = self_convolution(*table, x, 2 * h);
    const double error_estimate = std::abs(coarse - fine);
    if (error_estimate > tolerance)
      throw ResolutionError("grid spacing too coarse for the requested tolerance");
    residual = std::max(residual, std::abs(fine - doubled.radial(x)));
  }
  return residual;
}

}  // namespace srde
