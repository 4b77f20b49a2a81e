#include "srde/noise.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "srde/bessel.hpp"
#include "srde/errors.hpp"
#include "srde/fft.hpp"

namespace srde {

namespace {

using std::numbers::pi;

double surface_measure(int d) { return d == 1 ? 2.0 : 2.0 * pi; }

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("correlation kernels are provided for d = 1, 2");
}

boost::math::quadrature::ooura_fourier_cos<double>& fourier_cos() {
  thread_local boost::math::quadrature::ooura_fourier_cos<double> q(1e-12, 10);
  return q;
}

boost::math::quadrature::exp_sinh<double>& half_line() {
  thread_local boost::math::quadrature::exp_sinh<double> q(12);
  return q;
}

boost::math::quadrature::tanh_sinh<double>& segment() {
  thread_local boost::math::quadrature::tanh_sinh<double> q(15);
  return q;
}

// mu for f(x) = exp(-|x|^e): a cosine transform in d = 1; in d = 2 the transform
// of the projection P(s) = int f(sqrt(s^2 + y^2)) dy along a line through 0.
double ou_density(double exponent, int dim, double rho) {
  auto f = [exponent](double r) { return std::exp(-std::pow(r, exponent)); };
  if (dim == 1) {
    if (rho == 0) return 2 * std::tgamma(1 + 1 / exponent) / std::sqrt(2 * pi);
    auto [value, err] = fourier_cos().integrate(f, rho);
    return std::max(0.0, 2 * value / std::sqrt(2 * pi));
  }
  auto projection = [&](double s) {
    auto g = [&](double y) { return f(std::sqrt(s * s + y * y)); };
    return 2 * half_line().integrate(g, 1e-12);
  };
  double value = 0;
  if (rho == 0) {
    value = half_line().integrate(projection, 1e-10);
  } else {
    value = fourier_cos().integrate(projection, rho).first;
  }
  return std::max(0.0, 2 * value / (2 * pi));
}

// Integral of the radial density g over the shell [a, 2a] in log scale.
template <class G>
double shell_integral(G&& g, double a) {
  auto h = [&](double s) {
    const double r = std::exp(s);
    return g(r) * r;
  };
  return boost::math::quadrature::gauss<double, 30>::integrate(h, std::log(a), std::log(2 * a));
}

}  // namespace

CorrelationKernel::CorrelationKernel(KernelKind kind, int dim, double parameter)
    : kind_(kind), dim_(dim), parameter_(parameter) {
  check_dim(dim);
}

CorrelationKernel CorrelationKernel::white(int dim) { return CorrelationKernel(KernelKind::White, dim, 0); }

CorrelationKernel CorrelationKernel::riesz(double alpha, int dim) {
  check_dim(dim);
  if (!(alpha > 0 && alpha < dim)) throw InvalidArgument("Riesz exponent must lie in (0, d)");
  return CorrelationKernel(KernelKind::Riesz, dim, alpha);
}

CorrelationKernel CorrelationKernel::ornstein_uhlenbeck(double exponent, int dim) {
  check_dim(dim);
  if (!(exponent > 0 && exponent <= 2)) throw InvalidArgument("OU exponent must lie in (0, 2]");
  return CorrelationKernel(KernelKind::OrnsteinUhlenbeck, dim, exponent);
}

CorrelationKernel CorrelationKernel::constant(int dim) { return CorrelationKernel(KernelKind::Constant, dim, 0); }

CorrelationKernel CorrelationKernel::custom_spectral(RadialDensity density, int dim, std::string label) {
  if (!density) throw InvalidArgument("custom spectral kernel needs a density");
  CorrelationKernel k(KernelKind::CustomSpectral, dim, 0);
  k.density_ = std::move(density);
  k.label_ = std::move(label);
  return k;
}

std::string CorrelationKernel::name() const {
  switch (kind_) {
    case KernelKind::White: return "white";
    case KernelKind::Riesz: return "riesz";
    case KernelKind::OrnsteinUhlenbeck: return "ou";
    case KernelKind::Constant: return "constant";
    case KernelKind::CustomSpectral: return label_;
  }
  return "unknown";
}

double CorrelationKernel::correlation(double r) const {
  r = std::abs(r);
  switch (kind_) {
    case KernelKind::Riesz:
      if (r == 0) throw SingularInput("Riesz correlation is singular at the origin");
      return std::pow(r, -parameter_);
    case KernelKind::OrnsteinUhlenbeck: return std::exp(-std::pow(r, parameter_));
    case KernelKind::Constant: return 1.0;
    default: throw InvalidArgument("kernel " + name() + " is not given by a function");
  }
}

double riesz_constant(double alpha, int dim) {
  return std::pow(2.0, 0.5 * dim - alpha) * std::tgamma(0.5 * (dim - alpha)) / std::tgamma(0.5 * alpha);
}

SpectralValue spectral_density_radial(const CorrelationKernel& kernel, double rho) {
  rho = std::abs(rho);
  const int d = kernel.dim();
  switch (kernel.kind()) {
    case KernelKind::White: return {std::pow(2 * pi, -0.5 * d), false};
    case KernelKind::Riesz:
      if (rho == 0) throw SingularInput("Riesz spectral density is singular at xi = 0");
      return {riesz_constant(kernel.parameter(), d) * std::pow(rho, kernel.parameter() - d), false};
    case KernelKind::OrnsteinUhlenbeck: return {ou_density(kernel.parameter(), d, rho), false};
    case KernelKind::Constant: return {0.0, true};
    case KernelKind::CustomSpectral: {
      const double v = kernel.custom_density()(rho);
      if (!(v >= 0)) throw InvalidArgument("custom spectral density must be nonnegative");
      return {v, false};
    }
  }
  return {};
}

SpectralValue spectral_density(const CorrelationKernel& kernel, std::span<const double> xi) {
  if (int(xi.size()) != kernel.dim()) throw InvalidArgument("frequency dimension does not match the kernel");
  double r2 = 0;
  for (double x : xi) r2 += x * x;
  return spectral_density_radial(kernel, std::sqrt(r2));
}

double spectral_atom(const CorrelationKernel& kernel) {
  return kernel.kind() == KernelKind::Constant ? std::pow(2 * pi, 0.5 * kernel.dim()) : 0.0;
}

double dalang_sup_kappa(const CorrelationKernel& kernel) {
  switch (kernel.kind()) {
    case KernelKind::White: return std::max(0.0, 1.0 - 0.5 * kernel.dim());
    case KernelKind::Riesz: return std::min(1.0, 1.0 - 0.5 * kernel.parameter());
    case KernelKind::OrnsteinUhlenbeck:
    case KernelKind::Constant: return 1.0;
    case KernelKind::CustomSpectral: return dalang_numeric_threshold(kernel);
  }
  return 0;
}

double dalang_numeric_threshold(const CorrelationKernel& kernel) {
  const int d = kernel.dim();
  // Converges iff consecutive dyadic shells shrink: far out in frequency for the
  // spectral form, near the origin for the real-space form.
  std::function<bool(double)> converges;
  if (kernel.kind() == KernelKind::OrnsteinUhlenbeck || kernel.kind() == KernelKind::Constant) {
    converges = [&](double kappa) {
      const double power = 2 - 2 * kappa - d;
      if (1 - kappa > 0.5 * d) return true;
      auto g = [&](double r) { return std::pow(r, power + d - 1) * kernel.correlation(r); };
      const double a = std::ldexp(1.0, -24);
      return shell_integral(g, a / 2) < shell_integral(g, a);
    };
  } else {
    converges = [&](double kappa) {
      auto g = [&](double rho) {
        return std::pow(rho, d - 1) * spectral_density_radial(kernel, rho).density *
               std::pow(1 + rho * rho, kappa - 1);
      };
      const double a = std::ldexp(1.0, 24);
      return shell_integral(g, 2 * a) < shell_integral(g, a);
    };
  }
  if (converges(1.0)) return 1.0;
  if (!converges(1e-9)) return 0.0;
  double lo = 1e-9, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (converges(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NuKappa nu_kappa(const CorrelationKernel& kernel, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw InvalidArgument("nu_kappa needs kappa in (0, 1)");
  if (kappa >= dalang_sup_kappa(kernel)) return {0, true};
  const int d = kernel.dim();
  const double order = 2 * (1 - kappa);
  double value = 0;
  switch (kernel.kind()) {
    case KernelKind::White: value = BesselKernel(order, d).radial(0); break;
    case KernelKind::CustomSpectral: return nu_kappa_spectral(kernel, kappa);
    default: {
      auto table = radial_table(order, d);
      value = table->integrate_against([&](double r) { return kernel.correlation(r); },
                                       kernel.origin_exponent());
    }
  }
  if (!std::isfinite(value)) throw QuadratureError("nu_kappa quadrature did not converge");
  return {value, false};
}

NuKappa nu_kappa_spectral(const CorrelationKernel& kernel, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw InvalidArgument("nu_kappa needs kappa in (0, 1)");
  if (kappa >= dalang_sup_kappa(kernel)) return {0, true};
  const int d = kernel.dim();
  auto g = [&](double rho) {
    if (rho <= 0 || !std::isfinite(rho)) return 0.0;
    const double v = surface_measure(d) * std::pow(rho, d - 1) * spectral_density_radial(kernel, rho).density *
                     std::pow(1 + rho * rho, kappa - 1);
    return std::isfinite(v) ? v : 0.0;
  };
  double inner = 0, outer = 0;
  if (kernel.kind() != KernelKind::Constant) {
    inner = segment().integrate(g, 0.0, 1.0, 1e-12);
    // rho = e^s on [1, inf): the slowly decaying power tail becomes exponential.
    outer = half_line().integrate(
        [&](double s) {
          const double rho = std::exp(s);
          return std::isfinite(rho) ? g(rho) * rho : 0.0;
        },
        1e-12);
  }
  const double value = std::pow(2 * pi, -0.5 * d) * (inner + outer + spectral_atom(kernel));
  if (!std::isfinite(value)) throw QuadratureError("spectral nu_kappa quadrature did not converge");
  return {value, false};
}

DalangReport dalang_report(const CorrelationKernel& kernel, double kappa) {
  DalangReport report;
  report.kappa_max = dalang_sup_kappa(kernel);
  report.kappa_used = kappa;
  report.nu = nu_kappa(kernel, kappa);
  report.admissible = kappa < report.kappa_max && !report.nu.infinite;
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(RngKey key) { return splitmix64(splitmix64(key.seed) ^ key.step); }

}  // namespace

NoiseGrid::NoiseGrid(CorrelationKernel kernel, Grid grid, std::uint64_t seed)
    : kernel_(std::move(kernel)), grid_(grid), seed_(seed), fft_(grid) {
  if (kernel_.dim() != grid_.dim) throw InvalidArgument("kernel and grid dimensions differ");
  const int n = grid_.n, d = grid_.dim;
  const double k1 = 2 * pi / grid_.length;  // lowest nonzero frequency
  const double mode_volume = std::pow(k1, d);
  const double norm = std::pow(2 * pi, -0.5 * d) * mode_volume;
  amplitude_.assign(grid_.size(), 0.0);

  // Covariance weight of a mode with integer radius^2 = q.
  std::map<long, double> weights;
  auto weight = [&](long q) {
    if (auto it = weights.find(q); it != weights.end()) return it->second;
    double w = 0;
    if (q == 0) {
      switch (kernel_.kind()) {
        case KernelKind::Constant: w = 1.0; break;
        case KernelKind::Riesz: {
          const double alpha = kernel_.parameter();
          const double c = riesz_constant(alpha, d);
          if (d == 1) {
            // Zero mode carries the lattice-sum correction -2 zeta(1-alpha): the
            // periodic covariance then matches |r|^{-alpha} for r << L.
            w = norm * (-2 * std::riemann_zeta(1 - alpha)) * c * std::pow(k1, alpha - 1);
          } else {
            w = norm * c * std::pow(k1, alpha - d);  // clipped at the lowest frequency
          }
          break;
        }
        default: w = norm * spectral_density_radial(kernel_, 0.0).density;
      }
    } else if (kernel_.kind() != KernelKind::Constant) {
      w = norm * spectral_density_radial(kernel_, k1 * std::sqrt(double(q))).density;
    }
    weights.emplace(q, w);
    return w;
  };

  for (std::size_t i = 0; i < grid_.size(); ++i) {
    long q = 0;
    if (d == 1) {
      const long k = signed_frequency(int(i), n);
      q = k * k;
    } else {
      const long a = signed_frequency(int(i / std::size_t(n)), n);
      const long b = signed_frequency(int(i % std::size_t(n)), n);
      q = a * a + b * b;
    }
    amplitude_[i] = std::sqrt(weight(q));
  }
}

Field NoiseGrid::sample(double dt, std::uint64_t step) const { return sample_increment(*this, dt, {seed_, step}); }

Field sample_increment(const NoiseGrid& noise, double dt, RngKey key) {
  if (!(dt > 0)) throw InvalidArgument("time step must be positive");
  const Grid& grid = noise.grid();
  const int n = grid.n;
  const std::size_t total = grid.size();
  const auto& amp = noise.amplitudes();

  std::mt19937_64 engine(stream_seed(key));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sdt = std::sqrt(dt);

  auto partner = [&](std::size_t i) -> std::size_t {
    if (grid.dim == 1) return (std::size_t(n) - i) % std::size_t(n);
    const std::size_t a = i / std::size_t(n), b = i % std::size_t(n);
    return ((std::size_t(n) - a) % std::size_t(n)) * std::size_t(n) + (std::size_t(n) - b) % std::size_t(n);
  };

  // Pairs (k, -k) are drawn in increasing order of the smaller index; self-paired
  // modes (zero, Nyquist) get a real draw.
  Spectrum full(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t p = partner(i);
    if (p < i) continue;
    const double s = amp[i] * sdt;
    if (p == i) {
      full[i] = {s * normal(engine), 0.0};
    } else {
      const double re = normal(engine), im = normal(engine);
      full[i] = {s * re * std::numbers::sqrt2 / 2, s * im * std::numbers::sqrt2 / 2};
      full[p] = std::conj(full[i]);
    }
  }

  const RealFft& fft = noise.fft();
  Spectrum half(fft.spectrum_size());
  const std::size_t cols = std::size_t(n / 2 + 1);
  if (grid.dim == 1) {
    std::copy_n(full.begin(), cols, half.begin());
  } else {
    for (std::size_t a = 0; a < std::size_t(n); ++a)
      for (std::size_t b = 0; b < cols; ++b) half[a * cols + b] = full[a * std::size_t(n) + b];
  }
  Field out;
  fft.inverse(half, out);
  return out;
}

}  // namespace srde
