#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "srde/fft.hpp"
#include "srde/grid.hpp"

namespace srde {

enum class KernelKind { White, Riesz, OrnsteinUhlenbeck, Constant, CustomSpectral };

/// Spatial correlation f of the noise together with its spectral measure
///   mu = (2 pi)^{-d/2} int e^{-i xi.x} f(dx).
/// That (2 pi)^{-d/2} convention is used everywhere in the library.
class CorrelationKernel {
 public:
  using RadialDensity = std::function<double(double)>;

  static CorrelationKernel white(int dim);
  /// f(x) = |x|^{-alpha}, alpha in (0, d).
  static CorrelationKernel riesz(double alpha, int dim);
  /// f(x) = exp(-|x|^exponent), exponent in (0, 2].
  static CorrelationKernel ornstein_uhlenbeck(double exponent, int dim);
  /// f = 1; mu is a point mass at the origin.
  static CorrelationKernel constant(int dim);
  /// Radial spectral density |xi| -> mu(xi); must be nonnegative.
  static CorrelationKernel custom_spectral(RadialDensity density, int dim, std::string label = "custom");

  KernelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// alpha for Riesz, the exponent for OU, 0 otherwise.
  double parameter() const { return parameter_; }
  std::string name() const;

  /// f at radius r for kernels given by a function (not White, not custom).
  double correlation(double r) const;
  /// Power of r that f behaves like at the origin.
  double origin_exponent() const { return kind_ == KernelKind::Riesz ? -parameter_ : 0.0; }
  const RadialDensity& custom_density() const { return density_; }

 private:
  CorrelationKernel(KernelKind kind, int dim, double parameter);

  KernelKind kind_;
  int dim_;
  double parameter_ = 0;
  RadialDensity density_;
  std::string label_;
};

struct SpectralValue {
  double density = 0;
  bool atomic_at_zero = false;  // mu carries a point mass at xi = 0
};

/// d mu / d xi at the frequency xi.
SpectralValue spectral_density(const CorrelationKernel& kernel, std::span<const double> xi);
/// Same, by radius |xi|.
SpectralValue spectral_density_radial(const CorrelationKernel& kernel, double rho);
/// Mass of the atom at the origin (Constant kernel), zero otherwise.
double spectral_atom(const CorrelationKernel& kernel);
/// Riesz constant c(alpha, d) in mu = c |xi|^{alpha - d}.
double riesz_constant(double alpha, int dim);

/// Supremum of kappa with int mu(d xi) / (1 + |xi|^2)^{1 - kappa} < infinity (0 if none).
double dalang_sup_kappa(const CorrelationKernel& kernel);
/// The same threshold found numerically, by bisection on the divergence of the
/// dyadic shells of the Dalang integral.
double dalang_numeric_threshold(const CorrelationKernel& kernel);

struct NuKappa {
  double value = 0;
  bool infinite = false;
};

/// nu_kappa = int R_{2(1-kappa)}(x) f(dx).
NuKappa nu_kappa(const CorrelationKernel& kernel, double kappa);
/// nu_kappa by the spectral route (2 pi)^{-d/2} int mu(xi) (1 + |xi|^2)^{kappa - 1} d xi.
NuKappa nu_kappa_spectral(const CorrelationKernel& kernel, double kappa);

struct DalangReport {
  double kappa_max = 0;
  NuKappa nu;
  double kappa_used = 0;
  bool admissible = false;
  std::string fourier_convention = "mu = (2 pi)^{-d/2} int exp(-i xi.x) f(dx)";
};

DalangReport dalang_report(const CorrelationKernel& kernel, double kappa);

// ---------------------------------------------------------------------------

/// Counter-based RNG key: one independent normal stream per (path seed, step).
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

/// Spectral synthesis carrier for the noise on the periodic grid. Immutable.
class NoiseGrid {
 public:
  NoiseGrid(CorrelationKernel kernel, Grid grid, std::uint64_t seed);

  const CorrelationKernel& kernel() const { return kernel_; }
  const Grid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }

  /// sqrt of the covariance weight per unit time of every full-spectrum mode
  /// (row-major, n or n*n entries).
  const std::vector<double>& amplitudes() const { return amplitude_; }
  const RealFft& fft() const { return fft_; }

  /// Increment over a step of length dt for time-step index `step`.
  Field sample(double dt, std::uint64_t step) const;

 private:
  CorrelationKernel kernel_;
  Grid grid_;
  std::uint64_t seed_;
  std::vector<double> amplitude_;
  RealFft fft_;
};

/// Delta F over a step of length dt: Hermitian complex white noise in frequency
/// space, scaled by the grid amplitudes and sqrt(dt), inverse transformed.
Field sample_increment(const NoiseGrid& grid, double dt, RngKey key);

}  // namespace srde
