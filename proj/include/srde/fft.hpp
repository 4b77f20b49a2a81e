#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "srde/grid.hpp"

namespace srde {

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-half-complex transforms on a Grid, unnormalised (FFTW convention).
/// Plans are created once per (dim, n) and shared; execute calls are thread-safe.
class RealFft {
 public:
  explicit RealFft(const Grid& grid);

  /// Number of stored complex coefficients: n/2+1 (d=1) or n*(n/2+1) (d=2).
  std::size_t spectrum_size() const;

  void forward(const Field& in, Spectrum& out) const;
  /// `in` is copied; the caller's spectrum is left untouched.
  void inverse(const Spectrum& in, Field& out) const;

  const Grid& grid() const { return grid_; }

 private:
  struct Plans;
  Grid grid_;
  std::shared_ptr<const Plans> plans_;
};

/// Signed integer frequency of index i on an n-point axis: 0..n/2, then -(n/2-1)..-1.
inline int signed_frequency(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace srde
