#include "srde/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "srde/errors.hpp"

namespace srde {

struct RealFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(const Grid& grid) : grid_(grid) {
  static std::map<std::pair<int, int>, std::shared_ptr<const Plans>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_pair(grid.dim, grid.n);
  if (auto it = cache.find(key); it != cache.end()) {
    plans_ = it->second;
    return;
  }
  auto plans = std::make_shared<Plans>();
  Field real(grid.size());
  Spectrum spec(spectrum_size());
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (grid.dim == 1) {
    plans->r2c = fftw_plan_dft_r2c_1d(grid.n, real.data(), cplx, flags);
    plans->c2r = fftw_plan_dft_c2r_1d(grid.n, cplx, real.data(), flags);
  } else {
    plans->r2c = fftw_plan_dft_r2c_2d(grid.n, grid.n, real.data(), cplx, flags);
    plans->c2r = fftw_plan_dft_c2r_2d(grid.n, grid.n, cplx, real.data(), flags);
  }
  if (!plans->r2c || !plans->c2r) throw Error("FFTW planning failed");
  cache.emplace(key, plans);
  plans_ = std::move(plans);
}

std::size_t RealFft::spectrum_size() const {
  const std::size_t half = std::size_t(grid_.n / 2 + 1);
  return grid_.dim == 1 ? half : std::size_t(grid_.n) * half;
}

void RealFft::forward(const Field& in, Spectrum& out) const {
  if (in.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
  Field scratch = in;  // r2c plans may not preserve input on all code paths
  out.assign(spectrum_size(), {});
  fftw_execute_dft_r2c(plans_->r2c, scratch.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(const Spectrum& in, Field& out) const {
  if (in.size() != spectrum_size()) throw InvalidArgument("spectrum size does not match grid");
  Spectrum scratch = in;  // c2r destroys its input
  out.assign(grid_.size(), 0.0);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace srde
