#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "srde/bessel.hpp"
#include "srde/errors.hpp"

using namespace srde;

TEST_SUITE("bessel_kernels") {
  TEST_CASE("order and dimension are validated") {
    CHECK_THROWS_AS(BesselKernel(0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(BesselKernel(-1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(BesselKernel(1.0, 3), InvalidArgument);
  }

  TEST_CASE("singular origin is refused, regular origin is finite") {
    const BesselKernel k1(1.0, 1), k05(0.5, 1), k2(2.0, 1);
    const double zero[] = {0.0};
    CHECK_THROWS_AS(bessel_eval(k1, zero), SingularInput);
    CHECK_THROWS_AS(bessel_eval(k05, zero), SingularInput);
    const double v = bessel_eval(k2, zero);
    CHECK(std::isfinite(v));
    // R_2 in d = 1 is exp(-|x|) / 2.
    CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
  }

  TEST_CASE("n = 0.5, d = 1 diverges like |x|^{-1/2}") {
    const BesselKernel k(0.5, 1);
    double prev = 0;
    for (double x : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const double ratio = k.radial(x) / std::pow(x, -0.5);
      CHECK(ratio > 0);
      CHECK(ratio < 1);
      if (prev > 0) CHECK(std::abs(ratio - prev) < 0.05);
      prev = ratio;
    }
  }

  TEST_CASE("n = 1, d = 1, x = 0.3 matches the Fourier integral oracle") {
    const BesselKernel k(1.0, 1);
    const double oracle = oracle::bessel_fourier_1d(1.0, 0.3);
    CHECK(std::abs(k.radial(0.3) / oracle - 1) < 1e-6);
  }

  TEST_CASE("agreement with the Macdonald closed form") {
    for (int d : {1, 2})
      for (double n : {0.5, 0.8, 1.2, 2.0, 3.0})
        for (double r : {1e-4, 0.01, 0.3, 1.0, 5.0, 20.0}) {
          const BesselKernel k(n, d);
          CHECK(std::abs(k.radial(r) / oracle::bessel_closed_form(n, d, r) - 1) < 1e-8);
        }
  }

  TEST_CASE("symmetry, monotonicity and exponential tail") {
    const BesselKernel k(0.8, 1);
    for (double x : {0.1, 0.7, 3.0}) {
      const double p[] = {x}, m[] = {-x};
      CHECK(bessel_eval(k, p) == bessel_eval(k, m));
    }
    const BesselKernel k2(1.3, 2);
    double prev = INFINITY;
    for (double r = 0.01; r < 10; r *= 1.3) {
      const double v = k2.radial(r);
      CHECK(v < prev);
      prev = v;
    }
    for (double n : {0.5, 1.2, 3.0}) {
      const BesselKernel kk(n, 1);
      const double C = kk.radial(2.0) * std::exp(1.0);
      for (double r = 2; r < 40; r += 0.25) CHECK(kk.radial(r) <= C * std::exp(-r / 2) * (1 + 1e-12));
    }
  }

  TEST_CASE("kernel integrates to one") {
    for (double n : {0.6, 1.5, 3.0}) {
      auto t = radial_table(n, 1);
      CHECK(t->integrate_against([](double) { return 1.0; }, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    }
    auto t2 = radial_table(1.4, 2);
    CHECK(t2->integrate_against([](double) { return 1.0; }, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("radial table interpolation") {
    const BesselKernel k(0.8, 1);
    auto t = radial_table(0.8, 1);
    for (double r : {2e-6, 1e-3, 0.37, 4.2, 33.0}) CHECK(std::abs((*t)(r) / k.radial(r) - 1) < 1e-7);
  }

  TEST_CASE("semigroup identity R_n * R_n = R_2n") {
    const std::vector<double> pts{0.5, 1.0, 2.0};
    CHECK(convolution_identity_residual(1.2, 1, pts) <= 1e-3);
    const std::vector<double> origin{0.0};
    CHECK(convolution_identity_residual(3.0, 1, origin) <= 1e-3);
    CHECK_THROWS_AS(convolution_identity_residual(1.0, 1, origin), SingularInput);
  }

  TEST_CASE("an unresolvable convolution grid is reported") {
    const std::vector<double> pts{0.5};
    CHECK_THROWS_AS(convolution_identity_residual(0.3, 1, pts, 0.25, 1e-6), ResolutionError);
  }
}
