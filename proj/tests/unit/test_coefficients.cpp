#include <cmath>
#include <random>

#include "doctest.h"
#include "srde/coefficients.hpp"
#include "srde/errors.hpp"

using namespace srde;

namespace {
SampleLattice lattice(int d) { return SampleLattice::regular(d, 8, d == 1 ? 33 : 9, {0.0, 0.5, 1.0}); }
}

TEST_SUITE("coefficients") {
  TEST_CASE("identity preset passes with nonnegative margins") {
    for (int d : {1, 2}) {
      const auto rep = validate(CoefficientSet::identity(d), lattice(d));
      CHECK(rep.pass);
      for (const auto& c : rep.checks) CHECK(c.margin >= 0);
      CHECK_FALSE(rep.symmetrized);
      CHECK_FALSE(rep.outside_theorem);
    }
  }

  TEST_CASE("zero dissipation violates the lower bound on b_bar") {
    auto co = CoefficientSet::identity(1);
    co.b_bar = [](double, const Point2&) { return 0.0; };
    const auto rep = validate(co, lattice(1));
    CHECK_FALSE(rep.pass);
    bool found = false;
    for (const auto& c : rep.checks)
      if (c.id == "3.2") {
        found = true;
        CHECK_FALSE(c.pass);
        CHECK(c.margin == doctest::Approx(-1.0));
      }
    CHECK(found);
    try {
      validate_or_throw(co, lattice(1));
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.inequality() == "3.2");
      CHECK_FALSE(e.location().empty());
    }
  }

  TEST_CASE("stress flag waives dissipativity and sets the banner") {
    const auto co = CoefficientSet::identity(1).without_dissipation();
    const auto rep = validate(co, lattice(1));
    CHECK(rep.pass);
    CHECK(rep.outside_theorem);
    CHECK(rep.banner == "OUTSIDE-THEOREM");
  }

  TEST_CASE("diag(1 + 0.5 sin x) with K = 2 passes") {
    auto co = CoefficientSet::identity(1);
    co.a = [](double, const Point2& x) { return Matrix2{1 + 0.5 * std::sin(x[0]), 0, 0, 0}; };
    co.K = 2;
    const auto rep = validate(co, lattice(1));
    CHECK(rep.pass);
    const auto& lo = rep.checks[0];
    const auto& hi = rep.checks[1];
    CHECK(lo.worst >= 0.5 - 1e-12);
    CHECK(hi.worst <= 1.5 + 1e-12);
    CHECK(lo.worst < 0.51);
    CHECK(hi.worst > 1.49);
  }

  TEST_CASE("C^2 bound catches large curvature") {
    auto co = CoefficientSet::identity(1);
    co.c = [](double, const Point2& x) { return 0.1 * std::sin(10 * x[0]); };  // c'' up to 10
    co.K = 2;
    co.a = [](double, const Point2&) { return Matrix2{1, 0, 0, 1}; };
    const auto rep = validate(co, lattice(1));
    CHECK_FALSE(rep.pass);
    bool found = false;
    for (const auto& c : rep.checks)
      if (c.id == "3.3:c") found = !c.pass;
    CHECK(found);
  }

  TEST_CASE("symmetrisation is reported") {
    auto co = CoefficientSet::identity(2);
    co.a = [](double, const Point2&) { return Matrix2{1, 0.2, 0.0, 1}; };
    co.K = 2;
    const auto rep = validate(co, lattice(2));
    CHECK(rep.symmetrized);
    CHECK(rep.pass);
  }

  TEST_CASE("variable-demo preset passes with K = 2") {
    for (int d : {1, 2}) {
      const auto co = CoefficientSet::preset("variable-demo", d, 16);
      CHECK(co.K == 2);
      CHECK(validate(co, lattice(d)).pass);
    }
    CHECK_THROWS_AS(CoefficientSet::preset("nope", 1, 16), InvalidArgument);
  }

  TEST_CASE("validate is deterministic") {
    const auto co = CoefficientSet::variable_demo(1, 16);
    const auto a = validate(co, lattice(1)), b = validate(co, lattice(1));
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].worst == b.checks[i].worst);
      CHECK(a.checks[i].margin == b.checks[i].margin);
      CHECK(a.checks[i].x == b.checks[i].x);
    }
  }

  TEST_CASE("psi weight values") {
    const double zero[] = {0.0};
    CHECK(psi_weight(3, zero) == 1);
    const double one[] = {1.0};
    CHECK(psi_weight(1, one) == doctest::Approx(0.64805).epsilon(1e-5));
    const double diag[] = {0.6, 0.8};
    CHECK(psi_weight(1, diag) == doctest::Approx(1 / std::cosh(1.0)));
    CHECK_THROWS_AS(psi_weight(0, zero), InvalidArgument);
  }

  TEST_CASE("psi derivative bounds with N(d) = d") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-20, 20);
    const double h = 1e-4;
    for (int d : {1, 2}) {
      for (int k : {1, 3, 7}) {
        for (int trial = 0; trial < 1000; ++trial) {
          double x[2] = {u(rng), u(rng)};
          std::span<const double> xs(x, std::size_t(d));
          const double psi = psi_weight(k, xs);
          for (int i = 0; i < d; ++i) {
            double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
            xp[i] += h;
            xm[i] -= h;
            const double fp = psi_weight(k, {xp, std::size_t(d)}), fm = psi_weight(k, {xm, std::size_t(d)});
            const double d1 = (fp - fm) / (2 * h);
            CHECK(std::abs(d1) <= psi / k * (1 + 1e-6));
            for (int j = 0; j < d; ++j) {
              auto at = [&](double si, double sj) {
                double y[2] = {x[0], x[1]};
                y[i] += si;
                y[j] += sj;
                return psi_weight(k, {y, std::size_t(d)});
              };
              const double d2 = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
              CHECK(std::abs(d2) <= d * psi / (double(k) * k) * (1 + 1e-3) + 1e-7);
            }
          }
        }
      }
    }
  }
}
