#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "srde/analysis.hpp"
#include "srde/errors.hpp"

using namespace srde;
using Q = boost::rational<long long>;

TEST_SUITE("analysis") {
  TEST_CASE("admissibility window examples") {
    const auto w = admissibility(5, 0.2, 1, 0.5);
    CHECK(w.p_min == doctest::Approx(6));
    CHECK(w.p_max == doctest::Approx(30));
    CHECK(w.nonempty);
    CHECK(w.p0_of(10) == doctest::Approx(5.0 / 3));
    CHECK_FALSE(admissibility(1, 0.5, 1, 0.5).nonempty);
    const auto e = admissibility_exact(Q(5), Q(1, 5), 1, Q(1, 2));
    CHECK(e.p_min == Q(6));
    CHECK(e.p_max == Q(30));
    CHECK(e.nonempty);
    // Boundary: gamma = kappa (1 + beta) / (d + 2) exactly is empty.
    CHECK_FALSE(admissibility_exact(Q(2), Q(1, 2), 1, Q(1, 2)).nonempty);
  }

  TEST_CASE("p0 exceeds one inside the window where it is defined") {
    // p0 needs p (1 + gamma) > 1 + beta; for these parameters that cuts into the window.
    const auto w = admissibility(8, 0.3, 1, 0.49);
    const double p_star = 9 / 1.3;
    CHECK(p_star > w.p_min);
    for (double p = w.p_min + 1e-6; p < w.p_max; p += 0.37) {
      if (p > p_star) {
        CHECK(w.p0_of(p) > 1);
      } else {
        CHECK_THROWS_AS(w.p0_of(p), InvalidArgument);
      }
    }
    const auto w2 = admissibility(5, 0.2, 1, 0.5);
    for (double p = w2.p_min + 1e-6; p < w2.p_max; p += 0.25) CHECK(w2.p0_of(p) > 1);
  }

  TEST_CASE("exact decision matches rational arithmetic on random tuples") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> num(1, 60), den(1, 20), dim(1, 3);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
      const Q beta(num(rng), den(rng)), gamma(num(rng), 4 * den(rng));
      Q kappa(num(rng), 60);
      if (kappa > 1) kappa = 1;
      const int d = dim(rng);
      const bool direct = gamma * (d + 2) < kappa * (Q(1) + beta);
      if (admissibility_exact(beta, gamma, d, kappa).nonempty != direct) ++mismatches;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("Hölder predictions") {
    const auto h = holder_prediction(5, 0.2, 1, 0.5, 0.01);
    CHECK(h.space_exponent == doctest::Approx(0.39));
    CHECK(h.time_exponent == doctest::Approx(0.19));  // (D / 2) - eps with D = 0.4
    const auto lim = holder_prediction(1e6, 1e-9, 1, 0.5, 1e-6);
    CHECK(lim.space_exponent == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(lim.time_exponent == doctest::Approx(0.25).epsilon(1e-4));
    CHECK_THROWS_AS(holder_prediction(5, 0.2, 1, 0.5, 0.4), InfeasibleEpsilon);
    CHECK_THROWS_AS(holder_prediction(1, 0.5, 1, 0.5, 0.01), InfeasibleEpsilon);
    CHECK_THROWS_AS(holder_prediction(5, 0.2, 1, 0.5, 0.0), InfeasibleEpsilon);
  }

  TEST_CASE("Hölder witnesses satisfy the ordering and lie in the window") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    int tested = 0;
    for (int i = 0; i < 2000; ++i) {
      const double beta = 0.5 + 10 * u(rng), kappa = 0.05 + 0.95 * u(rng);
      const int d = 1 + int(2 * u(rng));
      const double gamma = u(rng) * kappa * (1 + beta) / (d + 2);
      if (!(gamma > 0)) continue;
      const double D = kappa - gamma * (d + 2) / (1 + beta);
      const double eps = D * (0.01 + 0.48 * u(rng));
      const auto h = holder_prediction(beta, gamma, d, kappa, eps);
      const auto w = admissibility(beta, gamma, d, kappa);
      for (auto [p, a1, a2] : {std::tuple{h.p_space, h.alpha1_space, h.alpha2_space},
                               std::tuple{h.p_time, h.alpha1_time, h.alpha2_time}}) {
        CHECK(w.contains(p));
        CHECK(1 / p < a1);
        CHECK(a1 < a2);
        CHECK(a2 < 0.5 * (kappa - d / p));
      }
      CHECK(h.space_exponent > 0);
      CHECK(h.time_exponent > 0);
      ++tested;
    }
    CHECK(tested > 1000);
  }

  TEST_CASE("smooth path gives an exponent near one") {
    const Grid g(1, 1024, 2 * std::numbers::pi);
    std::vector<Field> rows;
    for (int t = 0; t < 4; ++t) {
      Field u(g.size());
      for (int i = 0; i < g.n; ++i) u[i] = std::sin(g.coordinate(i) + 0.3 * t);
      rows.push_back(u);
    }
    const auto sf = structure_function(rows, g, 0.1, Axis::Space);
    const auto est = fit_holder(sf, g.dx(), 16 * g.dx());
    CHECK(est.exponent >= 0.95);
  }

  TEST_CASE("fractional Brownian paths of known exponent") {
    const int m = 1024, positions = 16;
    const double delta = 1.0 / m;
    for (double H : {0.3}) {
      oracle::FbmGenerator gen(H, m, delta);
      std::mt19937_64 rng(21);
      StructureFunction total;
      for (int path = 0; path < 20; ++path) {
        std::vector<Field> rows(m + 1, Field(positions));
        for (int p = 0; p < positions; ++p) {
          const auto b = gen.path(rng);
          for (int t = 0; t <= m; ++t) rows[t][p] = b[t];
        }
        total.merge(structure_function(rows, Grid(1, positions, 1), delta, Axis::Time));
      }
      const auto est = fit_holder(total, delta, 32 * delta);
      CHECK(est.exponent >= 0.25);
      CHECK(est.exponent <= 0.35);
      CHECK(est.std_error < 0.05);
    }
  }

  TEST_CASE("estimator preconditions") {
    const Grid g(1, 32, 1);
    std::vector<Field> rows(2, Field(32, 0.0));
    rows[1][3] = 1;
    const auto sf = structure_function(rows, g, 0.1, Axis::Space);
    CHECK_THROWS_AS(fit_holder(sf, g.dx(), 8 * g.dx()), PreconditionError);
    const Grid big(1, 256, 1);
    std::vector<Field> r2(2, Field(256));
    for (int i = 0; i < 256; ++i) r2[0][i] = r2[1][i] = std::sin(0.1 * i);
    const auto sf2 = structure_function(r2, big, 0.1, Axis::Space);
    CHECK_THROWS_AS(fit_holder(sf2, big.dx(), 4 * big.dx()), ResolutionError);
  }

  TEST_CASE("Sobolev norm: n = 0 and monotonicity in n") {
    const Grid g(1, 64, 8);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
      Field u(g.size());
      for (double& x : u) x = nd(rng);
      CHECK(sobolev_norm(u, 0, 3, g) == doctest::Approx(lp_norm(u, 3, g)));
      const double a = sobolev_norm(u, 0.5, 2, g), b = sobolev_norm(u, 1.5, 2, g);
      if (a > b) ++violations;
    }
    CHECK(violations == 0);
    CHECK_THROWS_AS(sobolev_norm(Field(64, 0.0), 1, 0.5, g), InvalidArgument);
  }

  TEST_CASE("Sobolev norm in two dimensions") {
    const Grid g(2, 16, 4);
    Field u(g.size(), 2.0);
    CHECK(sobolev_norm(u, 2, 2, g) == doctest::Approx(lp_norm(u, 2, g)));
  }

  TEST_CASE("dissipation check") {
    std::vector<PathSummary> zero(10);
    const auto r = dissipation_check(zero, 1, 0.5, false);
    CHECK(r.pass);
    CHECK(r.mean == 0);
    const auto skip = dissipation_check(zero, 1, 0.5, true);
    CHECK(skip.skipped);
    CHECK(skip.banner == "OUTSIDE-THEOREM");
    auto mixed = zero;
    mixed[3].config_hash = "other";
    CHECK_THROWS_AS(dissipation_check(mixed, 1, 0.5, false), ConfigError);
  }

  TEST_CASE("dissipation verdict is invariant under relabelling") {
    std::mt19937_64 rng(6);
    std::exponential_distribution<double> ex(3.0);
    std::vector<PathSummary> v(200);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i].seed = i;
      v[i].budget = ex(rng);
      v[i].budget_psi = 0.5 * v[i].budget;
      v[i].u0_l1 = 0.01;
    }
    const auto a = dissipation_check(v, 1, 0.5, false);
    std::shuffle(v.begin(), v.end(), rng);
    const auto b = dissipation_check(v, 1, 0.5, false);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.margin == b.margin);
    CHECK(a.pass == b.pass);
    CHECK(a.constant == doctest::Approx(std::exp(2.0)));
  }

  TEST_CASE("blow-up statistics") {
    std::vector<PathSummary> v(60);
    for (std::size_t i = 0; i < v.size(); ++i) v[i].max_sup = 1.0 + 0.1 * double(i % 10);
    v[0].max_sup = 2000;
    v[0].exploded = true;
    const std::vector<double> R{0.5, 1.5, 3, 100}, m{2, 4, 1024};
    const auto t = blowup_stats(v, R, m);
    CHECK(t.sup_over_m[0].p == 1);
    CHECK(t.sup_over_m[3].p == doctest::Approx(1.0 / 60));
    CHECK(std::isnan(t.cell[0][1].p));  // R = 1.5 is not below m - 1 = 1
    CHECK(t.cell[2][3].hits == 1);
    for (std::size_t j = 1; j < R.size(); ++j) CHECK(t.sup_over_m[j].p <= t.sup_over_m[j - 1].p);
    CHECK(t.sup_over_m[3].lo <= t.sup_over_m[3].p);
    CHECK(t.sup_over_m[3].hi >= t.sup_over_m[3].p);
    CHECK_THROWS_AS(blowup_stats(std::span(v).first(1), R, m), PreconditionError);
  }

  TEST_CASE("Wilson interval") {
    double lo, hi;
    wilson_interval(0, 200, lo, hi);
    CHECK(lo == 0);
    CHECK(hi == doctest::Approx(0.0188).epsilon(0.01));
    wilson_interval(100, 200, lo, hi);
    CHECK(lo == doctest::Approx(0.4314).epsilon(0.01));
  }
}
