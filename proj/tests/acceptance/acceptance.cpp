// Acceptance suite: one verdict line per criterion.
// Usage: srde_acceptance [--criterion N]...

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <numbers>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "oracles.hpp"
#include "srde/analysis.hpp"
#include "srde/bessel.hpp"
#include "srde/cli.hpp"
#include "srde/errors.hpp"
#include "srde/noise.hpp"
#include "srde/solver.hpp"

using namespace srde;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// The admissible acceptance model: d = 1 White noise, identity preset, u0 = 1.
const char* kAdmissible = R"({
  "schema_version": 1,
  "model": {"beta": 8, "gamma": 0.3, "kappa": 0.49, "T": 1,
            "kernel": {"type": "white"}, "coefficients": {"preset": "identity"},
            "initial": {"type": "constant", "amplitude": 1}},
  "grid": {"dim": 1, "n_x": 256, "L": 16, "dt": 0.000244140625},
  "ensemble": {"seeds": 200, "first_seed": 0},
  "outputs": {"snapshot_every": 4},
  "analysis": {"epsilon": 0.01, "holder_t_from": 0.5,
               "time_window": [0.00390625, 0.0625], "space_window": [0.125, 1.0]}
})";

// Stress contrast: no dissipation, gamma = 1, T = 0.5.
const char* kStress = R"({
  "schema_version": 1,
  "model": {"beta": 8, "gamma": 1.0, "kappa": 0.49, "T": 0.5,
            "kernel": {"type": "white"},
            "coefficients": {"preset": "identity", "disable_dissipation": true},
            "initial": {"type": "constant", "amplitude": 1}},
  "grid": {"dim": 1, "n_x": 256, "L": 16, "dt": 0.000244140625},
  "ensemble": {"seeds": 200, "first_seed": 0},
  "outputs": {"snapshot_every": 4}
})";

constexpr double kExplosionThreshold = 1000;

int width() { return cli::thread_count(cli::parse_config(kAdmissible)); }

// ------------------------------------------------------------------ 1

Verdict admissibility_arithmetic() {
  using boost::multiprecision::cpp_rational;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> beta(0.01, 20), gamma(0.001, 5), kappa(0.01, 1);
  std::uniform_int_distribution<int> dim(1, 2);
  std::size_t mismatches = 0, admissible = 0, frontier = 0;
  const int N = 10000;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < N; ++i) {
    const double b = beta(rng), k = kappa(rng);
    const int d = dim(rng);
    // Every fourth tuple sits on the frontier up to rounding.
    double g = gamma(rng);
    if (i % 4 == 0) {
      g = k * (1 + b) / (d + 2);
      ++frontier;
    }
    const bool window = admissibility(b, g, d, k).nonempty;
    const bool direct = cpp_rational(g) * (d + 2) < cpp_rational(k) * (1 + cpp_rational(b));
    mismatches += window != direct;
    admissible += direct;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && secs < 1,
          fmt("%d tuples (%zu on the frontier, %zu admissible), %zu mismatches, %.3f s", N, frontier, admissible,
              mismatches, secs)};
}

// ------------------------------------------------------------------ 2

Verdict dalang_analyzer() {
  struct Case {
    CorrelationKernel k;
    double expected;
  };
  std::vector<Case> cases{{CorrelationKernel::white(1), 0.5},
                          {CorrelationKernel::constant(1), 1.0}};
  for (double a : {0.25, 0.5, 0.75}) cases.push_back({CorrelationKernel::riesz(a, 1), 1 - a / 2});
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const double analytic = dalang_sup_kappa(c.k), numeric = dalang_numeric_threshold(c.k);
    const bool good = std::abs(analytic - c.expected) < 1e-12 && std::abs(numeric - analytic) <= 0.02;
    ok = ok && good;
    detail += fmt("%s(%g) %.4g/%.4g; ", c.k.name().c_str(), c.k.parameter(), analytic, numeric);
  }
  return {ok, "kappa_max analytic/numeric: " + detail};
}

// ------------------------------------------------------------------ 3

Verdict noise_covariance() {
  const double alpha = 0.5, dt = 1.0 / 4096;
  const Grid g(1, 256, 16);
  const NoiseGrid noise(CorrelationKernel::riesz(alpha, 1), g, 31337);
  const int n = g.n, M = 10000, lo = 4, hi = int(std::lround(g.length / 8 / g.dx()));
  std::vector<double> cov(hi + 1, 0.0);
  const std::vector<int> tlags{1, 2, 5};
  std::vector<std::vector<double>> tcorr(tlags.size());
  std::vector<Field> history;
  for (int s = 0; s < M; ++s) {
    Field f = noise.sample(dt, std::uint64_t(s));
    for (int r = lo; r <= hi; ++r) {
      double acc = 0;
      for (int i = 0; i < n; ++i) acc += f[i] * f[(i + r) % n];
      cov[r] += acc / n;
    }
    history.push_back(std::move(f));
    for (std::size_t j = 0; j < tlags.size(); ++j) {
      const int l = tlags[j];
      if (s < l) continue;
      const Field& a = history[s - l];
      const Field& b = history[s];
      double acc = 0;
      for (int i = 0; i < n; ++i) acc += a[i] * b[i];
      tcorr[j].push_back(acc / n);
    }
  }
  double worst = 0;
  int worst_lag = lo;
  for (int r = lo; r <= hi; ++r) {
    const double emp = cov[r] / M / dt, target = std::pow(r * g.dx(), -alpha);
    const double rel = std::abs(emp / target - 1);
    if (rel > worst) worst = rel, worst_lag = r;
  }
  // Normalise the temporal products by the one-point variance.
  double var = 0;
  for (const auto& f : history)
    for (double x : f) var += x * x;
  var /= double(history.size()) * n;
  bool temporal_ok = true;
  std::string tdetail;
  for (std::size_t j = 0; j < tlags.size(); ++j) {
    double m = 0, m2 = 0;
    for (double x : tcorr[j]) m += x / var, m2 += (x / var) * (x / var);
    const double k = double(tcorr[j].size());
    m /= k;
    const double se = std::sqrt((m2 / k - m * m) / k);
    temporal_ok = temporal_ok && std::abs(m) <= 3 * se;
    tdetail += fmt(" lag %d: %.2e (SE %.1e);", tlags[j], m, se);
  }
  return {worst <= 0.10 && temporal_ok,
          fmt("spatial covariance vs |r|^-0.5 on [4dx, L/8]: worst rel. error %.3f at %d dx; temporal corr.",
              worst, worst_lag) + tdetail};
}

// ------------------------------------------------------------------ 4

Verdict kernel_semigroup() {
  const std::vector<double> off{0.5, 1.0, 2.0}, with_origin{0.0, 0.5, 1.0, 2.0};
  bool ok = true;
  std::string detail;
  for (double n : {0.8, 1.2, 3.0}) {
    const auto& pts = n > 1 ? with_origin : off;  // x = 0 is singular for n <= d
    try {
      const double r = convolution_identity_residual(n, 1, pts, 1.0 / 1024);
      ok = ok && r <= 1e-3;
      detail += fmt("n=%g: %.2e; ", n, r);
    } catch (const Error& e) {
      ok = false;
      detail += fmt("n=%g: %s; ", n, e.what());
    }
  }
  return {ok, "max |R_n * R_n - R_2n| at h = 1/1024: " + detail};
}

// ------------------------------------------------------------------ 5

Verdict comparison_principle() {
  const auto cfg = cli::parse_config(kAdmissible);
  const ModelSpec spec = cli::build_spec(cfg);
  const int seeds = 100;
  std::vector<double> worst(seeds, -INFINITY);
  std::vector<char> failed(seeds, 0);
  cli::parallel_for(seeds, width(), [&](std::size_t i) {
    RunOptions o;
    o.dt = cfg.dt;
    o.seed = i;
    o.snapshot_every = 0;
    o.keep_fields = false;
    const PathRecord rec = run_global(spec, o, cfg.m_schedule);
    worst[i] = rec.stop.max_u_minus_v;
    failed[i] = rec.stop.reason == StopReason::Failure;
  });
  double w = -INFINITY;
  std::size_t f = 0;
  for (int i = 0; i < seeds; ++i) w = std::max(w, worst[i]), f += failed[i];
  return {w <= 1e-12 && f == 0, fmt("max over %d seeds, all steps and grid points of (u - v) = %.3g; %zu failures",
                                    seeds, w, f)};
}

// ------------------------------------------------------------------ 6

Verdict truncation_consistency() {
  const auto cfg = cli::parse_config(kStress);
  const ModelSpec spec = cli::build_spec(cfg);
  const int seeds = 12;
  std::vector<int> fired(seeds, 0), identical(seeds, 0);
  std::vector<double> tau(seeds, 0);
  cli::parallel_for(seeds, width(), [&](std::size_t i) {
    RunOptions o;
    o.dt = cfg.dt;
    o.seed = 1000 + i;
    o.snapshot_every = 1;
    o.keep_fields = true;
    const PathRecord a = run_local(spec, StoppingRule{INFINITY, 4, 4}, o);
    const PathRecord b = run_local(spec, StoppingRule{INFINITY, 4, 8}, o);
    bool same = a.frames.size() == b.frames.size() && a.stop.step == b.stop.step && a.stop.time == b.stop.time &&
                a.stop.reason == b.stop.reason;
    for (std::size_t k = 0; same && k < a.frames.size(); ++k) {
      const Frame &x = a.frames[k], &y = b.frames[k];
      same = x.step == y.step && x.u.size() == y.u.size() &&
             std::memcmp(x.u.data(), y.u.data(), x.u.size() * sizeof(double)) == 0 &&
             std::memcmp(&x.budget, &y.budget, sizeof(double)) == 0;
    }
    identical[i] = same;
    fired[i] = a.stop.reason == StopReason::SupNorm;
    tau[i] = a.stop.time;
  });
  int n_fired = 0, n_same = 0;
  double tau_sum = 0;
  for (int i = 0; i < seeds; ++i) n_fired += fired[i], n_same += identical[i], tau_sum += tau[i];
  return {n_same == seeds && n_fired >= seeds / 3,
          fmt("m = 4 vs m = 8, R = 4, stress model: %d/%d seeds bit-identical with equal stopping times; "
              "sup u reached 4 before T in %d seeds (mean stopping time %.4g)",
              n_same, seeds, n_fired, tau_sum / seeds)};
}

// ------------------------------------------------------------------ 7

Verdict dissipation_budget() {
  const auto cfg = cli::parse_config(kAdmissible);
  const ModelSpec spec = cli::build_spec(cfg);
  const auto run = cli::run_ensemble(cfg, spec, width(), false);
  const BudgetReport b = dissipation_check(run.summaries, spec.coeffs.K, cfg.T, false);
  return {b.pass && !b.skipped && run.failed_seeds.empty() && b.paths == 200,
          fmt("%zu seeds: E budget = %.4g (SE %.2g, psi-weighted %.4g) <= K e^{4KT} E|u0|_1 + 3 SE = %.4g + %.2g",
              b.paths, b.mean, b.std_error, b.mean_psi, b.bound, 3 * b.std_error)};
}

// ------------------------------------------------------------------ 8

Verdict non_explosion() {
  const int w = width();
  auto fraction = [&](const char* text, std::size_t& hits, std::size_t& total, double& lo, double& hi) {
    const auto cfg = cli::parse_config(text);
    const auto run = cli::run_ensemble(cfg, cli::build_spec(cfg), w, false);
    hits = 0;
    for (const auto& s : run.summaries) hits += s.exploded || s.max_sup >= kExplosionThreshold;
    total = run.seeds.size();
    hits += run.failed_seeds.size();  // a failed path counts against the verdict
    wilson_interval(hits, total, lo, hi);
    return double(hits) / double(total);
  };
  std::size_t ha, ta, hs, ts;
  double la, ua, ls, us;
  const double fa = fraction(kAdmissible, ha, ta, la, ua);
  const double fs = fraction(kStress, hs, ts, ls, us);
  return {fa <= 0.025 && fs > 0,
          fmt("admissible: %zu/%zu = %.3f (Wilson [%.3f, %.3f]) <= 0.025; stress contrast: %zu/%zu = %.3f "
              "(Wilson [%.3f, %.3f]) > 0",
              ha, ta, fa, la, ua, hs, ts, fs, ls, us)};
}

// ------------------------------------------------------------------ 9

Verdict holder_exponents() {
  std::string detail = "calibration";
  bool ok = true;
  std::mt19937_64 rng(77);
  const int paths = 100;
  for (double H : {0.2, 0.4, 0.6}) {
    // Time axis: fBm in time at 4 independent positions, same lag window as the model run.
    const int m = 1024;
    const double delta = 1.0 / m;
    oracle::FbmGenerator gen(H, m, delta);
    StructureFunction t_sf, s_sf;
    for (int p = 0; p < paths; ++p) {
      std::vector<Field> rows(m + 1, Field(4));
      for (int x = 0; x < 4; ++x) {
        const auto b = gen.path(rng);
        for (int t = 0; t <= m; ++t) rows[t][x] = b[t];
      }
      t_sf.merge(structure_function(rows, Grid(1, 4, 4), delta, Axis::Time));
    }
    // Space axis: periodised fBm bridge on 256 points, same lag window in units of dx.
    const int n = 256;
    oracle::FbmGenerator sgen(H, n, 1.0 / n);
    const Grid g(1, n, 16);
    for (int p = 0; p < paths; ++p) {
      std::vector<Field> rows(4, Field(n));
      for (auto& row : rows) {
        const auto b = sgen.path(rng);
        for (int i = 0; i < n; ++i) row[i] = b[i] - double(i) / n * b[n];
      }
      s_sf.merge(structure_function(rows, g, 1.0, Axis::Space));
    }
    const auto et = fit_holder(t_sf, 1.0 / 256, 1.0 / 16);
    const auto es = fit_holder(s_sf, 2 * g.dx(), 16 * g.dx());
    ok = ok && std::abs(et.exponent - H) <= 0.05 && std::abs(es.exponent - H) <= 0.05;
    detail += fmt(" H=%.1f: time %.3f, space %.3f;", H, et.exponent, es.exponent);
  }
  const auto cfg = cli::parse_config(kAdmissible);
  const ModelSpec spec = cli::build_spec(cfg);
  const auto run = cli::run_ensemble(cfg, spec, width(), true);
  const double D = cfg.kappa - 3 * cfg.gamma / (1 + cfg.beta);
  try {
    const auto et = fit_holder(run.time_sf, cfg.time_window[0], cfg.time_window[1]);
    const auto es = fit_holder(run.space_sf, cfg.space_window[0], cfg.space_window[1]);
    const bool model_ok = std::abs(et.exponent - D / 2) <= 0.10 && std::abs(es.exponent - D) <= 0.10;
    ok = ok && model_ok;
    detail += fmt(" model (%zu paths, t >= %.2g): time %.3f +- %.3f vs %.3f, space %.3f +- %.3f vs %.3f",
                  run.holder_paths, cfg.holder_t_from, et.exponent, et.std_error, D / 2, es.exponent, es.std_error,
                  D);
  } catch (const Error& e) {
    ok = false;
    detail += std::string(" model: ") + e.what();
  }
  return {ok, detail};
}

// ------------------------------------------------------------------ 10

Verdict sobolev_properties() {
  const Grid g(1, 256, 16);
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> band(4, 48);
  const std::vector<double> orders{0, 0.5, 1, 2, 3};
  const std::vector<double> powers{1, 1.5, 2, 4};
  std::size_t mono_checks = 0, mono_bad = 0, mult_checks = 0, mult_bad = 0;
  const double tol = 1e-12;
  for (int f = 0; f < 1000; ++f) {
    const int K = band(rng);
    Field u(g.size(), 0.0);
    for (int k = 0; k <= K; ++k) {
      const double a = normal(rng) / (1 + k), b = normal(rng) / (1 + k);
      const double w = 2 * std::numbers::pi * k / g.length;
      for (int i = 0; i < g.n; ++i) u[i] += a * std::cos(w * g.coordinate(i)) + b * std::sin(w * g.coordinate(i));
    }
    for (double p : powers) {
      double prev = 0;
      for (double n : orders) {
        const double v = sobolev_norm(u, n, p, g);
        if (n > 0) {
          ++mono_checks;
          mono_bad += prev > v * (1 + tol);
        }
        prev = v;
      }
    }
    // Tuple A: n = 1 between n0 = 0 and n1 = 2 at p = 2, eps = 1/2.
    const double h1 = sobolev_norm(u, 1, 2, g), h0 = sobolev_norm(u, 0, 2, g), h2 = sobolev_norm(u, 2, 2, g);
    ++mult_checks;
    mult_bad += h1 > std::sqrt(h0 * h2) * (1 + tol);
    // Tuple B: n = 0, 1/p = (1/2)/2 + (1/2)/8.
    const double l = sobolev_norm(u, 0, 16.0 / 5, g), l2 = sobolev_norm(u, 0, 2, g), l8 = sobolev_norm(u, 0, 8, g);
    ++mult_checks;
    mult_bad += l > std::sqrt(l2 * l8) * (1 + tol);
  }
  return {mono_bad == 0 && mult_bad == 0,
          fmt("1000 band-limited fields: n-monotonicity %zu/%zu violations, multiplicative inequality %zu/%zu "
              "violations",
              mono_bad, mono_checks, mult_bad, mult_checks)};
}

// ------------------------------------------------------------------ 11

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / fmt("srde-acceptance-%d", int(::getpid()));
  fs::remove_all(base);
  auto cfg = cli::parse_config(kAdmissible);
  std::ostringstream sink;
  std::vector<std::string> mismatched;
  cli::CommandOptions opt;
  opt.seed = 7;
  for (const char* run : {"sim1", "sim2"}) {
    opt.out = (base / run).string();
    cli::cmd_simulate(cfg, opt, sink);
  }
  for (const char* f : {"timeseries.csv", "summary.json", "path.bin"}) {
    const auto a = slurp(base / "sim1" / f), b = slurp(base / "sim2" / f);
    if (a.empty() || a != b) mismatched.push_back(std::string("simulate/") + f);
  }
  cfg.seeds = 12;
  cfg.T = 0.5;
  cfg.holder_t_from = 0.25;
  cli::CommandOptions e;
  for (int w : {1, 3}) {
    e.threads = w;
    e.out = (base / fmt("ens%d", w)).string();
    cli::cmd_ensemble(cfg, e, sink);
  }
  for (const char* f : {"verdict.json", "paths.csv", "structure_time.csv", "structure_space.csv"}) {
    const auto a = slurp(base / "ens1" / f), b = slurp(base / "ens3" / f);
    if (a.empty() || a != b) mismatched.push_back(std::string("ensemble/") + f);
  }
  fs::remove_all(base);
  std::string list;
  for (const auto& m : mismatched) list += " " + m;
  return {mismatched.empty(), mismatched.empty()
                                  ? "simulate twice: byte-identical CSV/JSON/path record; ensemble width 1 vs 3: "
                                    "byte-identical verdict and CSV files"
                                  : "differing artifacts:" + list};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{{1, "admissibility arithmetic", admissibility_arithmetic},
                                   {2, "Dalang analyzer", dalang_analyzer},
                                   {3, "noise covariance", noise_covariance},
                                   {4, "kernel semigroup", kernel_semigroup},
                                   {5, "discrete comparison principle", comparison_principle},
                                   {6, "truncation consistency", truncation_consistency},
                                   {7, "dissipation budget", dissipation_budget},
                                   {8, "non-explosion in the admissible region", non_explosion},
                                   {9, "Hölder exponents", holder_exponents},
                                   {10, "Sobolev-norm properties", sobolev_properties},
                                   {11, "determinism", determinism}};
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      wanted.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d [PRIMARY] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  return all_pass ? 0 : 1;
}
