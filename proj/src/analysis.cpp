#include "srde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "srde/errors.hpp"
#include "srde/fft.hpp"

namespace srde {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- admissibility

double AdmissibilityWindow::p0_of(double p) const {
  const double den = p * (gamma + 1) - (1 + beta);
  if (!(den > 0)) throw InvalidArgument("p0 undefined: p (gamma + 1) <= 1 + beta");
  return p / den;
}

bool admissible_exact(double beta, double gamma, int d, double kappa) {
  using boost::multiprecision::cpp_rational;
  return cpp_rational(gamma) * (d + 2) < cpp_rational(kappa) * (1 + cpp_rational(beta));
}

AdmissibilityWindow admissibility(double beta, double gamma, int d, double kappa) {
  if (!(beta > 0) || !(gamma > 0)) throw InvalidArgument("admissibility: beta and gamma must be positive");
  if (!(kappa > 0 && kappa <= 1)) throw InvalidArgument("admissibility: kappa must lie in (0, 1]");
  if (d < 1) throw InvalidArgument("admissibility: d must be >= 1");
  AdmissibilityWindow w;
  w.beta = beta;
  w.gamma = gamma;
  w.p_min = (d + 2) / kappa;
  w.p_max = (1 + beta) / gamma;
  w.nonempty = admissible_exact(beta, gamma, d, kappa);
  return w;
}

ExactWindow admissibility_exact(boost::rational<long long> beta, boost::rational<long long> gamma, int d,
                                boost::rational<long long> kappa) {
  using Q = boost::rational<long long>;
  if (beta <= 0 || gamma <= 0) throw InvalidArgument("admissibility: beta and gamma must be positive");
  if (kappa <= 0 || kappa > 1) throw InvalidArgument("admissibility: kappa must lie in (0, 1]");
  if (d < 1) throw InvalidArgument("admissibility: d must be >= 1");
  ExactWindow w;
  w.p_min = Q(d + 2) / kappa;
  w.p_max = (Q(1) + beta) / gamma;
  w.nonempty = w.p_min < w.p_max;
  return w;
}

HolderPrediction holder_prediction(double beta, double gamma, int d, double kappa, double eps) {
  if (!(beta > 0) || !(gamma > 0) || !(kappa > 0 && kappa <= 1) || d < 1)
    throw InvalidArgument("holder_prediction: parameters out of range");
  if (!admissible_exact(beta, gamma, d, kappa))
    throw InfeasibleEpsilon("holder_prediction: admissibility window is empty");
  HolderPrediction h;
  h.epsilon = eps;
  h.gap = kappa - gamma * (d + 2) / (1 + beta);
  // The time witness uses p_{2 eps}, which needs eps < D / 2.
  if (!(eps > 0) || !(eps < 0.5 * h.gap))
    throw InfeasibleEpsilon("epsilon must lie in (0, D/2) with D = " + std::to_string(h.gap));
  auto p_of = [&](double e) {
    return 2.0 * (d + 2) * (1 + beta) / (2.0 * (d + 2) * gamma + (1 + beta) * e);
  };
  h.space_exponent = h.gap - eps;
  h.time_exponent = 0.5 * h.gap - eps;
  h.p_space = p_of(eps);
  h.alpha1_space = 1 / h.p_space + eps / 8;
  h.alpha2_space = 1 / h.p_space + eps / 4;
  h.p_time = p_of(2 * eps);
  const double top = 0.5 * (kappa - d / h.p_time);
  h.alpha1_time = top - eps / 2;
  h.alpha2_time = top - eps / 4;
  return h;
}

// ---------------------------------------------------------------- Hölder estimation

const char* to_string(Axis a) { return a == Axis::Time ? "time" : "space"; }

void StructureFunction::merge(const StructureFunction& o) {
  if (lags.empty()) {
    *this = o;
    return;
  }
  if (o.lags != lags || std::abs(o.spacing - spacing) > 1e-12 * spacing)
    throw InvalidArgument("structure functions with different lags cannot be merged");
  for (std::size_t j = 0; j < lags.size(); ++j) {
    sum[j].add(o.sum[j].value());
    count[j] += o.count[j];
  }
  samples = std::min(samples, o.samples);
  paths += o.paths;
}

StructureFunction structure_function(std::span<const Field> rows, const Grid& grid, double dt_snap,
                                     Axis axis, std::size_t first_row) {
  StructureFunction sf;
  sf.paths = 1;
  const std::size_t N = grid.size(), n = std::size_t(grid.n);
  for (const auto& r : rows)
    if (r.size() != N) throw InvalidArgument("structure function: row size does not match the grid");
  const std::size_t used = rows.size() > first_row ? rows.size() - first_row : 0;
  if (axis == Axis::Time) {
    if (!(dt_snap > 0)) throw InvalidArgument("structure function: snapshot spacing must be positive");
    sf.spacing = dt_snap;
    sf.samples = used;
    for (std::size_t lag = 1; 2 * lag <= used; lag *= 2) sf.lags.push_back(int(lag));
  } else {
    sf.spacing = grid.dx();
    sf.samples = n;
    for (std::size_t lag = 1; 2 * lag <= n; lag *= 2) sf.lags.push_back(int(lag));
  }
  sf.sum.assign(sf.lags.size(), {});
  sf.count.assign(sf.lags.size(), 0);
  for (std::size_t j = 0; j < sf.lags.size(); ++j) {
    const std::size_t lag = std::size_t(sf.lags[j]);
    CompensatedSum acc;
    std::uint64_t cnt = 0;
    if (axis == Axis::Time) {
      for (std::size_t r = first_row; r + lag < rows.size(); ++r) {
        const Field& a = rows[r];
        const Field& b = rows[r + lag];
        double local = 0;
        for (std::size_t k = 0; k < N; ++k) local += (b[k] - a[k]) * (b[k] - a[k]);
        acc.add(local);
        cnt += N;
      }
    } else {
      const std::size_t lines = N / n;
      for (std::size_t r = first_row; r < rows.size(); ++r) {
        const Field& a = rows[r];
        double local = 0;
        for (std::size_t line = 0; line < lines; ++line) {
          const double* w = a.data() + line * n;
          for (std::size_t k = 0; k < n; ++k) {
            const double diff = w[(k + lag) % n] - w[k];
            local += diff * diff;
          }
        }
        acc.add(local);
        cnt += N;
      }
    }
    sf.sum[j] = acc;
    sf.count[j] = cnt;
  }
  return sf;
}

HolderEstimate fit_holder(const StructureFunction& sf, double h_min, double h_max) {
  if (sf.samples < 64)
    throw PreconditionError("Hölder estimate needs at least 64 samples along the axis, got " +
                            std::to_string(sf.samples));
  HolderEstimate est;
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < sf.lags.size(); ++j) {
    const double h = sf.spacing * sf.lags[j];
    if (h < h_min * (1 - 1e-9) || h > h_max * (1 + 1e-9)) continue;
    const double s = sf.mean(j);
    if (!(s > 0)) continue;
    est.lag.push_back(h);
    est.moment.push_back(s);
    xs.push_back(std::log(h));
    ys.push_back(std::log(s));
  }
  const std::size_t k = xs.size();
  if (k < 4)
    throw ResolutionError("only " + std::to_string(k) + " dyadic lags inside the fit window (need 4)");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(k);
  my /= double(k);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ssr += r * r;
  }
  est.exponent = slope / 2;
  est.std_error = 0.5 * std::sqrt(ssr / double(k - 2) / sxx);
  est.lags_used = int(k);
  est.lag_min = est.lag.front();
  est.lag_max = est.lag.back();
  return est;
}

HolderEstimate estimate_holder(std::span<const PathRecord> paths, Axis axis, double h_min, double h_max,
                               double t_from) {
  if (paths.empty()) throw PreconditionError("Hölder estimate needs at least one path");
  StructureFunction total;
  for (const auto& rec : paths) {
    std::vector<Field> rows;
    double spacing = 0;
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
      const Frame& f = rec.frames[i];
      if (f.t < t_from - 1e-12) continue;
      if (f.u.size() != rec.grid.size())
        throw PreconditionError("Hölder estimate needs path records with stored fields");
      if (f.sup > f.m)
        throw PreconditionError("path left the truncation plateau inside the fit range");
      if (rows.size() == 1) spacing = f.t - rec.frames[i - 1].t;
      if (rows.size() >= 2) {
        const double gap = f.t - rec.frames[i - 1].t;
        // A shorter trailing frame breaks the uniform cadence; drop it.
        if (std::abs(gap - spacing) > 1e-9 * spacing) break;
      }
      rows.push_back(f.u);
    }
    if (rows.size() < 2) throw PreconditionError("Hölder estimate needs at least two frames per path");
    total.merge(structure_function(rows, rec.grid, spacing, axis));
  }
  return fit_holder(total, h_min, h_max);
}

// ---------------------------------------------------------------- Sobolev norms

double sobolev_norm(const Field& u, double n, double p, const Grid& grid) {
  if (!(p >= 1)) throw InvalidArgument("sobolev_norm: p must be >= 1");
  if (u.size() != grid.size()) throw InvalidArgument("sobolev_norm: field size does not match the grid");
  for (double x : u)
    if (!std::isfinite(x)) throw InvalidArgument("sobolev_norm: field must be finite");
  if (n == 0) return lp_norm(u, p, grid);
  RealFft fft(grid);
  Spectrum spec(fft.spectrum_size());
  fft.forward(u, spec);
  const int N = grid.n;
  const double dx = grid.dx();
  const double pi = std::acos(-1.0);
  auto lap = [&](int q) {
    const double s = std::sin(pi * q / N);
    return 4 / (dx * dx) * s * s;
  };
  const int half = N / 2 + 1;
  if (grid.dim == 1) {
    for (int j = 0; j < half; ++j) spec[j] *= std::pow(1 + lap(j), 0.5 * n);
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < half; ++j)
        spec[std::size_t(i) * half + j] *= std::pow(1 + lap(i) + lap(j), 0.5 * n);
  }
  Field w(grid.size());
  fft.inverse(spec, w);
  const double scale = 1.0 / double(grid.size());
  for (double& x : w) x *= scale;
  return lp_norm(w, p, grid);
}

// ---------------------------------------------------------------- ensembles

PathSummary summarize(const PathRecord& rec) {
  PathSummary s;
  s.seed = rec.seed;
  s.config_hash = rec.config_hash;
  s.budget = rec.stop.budget;
  s.budget_psi = rec.stop.budget_psi;
  s.u0_l1 = rec.frames.empty() ? 0.0 : rec.frames.front().l1;
  s.max_sup = rec.stop.max_sup;
  s.stop_time = rec.stop.time;
  s.max_u_minus_v = rec.stop.max_u_minus_v;
  s.min_u = rec.stop.min_u;
  s.exploded = rec.stop.exploded;
  s.reason = rec.stop.reason;
  return s;
}

namespace {

void mean_and_se(std::vector<double> v, double& mean, double& se) {
  std::sort(v.begin(), v.end());
  CompensatedSum s;
  for (double x : v) s.add(x);
  mean = s.value() / double(v.size());
  CompensatedSum q;
  for (double x : v) q.add((x - mean) * (x - mean));
  se = v.size() > 1 ? std::sqrt(q.value() / double(v.size() - 1) / double(v.size())) : 0.0;
}

}  // namespace

BudgetReport dissipation_check(std::span<const PathSummary> paths, double K, double T, bool nondissipative) {
  if (paths.empty()) throw PreconditionError("dissipation check needs at least one path");
  if (!(K > 0) || !(T > 0)) throw InvalidArgument("dissipation check: K and T must be positive");
  for (const auto& p : paths)
    if (p.config_hash != paths[0].config_hash)
      throw ConfigError("dissipation check: paths come from different configurations");
  BudgetReport r;
  r.paths = paths.size();
  if (nondissipative) {
    r.skipped = true;
    r.banner = "OUTSIDE-THEOREM";
    return r;
  }
  std::vector<double> b, bp, l1;
  for (const auto& p : paths) {
    b.push_back(p.budget);
    bp.push_back(p.budget_psi);
    l1.push_back(p.u0_l1);
  }
  double se_l1;
  mean_and_se(b, r.mean, r.std_error);
  mean_and_se(bp, r.mean_psi, r.std_error_psi);
  mean_and_se(l1, r.mean_u0_l1, se_l1);
  r.constant = K * std::exp(4 * K * T);
  r.bound = r.constant * r.mean_u0_l1;
  r.margin = r.bound + 3 * r.std_error - r.mean;
  r.pass = r.margin >= 0;
  return r;
}

void wilson_interval(std::size_t hits, std::size_t total, double& lo, double& hi) {
  if (total == 0) {
    lo = hi = kNaN;
    return;
  }
  const double z = 1.96, n = double(total), p = double(hits) / n;
  const double den = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / den;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den;
  lo = std::max(0.0, centre - half);
  hi = std::min(1.0, centre + half);
}

BlowupTable blowup_stats(std::span<const PathSummary> paths, std::span<const double> R_grid,
                         std::span<const double> m_levels) {
  if (paths.size() < 50)
    throw PreconditionError("blow-up statistics need at least 50 paths, got " + std::to_string(paths.size()));
  BlowupTable t;
  t.R.assign(R_grid.begin(), R_grid.end());
  t.m.assign(m_levels.begin(), m_levels.end());
  t.cell.assign(t.m.size(), std::vector<ExceedanceCell>(t.R.size()));
  t.sup_over_m.assign(t.R.size(), {kNaN, kNaN, kNaN, 0, 0});
  for (std::size_t j = 0; j < t.R.size(); ++j) {
    std::size_t hits = 0;
    for (const auto& p : paths) hits += p.max_sup > t.R[j] ? 1 : 0;
    for (std::size_t i = 0; i < t.m.size(); ++i) {
      ExceedanceCell& c = t.cell[i][j];
      if (!(t.R[j] < t.m[i] - 1)) {
        c = {kNaN, kNaN, kNaN, 0, 0};
        continue;
      }
      c.hits = hits;
      c.total = paths.size();
      c.p = double(hits) / double(paths.size());
      wilson_interval(c.hits, c.total, c.lo, c.hi);
      if (std::isnan(t.sup_over_m[j].p) || c.p > t.sup_over_m[j].p) t.sup_over_m[j] = c;
    }
  }
  return t;
}

}  // namespace srde
