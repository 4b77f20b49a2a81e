#include "srde/solver.hpp"

#include <algorithm>
#include <cmath>

#include "srde/errors.hpp"

namespace srde {

double truncation(double z, double m) {
  if (!(m >= 1)) throw InvalidArgument("truncation: m must be >= 1");
  const double a = std::abs(z);
  if (a <= m) return 1;
  if (a >= 2 * m) return 0;
  const double s = (a - m) / m;
  return 1 - s * s * (3 - 2 * s);
}

Field make_initial(const std::string& kind, double amplitude, double width, const Grid& grid) {
  if (!(amplitude >= 0) || !std::isfinite(amplitude))
    throw InvalidArgument("initial field: amplitude must be finite and >= 0");
  Field u(grid.size(), 0.0);
  if (kind == "zero") return u;
  if (kind == "constant") {
    std::fill(u.begin(), u.end(), amplitude);
    return u;
  }
  if (!(width > 0)) throw InvalidArgument("initial field: width must be positive");
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto x = grid.point(k);
    const double r2 = x[0] * x[0] + (grid.dim == 2 ? x[1] * x[1] : 0.0);
    if (kind == "bump") {
      u[k] = amplitude * std::exp(-r2 / (2 * width * width));
    } else if (kind == "plateau") {
      u[k] = r2 <= width * width ? amplitude : 0.0;
    } else {
      throw InvalidArgument("unknown initial field '" + kind + "'");
    }
  }
  return u;
}

bool ModelSpec::admissible() const {
  return gamma < kappa * (1 + beta) / (grid.dim + 2);
}

void ModelSpec::validate() const {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  // gamma = 0 is accepted for the linear reference runs.
  if (!(gamma >= 0)) throw InvalidArgument("gamma must be nonnegative");
  if (!(kappa > 0 && kappa <= 1)) throw InvalidArgument("kappa must lie in (0, 1]");
  if (!(T > 0) || !std::isfinite(T)) throw InvalidArgument("T must be positive");
  if (u0.size() != grid.size()) throw InvalidArgument("u0 size does not match the grid");
  for (double x : u0)
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidArgument("u0 must be finite and nonnegative");
  if (kernel.dim() != grid.dim) throw InvalidArgument("kernel dimension does not match the grid");
  if (coeffs.dim != grid.dim) throw InvalidArgument("coefficient dimension does not match the grid");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::Dissipation: return "dissipation";
    case StopReason::SupNorm: return "sup-norm";
    case StopReason::Explosion: return "explosion";
    case StopReason::Failure: return "failure";
  }
  return "unknown";
}

namespace {

// Cyclic tridiagonal solve with constant-sign off-diagonals: row i reads
// lo[i] x[i-1] + di[i] x[i] + up[i] x[i+1] = rhs[i], indices mod n.
class CyclicSolver {
 public:
  explicit CyclicSolver(std::size_t n) : bb_(n), cp_(n), x_(n), z_(n), e_(n) {}

  void solve(const double* lo, const double* di, const double* up, double* rhs, std::size_t stride) {
    const std::size_t n = bb_.size();
    const double alpha = lo[0], beta = up[n - 1];
    const double g = -di[0];
    for (std::size_t i = 0; i < n; ++i) bb_[i] = di[i];
    bb_[0] = di[0] - g;
    bb_[n - 1] = di[n - 1] - alpha * beta / g;
    for (std::size_t i = 0; i < n; ++i) {
      x_[i] = rhs[i * stride];
      e_[i] = 0;
    }
    e_[0] = g;
    e_[n - 1] = alpha;
    thomas(lo, up, x_);
    thomas(lo, up, e_);
    const double fact = (x_[0] + beta * x_[n - 1] / g) / (1 + e_[0] + beta * e_[n - 1] / g);
    for (std::size_t i = 0; i < n; ++i) rhs[i * stride] = x_[i] - fact * e_[i];
  }

 private:
  void thomas(const double* lo, const double* up, std::vector<double>& r) {
    const std::size_t n = bb_.size();
    double piv = bb_[0];
    r[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
      cp_[i - 1] = up[i - 1] / piv;
      piv = bb_[i] - lo[i] * cp_[i - 1];
      r[i] = (r[i] - lo[i] * r[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) r[i] -= cp_[i] * r[i + 1];
  }

  std::vector<double> bb_, cp_, x_, z_, e_;
};

// Root of y + a y^q = z on (0, z] for z > 0, a > 0. Newton from above
// decreases monotonically to the root because the map is convex.
double implicit_reaction(double z, double a, double q) {
  if (z <= 0 || a <= 0) return z;
  double y = std::min(z, std::pow(z / a, 1 / q));
  for (int it = 0; it < 200; ++it) {
    const double yq1 = std::pow(y, q - 1);
    const double f = y + a * yq1 * y - z;
    if (f <= 0) break;
    const double next = y - f / (1 + a * q * yq1);
    if (!(next < y)) break;
    y = next > 0 ? next : 0.5 * y;
  }
  return y;
}

}  // namespace

Stepper::Stepper(const ModelSpec& spec, double dt) : spec_(spec), dt_(dt) {
  spec_.validate();
  if (!(dt > 0) || !std::isfinite(dt)) throw StepSizeError("dt must be positive");
  const Grid& g = spec_.grid;
  const auto& co = spec_.coeffs;
  const double dx = g.dx();
  double rate = 0;
  for (double t : {0.0, 0.5 * spec_.T, spec_.T}) {
    Coeffs c;
    coeffs_at(t, c);
    for (std::size_t k = 0; k < g.size(); ++k)
      rate = std::max(rate, std::abs(c.c[k]) + (std::abs(c.b1[k]) + std::abs(c.b2[k])) / dx);
    if (!co.time_dependent) {
      frozen_ = c;
      break;
    }
  }
  max_dt_ = rate > 0 ? 0.5 / rate : std::numeric_limits<double>::infinity();
  if (dt > max_dt_ * (1 + 1e-12))
    throw StepSizeError("dt = " + std::to_string(dt) + " exceeds the order-preserving bound " +
                        std::to_string(max_dt_));
  const int k = std::max(1, int(std::lround(g.length / 4)));
  psi_.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    psi_[i] = psi_weight(k, std::span<const double>(x.data(), std::size_t(g.dim)));
  }
}

const Stepper::Coeffs& Stepper::coeffs_at(double t, Coeffs& out) const {
  if (!spec_.coeffs.time_dependent && !frozen_.a1.empty()) return frozen_;
  const Grid& g = spec_.grid;
  const auto& co = spec_.coeffs;
  const std::size_t N = g.size();
  for (auto* v : {&out.a1, &out.a2, &out.b1, &out.b2, &out.c, &out.b_bar, &out.xi}) v->resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const auto x = g.point(k);
    const auto a = co.a(t, x);
    const auto b = co.b(t, x);
    if (g.dim == 1) {
      out.a1[k] = a[0];
      out.a2[k] = 0;
      out.b1[k] = b[0];
      out.b2[k] = 0;
    } else {
      if (std::abs(0.5 * (a[1] + a[2])) > 1e-14)
        throw InvalidArgument("the two-dimensional stepper requires a diagonal diffusion matrix");
      // Axis 0 is the slow index; the first coordinate runs along it.
      out.a1[k] = a[0];
      out.a2[k] = a[3];
      out.b1[k] = b[0];
      out.b2[k] = b[1];
    }
    out.c[k] = co.c(t, x);
    out.b_bar[k] = co.b_bar(t, x);
    out.xi[k] = co.xi(t, x);
  }
  return out;
}

SolverState Stepper::initial_state(double m) const {
  SolverState s;
  s.m = m;
  s.u = spec_.u0;
  s.v = spec_.u0;
  s.sup = std::max(0.0, max_value(s.u));
  s.min_u = min_value(s.u);
  s.max_u_minus_v = 0;
  return s;
}

void Stepper::explicit_part(const Field& w, const Field& noise, const Coeffs& co, double h,
                            Field& out) const {
  const Grid& g = spec_.grid;
  const int n = g.n;
  const double inv_dx = 1 / g.dx();
  out.resize(w.size());
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const int ip = i + 1 == n ? 0 : i + 1, im = i == 0 ? n - 1 : i - 1;
      const double b = co.b1[i];
      const double grad = b > 0 ? (w[ip] - w[i]) * inv_dx : (w[i] - w[im]) * inv_dx;
      out[i] = w[i] + h * (b * grad + co.c[i] * w[i]) + noise[i];
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    const int ip = i + 1 == n ? 0 : i + 1, im = i == 0 ? n - 1 : i - 1;
    for (int j = 0; j < n; ++j) {
      const int jp = j + 1 == n ? 0 : j + 1, jm = j == 0 ? n - 1 : j - 1;
      const std::size_t k = std::size_t(i) * n + j;
      const double b1 = co.b1[k], b2 = co.b2[k];
      const double g1 = b1 > 0 ? (w[std::size_t(ip) * n + j] - w[k]) : (w[k] - w[std::size_t(im) * n + j]);
      const double g2 = b2 > 0 ? (w[std::size_t(i) * n + jp] - w[k]) : (w[k] - w[std::size_t(i) * n + jm]);
      out[k] = w[k] + h * ((b1 * g1 + b2 * g2) * inv_dx + co.c[k] * w[k]) + noise[k];
    }
  }
}

void Stepper::implicit_diffusion(Field& w, const Coeffs& co, double h) const {
  const Grid& g = spec_.grid;
  const std::size_t n = std::size_t(g.n);
  const double s = h / (g.dx() * g.dx());
  std::vector<double> lo(n), di(n), up(n);
  CyclicSolver solver(n);
  auto sweep = [&](const std::vector<double>& a, std::size_t offset, std::size_t stride) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = s * a[offset + i * stride];
      lo[i] = up[i] = -r;
      di[i] = 1 + 2 * r;
    }
    solver.solve(lo.data(), di.data(), up.data(), w.data() + offset, stride);
  };
  if (g.dim == 1) {
    sweep(co.a1, 0, 1);
    return;
  }
  for (std::size_t j = 0; j < n; ++j) sweep(co.a1, j, n);
  for (std::size_t i = 0; i < n; ++i) sweep(co.a2, i * n, 1);
}

void Stepper::step(SolverState& st, const Field& dF, double h) const {
  const Grid& g = spec_.grid;
  const std::size_t N = g.size();
  if (dF.size() != N) throw InvalidArgument("noise increment size does not match the grid");
  if (!(h > 0) || h > dt_ * (1 + 1e-12)) throw StepSizeError("step length outside (0, dt]");
  Coeffs scratch;
  const Coeffs& co = coeffs_at(st.t + 0.5 * h, scratch);
  const double q = 1 + spec_.beta, r = 1 + spec_.gamma, cell = g.cell_volume();

  Field noise(N), hm(N);
  double budget = 0, budget_psi = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double u = st.u[k];
    hm[k] = truncation(u, st.m);
    const double up = u > 0 ? u : 0.0;
    noise[k] = up > 0 ? co.xi[k] * std::pow(up, r) * hm[k] * dF[k] : 0.0;
    const double react = up > 0 ? co.b_bar[k] * std::pow(up, q) * hm[k] : 0.0;
    budget += react;
    budget_psi += react * psi_[k];
  }

  Field tu, tv;
  explicit_part(st.u, noise, co, h, tu);
  explicit_part(st.v, noise, co, h, tv);
  double removed = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double y = implicit_reaction(tu[k], h * co.b_bar[k] * hm[k], q);
    removed += tu[k] - y;
    tu[k] = y;
  }
  implicit_diffusion(tu, co, h);
  implicit_diffusion(tv, co, h);

  double sup = 0, mn = std::numeric_limits<double>::infinity(), diff = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k) {
    if (!std::isfinite(tu[k]) || !std::isfinite(tv[k]))
      throw InstabilityError("non-finite value at step " + std::to_string(st.step + 1));
    sup = std::max(sup, tu[k]);
    mn = std::min(mn, tu[k]);
    diff = std::max(diff, tu[k] - tv[k]);
  }
  st.u = std::move(tu);
  st.v = std::move(tv);
  st.t += h;
  st.step += 1;
  st.budget += h * budget * cell;
  st.budget_psi += h * budget_psi * cell;
  st.budget_applied += removed * cell;
  st.sup = sup;
  st.min_u = std::min(st.min_u, mn);
  st.max_u_minus_v = std::max(st.max_u_minus_v, diff);
}

namespace {

Frame make_frame(const SolverState& s, const ModelSpec& spec, bool keep) {
  Frame f;
  f.t = s.t;
  f.step = s.step;
  f.m = s.m;
  f.sup = s.sup;
  f.l1 = lp_norm(s.u, 1, spec.grid);
  f.l1b = lp_norm(s.u, 1 + spec.beta, spec.grid);
  f.budget = s.budget;
  f.budget_psi = s.budget_psi;
  if (keep) f.u = s.u;
  return f;
}

PathRecord make_record(const ModelSpec& spec, const RunOptions& opts) {
  PathRecord rec;
  rec.grid = spec.grid;
  rec.dt = opts.dt;
  rec.beta = spec.beta;
  rec.gamma = spec.gamma;
  rec.kappa = spec.kappa;
  rec.T = spec.T;
  rec.seed = opts.seed;
  return rec;
}

void finish(PathRecord& rec, const SolverState& s, double max_sup, StopReason why) {
  rec.stop.reason = why;
  rec.stop.time = s.t;
  rec.stop.step = s.step;
  rec.stop.m_final = s.m;
  rec.stop.sup_at_stop = s.sup;
  rec.stop.max_sup = max_sup;
  rec.stop.budget = s.budget;
  rec.stop.budget_psi = s.budget_psi;
  rec.stop.max_u_minus_v = s.max_u_minus_v;
  rec.stop.min_u = s.min_u;
  rec.stop.exploded = s.exploded;
}

// Shared driver. `after_step` returns the stop reason, or None to continue.
template <class Check>
PathRecord drive(const ModelSpec& spec, double m0, const RunOptions& opts, Check after_step) {
  Stepper stepper(spec, opts.dt);
  NoiseGrid noise(spec.kernel, spec.grid, opts.seed);
  PathRecord rec = make_record(spec, opts);
  SolverState st = stepper.initial_state(m0);
  double max_sup = st.sup;
  rec.frames.push_back(make_frame(st, spec, opts.keep_fields));
  StopReason why = after_step(st);
  const double t_end = spec.T * (1 - 1e-12);
  while (why == StopReason::None && st.t < t_end) {
    const double h = std::min(opts.dt, spec.T - st.t);
    try {
      const Field dF = noise.sample(h, st.step);
      stepper.step(st, dF, h);
    } catch (const Error& e) {
      rec.stop.error = e.what();
      why = StopReason::Failure;
      break;
    }
    max_sup = std::max(max_sup, st.sup);
    if (opts.observer) opts.observer(st);
    why = after_step(st);
    const bool last = why != StopReason::None || st.t >= t_end;
    if (last || (opts.snapshot_every > 0 && st.step % opts.snapshot_every == 0))
      rec.frames.push_back(make_frame(st, spec, opts.keep_fields));
  }
  if (why == StopReason::Failure) rec.frames.push_back(make_frame(st, spec, opts.keep_fields));
  finish(rec, st, max_sup, why);
  return rec;
}

}  // namespace

PathRecord run_local(const ModelSpec& spec, const StoppingRule& rule, const RunOptions& opts) {
  if (!(rule.S > 0)) throw InvalidArgument("stopping rule: S must be positive");
  if (!(rule.R >= 1)) throw InvalidArgument("stopping rule: R must be >= 1");
  if (!(rule.m >= 1)) throw InvalidArgument("stopping rule: m must be >= 1");
  return drive(spec, rule.m, opts, [&](SolverState& s) {
    if (s.budget >= rule.S) {
      s.hit_S = true;
      return StopReason::Dissipation;
    }
    if (s.sup >= rule.R) {
      s.hit_R = true;
      return StopReason::SupNorm;
    }
    return StopReason::None;
  });
}

std::vector<double> default_m_schedule() {
  std::vector<double> ms;
  for (double m = 2; m <= 1024; m *= 2) ms.push_back(m);
  return ms;
}

PathRecord run_global(const ModelSpec& spec, const RunOptions& opts,
                      const std::vector<double>& schedule) {
  if (schedule.empty()) throw InvalidArgument("m schedule must be nonempty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] >= 2)) throw InvalidArgument("m schedule levels must be >= 2");
    if (i > 0 && !(schedule[i] > schedule[i - 1]))
      throw InvalidArgument("m schedule must be strictly increasing");
  }
  std::size_t level = 0;
  return drive(spec, schedule[0], opts, [&](SolverState& s) {
    while (s.sup >= s.m - 1) {
      if (level + 1 == schedule.size()) {
        s.hit_R = true;
        s.exploded = true;
        return StopReason::Explosion;
      }
      s.m = schedule[++level];
    }
    return StopReason::None;
  });
}

}  // namespace srde
