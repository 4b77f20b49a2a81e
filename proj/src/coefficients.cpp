#include "srde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "srde/errors.hpp"

namespace srde {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

}  // namespace

CoefficientSet CoefficientSet::identity(int dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("identity: dim must be 1 or 2");
  CoefficientSet s;
  s.dim = dim;
  s.a = [](double, const Point2&) { return Matrix2{1, 0, 0, 1}; };
  s.b = [](double, const Point2&) { return Vector2{0, 0}; };
  s.c = [](double, const Point2&) { return 0.0; };
  s.b_bar = [](double, const Point2&) { return 1.0; };
  s.xi = [](double, const Point2&) { return 1.0; };
  s.K = 1;
  s.name = "identity";
  return s;
}

CoefficientSet CoefficientSet::variable_demo(int dim, double length) {
  if (dim != 1 && dim != 2) throw InvalidArgument("variable_demo: dim must be 1 or 2");
  if (!(length > 0)) throw InvalidArgument("variable_demo: length must be positive");
  const double w = kTwoPi / length;
  CoefficientSet s;
  s.dim = dim;
  // Diagonal a keeps the implicit diffusion an M-matrix in both dimensions.
  s.a = [w](double, const Point2& x) {
    return Matrix2{1 + 0.4 * std::sin(w * x[0]), 0, 0, 1 + 0.4 * std::sin(w * x[1])};
  };
  s.b = [w, dim](double, const Point2& x) {
    return Vector2{0.2 * std::cos(w * x[0]), dim == 2 ? 0.2 * std::cos(w * x[1]) : 0.0};
  };
  s.c = [w](double, const Point2& x) { return 0.1 * std::sin(w * x[0]); };
  s.b_bar = [w](double, const Point2& x) { return 1 + 0.4 * std::cos(w * x[0]); };
  s.xi = [w](double, const Point2& x) { return 1 + 0.3 * std::sin(w * x[0]); };
  s.K = 2;
  s.name = "variable-demo";
  return s;
}

CoefficientSet CoefficientSet::preset(const std::string& name, int dim, double length) {
  if (name == "identity") return identity(dim);
  if (name == "variable-demo") return variable_demo(dim, length);
  throw InvalidArgument("unknown coefficient preset '" + name + "'");
}

CoefficientSet CoefficientSet::without_dissipation() const {
  CoefficientSet s = *this;
  s.b_bar = [](double, const Point2&) { return 0.0; };
  s.allow_nondissipative = true;
  s.name = name + "+nodissipation";
  return s;
}

SampleLattice SampleLattice::regular(int dim, double half_width, int per_axis,
                                     std::vector<double> times) {
  if (per_axis < 1) throw InvalidArgument("SampleLattice: per_axis must be >= 1");
  SampleLattice lat;
  lat.half_width = half_width;
  lat.times = std::move(times);
  if (lat.times.empty()) lat.times = {0.0};
  lat.t_max = *std::max_element(lat.times.begin(), lat.times.end());
  auto coord = [&](int i) {
    return per_axis == 1 ? 0.0 : -half_width + 2 * half_width * i / (per_axis - 1);
  };
  for (int i = 0; i < per_axis; ++i) {
    if (dim == 1) {
      lat.points.push_back({coord(i), 0});
    } else {
      for (int j = 0; j < per_axis; ++j) lat.points.push_back({coord(i), coord(j)});
    }
  }
  return lat;
}

namespace {

struct Sample {
  double t;
  Point2 x;
};

std::vector<Sample> collect_samples(int dim, const SampleLattice& lat) {
  std::vector<Sample> out;
  for (double t : lat.times)
    for (const auto& p : lat.points) out.push_back({t, p});
  std::mt19937_64 rng(lat.seed);
  std::uniform_real_distribution<double> ux(-lat.half_width, lat.half_width);
  std::uniform_real_distribution<double> ut(0.0, std::max(lat.t_max, 0.0));
  for (int i = 0; i < lat.random_points; ++i) {
    Sample s{ut(rng), {ux(rng), 0}};
    if (dim == 2) s.x[1] = ux(rng);
    out.push_back(s);
  }
  return out;
}

// Largest of |g|, |D g|, |D^2 g| at (t, x), by centred differences.
double c2_local(const std::function<double(double, const Point2&)>& g, int dim, double t,
                const Point2& x, double h) {
  const double g0 = g(t, x);
  double worst = std::abs(g0);
  auto shifted = [&](int i, double si, int j, double sj) {
    Point2 y = x;
    y[i] += si;
    y[j] += sj;
    return g(t, y);
  };
  for (int i = 0; i < dim; ++i) {
    const double gp = shifted(i, h, i, 0), gm = shifted(i, -h, i, 0);
    worst = std::max(worst, std::abs(gp - gm) / (2 * h));
    worst = std::max(worst, std::abs(gp - 2 * g0 + gm) / (h * h));
    for (int j = i + 1; j < dim; ++j) {
      const double mixed = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) +
                            shifted(i, -h, j, -h)) /
                           (4 * h * h);
      worst = std::max(worst, std::abs(mixed));
    }
  }
  return worst;
}

struct Tracker {
  InequalityCheck check;
  bool seen = false;
  // Keeps the sample with the smallest margin.
  void offer(double value, double margin, const Sample& s) {
    if (!seen || margin < check.margin) {
      check.worst = value;
      check.margin = margin;
      check.t = s.t;
      check.x = s.x;
      seen = true;
    }
  }
};

}  // namespace

ValidationReport validate(const CoefficientSet& co, const SampleLattice& lat) {
  if (co.dim != 1 && co.dim != 2) throw InvalidArgument("validate: dim must be 1 or 2");
  if (!(co.K > 0)) throw InvalidArgument("validate: K must be positive");
  if (!co.a || !co.b || !co.c || !co.b_bar || !co.xi)
    throw InvalidArgument("validate: every coefficient field must be set");
  const auto samples = collect_samples(co.dim, lat);
  if (samples.empty()) throw InvalidArgument("validate: sample set is empty");

  const double K = co.K, h = lat.fd_step;
  const int d = co.dim;
  ValidationReport rep;

  Tracker lower{{"3.1-lower", "eta.a.eta >= |eta|^2 / K", 0, 1 / K}};
  Tracker upper{{"3.1-upper", "eta.a.eta <= K |eta|^2", 0, K}};
  Tracker diss{{"3.2", "b_bar >= 1 / K", 0, 1 / K}};
  std::vector<std::pair<std::string, std::function<double(double, const Point2&)>>> fields;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      fields.emplace_back("a" + std::to_string(i + 1) + std::to_string(j + 1),
                          [&co, i, j](double t, const Point2& x) {
                            const auto m = co.a(t, x);
                            return 0.5 * (m[2 * i + j] + m[2 * j + i]);
                          });
  for (int i = 0; i < d; ++i)
    fields.emplace_back("b" + std::to_string(i + 1),
                        [&co, i](double t, const Point2& x) { return co.b(t, x)[i]; });
  fields.emplace_back("c", co.c);
  fields.emplace_back("b_bar", co.b_bar);
  std::vector<Tracker> smooth;
  for (const auto& [name, _] : fields)
    smooth.push_back({{"3.3:" + name, "C^2 norm of " + name + " <= K", 0, K}});
  Tracker xi{{"3.3:xi", "|xi| <= K", 0, K}};

  for (const auto& s : samples) {
    const auto m = co.a(s.t, s.x);
    double lmin, lmax;
    if (d == 1) {
      lmin = lmax = m[0];
    } else {
      const double off = 0.5 * (m[1] + m[2]);
      if (std::abs(m[1] - off) > 1e-12) rep.symmetrized = true;
      const double mean = 0.5 * (m[0] + m[3]);
      const double rad = std::hypot(0.5 * (m[0] - m[3]), off);
      lmin = mean - rad;
      lmax = mean + rad;
    }
    lower.offer(lmin, lmin - 1 / K, s);
    upper.offer(lmax, K - lmax, s);
    const double bb = co.b_bar(s.t, s.x);
    diss.offer(bb, bb - 1 / K, s);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const double v = c2_local(fields[f].second, d, s.t, s.x, h);
      smooth[f].offer(v, K - v, s);
    }
    const double z = std::abs(co.xi(s.t, s.x));
    xi.offer(z, K - z, s);
  }

  auto push = [&rep](Tracker& tr) {
    tr.check.pass = tr.check.margin >= 0 && std::isfinite(tr.check.worst);
    rep.checks.push_back(tr.check);
  };
  push(lower);
  push(upper);
  push(diss);
  if (co.allow_nondissipative) {
    rep.checks.back().pass = true;
    rep.checks.back().description += " (waived: non-dissipative stress run)";
    rep.outside_theorem = true;
    rep.banner = "OUTSIDE-THEOREM";
  }
  for (auto& tr : smooth) push(tr);
  push(xi);
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                         [](const InequalityCheck& c) { return c.pass; });
  return rep;
}

ValidationReport validate_or_throw(const CoefficientSet& co, const SampleLattice& lat) {
  auto rep = validate(co, lat);
  for (const auto& c : rep.checks) {
    if (!c.pass) {
      std::string loc = "t=" + std::to_string(c.t) + " x=(" + std::to_string(c.x[0]);
      if (co.dim == 2) loc += "," + std::to_string(c.x[1]);
      loc += ")";
      throw ValidationError(c.id, loc,
                            c.description + " violated: value " + std::to_string(c.worst) +
                                " bound " + std::to_string(c.bound) + " at " + loc);
    }
  }
  return rep;
}

double psi_weight(int k, std::span<const double> x) {
  if (k < 1) throw InvalidArgument("psi_weight: k must be >= 1");
  double r2 = 0;
  for (double v : x) r2 += v * v;
  return 1 / std::cosh(std::sqrt(r2) / k);
}

}  // namespace srde
