#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace srde {

using Point2 = std::array<double, 2>;  // spatial point; the second entry is unused for d = 1
using Matrix2 = std::array<double, 4>; // row-major 2x2; only [0] is used for d = 1
using Vector2 = std::array<double, 2>;

/// Coefficient fields of the operator L u = a^{ij} u_ij + b^i u_i + c u, the
/// dissipation b_bar and the noise amplitude xi, with the constant K that bounds
/// them. Callables must be pure in (t, x).
struct CoefficientSet {
  int dim = 1;
  std::function<Matrix2(double, const Point2&)> a;
  std::function<Vector2(double, const Point2&)> b;
  std::function<double(double, const Point2&)> c;
  std::function<double(double, const Point2&)> b_bar;
  std::function<double(double, const Point2&)> xi;
  double K = 1;
  bool time_dependent = false;
  /// Lifts the requirement b_bar >= 1/K (stress runs outside the theorem).
  bool allow_nondissipative = false;
  std::string name = "custom";

  /// a = I, b = 0, c = 0, b_bar = 1, xi = 1, K = 1.
  static CoefficientSet identity(int dim);
  /// Smooth periodic perturbations on a torus of period `length`, K = 2.
  static CoefficientSet variable_demo(int dim, double length);
  /// Named preset ("identity", "variable-demo").
  static CoefficientSet preset(const std::string& name, int dim, double length);

  /// Same fields with b_bar replaced by zero; marks the set non-dissipative.
  CoefficientSet without_dissipation() const;
};

/// Space-time sample lattice used by validate().
struct SampleLattice {
  std::vector<double> times;
  std::vector<Point2> points;
  /// Extra uniformly random points drawn in [-half_width, half_width]^d x [0, t_max].
  int random_points = 1000;
  double half_width = 8;
  double t_max = 1;
  std::uint64_t seed = 12345;
  /// Finite-difference spacing for the C^2 seminorms.
  double fd_step = 1e-3;

  static SampleLattice regular(int dim, double half_width, int per_axis, std::vector<double> times);
};

struct InequalityCheck {
  std::string id;           // "3.1-lower", "3.1-upper", "3.2", "3.3:<field>"
  std::string description;
  double worst = 0;         // worst sampled value of the checked quantity
  double bound = 0;
  double margin = 0;        // >= 0 when the inequality holds
  double t = 0;
  Point2 x{0, 0};
  bool pass = true;
};

struct ValidationReport {
  std::vector<InequalityCheck> checks;
  bool pass = true;
  bool symmetrized = false;  // a had an antisymmetric part > 1e-12 somewhere
  bool outside_theorem = false;
  std::string banner;        // "OUTSIDE-THEOREM" for non-dissipative runs
};

ValidationReport validate(const CoefficientSet& coeffs, const SampleLattice& lattice);
/// validate(), throwing ValidationError on the first failed inequality.
ValidationReport validate_or_throw(const CoefficientSet& coeffs, const SampleLattice& lattice);

/// psi_k(x) = 1 / cosh(|x| / k).
double psi_weight(int k, std::span<const double> x);

}  // namespace srde
