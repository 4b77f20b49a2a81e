#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "srde/grid.hpp"
#include "srde/solver.hpp"

namespace srde {

// ---------------------------------------------------------------- admissibility

struct AdmissibilityWindow {
  double p_min = 0;   // (d + 2) / kappa
  double p_max = 0;   // (1 + beta) / gamma
  bool nonempty = false;
  double beta = 0, gamma = 0;

  bool contains(double p) const { return p > p_min && p < p_max; }
  /// p0 = p / (p (gamma + 1) - (1 + beta)).
  double p0_of(double p) const;
};

/// Nonemptiness is decided exactly: doubles are converted to rationals.
AdmissibilityWindow admissibility(double beta, double gamma, int d, double kappa);

struct ExactWindow {
  boost::rational<long long> p_min, p_max;
  bool nonempty = false;
};
ExactWindow admissibility_exact(boost::rational<long long> beta, boost::rational<long long> gamma, int d,
                                boost::rational<long long> kappa);

/// Exact evaluation of gamma < kappa (1 + beta) / (d + 2) on the given doubles.
bool admissible_exact(double beta, double gamma, int d, double kappa);

struct HolderPrediction {
  double space_exponent = 0;  // D - eps
  double time_exponent = 0;   // D / 2 - eps
  double epsilon = 0;
  double gap = 0;             // D = kappa - gamma (d + 2) / (1 + beta)
  // Witnesses (p, alpha1, alpha2) with 1/p < alpha1 < alpha2 < (kappa - d/p) / 2.
  double p_space = 0, alpha1_space = 0, alpha2_space = 0;
  double p_time = 0, alpha1_time = 0, alpha2_time = 0;
};

/// Throws InfeasibleEpsilon unless the window is nonempty and 0 < eps < D / 2.
HolderPrediction holder_prediction(double beta, double gamma, int d, double kappa, double epsilon);

// ---------------------------------------------------------------- Hölder estimation

enum class Axis { Time, Space };
const char* to_string(Axis a);

/// Second-order structure function S(h) = E |u(. + h) - u(.)|^2 accumulated at
/// dyadic lags h = spacing * 2^j. Merging accumulators is exact and order free
/// when done in a fixed order.
struct StructureFunction {
  double spacing = 0;
  std::vector<int> lags;           // in samples, 1, 2, 4, ...
  std::vector<CompensatedSum> sum;
  std::vector<std::uint64_t> count;
  std::size_t samples = 0;         // samples along the axis
  std::size_t paths = 0;

  void merge(const StructureFunction& other);
  double mean(std::size_t j) const { return count[j] ? sum[j].value() / double(count[j]) : 0.0; }
};

/// Rows are snapshots at uniform time spacing `dt_snap`; each row is a field on
/// `grid`. Space increments run along the last axis and wrap periodically; time
/// increments pair equal positions. Only rows with index >= first_row are used.
StructureFunction structure_function(std::span<const Field> rows, const Grid& grid, double dt_snap,
                                     Axis axis, std::size_t first_row = 0);

struct HolderEstimate {
  double exponent = 0;
  double std_error = 0;
  int lags_used = 0;
  double lag_min = 0, lag_max = 0;
  std::vector<double> lag;
  std::vector<double> moment;
};

/// Least squares fit of log S(h) against log h over lags inside [h_min, h_max].
/// Throws PreconditionError with fewer than 64 samples along the axis and
/// ResolutionError with fewer than 4 lags in the window.
HolderEstimate fit_holder(const StructureFunction& sf, double h_min, double h_max);

/// Estimate from path records (frames must carry fields at uniform cadence).
/// Frames at levels where u left the truncation plateau are rejected.
HolderEstimate estimate_holder(std::span<const PathRecord> paths, Axis axis, double h_min, double h_max,
                               double t_from = 0);

// ---------------------------------------------------------------- Sobolev norms

/// || (1 - Delta_h)^{n/2} u ||_{L_p} with the discrete Laplacian symbol
/// (4 / dx^2) sin^2(k dx / 2) per axis.
double sobolev_norm(const Field& u, double n, double p, const Grid& grid);

// ---------------------------------------------------------------- ensembles

/// Per-path numbers used by the ensemble statistics.
struct PathSummary {
  std::uint64_t seed = 0;
  std::string config_hash;
  double budget = 0;
  double budget_psi = 0;
  double u0_l1 = 0;
  double max_sup = 0;
  double stop_time = 0;
  double max_u_minus_v = 0;
  double min_u = 0;
  bool exploded = false;
  StopReason reason = StopReason::None;
};
PathSummary summarize(const PathRecord& rec);

struct BudgetReport {
  bool skipped = false;
  std::string banner;              // OUTSIDE-THEOREM when skipped
  std::size_t paths = 0;
  double mean = 0, std_error = 0;
  double mean_psi = 0, std_error_psi = 0;
  double mean_u0_l1 = 0;
  double constant = 0;             // K exp(4 K T), read from the proof of the budget bound
  double bound = 0;                // constant * E ||u0||_{L1}
  double margin = 0;               // bound + 3 SE - mean
  bool pass = true;
};

/// Throws ConfigError when the summaries disagree on the config hash. Sums run
/// over sorted values, so the verdict is invariant under seed relabelling.
BudgetReport dissipation_check(std::span<const PathSummary> paths, double K, double T,
                               bool nondissipative);

struct ExceedanceCell {
  double p = 0, lo = 0, hi = 0;    // NaN when not observable at this level
  std::size_t hits = 0, total = 0;
};

struct BlowupTable {
  std::vector<double> R;
  std::vector<double> m;
  std::vector<std::vector<ExceedanceCell>> cell;  // [m][R]
  std::vector<ExceedanceCell> sup_over_m;         // per R
};

/// Wilson score interval at z = 1.96.
void wilson_interval(std::size_t hits, std::size_t total, double& lo, double& hi);

/// P(sup_{t <= T, x} u_m > R) per level m and threshold R. For R < m - 1 the
/// event for u_m coincides with the event for the patched path, which is what
/// the summaries carry; other cells are not observable and hold NaN. Requires at
/// least 50 paths.
BlowupTable blowup_stats(std::span<const PathSummary> paths, std::span<const double> R_grid,
                         std::span<const double> m_levels);

}  // namespace srde
