#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "srde/coefficients.hpp"
#include "srde/grid.hpp"
#include "srde/noise.hpp"

namespace srde {

/// h_m(z): 1 for |z| <= m, 0 for |z| >= 2m, C^1 cubic blend in between.
double truncation(double z, double m);

/// Named nonnegative initial fields: "zero", "constant", "bump" (Gaussian
/// amplitude * exp(-|x|^2 / (2 width^2))), "plateau" (amplitude on |x| <= width).
Field make_initial(const std::string& kind, double amplitude, double width, const Grid& grid);

struct ModelSpec {
  double beta = 8;
  double gamma = 0.3;
  double kappa = 0.49;
  double T = 1;
  Grid grid;
  Field u0;
  CorrelationKernel kernel = CorrelationKernel::white(1);
  CoefficientSet coeffs = CoefficientSet::identity(1);

  /// gamma < kappa (1 + beta) / (d + 2); recorded, not enforced.
  bool admissible() const;
  /// Throws InvalidArgument on malformed fields.
  void validate() const;
};

struct StoppingRule {
  double S = std::numeric_limits<double>::infinity();  // dissipation cap
  double R = std::numeric_limits<double>::infinity();  // sup-norm cap
  double m = 2;                                        // truncation level
};

enum class StopReason { None, Dissipation, SupNorm, Explosion, Failure };
const char* to_string(StopReason r);

struct SolverState {
  double t = 0;
  std::uint64_t step = 0;
  Field u, v;
  double m = 2;
  /// Left-point sum of dt * b_bar u_+^{1+beta} h_m(u) * cell volume.
  double budget = 0;
  /// Same sum weighted by psi_k with k = L/4.
  double budget_psi = 0;
  /// Mass actually removed by the implicit reaction solve.
  double budget_applied = 0;
  /// sup of u_+; the nonlinearities only see u_+, so this is the quantity the
  /// truncation level and the sup-norm stopping rule act on.
  double sup = 0;
  double max_u_minus_v = -std::numeric_limits<double>::infinity();
  double min_u = std::numeric_limits<double>::infinity();
  bool hit_S = false, hit_R = false, exploded = false;
};

/// One step of the truncated equation for u and of the comparison process v.
/// Lower-order terms and noise are explicit (upwind drift), the reaction is
/// solved pointwise implicitly and the diffusion is backward Euler, so every
/// stage is order preserving and u <= v propagates.
class Stepper {
 public:
  Stepper(const ModelSpec& spec, double dt);

  double dt() const { return dt_; }
  /// Largest dt keeping the explicit lower-order update order preserving.
  double max_dt() const { return max_dt_; }

  SolverState initial_state(double m) const;
  /// Advances state by h <= dt with the given noise increment.
  void step(SolverState& state, const Field& dF, double h) const;

 private:
  struct Coeffs {
    std::vector<double> a1, a2, b1, b2, c, b_bar, xi;
  };
  const Coeffs& coeffs_at(double t, Coeffs& scratch) const;
  void explicit_part(const Field& w, const Field& noise, const Coeffs& co, double h,
                     Field& out) const;
  void implicit_diffusion(Field& w, const Coeffs& co, double h) const;

  ModelSpec spec_;
  double dt_;
  double max_dt_;
  Coeffs frozen_;
  std::vector<double> psi_;
};

/// Snapshot of the running path.
struct Frame {
  double t = 0;
  std::uint64_t step = 0;
  double m = 0;
  double sup = 0;     // sup of u_+
  double l1 = 0;      // ||u||_{L_1}
  double l1b = 0;     // ||u||_{L_{1+beta}}
  double budget = 0;
  double budget_psi = 0;
  Field u;            // empty when fields are not kept
};

struct StopInfo {
  StopReason reason = StopReason::None;
  double time = 0;
  std::uint64_t step = 0;
  double m_final = 0;
  double sup_at_stop = 0;
  double max_sup = 0;
  double budget = 0;
  double budget_psi = 0;
  double max_u_minus_v = 0;
  double min_u = 0;
  bool exploded = false;
  std::string error;
};

struct PathRecord {
  std::string config_hash;
  Grid grid;
  double dt = 0;
  double beta = 0, gamma = 0, kappa = 0, T = 0;
  std::uint64_t seed = 0;
  std::vector<Frame> frames;
  StopInfo stop;
};

struct RunOptions {
  double dt = 1.0 / 4096;
  std::uint64_t seed = 0;
  /// Keep a frame every this many steps (0: only the first and last).
  std::uint64_t snapshot_every = 16;
  bool keep_fields = true;
  /// Optional per-step observer, called after every step.
  std::function<void(const SolverState&)> observer;
};

/// Evolves u_m and v_m from u0 until min(T, tau_m(S), tau_m^R).
PathRecord run_local(const ModelSpec& spec, const StoppingRule& rule, const RunOptions& opts);

/// Default patching schedule {2, 4, ..., 1024}.
std::vector<double> default_m_schedule();

/// Patched global candidate: runs the truncated equation, switching to the next
/// level whenever sup u reaches m - 1. Paths at different levels agree below that
/// threshold, so the switch continues the same path. Explosion is flagged when the
/// top level's stopping time fires before T.
PathRecord run_global(const ModelSpec& spec, const RunOptions& opts,
                      const std::vector<double>& m_schedule = default_m_schedule());

}  // namespace srde
