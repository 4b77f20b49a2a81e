#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "srde/analysis.hpp"
#include "srde/noise.hpp"
#include "srde/solver.hpp"

namespace srde::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kVerdictFailure = 1, kConfigFailure = 2, kRuntimeFailure = 3 };

/// Parsed and defaulted run configuration (schema v1). `canonical` holds the
/// fully defaulted document; `hash` is the SHA-256 of its compact dump with the
/// output directory removed.
struct RunConfig {
  // model
  double beta = 8, gamma = 0.3, kappa = 0.49, T = 1;
  std::string kernel = "white";
  double kernel_alpha = 0.5;
  double kernel_exponent = 1;
  std::string coefficients = "identity";
  bool disable_dissipation = false;
  std::string initial = "constant";
  double initial_amplitude = 1, initial_width = 1;
  // grid
  int dim = 1, n_x = 256;
  double L = 16, dt = 1.0 / 4096;
  // stopping
  double S = std::numeric_limits<double>::infinity();
  double R = std::numeric_limits<double>::infinity();
  std::vector<double> m_schedule;
  // ensemble
  int seeds = 200;
  std::uint64_t first_seed = 0;
  int parallelism = 0;
  // outputs
  std::string directory = "srde-out";
  int snapshot_every = 4;
  std::vector<std::string> formats{"csv", "json", "svg", "bin"};
  // analysis
  double epsilon = 0.01;
  double holder_t_from = 0.5;
  double time_window[2] = {1.0 / 256, 1.0 / 16};
  double space_window[2] = {0, 0};  // defaults to [2 dx, 16 dx]
  std::vector<double> R_grid;
  // phase scan
  std::vector<double> phase_betas, phase_gammas;
  int phase_seeds = 20;
  double phase_threshold = 1000;
  double phase_T = 0;  // defaults to T

  std::string canonical;
  std::string hash;

  bool wants(const std::string& format) const;
};

/// Throws ConfigError with line or field diagnostics.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

CorrelationKernel build_kernel(const RunConfig& cfg);
ModelSpec build_spec(const RunConfig& cfg);

/// Worker count: SRDE_THREADS if set, else the configured width, else the core count.
int thread_count(const RunConfig& cfg);

std::string sha256_hex(const std::string& data);

struct CommandOptions {
  bool force = false;
  bool expect_explosion = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;  // overrides everything, used by tests
};

int cmd_check(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_ensemble(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_phase(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_holder(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);

/// Runs `count` independent jobs on `width` workers. Job i writes only its own slot.
void parallel_for(std::size_t count, int width, const std::function<void(std::size_t)>& job);

/// Per-seed results of an ensemble, in seed order.
struct EnsembleRun {
  std::vector<std::uint64_t> seeds;
  std::vector<PathSummary> summaries;        // surviving paths
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::string> failures;
  StructureFunction time_sf, space_sf;       // merged in seed order
  std::size_t holder_paths = 0;
  std::size_t holder_rejected = 0;           // exploded or off-plateau paths
};

EnsembleRun run_ensemble(const RunConfig& cfg, const ModelSpec& spec, int width, bool holder);

/// Entry point shared by the executable and the Python module.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace srde::cli
