#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "report.hpp"
#include "srde/cli.hpp"
#include "srde/errors.hpp"
#include "srde/record.hpp"

namespace srde::cli {

using nlohmann::ordered_json;
using report::num;

namespace {

constexpr std::size_t kPowerSeeds = 50;
constexpr double kHolderTolerance = 0.10;
constexpr double kExplosionTolerance = 0.025;
constexpr double kComparisonTolerance = 1e-12;

ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(num(x)); }

ordered_json header(const RunConfig& cfg, const char* command) {
  return ordered_json{{"tool", "srde"},
                      {"version", kToolVersion},
                      {"schema_version", kSchemaVersion},
                      {"config_hash", cfg.hash},
                      {"command", command}};
}

std::string out_dir(const RunConfig& cfg, const CommandOptions& opt) {
  const std::string dir = opt.out ? *opt.out : cfg.directory;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const char* name) { return (std::filesystem::path(dir) / name).string(); }

/// Builds the model and checks dt against the solver bound.
ModelSpec prepare(const RunConfig& cfg) {
  ModelSpec spec = build_spec(cfg);
  try {
    Stepper probe(spec, cfg.dt);
  } catch (const StepSizeError& e) {
    throw ConfigError(std::string("config error: grid.dt: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config error: model: ") + e.what());
  }
  return spec;
}

struct CheckResult {
  DalangReport dalang;
  AdmissibilityWindow window;
  bool exact_admissible = false;
  std::optional<HolderPrediction> prediction;
  std::string prediction_error;
  ValidationReport validation;
  bool pass = false;
};

CheckResult evaluate_check(const RunConfig& cfg, const ModelSpec& spec) {
  CheckResult r;
  r.dalang = dalang_report(spec.kernel, cfg.kappa);
  r.window = admissibility(cfg.beta, cfg.gamma, cfg.dim, cfg.kappa);
  r.exact_admissible = admissible_exact(cfg.beta, cfg.gamma, cfg.dim, cfg.kappa);
  try {
    r.prediction = holder_prediction(cfg.beta, cfg.gamma, cfg.dim, cfg.kappa, cfg.epsilon);
  } catch (const Error& e) {
    r.prediction_error = e.what();
  }
  SampleLattice lattice = SampleLattice::regular(cfg.dim, cfg.L / 2, cfg.dim == 1 ? 129 : 33, {0, cfg.T / 2, cfg.T});
  lattice.t_max = cfg.T;
  lattice.half_width = cfg.L / 2;
  r.validation = validate(spec.coeffs, lattice);
  r.pass = r.window.nonempty && r.dalang.admissible && r.validation.pass && !r.validation.outside_theorem;
  return r;
}

int threads_for(const RunConfig& cfg, const CommandOptions& opt) { return opt.threads ? *opt.threads : thread_count(cfg); }

// ------------------------------------------------------------------ verdict helpers

ordered_json holder_verdict(const StructureFunction& sf, double lo, double hi, bool feasible, double target,
                            double predicted, bool low_power) {
  ordered_json v;
  v["window"] = {lo, hi};
  if (!feasible) {
    v["status"] = "SKIPPED";
    v["reason"] = "no Hölder prediction for this model";
  }
  try {
    const HolderEstimate e = fit_holder(sf, lo, hi);
    v["estimate"] = e.exponent;
    v["std_error"] = e.std_error;
    v["lags_used"] = e.lags_used;
    v["paths"] = sf.paths;
    if (feasible) {
      v["target"] = target;
      v["prediction"] = predicted;
      v["tolerance"] = kHolderTolerance;
      v["deviation"] = e.exponent - target;
      const bool ok = std::abs(e.exponent - target) <= kHolderTolerance;
      v["status"] = low_power ? "LOW-POWER" : (ok ? "PASS" : "FAIL");
    }
  } catch (const Error& e) {
    if (feasible) v["status"] = low_power ? "LOW-POWER" : "UNAVAILABLE";
    v["error"] = e.what();
  }
  return v;
}

std::string structure_csv(const RunConfig& cfg, const StructureFunction& sf) {
  std::ostringstream os;
  os << report::csv_banner(cfg.hash) << "lag_samples,h,moment,count\n";
  for (std::size_t j = 0; j < sf.lags.size(); ++j)
    os << sf.lags[j] << ',' << num(sf.lags[j] * sf.spacing) << ',' << num(sf.mean(j)) << ',' << sf.count[j] << '\n';
  return os.str();
}

/// Block means so that neither side exceeds `cap` cells.
std::vector<std::vector<double>> downsample(const std::vector<std::vector<double>>& v, std::size_t cap) {
  const std::size_t rows = v.size(), cols = rows ? v[0].size() : 0;
  const std::size_t br = (rows + cap - 1) / cap, bc = (cols + cap - 1) / cap;
  if (br <= 1 && bc <= 1) return v;
  std::vector<std::vector<double>> out((rows + br - 1) / br, std::vector<double>((cols + bc - 1) / bc, 0));
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t c = 0; c < out[r].size(); ++c) {
      double sum = 0;
      std::size_t n = 0;
      for (std::size_t i = r * br; i < std::min(rows, (r + 1) * br); ++i)
        for (std::size_t k = c * bc; k < std::min(cols, (c + 1) * bc); ++k) sum += v[i][k], ++n;
      out[r][c] = sum / double(n);
    }
  return out;
}

bool explodes(const PathSummary& s, double threshold) { return s.exploded || s.max_sup >= threshold; }

void print_check(const RunConfig& cfg, const CheckResult& r, std::ostream& out) {
  out << "srde " << kToolVersion << " config " << cfg.hash << "\n";
  out << "kernel: " << build_kernel(cfg).name() << " (d=" << cfg.dim << ")\n";
  out << "Dalang: kappa_max = " << num(r.dalang.kappa_max) << ", kappa = " << num(cfg.kappa)
      << ", nu_kappa = " << (r.dalang.nu.infinite ? std::string("inf") : num(r.dalang.nu.value)) << " -> "
      << (r.dalang.admissible ? "admissible" : "rejected (kappa >= kappa_max or nu_kappa infinite)") << "\n";
  out << "window: p in (" << num(r.window.p_min) << ", " << num(r.window.p_max) << ") "
      << (r.window.nonempty ? "nonempty" : "empty") << "; gamma < kappa (1 + beta) / (d + 2) is "
      << (r.exact_admissible ? "true" : "false") << " in exact arithmetic\n";
  if (r.window.nonempty && std::isfinite(r.window.p_max)) {
    const double p = 0.5 * (r.window.p_min + r.window.p_max);
    try {
      out << "p0 at p = " << num(p) << ": " << num(r.window.p0_of(p)) << "\n";
    } catch (const Error&) {
    }
  }
  if (r.prediction) {
    const auto& h = *r.prediction;
    out << "Hölder: gap D = " << num(h.gap) << ", epsilon = " << num(h.epsilon) << ", space exponent "
        << num(h.space_exponent) << ", time exponent " << num(h.time_exponent) << "\n";
    out << "  space witness p = " << num(h.p_space) << ", alpha in (" << num(h.alpha1_space) << ", "
        << num(h.alpha2_space) << ")\n";
    out << "  time witness p = " << num(h.p_time) << ", alpha in (" << num(h.alpha1_time) << ", "
        << num(h.alpha2_time) << ")\n";
  } else {
    out << "Hölder: unavailable (" << r.prediction_error << ")\n";
  }
  out << "coefficients: " << cfg.coefficients << (cfg.disable_dissipation ? " without dissipation" : "") << " -> "
      << (r.validation.pass ? "valid" : "INVALID") << (r.validation.outside_theorem ? " OUTSIDE-THEOREM" : "")
      << (r.validation.symmetrized ? " (a symmetrized)" : "") << "\n";
  for (const auto& c : r.validation.checks)
    if (!c.pass)
      out << "  failed " << c.id << ": " << c.description << " worst " << num(c.worst) << " bound " << num(c.bound)
          << "\n";
  out << "verdict: " << (r.pass ? "ADMISSIBLE" : "NOT ADMISSIBLE") << "\n";
}

}  // namespace

// ------------------------------------------------------------------ check

int cmd_check(const RunConfig& cfg, const CommandOptions&, std::ostream& out) {
  const ModelSpec spec = prepare(cfg);
  const CheckResult r = evaluate_check(cfg, spec);
  print_check(cfg, r, out);
  return r.pass ? kOk : kVerdictFailure;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const ModelSpec spec = prepare(cfg);
  const CheckResult chk = evaluate_check(cfg, spec);
  if (!chk.pass && !opt.force) {
    print_check(cfg, chk, out);
    out << "simulate: refusing an inadmissible model without --force\n";
    return kVerdictFailure;
  }
  RunOptions ro;
  ro.dt = cfg.dt;
  ro.seed = opt.seed ? *opt.seed : cfg.first_seed;
  ro.snapshot_every = std::uint64_t(cfg.snapshot_every);
  ro.keep_fields = true;
  PathRecord rec;
  if (std::isfinite(cfg.S) || std::isfinite(cfg.R)) {
    rec = run_local(spec, StoppingRule{cfg.S, cfg.R, cfg.m_schedule.back()}, ro);
  } else {
    rec = run_global(spec, ro, cfg.m_schedule);
  }
  rec.config_hash = cfg.hash;
  const std::string dir = out_dir(cfg, opt);

  if (cfg.wants("bin")) write_path_record(join(dir, "path.bin"), rec);
  if (cfg.wants("csv")) {
    std::ostringstream os;
    os << report::csv_banner(cfg.hash) << "t,step,m,sup_u,l1,l1_beta,budget,budget_psi\n";
    for (const auto& f : rec.frames)
      os << num(f.t) << ',' << f.step << ',' << num(f.m) << ',' << num(f.sup) << ',' << num(f.l1) << ','
         << num(f.l1b) << ',' << num(f.budget) << ',' << num(f.budget_psi) << '\n';
    report::write_file(join(dir, "timeseries.csv"), os.str());
  }
  const StopInfo& s = rec.stop;
  if (cfg.wants("json")) {
    ordered_json j = header(cfg, "simulate");
    j["seed"] = rec.seed;
    j["forced"] = opt.force && !chk.pass;
    j["admissible"] = chk.pass;
    j["outside_theorem"] = chk.validation.outside_theorem;
    j["dt"] = cfg.dt;
    j["frames"] = rec.frames.size();
    j["stop"] = {{"reason", to_string(s.reason)},
                 {"time", s.time},
                 {"step", s.step},
                 {"m_final", s.m_final},
                 {"sup_at_stop", jnum(s.sup_at_stop)},
                 {"max_sup", jnum(s.max_sup)},
                 {"budget", jnum(s.budget)},
                 {"budget_psi", jnum(s.budget_psi)},
                 {"max_u_minus_v", jnum(s.max_u_minus_v)},
                 {"min_u", jnum(s.min_u)},
                 {"exploded", s.exploded},
                 {"error", s.error}};
    report::write_file(join(dir, "summary.json"), j.dump(2) + "\n");
  }
  if (cfg.wants("svg") && !rec.frames.empty()) {
    report::Heatmap h;
    h.config_hash = cfg.hash;
    h.value_label = "u";
    double lo = INFINITY, hi = -INFINITY;
    if (cfg.dim == 1) {
      h.title = "u(t, x), seed " + std::to_string(rec.seed);
      h.x_label = "x";
      h.y_label = "t";
      h.x0 = -cfg.L / 2;
      h.x1 = cfg.L / 2;
      h.y0 = rec.frames.front().t;
      h.y1 = rec.frames.back().t;
      for (const auto& f : rec.frames) h.values.emplace_back(f.u.begin(), f.u.end());
    } else {
      const Frame& f = rec.frames.back();
      h.title = "u(" + num(f.t) + ", x), seed " + std::to_string(rec.seed);
      h.x_label = "x1";
      h.y_label = "x2";
      h.x0 = h.y0 = -cfg.L / 2;
      h.x1 = h.y1 = cfg.L / 2;
      for (int r = 0; r < cfg.n_x; ++r)
        h.values.emplace_back(f.u.begin() + r * cfg.n_x, f.u.begin() + (r + 1) * cfg.n_x);
    }
    h.values = downsample(h.values, 128);
    for (const auto& row : h.values)
      for (double v : row)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    h.v_min = std::isfinite(lo) ? lo : 0;
    h.v_max = std::isfinite(hi) && hi > h.v_min ? hi : h.v_min + 1;
    report::write_file(join(dir, "heatmap.svg"), report::heatmap_svg(h));
  }

  out << "srde " << kToolVersion << " config " << cfg.hash << "\n";
  out << "simulate: seed " << rec.seed << ", stop " << to_string(s.reason) << " at t = " << num(s.time)
      << ", max sup u = " << num(s.max_sup) << ", budget = " << num(s.budget)
      << (s.exploded ? ", EXPLODED" : "") << "\n";
  out << "artifacts in " << dir << "\n";
  if (s.reason == StopReason::Failure) {
    out << "simulate: runtime failure: " << s.error << "\n";
    return kRuntimeFailure;
  }
  if (s.exploded && !opt.expect_explosion) return kVerdictFailure;
  return kOk;
}

// ------------------------------------------------------------------ ensemble and holder

namespace {

struct EnsembleOutcome {
  ordered_json verdict;
  bool fail = false;
  bool runtime_failure = false;
};

EnsembleOutcome ensemble_core(const RunConfig& cfg, const CommandOptions& opt, const char* command, bool full,
                              const std::string& dir) {
  const ModelSpec spec = prepare(cfg);
  const CheckResult chk = evaluate_check(cfg, spec);
  if (cfg.seeds < 2) throw ConfigError("config error: ensemble.seeds: an ensemble needs at least 2 seeds");
  EnsembleOutcome res;
  ordered_json& j = res.verdict;
  j = header(cfg, command);
  if (!chk.pass && !opt.force) {
    j["status"] = "REFUSED";
    j["reason"] = "model is not admissible; rerun with --force";
    res.fail = true;
    return res;
  }
  const EnsembleRun run = run_ensemble(cfg, spec, threads_for(cfg, opt), true);
  const std::size_t requested = run.seeds.size(), survived = run.summaries.size();
  const bool low_power = requested < kPowerSeeds;
  j["admissible"] = chk.pass;
  j["forced"] = opt.force && !chk.pass;
  j["outside_theorem"] = chk.validation.outside_theorem;
  j["low_power"] = low_power;
  ordered_json failed = ordered_json::array();
  for (std::size_t i = 0; i < run.failed_seeds.size(); ++i)
    failed.push_back({{"seed", run.failed_seeds[i]}, {"error", run.failures[i]}});
  j["seeds"] = {{"requested", requested}, {"first", cfg.first_seed}, {"survived", survived}, {"failed", failed}};
  if (double(survived) < 0.9 * double(requested)) {
    j["status"] = "INSUFFICIENT-SURVIVORS";
    res.runtime_failure = true;
    return res;
  }

  ordered_json v;
  if (full) {
    double worst = -INFINITY;
    for (const auto& s : run.summaries) worst = std::max(worst, s.max_u_minus_v);
    v["comparison"] = {{"max_u_minus_v", jnum(worst)},
                       {"tolerance", kComparisonTolerance},
                       {"status", worst <= kComparisonTolerance ? "PASS" : "FAIL"}};

    const BudgetReport b = dissipation_check(run.summaries, spec.coeffs.K, cfg.T, cfg.disable_dissipation);
    ordered_json bj;
    if (b.skipped) {
      bj = {{"status", "SKIPPED"}, {"banner", b.banner}};
    } else {
      bj = {{"paths", b.paths},
            {"mean", b.mean},
            {"std_error", b.std_error},
            {"mean_psi", b.mean_psi},
            {"std_error_psi", b.std_error_psi},
            {"mean_u0_l1", b.mean_u0_l1},
            {"constant", b.constant},
            {"constant_source", "K exp(4 K T), read from the proof of the budget bound"},
            {"bound", b.bound},
            {"margin", b.margin},
            {"status", low_power ? "LOW-POWER" : (b.pass ? "PASS" : "FAIL")}};
    }
    v["dissipation"] = bj;

    std::size_t hits = 0;
    for (const auto& s : run.summaries) hits += explodes(s, cfg.phase_threshold);
    double lo = 0, hi = 0;
    wilson_interval(hits, survived, lo, hi);
    const double frac = double(hits) / double(survived);
    ordered_json ne = {{"threshold", cfg.phase_threshold},
                       {"T", cfg.T},
                       {"explosions", hits},
                       {"paths", survived},
                       {"fraction", frac},
                       {"wilson_95", {lo, hi}},
                       {"tolerance", kExplosionTolerance}};
    if (!chk.pass) ne["status"] = "INFO";
    else ne["status"] = low_power ? "LOW-POWER" : (frac <= kExplosionTolerance ? "PASS" : "FAIL");
    v["non_explosion"] = ne;

    if (survived >= kPowerSeeds) {
      const BlowupTable t = blowup_stats(run.summaries, cfg.R_grid, cfg.m_schedule);
      std::ostringstream os;
      os << report::csv_banner(cfg.hash) << "m,R,p,lo,hi,hits,total\n";
      for (std::size_t a = 0; a < t.m.size(); ++a)
        for (std::size_t r = 0; r < t.R.size(); ++r) {
          const auto& c = t.cell[a][r];
          os << num(t.m[a]) << ',' << num(t.R[r]) << ',' << num(c.p) << ',' << num(c.lo) << ',' << num(c.hi) << ','
             << c.hits << ',' << c.total << '\n';
        }
      for (std::size_t r = 0; r < t.R.size(); ++r) {
        const auto& c = t.sup_over_m[r];
        os << "patched," << num(t.R[r]) << ',' << num(c.p) << ',' << num(c.lo) << ',' << num(c.hi) << ',' << c.hits
           << ',' << c.total << '\n';
      }
      if (cfg.wants("csv")) report::write_file(join(dir, "exceedance.csv"), os.str());
      v["exceedance"] = {{"status", "REPORTED"}, {"levels", t.m.size()}, {"thresholds", t.R.size()}};
    } else {
      v["exceedance"] = {{"status", "LOW-POWER"}};
    }

    if (cfg.wants("csv")) {
      std::ostringstream os;
      os << report::csv_banner(cfg.hash)
         << "seed,budget,budget_psi,u0_l1,max_sup,stop_time,max_u_minus_v,min_u,exploded,reason\n";
      for (const auto& s : run.summaries)
        os << s.seed << ',' << num(s.budget) << ',' << num(s.budget_psi) << ',' << num(s.u0_l1) << ','
           << num(s.max_sup) << ',' << num(s.stop_time) << ',' << num(s.max_u_minus_v) << ',' << num(s.min_u) << ','
           << (s.exploded ? 1 : 0) << ',' << to_string(s.reason) << '\n';
      report::write_file(join(dir, "paths.csv"), os.str());
    }
  }

  const bool feasible = chk.pass && chk.prediction.has_value();
  const double D = chk.prediction ? chk.prediction->gap : 0;
  v["holder_time"] = holder_verdict(run.time_sf, cfg.time_window[0], cfg.time_window[1], feasible, D / 2,
                                    chk.prediction ? chk.prediction->time_exponent : 0, low_power);
  v["holder_space"] = holder_verdict(run.space_sf, cfg.space_window[0], cfg.space_window[1], feasible, D,
                                     chk.prediction ? chk.prediction->space_exponent : 0, low_power);
  v["holder_time"]["t_from"] = cfg.holder_t_from;
  v["holder_space"]["t_from"] = cfg.holder_t_from;
  v["holder_time"]["rejected_paths"] = run.holder_rejected;
  v["holder_space"]["rejected_paths"] = run.holder_rejected;
  if (cfg.wants("csv")) {
    report::write_file(join(dir, "structure_time.csv"), structure_csv(cfg, run.time_sf));
    report::write_file(join(dir, "structure_space.csv"), structure_csv(cfg, run.space_sf));
  }
  j["verdicts"] = v;
  for (const auto& [_, x] : v.items())
    if (x.contains("status") && x["status"] == "FAIL") res.fail = true;
  j["status"] = res.fail ? "FAIL" : "PASS";
  return res;
}

int finish_ensemble(const RunConfig& cfg, const EnsembleOutcome& r, const std::string& dir, const char* file,
                    std::ostream& out) {
  if (cfg.wants("json") || r.runtime_failure) report::write_file(join(dir, file), r.verdict.dump(2) + "\n");
  out << "srde " << kToolVersion << " config " << cfg.hash << "\n";
  if (r.verdict.contains("verdicts"))
    for (const auto& [name, x] : r.verdict["verdicts"].items()) {
      out << "  " << std::left << std::setw(14) << name << ' ' << x.value("status", std::string("-"));
      if (x.contains("estimate")) out << "  estimate " << num(x["estimate"].get<double>());
      if (x.contains("target")) out << "  target " << num(x["target"].get<double>());
      if (x.contains("fraction")) out << "  fraction " << num(x["fraction"].get<double>());
      if (x.contains("margin")) out << "  margin " << num(x["margin"].get<double>());
      out << "\n";
    }
  out << "status: " << r.verdict.value("status", std::string("?")) << "  (" << join(dir, file) << ")\n";
  if (r.runtime_failure) return kRuntimeFailure;
  return r.fail ? kVerdictFailure : kOk;
}

}  // namespace

int cmd_ensemble(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const std::string dir = out_dir(cfg, opt);
  return finish_ensemble(cfg, ensemble_core(cfg, opt, "ensemble", true, dir), dir, "verdict.json", out);
}

int cmd_holder(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const std::string dir = out_dir(cfg, opt);
  return finish_ensemble(cfg, ensemble_core(cfg, opt, "holder", false, dir), dir, "holder.json", out);
}

// ------------------------------------------------------------------ phase

int cmd_phase(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  if (cfg.phase_betas.empty() || cfg.phase_gammas.empty())
    throw ConfigError("config error: phase: the beta x gamma lattice is empty");
  if (cfg.phase_seeds < 20) throw ConfigError("config error: phase.seeds_per_cell: at least 20 seeds per cell");
  struct Cell {
    double beta, gamma;
    bool admissible;
    ModelSpec spec;
  };
  std::vector<Cell> cells;
  for (double g : cfg.phase_gammas)
    for (double b : cfg.phase_betas) {
      RunConfig c = cfg;
      c.beta = b;
      c.gamma = g;
      c.T = cfg.phase_T;
      ModelSpec spec = prepare(c);
      const bool adm = evaluate_check(c, spec).pass;
      cells.push_back({b, g, adm, std::move(spec)});
    }
  const std::size_t per = std::size_t(cfg.phase_seeds);
  std::vector<char> hit(cells.size() * per, 0), failed(cells.size() * per, 0);
  parallel_for(hit.size(), threads_for(cfg, opt), [&](std::size_t k) {
    const Cell& c = cells[k / per];
    RunOptions ro;
    ro.dt = cfg.dt;
    ro.seed = cfg.first_seed + k % per;
    ro.snapshot_every = 0;
    ro.keep_fields = false;
    const PathRecord rec = run_global(c.spec, ro, cfg.m_schedule);
    if (rec.stop.reason == StopReason::Failure) failed[k] = 1;
    else hit[k] = explodes(summarize(rec), cfg.phase_threshold);
  });

  const std::string dir = out_dir(cfg, opt);
  const std::size_t nb = cfg.phase_betas.size(), ng = cfg.phase_gammas.size();
  std::ostringstream csv;
  csv << report::csv_banner(cfg.hash) << "beta,gamma,admissible,frontier_gamma,paths,failed,explosions,fraction,lo,hi\n";
  ordered_json jcells = ordered_json::array();
  std::vector<std::vector<double>> grid(ng, std::vector<double>(nb, 0));
  std::size_t adm_cells = 0, adm_quiet = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    std::size_t h = 0, f = 0;
    for (std::size_t s = 0; s < per; ++s) h += hit[i * per + s], f += failed[i * per + s];
    const std::size_t total = per - f;
    double lo = 0, hi = 0;
    if (total) wilson_interval(h, total, lo, hi);
    const double frac = total ? double(h) / double(total) : NAN;
    const double frontier = cfg.kappa * (1 + c.beta) / (cfg.dim + 2);
    grid[i / nb][i % nb] = frac;
    if (c.admissible) {
      ++adm_cells;
      adm_quiet += (h == 0 && total > 0);
    }
    csv << num(c.beta) << ',' << num(c.gamma) << ',' << (c.admissible ? 1 : 0) << ',' << num(frontier) << ','
        << total << ',' << f << ',' << h << ',' << num(frac) << ',' << num(lo) << ',' << num(hi) << '\n';
    jcells.push_back({{"beta", c.beta},
                      {"gamma", c.gamma},
                      {"admissible", c.admissible},
                      {"paths", total},
                      {"failed", f},
                      {"explosions", h},
                      {"fraction", jnum(frac)}});
  }
  ordered_json j = header(cfg, "phase");
  j["threshold"] = cfg.phase_threshold;
  j["T"] = cfg.phase_T;
  j["seeds_per_cell"] = per;
  j["frontier"] = "gamma = kappa (1 + beta) / (d + 2)";
  j["cells"] = jcells;
  const double quiet = adm_cells ? double(adm_quiet) / double(adm_cells) : NAN;
  std::string status = "INFO";
  if (adm_cells) status = quiet >= 0.95 ? "PASS" : "FAIL";
  j["admissible_cells"] = adm_cells;
  j["admissible_quiet_fraction"] = jnum(quiet);
  j["status"] = status;
  if (cfg.wants("csv")) report::write_file(join(dir, "phase.csv"), csv.str());
  if (cfg.wants("json")) report::write_file(join(dir, "phase.json"), j.dump(2) + "\n");
  if (cfg.wants("svg")) {
    report::Heatmap h;
    h.config_hash = cfg.hash;
    h.title = "explosion fraction, threshold " + num(cfg.phase_threshold) + ", T = " + num(cfg.phase_T);
    h.x_label = "beta";
    h.y_label = "gamma";
    h.value_label = "fraction";
    // Cells are drawn on an index lattice; axis ranges assume uniform spacing.
    auto range = [](const std::vector<double>& v, double& a, double& b) {
      const double step = v.size() > 1 ? (v.back() - v.front()) / double(v.size() - 1) : 1;
      a = v.front() - step / 2;
      b = v.back() + step / 2;
    };
    range(cfg.phase_betas, h.x0, h.x1);
    range(cfg.phase_gammas, h.y0, h.y1);
    h.values = grid;
    h.v_min = 0;
    h.v_max = 1;
    for (int k = 0; k <= 64; ++k) {
      const double b = h.x0 + (h.x1 - h.x0) * k / 64;
      h.overlay.emplace_back(b, cfg.kappa * (1 + b) / (cfg.dim + 2));
    }
    h.overlay_label = "gamma = kappa (1 + beta) / (d + 2)";
    report::write_file(join(dir, "phase.svg"), report::heatmap_svg(h));
  }
  out << "srde " << kToolVersion << " config " << cfg.hash << "\n";
  out << "phase: " << cells.size() << " cells, " << adm_cells << " admissible, quiet fraction " << num(quiet)
      << " -> " << status << "\n";
  return status == "FAIL" ? kVerdictFailure : kOk;
}

// ------------------------------------------------------------------ entry point

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for stochastic reaction-diffusion equations", "srde"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::string config;
  CommandOptions opt;
  std::uint64_t seed = 0;
  std::string outdir;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, const CommandOptions&, std::ostream&);
  };
  const Sub subs[] = {{"check", "admissibility and Dalang report", cmd_check},
                      {"simulate", "one path of the patched equation", cmd_simulate},
                      {"ensemble", "Monte Carlo ensemble with verdicts", cmd_ensemble},
                      {"phase", "explosion fractions over a beta x gamma lattice", cmd_phase},
                      {"holder", "ensemble Hölder exponent study", cmd_holder}};
  std::vector<CLI::App*> handles;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "JSON config file (schema v1)")->required();
    sub->add_flag("--force", opt.force, "run models that fail the admissibility check");
    sub->add_flag("--expect-explosion", opt.expect_explosion, "exit 0 when the path explodes");
    sub->add_option("--seed", seed, "seed override (simulate)");
    sub->add_option("--out", outdir, "output directory override");
    handles.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }
  for (std::size_t i = 0; i < handles.size(); ++i) {
    if (!handles[i]->parsed()) continue;
    if (handles[i]->count("--seed")) opt.seed = seed;
    if (handles[i]->count("--out")) opt.out = outdir;
    try {
      const RunConfig cfg = load_config(config);
      return subs[i].fn(cfg, opt, out);
    } catch (const ConfigError& e) {
      err << e.what() << "\n";
      return kConfigFailure;
    } catch (const std::exception& e) {
      err << "runtime failure: " << e.what() << "\n";
      return kRuntimeFailure;
    }
  }
  return kConfigFailure;
}

}  // namespace srde::cli
