#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "srde/cli.hpp"
#include "srde/errors.hpp"

namespace srde::cli {

void parallel_for(std::size_t count, int width, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(count, std::size_t(std::max(1, width)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

struct SeedResult {
  bool failed = false;
  std::string error;
  PathSummary summary;
  bool holder_used = false;
  StructureFunction time_sf, space_sf;
};

}  // namespace

EnsembleRun run_ensemble(const RunConfig& cfg, const ModelSpec& spec, int width, bool holder) {
  const std::size_t n = std::size_t(cfg.seeds);
  std::vector<SeedResult> slots(n);
  parallel_for(n, width, [&](std::size_t i) {
    SeedResult& r = slots[i];
    RunOptions opts;
    opts.dt = cfg.dt;
    opts.seed = cfg.first_seed + i;
    opts.snapshot_every = std::uint64_t(cfg.snapshot_every);
    opts.keep_fields = holder;
    PathRecord rec = run_global(spec, opts, cfg.m_schedule);
    rec.config_hash = cfg.hash;
    if (rec.stop.reason == StopReason::Failure) {
      r.failed = true;
      r.error = rec.stop.error;
      return;
    }
    r.summary = summarize(rec);
    if (!holder || rec.stop.exploded) return;
    std::vector<Field> rows;
    double spacing = 0;
    for (std::size_t k = 0; k < rec.frames.size(); ++k) {
      const Frame& f = rec.frames[k];
      if (f.t < cfg.holder_t_from - 1e-12) continue;
      if (f.sup > f.m) return;  // left the truncation plateau: not a sample of the equation
      if (rows.size() == 1) spacing = f.t - rec.frames[k - 1].t;
      if (rows.size() >= 2 && std::abs(f.t - rec.frames[k - 1].t - spacing) > 1e-9 * spacing) break;
      rows.push_back(std::move(rec.frames[k].u));
    }
    if (rows.size() < 2) return;
    r.time_sf = structure_function(rows, rec.grid, spacing, Axis::Time);
    r.space_sf = structure_function(rows, rec.grid, spacing, Axis::Space);
    r.holder_used = true;
  });

  EnsembleRun out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = cfg.first_seed + i;
    out.seeds.push_back(seed);
    SeedResult& r = slots[i];
    if (r.failed) {
      out.failed_seeds.push_back(seed);
      out.failures.push_back(r.error);
      continue;
    }
    out.summaries.push_back(r.summary);
    if (!holder) continue;
    if (!r.holder_used) {
      ++out.holder_rejected;
      continue;
    }
    out.time_sf.merge(r.time_sf);
    out.space_sf.merge(r.space_sf);
    ++out.holder_paths;
  }
  return out;
}

}  // namespace srde::cli
