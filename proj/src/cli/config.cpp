#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "json.hpp"
#include "srde/cli.hpp"
#include "srde/errors.hpp"

namespace srde::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config error: " + field + ": " + what);
}

// Strict reader: every key must be known, every value well typed.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : obj_.items())
      if (!ok.count(k)) fail(field(k), "unknown key");
  }

  bool has(const char* key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, double def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field(key), "expected a finite number");
    return x;
  }
  double positive(const char* key, double def) const {
    const double x = number(key, def);
    if (!(x > 0)) fail(field(key), "expected a positive number");
    return x;
  }
  long long integer(const char* key, long long def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    return v.get<long long>();
  }
  bool boolean(const char* key, bool def) const {
    if (!has(key)) return def;
    if (!obj_.at(key).is_boolean()) fail(field(key), "expected true or false");
    return obj_.at(key).get<bool>();
  }
  std::string string(const char* key, const std::string& def) const {
    if (!has(key)) return def;
    if (!obj_.at(key).is_string()) fail(field(key), "expected a string");
    return obj_.at(key).get<std::string>();
  }
  std::vector<double> numbers(const char* key, std::vector<double> def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<std::string> strings(const char* key, std::vector<std::string> def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }
  Reader child(const char* key) const {
    static const json empty = json::object();
    return Reader(has(key) ? obj_.at(key) : empty, field(key));
  }

 private:
  const json& obj_;
  std::string path_;
};

json number_or_inf(double x) { return std::isfinite(x) ? json(x) : json("inf"); }

}  // namespace

bool RunConfig::wants(const std::string& format) const {
  for (const auto& f : formats)
    if (f == format) return true;
  return false;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config error: line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed JSON");
  }
  Reader root(doc, "");
  root.allow({"schema_version", "model", "grid", "stopping", "ensemble", "outputs", "analysis", "phase"});
  if (!root.has("schema_version")) fail("schema_version", "missing (expected 1)");
  if (root.integer("schema_version", 0) != kSchemaVersion) fail("schema_version", "unsupported version (expected 1)");

  RunConfig c;
  {
    Reader m = root.child("model");
    m.allow({"beta", "gamma", "kappa", "T", "kernel", "coefficients", "initial"});
    c.beta = m.positive("beta", c.beta);
    c.gamma = m.number("gamma", c.gamma);
    if (!(c.gamma >= 0)) fail("model.gamma", "expected a nonnegative number");
    c.kappa = m.number("kappa", c.kappa);
    if (!(c.kappa > 0 && c.kappa <= 1)) fail("model.kappa", "expected a number in (0, 1]");
    c.T = m.positive("T", c.T);
    Reader k = m.child("kernel");
    k.allow({"type", "alpha", "exponent"});
    c.kernel = k.string("type", c.kernel);
    c.kernel_alpha = k.number("alpha", c.kernel_alpha);
    c.kernel_exponent = k.number("exponent", c.kernel_exponent);
    if (c.kernel != "white" && c.kernel != "riesz" && c.kernel != "ou" && c.kernel != "constant")
      fail("model.kernel.type", "expected one of white, riesz, ou, constant");
    Reader co = m.child("coefficients");
    co.allow({"preset", "disable_dissipation"});
    c.coefficients = co.string("preset", c.coefficients);
    if (c.coefficients != "identity" && c.coefficients != "variable-demo")
      fail("model.coefficients.preset", "expected identity or variable-demo");
    c.disable_dissipation = co.boolean("disable_dissipation", c.disable_dissipation);
    Reader in = m.child("initial");
    in.allow({"type", "amplitude", "width"});
    c.initial = in.string("type", c.initial);
    if (c.initial != "zero" && c.initial != "constant" && c.initial != "bump" && c.initial != "plateau")
      fail("model.initial.type", "expected one of zero, constant, bump, plateau");
    c.initial_amplitude = in.number("amplitude", c.initial_amplitude);
    if (!(c.initial_amplitude >= 0)) fail("model.initial.amplitude", "expected a nonnegative number");
    c.initial_width = in.positive("width", c.initial_width);
  }
  {
    Reader g = root.child("grid");
    g.allow({"dim", "n_x", "L", "dt"});
    c.dim = int(g.integer("dim", c.dim));
    if (c.dim != 1 && c.dim != 2) fail("grid.dim", "expected 1 or 2");
    c.n_x = int(g.integer("n_x", c.n_x));
    if (c.n_x < 4 || c.n_x % 2) fail("grid.n_x", "expected an even integer >= 4");
    c.L = g.positive("L", c.L);
    c.dt = g.positive("dt", c.dt);
  }
  {
    Reader s = root.child("stopping");
    s.allow({"S", "R", "m_schedule"});
    c.S = s.number("S", c.S);
    c.R = s.number("R", c.R);
    if (!(c.S > 0)) fail("stopping.S", "expected a positive number or \"inf\"");
    if (!(c.R >= 1)) fail("stopping.R", "expected a number >= 1 or \"inf\"");
    c.m_schedule = s.numbers("m_schedule", default_m_schedule());
    if (c.m_schedule.empty()) fail("stopping.m_schedule", "expected a nonempty array");
    for (std::size_t i = 0; i < c.m_schedule.size(); ++i) {
      if (!(c.m_schedule[i] >= 2)) fail("stopping.m_schedule", "levels must be >= 2");
      if (i && !(c.m_schedule[i] > c.m_schedule[i - 1])) fail("stopping.m_schedule", "levels must increase");
    }
  }
  {
    Reader e = root.child("ensemble");
    e.allow({"seeds", "first_seed", "parallelism"});
    c.seeds = int(e.integer("seeds", c.seeds));
    if (c.seeds < 1) fail("ensemble.seeds", "expected an integer >= 1");
    const long long fs = e.integer("first_seed", 0);
    if (fs < 0) fail("ensemble.first_seed", "expected a nonnegative integer");
    c.first_seed = std::uint64_t(fs);
    c.parallelism = int(e.integer("parallelism", c.parallelism));
    if (c.parallelism < 0) fail("ensemble.parallelism", "expected an integer >= 0 (0 = all cores)");
  }
  {
    Reader o = root.child("outputs");
    o.allow({"directory", "snapshot_every", "formats"});
    c.directory = o.string("directory", c.directory);
    c.snapshot_every = int(o.integer("snapshot_every", c.snapshot_every));
    if (c.snapshot_every < 1) fail("outputs.snapshot_every", "expected an integer >= 1");
    c.formats = o.strings("formats", c.formats);
    for (const auto& f : c.formats)
      if (f != "csv" && f != "json" && f != "svg" && f != "bin") fail("outputs.formats", "unknown format '" + f + "'");
  }
  {
    Reader a = root.child("analysis");
    a.allow({"epsilon", "holder_t_from", "time_window", "space_window", "R_grid"});
    c.epsilon = a.positive("epsilon", c.epsilon);
    c.holder_t_from = a.number("holder_t_from", c.holder_t_from);
    const double dx = c.L / c.n_x;
    auto window = [&](const char* key, double* dst, std::vector<double> def) {
      const auto w = a.numbers(key, def);
      if (w.size() != 2 || !(w[0] > 0) || !(w[1] > w[0])) fail(a.field(key), "expected [low, high] with 0 < low < high");
      dst[0] = w[0];
      dst[1] = w[1];
    };
    window("time_window", c.time_window, {c.time_window[0], c.time_window[1]});
    window("space_window", c.space_window, {2 * dx, 16 * dx});
    c.R_grid = a.numbers("R_grid", {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000});
  }
  {
    Reader p = root.child("phase");
    p.allow({"betas", "gammas", "seeds_per_cell", "threshold", "T"});
    c.phase_betas = p.numbers("betas", {});
    c.phase_gammas = p.numbers("gammas", {});
    for (double b : c.phase_betas)
      if (!(b > 0)) fail("phase.betas", "expected positive numbers");
    for (double g : c.phase_gammas)
      if (!(g > 0)) fail("phase.gammas", "expected positive numbers");
    c.phase_seeds = int(p.integer("seeds_per_cell", c.phase_seeds));
    c.phase_threshold = p.positive("threshold", c.phase_threshold);
    c.phase_T = p.positive("T", c.T);
  }

  json canon = {
      {"schema_version", kSchemaVersion},
      {"model",
       {{"beta", c.beta},
        {"gamma", c.gamma},
        {"kappa", c.kappa},
        {"T", c.T},
        {"kernel", {{"type", c.kernel}, {"alpha", c.kernel_alpha}, {"exponent", c.kernel_exponent}}},
        {"coefficients", {{"preset", c.coefficients}, {"disable_dissipation", c.disable_dissipation}}},
        {"initial", {{"type", c.initial}, {"amplitude", c.initial_amplitude}, {"width", c.initial_width}}}}},
      {"grid", {{"dim", c.dim}, {"n_x", c.n_x}, {"L", c.L}, {"dt", c.dt}}},
      {"stopping", {{"S", number_or_inf(c.S)}, {"R", number_or_inf(c.R)}, {"m_schedule", c.m_schedule}}},
      {"ensemble", {{"seeds", c.seeds}, {"first_seed", c.first_seed}}},
      {"outputs", {{"snapshot_every", c.snapshot_every}, {"formats", c.formats}}},
      {"analysis",
       {{"epsilon", c.epsilon},
        {"holder_t_from", c.holder_t_from},
        {"time_window", {c.time_window[0], c.time_window[1]}},
        {"space_window", {c.space_window[0], c.space_window[1]}},
        {"R_grid", c.R_grid}}},
      {"phase",
       {{"betas", c.phase_betas},
        {"gammas", c.phase_gammas},
        {"seeds_per_cell", c.phase_seeds},
        {"threshold", c.phase_threshold},
        {"T", c.phase_T}}}};
  // Output directory and parallelism do not change results and stay out of the hash.
  c.canonical = canon.dump();
  c.hash = sha256_hex(c.canonical);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config error: cannot read '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

CorrelationKernel build_kernel(const RunConfig& c) {
  try {
    if (c.kernel == "white") return CorrelationKernel::white(c.dim);
    if (c.kernel == "riesz") return CorrelationKernel::riesz(c.kernel_alpha, c.dim);
    if (c.kernel == "ou") return CorrelationKernel::ornstein_uhlenbeck(c.kernel_exponent, c.dim);
    return CorrelationKernel::constant(c.dim);
  } catch (const InvalidArgument& e) {
    fail("model.kernel", e.what());
  }
}

ModelSpec build_spec(const RunConfig& c) {
  ModelSpec s;
  s.beta = c.beta;
  s.gamma = c.gamma;
  s.kappa = c.kappa;
  s.T = c.T;
  try {
    s.grid = Grid(c.dim, c.n_x, c.L);
    s.kernel = build_kernel(c);
    s.coeffs = CoefficientSet::preset(c.coefficients, c.dim, c.L);
    if (c.disable_dissipation) s.coeffs = s.coeffs.without_dissipation();
    s.u0 = make_initial(c.initial, c.initial_amplitude, c.initial_width, s.grid);
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail("model", e.what());
  }
  return s;
}

int thread_count(const RunConfig& c) {
  if (const char* env = std::getenv("SRDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("config error: SRDE_THREADS must be a positive integer");
    return int(v);
  }
  if (c.parallelism > 0) return c.parallelism;
  return std::max(1, int(std::thread::hardware_concurrency()));
}

}  // namespace srde::cli
