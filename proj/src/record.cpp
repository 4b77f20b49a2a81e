#include "srde/record.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "srde/errors.hpp"

namespace srde {

static_assert(std::endian::native == std::endian::little,
              "path records are written in native little-endian order");

namespace {

constexpr char kMagic[8] = {'S', 'R', 'D', 'E', 'P', 'A', 'T', 'H'};
constexpr std::uint8_t kFrameTag = 'F';
constexpr std::uint8_t kEndTag = 'E';

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, std::uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw InvalidArgument("path record: truncated input");
  return v;
}

std::string get_string(std::istream& is) {
  const auto len = get<std::uint32_t>(is);
  if (len > (1u << 20)) throw InvalidArgument("path record: string field too long");
  std::string s(len, '\0');
  if (len && !is.read(s.data(), len)) throw InvalidArgument("path record: truncated input");
  return s;
}

}  // namespace

void write_path_record(std::ostream& os, const PathRecord& rec) {
  const std::size_t N = rec.grid.size();
  bool fields = !rec.frames.empty();
  for (const auto& f : rec.frames) fields = fields && f.u.size() == N;
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kPathRecordVersion);
  put<std::uint32_t>(os, std::uint32_t(rec.grid.dim));
  put<std::uint32_t>(os, std::uint32_t(rec.grid.n));
  put<double>(os, rec.grid.length);
  put<double>(os, rec.dt);
  put<double>(os, rec.beta);
  put<double>(os, rec.gamma);
  put<double>(os, rec.kappa);
  put<double>(os, rec.T);
  put<std::uint64_t>(os, rec.seed);
  put_string(os, rec.config_hash);
  put<std::uint32_t>(os, fields ? 1u : 0u);
  put<std::uint64_t>(os, rec.frames.size());
  for (const auto& f : rec.frames) {
    put<std::uint8_t>(os, kFrameTag);
    put<double>(os, f.t);
    put<std::uint64_t>(os, f.step);
    for (double v : {f.m, f.sup, f.l1, f.l1b, f.budget, f.budget_psi}) put<double>(os, v);
    if (fields) os.write(reinterpret_cast<const char*>(f.u.data()), std::streamsize(N * sizeof(double)));
  }
  const auto& s = rec.stop;
  put<std::uint8_t>(os, kEndTag);
  put<std::uint32_t>(os, std::uint32_t(s.reason));
  put<double>(os, s.time);
  put<std::uint64_t>(os, s.step);
  for (double v : {s.m_final, s.sup_at_stop, s.max_sup, s.budget, s.budget_psi, s.max_u_minus_v, s.min_u})
    put<double>(os, v);
  put<std::uint8_t>(os, s.exploded ? 1 : 0);
  put_string(os, s.error);
  if (!os) throw Error("path record: write failed");
}

void write_path_record(const std::string& path, const PathRecord& rec) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_path_record(os, rec);
}

PathRecord read_path_record(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw InvalidArgument("path record: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kPathRecordVersion)
    throw InvalidArgument("path record: unsupported version " + std::to_string(version));
  PathRecord rec;
  const int dim = int(get<std::uint32_t>(is));
  const int n = int(get<std::uint32_t>(is));
  const double length = get<double>(is);
  rec.grid = Grid(dim, n, length);
  rec.dt = get<double>(is);
  rec.beta = get<double>(is);
  rec.gamma = get<double>(is);
  rec.kappa = get<double>(is);
  rec.T = get<double>(is);
  rec.seed = get<std::uint64_t>(is);
  rec.config_hash = get_string(is);
  const bool fields = get<std::uint32_t>(is) & 1u;
  const auto count = get<std::uint64_t>(is);
  const std::size_t N = rec.grid.size();
  for (std::uint64_t k = 0; k < count; ++k) {
    if (get<std::uint8_t>(is) != kFrameTag) throw InvalidArgument("path record: bad frame tag");
    Frame f;
    f.t = get<double>(is);
    f.step = get<std::uint64_t>(is);
    f.m = get<double>(is);
    f.sup = get<double>(is);
    f.l1 = get<double>(is);
    f.l1b = get<double>(is);
    f.budget = get<double>(is);
    f.budget_psi = get<double>(is);
    if (fields) {
      f.u.resize(N);
      if (!is.read(reinterpret_cast<char*>(f.u.data()), std::streamsize(N * sizeof(double))))
        throw InvalidArgument("path record: truncated frame");
    }
    rec.frames.push_back(std::move(f));
  }
  if (get<std::uint8_t>(is) != kEndTag) throw InvalidArgument("path record: missing trailer");
  auto& s = rec.stop;
  const auto reason = get<std::uint32_t>(is);
  if (reason > std::uint32_t(StopReason::Failure)) throw InvalidArgument("path record: bad stop reason");
  s.reason = StopReason(reason);
  s.time = get<double>(is);
  s.step = get<std::uint64_t>(is);
  s.m_final = get<double>(is);
  s.sup_at_stop = get<double>(is);
  s.max_sup = get<double>(is);
  s.budget = get<double>(is);
  s.budget_psi = get<double>(is);
  s.max_u_minus_v = get<double>(is);
  s.min_u = get<double>(is);
  s.exploded = get<std::uint8_t>(is) != 0;
  s.error = get_string(is);
  return rec;
}

PathRecord read_path_record(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_path_record(is);
}

}  // namespace srde
