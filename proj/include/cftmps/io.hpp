// Run configuration (single JSON document with flag overrides), content
// hashing, binary caches for modules and field blocks, MPS export (JSON
// header + little-endian binary payload) and the CSV dialect used by sweeps.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cftmps/mps.hpp"

namespace cftmps {

inline constexpr const char* kCodeVersion = "cftmps 0.1.0";

// ---------------------------------------------------------------------------
// hashing

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

/// Content hash of an algebra: kind, dim, level, structure constants,
/// invariant form and adjoint map, serialized canonically.
inline std::string algebra_hash(const AlgebraData& alg) {
  std::ostringstream os;
  os << (alg.kind == AlgebraKind::Heisenberg ? "h" : "s") << '|' << alg.dim_g << '|' << alg.level
     << '|';
  for (int c = 0; c < alg.dim_g; ++c)
    for (int a = 0; a < alg.dim_g; ++a) {
      for (int b = 0; b < alg.dim_g; ++b) os << rational_str(alg.f[c][a][b]) << ',';
      os << rational_str(alg.kappa[c][a]) << ';';
    }
  for (int a : alg.adjoint) os << a << ',';
  return hash_hex(fnv1a64(os.str()));
}

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
  std::string algebra = "heisenberg";  // preset name or path to an algebra JSON file
  int level = 1;

  // one entry per insertion: heisenberg charges (exact rationals as strings)
  // or su(2) doubled spins, plus the chosen charge-space component
  std::vector<std::string> charges;
  std::vector<int> spins;
  std::vector<int> components;
  std::vector<int> chain_spins;  // explicit mu_0..mu_n (doubled) for su(2)

  double d = 1.0, d0 = 0.0;
  int N = 4;
  int M = -1;  // module cutoff; < 0 derives nN + N
  int bond_cap = 24;

  std::vector<double> d_grid;
  std::vector<int> N_grid;
  std::vector<double> eps_grid;

  std::string output_dir = ".";
  std::string cache_dir;           // empty: caching disabled
  std::string numeric_mode = "float";  // "float" | "rational" (exact Gram ranks)
  unsigned long long seed = 12345;
  double memory_budget_gb = 4.0;
  int jobs = 1;
};

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["algebra"] = c.algebra;
  j["level"] = c.level;
  j["charges"] = c.charges;
  j["spins"] = c.spins;
  j["components"] = c.components;
  j["chain_spins"] = c.chain_spins;
  j["d"] = c.d;
  j["d0"] = c.d0;
  j["N"] = c.N;
  j["M"] = c.M;
  j["bond_cap"] = c.bond_cap;
  j["d_grid"] = c.d_grid;
  j["N_grid"] = c.N_grid;
  j["eps_grid"] = c.eps_grid;
  j["output_dir"] = c.output_dir;
  j["cache_dir"] = c.cache_dir;
  j["numeric_mode"] = c.numeric_mode;
  j["seed"] = c.seed;
  j["memory_budget_gb"] = c.memory_budget_gb;
  j["jobs"] = c.jobs;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.algebra = j.value("algebra", c.algebra);
  c.level = j.value("level", c.level);
  c.charges = j.value("charges", c.charges);
  c.spins = j.value("spins", c.spins);
  c.components = j.value("components", c.components);
  c.chain_spins = j.value("chain_spins", c.chain_spins);
  c.d = j.value("d", c.d);
  c.d0 = j.value("d0", c.d0);
  c.N = j.value("N", c.N);
  c.M = j.value("M", c.M);
  c.bond_cap = j.value("bond_cap", c.bond_cap);
  c.d_grid = j.value("d_grid", c.d_grid);
  c.N_grid = j.value("N_grid", c.N_grid);
  c.eps_grid = j.value("eps_grid", c.eps_grid);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  c.numeric_mode = j.value("numeric_mode", c.numeric_mode);
  c.seed = j.value("seed", c.seed);
  c.memory_budget_gb = j.value("memory_budget_gb", c.memory_budget_gb);
  c.jobs = j.value("jobs", c.jobs);
  if (c.numeric_mode != "float" && c.numeric_mode != "rational")
    throw ValidationError("config: numeric_mode must be 'float' or 'rational'");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Deterministic content hash of the configuration (canonical JSON, sorted
/// keys). Keys that cannot change any computed number — output/cache paths and
/// resource limits — are excluded, so reruns into different directories hash
/// identically.
inline std::string config_hash(const RunConfig& c) {
  nlohmann::json j = config_to_json(c);
  j.erase("output_dir");
  j.erase("cache_dir");
  j.erase("jobs");
  j.erase("memory_budget_gb");
  return hash_hex(fnv1a64(j.dump()));
}

inline AlgebraData algebra_from_config(const RunConfig& c) {
  if (c.algebra == "heisenberg") return heisenberg_algebra();
  if (c.algebra == "su2") return su2_algebra(c.level);
  std::ifstream in(c.algebra);
  if (!in) throw ValidationError("config: unknown algebra preset or unreadable file: " + c.algebra);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config: invalid algebra JSON: ") + e.what());
  }
  return algebra_from_json(j);
}

/// Number of insertions implied by the configuration.
inline int config_n_fields(const RunConfig& c) {
  return static_cast<int>(std::max(c.charges.size(), c.spins.size()));
}

/// Module cutoff policy: M >= nN + N, derived when unset, rejected when too small.
inline int effective_cutoff(const RunConfig& c, int n, int N) {
  const long long need = static_cast<long long>(n) * N + N;
  if (c.M < 0) return static_cast<int>(need);
  if (c.M < need)
    throw ValidationError("config: M = " + std::to_string(c.M) + " violates M >= nN + N = " +
                          std::to_string(need));
  return c.M;
}

inline CorrelatorRequest request_from_config(const RunConfig& c, double d, int N) {
  CorrelatorRequest r;
  r.alg = algebra_from_config(c);
  const int n = config_n_fields(c);
  if (n == 0) throw ValidationError("config: no field insertions (charges/spins empty)");
  for (int j = 0; j < n; ++j) {
    FieldInsertion f;
    if (r.alg.kind == AlgebraKind::Heisenberg) {
      if (static_cast<int>(c.charges.size()) != n)
        throw ValidationError("config: heisenberg run needs one charge per insertion");
      f.charge = WeightLabel::charge(Rational(c.charges[j]));
    } else {
      if (static_cast<int>(c.spins.size()) != n)
        throw ValidationError("config: su(2) run needs one spin per insertion");
      f.charge = WeightLabel::spin(c.spins[j]);
    }
    f.component = j < static_cast<int>(c.components.size()) ? c.components[j] : 0;
    r.fields.push_back(f);
  }
  if (r.alg.kind == AlgebraKind::Heisenberg) {
    r.chain = derive_heisenberg_chain(r.fields);
  } else {
    if (static_cast<int>(c.chain_spins.size()) != n + 1)
      throw ValidationError("config: su(2) run needs chain_spins listing n+1 doubled spins");
    for (int s : c.chain_spins) r.chain.push_back(WeightLabel::spin(s));
  }
  r.d = d;
  r.d0 = c.d0;
  r.N = N;
  r.M = effective_cutoff(c, n, N);
  return r;
}

inline CorrelatorRequest request_from_config(const RunConfig& c) {
  return request_from_config(c, c.d, c.N);
}

/// Pre-flight memory estimate (GB) for the dense field blocks of one run at
/// bond level L: sum over block pairs of the built graded dimensions.
inline double estimate_memory_gb(const CorrelatorRequest& r, int L) {
  PartitionTable table(L, r.alg.kind == AlgebraKind::Heisenberg ? 1 : 3);
  double worst_cum = 0.0;
  for (const auto& mu : r.chain) {
    BigFloat cum(0);
    for (int m = 0; m <= L; ++m) cum += BigFloat(graded_dimension(r.alg, mu, m, table));
    worst_cum = std::max(worst_cum, cum.convert_to<double>());
  }
  const double entries =
      static_cast<double>(r.fields.size()) * r.alg.dim_g * worst_cum * worst_cum;
  return entries * 8.0 / 1e9;
}

// ---------------------------------------------------------------------------
// little-endian binary primitives

namespace detail {

inline bool host_little_endian() {
  const std::uint16_t x = 1;
  unsigned char b;
  std::memcpy(&b, &x, 1);
  return b == 1;
}

template <class T>
void write_pod(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if (!host_little_endian()) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw ValidationError("binary read: truncated stream");
  if (!host_little_endian()) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw ValidationError("binary read: truncated string");
  return s;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  write_pod<std::int64_t>(out, m.rows());
  write_pod<std::int64_t>(out, m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_pod<double>(out, m(i, j));
}

inline Matrix read_matrix(std::istream& in) {
  const auto r = read_pod<std::int64_t>(in);
  const auto c = read_pod<std::int64_t>(in);
  if (r < 0 || c < 0) throw ValidationError("binary read: negative matrix shape");
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = read_pod<double>(in);
  return m;
}

inline void write_sparse(std::ostream& out, const SparseMatrix& m) {
  write_pod<std::int64_t>(out, m.rows());
  write_pod<std::int64_t>(out, m.cols());
  write_pod<std::int64_t>(out, m.nonZeros());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      write_pod<std::int64_t>(out, it.row());
      write_pod<std::int64_t>(out, it.col());
      write_pod<double>(out, it.value());
    }
}

inline SparseMatrix read_sparse(std::istream& in) {
  const auto r = read_pod<std::int64_t>(in);
  const auto c = read_pod<std::int64_t>(in);
  const auto nnz = read_pod<std::int64_t>(in);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(nnz));
  for (std::int64_t i = 0; i < nnz; ++i) {
    const auto row = read_pod<std::int64_t>(in);
    const auto col = read_pod<std::int64_t>(in);
    const auto v = read_pod<double>(in);
    t.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
  }
  SparseMatrix m(r, c);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// module and field-block caches

inline constexpr std::uint32_t kModuleMagic = 0x4d544643;  // "CFTM"
inline constexpr std::uint32_t kFieldMagic = 0x46544643;   // "CFTF"
inline constexpr std::uint32_t kCacheFormat = 1;

inline std::string module_cache_path(const std::string& dir, const AlgebraData& alg,
                                     const WeightLabel& lambda, int cutoff) {
  std::string tag = algebra_hash(alg) + "_" + hash_hex(fnv1a64(rational_str(lambda.value)));
  return (std::filesystem::path(dir) / ("module_" + tag + "_M" + std::to_string(cutoff) + ".bin"))
      .string();
}

inline void save_module(const std::string& path, const GradedModule& mod) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cache: cannot write " + path);
  detail::write_pod<std::uint32_t>(out, kModuleMagic);
  detail::write_pod<std::uint32_t>(out, kCacheFormat);
  detail::write_string(out, algebra_hash(mod.algebra()));
  detail::write_string(out, rational_str(mod.label().value));
  detail::write_pod<std::int32_t>(out, mod.cutoff());
  const int dg = mod.algebra().dim_g;
  for (int m = 0; m <= mod.cutoff(); ++m) {
    const GradedLevelData& lvl = mod.levels_[m];
    detail::write_pod<std::int32_t>(out, lvl.dim);
    for (int a = 0; a < dg; ++a) detail::write_sparse(out, lvl.zero[a]);
    for (int a = 0; a < dg; ++a)
      for (int n = 1; n <= m; ++n) detail::write_sparse(out, lvl.lower[a][n - 1]);
    for (int a = 0; a < dg; ++a)
      for (int n = 1; n <= m; ++n) detail::write_sparse(out, lvl.span[a][n - 1]);
  }
  if (!out) throw ValidationError("cache: write failure on " + path);
}

inline GradedModule load_module(const std::string& path, const AlgebraData& alg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cache: cannot read " + path);
  if (detail::read_pod<std::uint32_t>(in) != kModuleMagic)
    throw ValidationError("cache: bad module magic in " + path);
  if (detail::read_pod<std::uint32_t>(in) != kCacheFormat)
    throw ValidationError("cache: unsupported format version in " + path);
  if (detail::read_string(in) != algebra_hash(alg))
    throw ValidationError("cache: algebra hash mismatch in " + path);
  const Rational value(detail::read_string(in));
  const int cutoff = detail::read_pod<std::int32_t>(in);
  const int dg = alg.dim_g;
  GradedModule mod(alg, WeightLabel{value}, cutoff);
  for (int m = 0; m <= cutoff; ++m) {
    GradedLevelData lvl;
    lvl.dim = detail::read_pod<std::int32_t>(in);
    lvl.zero.resize(dg);
    for (int a = 0; a < dg; ++a) lvl.zero[a] = detail::read_sparse(in);
    lvl.lower.assign(dg, std::vector<SparseMatrix>(m));
    for (int a = 0; a < dg; ++a)
      for (int n = 1; n <= m; ++n) lvl.lower[a][n - 1] = detail::read_sparse(in);
    lvl.span.assign(dg, std::vector<SparseMatrix>(m));
    for (int a = 0; a < dg; ++a)
      for (int n = 1; n <= m; ++n) lvl.span[a][n - 1] = detail::read_sparse(in);
    mod.levels_.push_back(std::move(lvl));
  }
  return mod;
}

inline std::string field_cache_path(const std::string& dir, const AlgebraData& alg,
                                    const PrimaryFieldSpec& spec, int max_src, int max_tgt) {
  std::string key = algebra_hash(alg) + "|" + rational_str(spec.source.value) + "|" +
                    rational_str(spec.charge.value) + "|" + rational_str(spec.target.value);
  return (std::filesystem::path(dir) /
          ("field_" + hash_hex(fnv1a64(key)) + "_S" + std::to_string(max_src) + "_T" +
           std::to_string(max_tgt) + ".bin"))
      .string();
}

inline void save_field_modes(const std::string& path, const AlgebraData& alg,
                             const PrimaryFieldModes& F) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cache: cannot write " + path);
  detail::write_pod<std::uint32_t>(out, kFieldMagic);
  detail::write_pod<std::uint32_t>(out, kCacheFormat);
  detail::write_string(out, algebra_hash(alg));
  detail::write_string(out, rational_str(F.spec.source.value));
  detail::write_string(out, rational_str(F.spec.charge.value));
  detail::write_string(out, rational_str(F.spec.target.value));
  detail::write_pod<std::int32_t>(out, F.charge_dim);
  detail::write_pod<std::int32_t>(out, F.max_src);
  detail::write_pod<std::int32_t>(out, F.max_tgt);
  detail::write_pod<std::uint8_t>(out, F.structural_zero ? 1 : 0);
  for (int v = 0; v < F.charge_dim; ++v)
    for (int ms = 0; ms <= F.max_src; ++ms)
      for (int mt = 0; mt <= F.max_tgt; ++mt) detail::write_matrix(out, F.blocks[v][ms][mt]);
  if (!out) throw ValidationError("cache: write failure on " + path);
}

inline PrimaryFieldModes load_field_modes(const std::string& path, const AlgebraData& alg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cache: cannot read " + path);
  if (detail::read_pod<std::uint32_t>(in) != kFieldMagic)
    throw ValidationError("cache: bad field magic in " + path);
  if (detail::read_pod<std::uint32_t>(in) != kCacheFormat)
    throw ValidationError("cache: unsupported format version in " + path);
  if (detail::read_string(in) != algebra_hash(alg))
    throw ValidationError("cache: algebra hash mismatch in " + path);
  WeightLabel src{Rational(detail::read_string(in))};
  WeightLabel chg{Rational(detail::read_string(in))};
  WeightLabel tgt{Rational(detail::read_string(in))};
  PrimaryFieldModes F;
  F.spec = make_field_spec(alg, src, chg, tgt);
  F.charge_dim = detail::read_pod<std::int32_t>(in);
  F.max_src = detail::read_pod<std::int32_t>(in);
  F.max_tgt = detail::read_pod<std::int32_t>(in);
  F.structural_zero = detail::read_pod<std::uint8_t>(in) != 0;
  F.blocks.assign(F.charge_dim,
                  std::vector<std::vector<Matrix>>(F.max_src + 1,
                                                   std::vector<Matrix>(F.max_tgt + 1)));
  for (int v = 0; v < F.charge_dim; ++v)
    for (int ms = 0; ms <= F.max_src; ++ms)
      for (int mt = 0; mt <= F.max_tgt; ++mt) F.blocks[v][ms][mt] = detail::read_matrix(in);
  return F;
}

/// Workspace variant that reads/writes the binary caches. An empty directory
/// string disables caching entirely.
class CachedWorkspace : public Workspace {
 public:
  CachedWorkspace(AlgebraData alg, std::string cache_dir)
      : Workspace(std::move(alg)), dir_(std::move(cache_dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  int cache_hits = 0, cache_writes = 0;

  std::shared_ptr<const GradedModule> module_cached(const WeightLabel& lambda, int cutoff) {
    if (dir_.empty()) return module(lambda, cutoff);
    const std::string path = module_cache_path(dir_, algebra(), lambda, cutoff);
    if (std::filesystem::exists(path)) {
      ++cache_hits;
      return std::make_shared<const GradedModule>(load_module(path, algebra()));
    }
    auto built = module(lambda, cutoff);
    save_module(path, *built);
    ++cache_writes;
    return built;
  }

  std::shared_ptr<const PrimaryFieldModes> field_modes_cached(const WeightLabel& source,
                                                              const WeightLabel& charge,
                                                              const WeightLabel& target,
                                                              int max_src, int max_tgt) {
    if (dir_.empty()) return field_modes(source, charge, target, max_src, max_tgt);
    PrimaryFieldSpec spec = make_field_spec(algebra(), source, charge, target);
    const std::string path = field_cache_path(dir_, algebra(), spec, max_src, max_tgt);
    if (std::filesystem::exists(path)) {
      ++cache_hits;
      return std::make_shared<const PrimaryFieldModes>(load_field_modes(path, algebra()));
    }
    auto built = field_modes(source, charge, target, max_src, max_tgt);
    save_field_modes(path, algebra(), *built);
    ++cache_writes;
    return built;
  }

 private:
  std::string dir_;
};

// ---------------------------------------------------------------------------
// MPS export: JSON header + raw little-endian payload

/// Writes <base>.json and <base>.bin. The payload is the dense site tensors,
/// row-major doubles, little-endian, concatenated in the order listed in the
/// header's "tensors" array.
inline void export_mps(const MpsApproximation& mps, const std::string& base,
                       const std::string& cfg_hash, unsigned long long seed) {
  nlohmann::json hdr;
  hdr["format"] = "cftmps-mps";
  hdr["format_version"] = 1;
  hdr["code_version"] = kCodeVersion;
  hdr["config_hash"] = cfg_hash;
  hdr["seed"] = seed;
  hdr["byte_order"] = "little-endian";
  hdr["scalar"] = "float64";
  hdr["payload"] = std::filesystem::path(base + ".bin").filename().string();
  hdr["n"] = mps.n;
  hdr["N"] = mps.N;
  hdr["L"] = mps.L;
  hdr["d"] = mps.d;
  hdr["d0"] = mps.d0;
  hdr["q"] = mps.q;
  hdr["prefactor"] = mps.grid_prefactor;
  hdr["covariance_factor"] = mps.covariance_factor;
  hdr["value"] = mps.value;
  hdr["certified_bound"] = mps.certified_bound;
  hdr["bond_dims"] = mps.bond_dims;
  hdr["bond_dim_accounting"] = mps.bond_dim_accounting.str();

  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw ValidationError("export: cannot write " + base + ".bin");
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (int j = 1; j <= mps.n; ++j) {
    std::vector<Matrix> site = dense_site(mps, j);
    for (int k = 0; k < static_cast<int>(site.size()); ++k) {
      const Matrix& A = site[k];
      nlohmann::json t;
      t["site"] = j;
      t["component"] = k;
      t["rows"] = A.rows();
      t["cols"] = A.cols();
      t["offset_bytes"] = offset;
      tensors.push_back(t);
      for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) detail::write_pod<double>(bin, A(r, c));
      offset += static_cast<std::uint64_t>(A.size()) * 8;
    }
  }
  hdr["tensors"] = tensors;
  hdr["payload_bytes"] = offset;
  std::ofstream out(base + ".json");
  if (!out) throw ValidationError("export: cannot write " + base + ".json");
  out << hdr.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// CSV dialect: comma separator, header row, '.' decimal, complex as re/im pairs

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw ValidationError("csv: cannot write " + path);
    out_.imbue(std::locale::classic());
    out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
    ncols_ = columns.size();
    for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  /// One row; every cell is already a formatted string.
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw ValidationError("csv: wrong number of cells in row");
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  static std::string num(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
  }
  static std::string num(long long v) { return std::to_string(v); }
  static std::string num(int v) { return std::to_string(v); }

 private:
  std::ofstream out_;
  size_t ncols_ = 0;
};

/// Standard metadata block embedded in every JSON output.
inline nlohmann::json output_metadata(const RunConfig& cfg) {
  nlohmann::json j;
  j["code_version"] = kCodeVersion;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace cftmps
