#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cftmps/io.hpp"

using namespace cftmps;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cftmps_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("config round-trip, hashing and overrides") {
  RunConfig c;
  c.algebra = "su2";
  c.level = 1;
  c.spins = {1, 1};
  c.chain_spins = {0, 1, 0};
  c.d = 0.75;
  c.N = 6;
  c.seed = 99;
  RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.spins == c.spins);
  CHECK(back.seed == 99);

  // any physics key change moves the hash; pure path keys do not
  RunConfig c2 = c;
  c2.d = 0.76;
  CHECK(config_hash(c2) != config_hash(c));
  RunConfig c3 = c;
  c3.output_dir = "/elsewhere";
  c3.jobs = 7;
  CHECK(config_hash(c3) == config_hash(c));

  // partial documents keep defaults
  RunConfig d = config_from_json(nlohmann::json{{"d", 2.0}});
  CHECK(d.d == 2.0);
  CHECK(d.N == RunConfig{}.N);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"numeric_mode", "symbolic"}}),
                  ValidationError);
}

TEST_CASE("cutoff policy M >= nN + N") {
  RunConfig c;
  c.charges = {"1", "-1"};
  c.N = 4;
  CHECK(effective_cutoff(c, 2, 4) == 12);  // derived nN + N
  c.M = 12;
  CHECK(effective_cutoff(c, 2, 4) == 12);
  c.M = 11;
  CHECK_THROWS_AS(effective_cutoff(c, 2, 4), ValidationError);
}

TEST_CASE("request construction from config") {
  RunConfig c;
  c.charges = {"1", "-1"};
  c.d = 1.5;
  c.N = 3;
  CorrelatorRequest r = request_from_config(c);
  CHECK(r.alg.kind == AlgebraKind::Heisenberg);
  REQUIRE(r.fields.size() == 2);
  CHECK(r.fields[0].charge.value == 1);
  CHECK(r.chain[1].value == -1);
  CHECK(r.d == 1.5);
  CHECK(r.M == 9);
  CHECK_NOTHROW(validate_request(r));

  RunConfig s;
  s.algebra = "su2";
  s.spins = {1, 1};
  s.chain_spins = {0, 1, 0};
  CorrelatorRequest rs = request_from_config(s);
  CHECK(rs.alg.kind == AlgebraKind::Simple);
  CHECK(rs.chain.size() == 3);
  s.chain_spins = {0, 1};
  CHECK_THROWS_AS(request_from_config(s), ValidationError);

  RunConfig empty;
  CHECK_THROWS_AS(request_from_config(empty), ValidationError);
}

TEST_CASE("module cache round-trip preserves the whole module") {
  TempDir tmp;
  for (bool heis : {true, false}) {
    AlgebraData alg = heis ? heisenberg_algebra() : su2_algebra(1);
    WeightLabel lam = heis ? WeightLabel::charge(1) : WeightLabel::spin(1);
    GradedModule mod = heis ? build_heisenberg_module(alg, lam.value, 5)
                            : build_module_recursive(alg, lam, 5);
    const std::string path = module_cache_path(tmp.path.string(), alg, lam, 5);
    save_module(path, mod);
    GradedModule back = load_module(path, alg);
    REQUIRE(back.cutoff() == 5);
    for (int m = 0; m <= 5; ++m) {
      REQUIRE(back.dim(m) == mod.dim(m));
      for (int a = 0; a < alg.dim_g; ++a) {
        CHECK((Matrix(back.zero_mode(a, m)) - Matrix(mod.zero_mode(a, m))).norm() == 0.0);
        for (int n = 1; n <= m; ++n) {
          CHECK((Matrix(back.lower(a, n, m)) - Matrix(mod.lower(a, n, m))).norm() == 0.0);
          CHECK((Matrix(back.span(m)[a][n - 1]) - Matrix(mod.span(m)[a][n - 1])).norm() == 0.0);
        }
      }
    }
  }
}

TEST_CASE("cache rejects mismatched algebra and corrupt headers") {
  TempDir tmp;
  AlgebraData h = heisenberg_algebra();
  GradedModule mod = build_heisenberg_module(h, Rational(0), 3);
  const std::string path = module_cache_path(tmp.path.string(), h, WeightLabel::charge(0), 3);
  save_module(path, mod);
  CHECK_THROWS_AS(load_module(path, su2_algebra(1)), ValidationError);
  {
    std::ofstream f(path, std::ios::binary);
    f << "garbage";
  }
  CHECK_THROWS_AS(load_module(path, h), ValidationError);
  CHECK_THROWS_AS(load_module(path + ".missing", h), ValidationError);
}

TEST_CASE("field-block cache round-trip") {
  TempDir tmp;
  AlgebraData h = heisenberg_algebra();
  GradedModule src = build_heisenberg_module(h, Rational(0), 4);
  GradedModule tgt = build_heisenberg_module(h, Rational(1), 4);
  PrimaryFieldSpec spec =
      make_field_spec(h, WeightLabel::charge(0), WeightLabel::charge(1), WeightLabel::charge(1));
  PrimaryFieldModes F = build_vertex_operator_blocks(src, tgt, spec, 4, 4);
  const std::string path = field_cache_path(tmp.path.string(), h, spec, 4, 4);
  save_field_modes(path, h, F);
  PrimaryFieldModes back = load_field_modes(path, h);
  CHECK(back.charge_dim == F.charge_dim);
  CHECK(back.max_src == 4);
  CHECK(cross_validate(F, back) == 0.0);
  CHECK(back.spec.h_scaling == F.spec.h_scaling);
}

TEST_CASE("cached workspace: warm reruns hit the cache and agree bit-for-bit") {
  TempDir tmp;
  CachedWorkspace ws1(heisenberg_algebra(), tmp.path.string());
  auto m1 = ws1.module_cached(WeightLabel::charge(1), 4);
  auto f1 = ws1.field_modes_cached(WeightLabel::charge(0), WeightLabel::charge(1),
                                   WeightLabel::charge(1), 4, 4);
  CHECK(ws1.cache_hits == 0);
  CHECK(ws1.cache_writes >= 2);

  CachedWorkspace ws2(heisenberg_algebra(), tmp.path.string());
  auto m2 = ws2.module_cached(WeightLabel::charge(1), 4);
  auto f2 = ws2.field_modes_cached(WeightLabel::charge(0), WeightLabel::charge(1),
                                   WeightLabel::charge(1), 4, 4);
  CHECK(ws2.cache_writes == 0);
  CHECK(ws2.cache_hits == 2);
  CHECK(m2->dim(4) == m1->dim(4));
  CHECK(cross_validate(*f1, *f2) == 0.0);

  // uncached directory string disables the mechanism
  CachedWorkspace ws3(heisenberg_algebra(), "");
  ws3.module_cached(WeightLabel::charge(1), 4);
  CHECK(ws3.cache_writes == 0);
}

TEST_CASE("mps export: header metadata and payload readback") {
  TempDir tmp;
  CorrelatorRequest r;
  r.alg = heisenberg_algebra();
  r.fields = {{WeightLabel::charge(1), 0}, {WeightLabel::charge(-1), 0}};
  r.chain = derive_heisenberg_chain(r.fields);
  r.d = 1.0;
  r.N = 3;
  r.M = 6;
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 6);
  const std::string base = (tmp.path / "out").string();
  export_mps(mps, base, "cfg123", 77);

  std::ifstream hf(base + ".json");
  REQUIRE(hf.good());
  nlohmann::json hdr;
  hf >> hdr;
  CHECK(hdr["byte_order"] == "little-endian");
  CHECK(hdr["config_hash"] == "cfg123");
  CHECK(hdr["seed"] == 77);
  CHECK(hdr["code_version"] == kCodeVersion);
  CHECK(hdr["q"].get<double>() == Catch::Approx(std::exp(-1.0)));
  CHECK(hdr["tensors"].size() == 2);

  // payload bytes decode back into the first site tensor
  std::vector<Matrix> site1 = dense_site(mps, 1);
  std::ifstream bin(base + ".bin", std::ios::binary);
  REQUIRE(bin.good());
  const auto& t0 = hdr["tensors"][0];
  REQUIRE(t0["rows"].get<int>() == site1[0].rows());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < site1[0].rows(); ++i)
    for (Eigen::Index j = 0; j < site1[0].cols(); ++j) {
      double v = cftmps::detail::read_pod<double>(bin);
      worst = std::max(worst, std::abs(v - site1[0](i, j)));
    }
  CHECK(worst == 0.0);
  const auto fsize = fs::file_size(base + ".bin");
  CHECK(fsize == hdr["payload_bytes"].get<std::uint64_t>());
}

TEST_CASE("csv dialect") {
  TempDir tmp;
  const std::string path = (tmp.path / "t.csv").string();
  {
    CsvWriter w(path, {"q", "value_re", "value_im"});
    w.row({CsvWriter::num(0.5), CsvWriter::num(1.25), CsvWriter::num(-0.0625)});
    CHECK_THROWS_AS(w.row({"1", "2"}), ValidationError);
  }
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == "q,value_re,value_im");
  CHECK(line == "0.5,1.25,-0.0625");
}

TEST_CASE("memory pre-flight grows with the bond level") {
  CorrelatorRequest r;
  r.alg = heisenberg_algebra();
  r.fields = {{WeightLabel::charge(1), 0}, {WeightLabel::charge(-1), 0}};
  r.chain = derive_heisenberg_chain(r.fields);
  const double small = estimate_memory_gb(r, 8);
  const double large = estimate_memory_gb(r, 20);
  CHECK(small > 0.0);
  CHECK(large > 10 * small);
  CHECK(large < 1.0);  // the L=20 pair run fits comfortably in a laptop budget
}
