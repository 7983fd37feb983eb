// Command-line front end: module construction with caching, correlator
// evaluation, convergence sweeps, bound tables and oracle verification.
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "cftmps/io.hpp"
#include "cftmps/oracle.hpp"
#include "cftmps/scaling.hpp"

namespace {

using namespace cftmps;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void preflight_memory(const CorrelatorRequest& req, int L, double budget_gb) {
  const double gb = estimate_memory_gb(req, L);
  if (gb > budget_gb)
    throw ValidationError("pre-flight: estimated " + std::to_string(gb) +
                          " GB of field blocks exceeds the budget of " +
                          std::to_string(budget_gb) + " GB (raise memory_budget_gb or lower N/M)");
}

int bond_level(const CorrelatorRequest& req, const RunConfig& cfg) {
  const long long nN = static_cast<long long>(req.fields.size()) * req.N;
  long long L = std::min<long long>(nN, cfg.bond_cap);
  if (req.M > 0) L = std::min<long long>(L, req.M);
  return static_cast<int>(L);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output: cannot write " + path);
  out << j.dump(2) << '\n';
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / name;
}

// ---------------------------------------------------------------------------

int cmd_module_build(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  CorrelatorRequest req = request_from_config(cfg);
  validate_request(req);
  const int L = std::max(bond_level(req, cfg), req.N);
  preflight_memory(req, L, cfg.memory_budget_gb);

  CachedWorkspace ws(req.alg, cfg.cache_dir);
  json summary = output_metadata(cfg);
  summary["cutoff"] = L;
  json mods = json::array();
  for (const WeightLabel& mu : req.chain) {
    auto mod = ws.module_cached(mu, L);
    json m;
    m["label"] = rational_str(mu.value);
    json dims = json::array();
    for (int lv = 0; lv <= L; ++lv) dims.push_back(mod->dim(lv));
    m["graded_dims"] = dims;
    m["cumulative_dim"] = mod->cumulative_dim(L);
    mods.push_back(m);
  }
  summary["modules"] = mods;
  json fields = json::array();
  for (size_t j = 1; j < req.chain.size(); ++j) {
    auto F = ws.field_modes_cached(req.chain[j], req.fields[j - 1].charge, req.chain[j - 1], L, L);
    json f;
    f["source"] = rational_str(req.chain[j].value);
    f["charge"] = rational_str(req.fields[j - 1].charge.value);
    f["target"] = rational_str(req.chain[j - 1].value);
    f["structural_zero"] = F->structural_zero;
    fields.push_back(f);
  }
  summary["fields"] = fields;
  summary["cache_hits"] = ws.cache_hits;
  summary["cache_writes"] = ws.cache_writes;
  summary["wall_seconds"] = seconds_since(t0);
  const auto path = out_path(cfg, "module_build.json");
  write_json(path.string(), summary);
  std::cout << "module-build: wrote " << path.string() << " (cache hits " << ws.cache_hits
            << ", writes " << ws.cache_writes << ")\n";
  return 0;
}

int cmd_correlator(const RunConfig& cfg, const std::string& export_base) {
  const auto t0 = Clock::now();
  CorrelatorRequest req = request_from_config(cfg);
  validate_request(req);
  preflight_memory(req, bond_level(req, cfg), cfg.memory_budget_gb);

  Workspace ws(req.alg);
  const auto t1 = Clock::now();
  MpsApproximation mps = evaluate_renormalized(req, ws, cfg.bond_cap, cfg.seed);
  const double eval_s = seconds_since(t1);

  json out = output_metadata(cfg);
  out["value_re"] = mps.value;
  out["value_im"] = 0.0;
  out["certified_bound"] = mps.certified_bound;
  out["bond_dim"] = mps.bond_dim_actual;
  out["bond_dim_accounting"] = mps.bond_dim_accounting.str();
  out["bond_truncated"] = mps.bond_truncated;
  out["structural_zero"] = mps.structural_zero;
  out["prefactor"] = mps.grid_prefactor;
  out["covariance_factor"] = mps.covariance_factor;
  out["q"] = mps.q;
  out["N"] = mps.N;
  out["L"] = mps.L;
  out["timings"] = {{"evaluate_seconds", eval_s}, {"total_seconds", seconds_since(t0)}};
  if (!export_base.empty()) {
    export_mps(mps, export_base, config_hash(cfg), cfg.seed);
    out["export"] = export_base;
  }
  const auto path = out_path(cfg, "correlator.json");
  write_json(path.string(), out);
  std::cout << "correlator: value " << mps.value << "  certified bound " << mps.certified_bound
            << "  D " << mps.bond_dim_actual << "\n";
  return 0;
}

int cmd_convergence(const RunConfig& cfg) {
  if (cfg.d_grid.empty() || cfg.N_grid.empty())
    throw ValidationError("convergence: d_grid and N_grid must be nonempty");
  struct Point {
    double d;
    int N;
    MpsApproximation mps;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double oracle = std::numeric_limits<double>::quiet_NaN();
    double growth_log = 0.0;
  };
  std::vector<Point> pts;
  for (double d : cfg.d_grid)
    for (int N : cfg.N_grid) pts.push_back({d, N, {}, 0, 0, 0});

  std::atomic<size_t> next{0};
  std::mutex err_mx;
  std::exception_ptr first_error;
  const int jobs = std::max(1, cfg.jobs);
  auto worker = [&]() {
    try {
      Workspace ws(algebra_from_config(cfg));
      for (size_t i = next.fetch_add(1); i < pts.size(); i = next.fetch_add(1)) {
        Point& p = pts[i];
        CorrelatorRequest req = request_from_config(cfg, p.d, p.N);
        validate_request(req);
        preflight_memory(req, bond_level(req, cfg), cfg.memory_budget_gb);
        p.mps = evaluate_renormalized(req, ws, cfg.bond_cap, cfg.seed);
        p.growth_log = log_bond_dim_bound(static_cast<double>(req.fields.size()),
                                       std::max(1, p.N), req.alg.dim_g);
        if (req.alg.kind == AlgebraKind::Heisenberg) {
          std::vector<double> alphas, zs;
          InsertionMap im = map_insertions(p.d, cfg.d0, {});
          for (size_t j = 0; j < req.fields.size(); ++j) {
            alphas.push_back(to_double(Rational(req.fields[j].charge.value)));
            zs.push_back(std::pow(im.q, static_cast<double>(j + 1)) * std::exp(-cfg.d0));
          }
          p.oracle = free_boson_n_point(alphas, zs).real();
          p.measured = std::abs(p.mps.value - p.oracle);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mx);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  const auto path = out_path(cfg, "convergence.csv");
  CsvWriter csv(path.string(),
                {"config_hash", "seed", "code_version", "d", "q", "N", "value_re", "value_im",
                 "oracle_re", "oracle_im", "measured_error", "chain_bound", "bond_dim",
                 "growth_log_bound", "cutoff"});
  const std::string h = config_hash(cfg);
  for (const Point& p : pts)
    csv.row({h, std::to_string(cfg.seed), kCodeVersion, CsvWriter::num(p.d),
             CsvWriter::num(p.mps.q), CsvWriter::num(p.N), CsvWriter::num(p.mps.value),
             CsvWriter::num(0.0), CsvWriter::num(p.oracle), CsvWriter::num(0.0),
             CsvWriter::num(p.measured), CsvWriter::num(p.mps.certified_bound),
             CsvWriter::num(p.mps.bond_dim_actual), CsvWriter::num(p.growth_log),
             CsvWriter::num(p.mps.L)});
  std::cout << "convergence: wrote " << pts.size() << " rows to " << path.string() << "\n";
  return 0;
}

int cmd_bounds(const RunConfig& cfg, int mmax, int dmax) {
  if (mmax < 0 || dmax < 0) throw ValidationError("bounds: --mmax/--dmax must be nonnegative");
  const std::string h = config_hash(cfg);
  {
    PartitionTable table(mmax, dmax);
    CsvWriter csv(out_path(cfg, "partition_table.csv").string(),
                  {"config_hash", "m", "d", "p_md", "siegel_bound"});
    for (int d = 1; d <= dmax; ++d)
      for (int m = 0; m <= mmax; ++m)
        csv.row({h, CsvWriter::num(m), CsvWriter::num(d), table.count(m, d).str(),
                 CsvWriter::num(siegel_bound(m, d))});
  }
  {
    CsvWriter csv(out_path(cfg, "bond_bounds.csv").string(),
                  {"config_hash", "n", "N", "dim_g", "log_bound", "bound"});
    for (int n : {2, 3, 4})
      for (int N = 1; N <= std::max(1, mmax / n); ++N)
        for (int dg : {1, 3}) {
          csv.row({h, CsvWriter::num(n), CsvWriter::num(N), CsvWriter::num(dg),
                   CsvWriter::num(log_bond_dim_bound(n, N, dg)),
                   bond_dim_bound(n, N, dg).str(8, std::ios_base::scientific)});
        }
  }
  if (!cfg.eps_grid.empty()) {
    CsvWriter csv(out_path(cfg, "scaling_fits.csv").string(),
                  {"config_hash", "d", "fit_slope", "expected_slope", "kappa"});
    for (double d : cfg.d_grid.empty() ? std::vector<double>{1.0} : cfg.d_grid) {
      ScalingModel m = invert_bounds_to_scaling(cfg.eps_grid, 2, d, 1, 1.3, 1.3);
      csv.row({h, CsvWriter::num(d), CsvWriter::num(m.n_vs_log_inv_eps.slope),
               CsvWriter::num(4.0 / d), CsvWriter::num(m.kappa)});
    }
  }
  std::cout << "bounds: tables written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  json report = output_metadata(cfg);
  json cases = json::array();
  bool all_pass = true;
  Workspace ws(heisenberg_algebra());

  auto run_case = [&](const std::string& name, const std::vector<Rational>& charges, double d,
                      int N, int cap, double tol) {
    CorrelatorRequest req;
    req.alg = heisenberg_algebra();
    for (const Rational& a : charges) req.fields.push_back({WeightLabel::charge(a), 0});
    req.chain = derive_heisenberg_chain(req.fields);
    req.d = d;
    req.N = N;
    MpsApproximation mps = evaluate_renormalized(req, ws, cap, cfg.seed);
    std::vector<double> alphas, zs;
    const double q = std::exp(-d);
    for (size_t j = 0; j < charges.size(); ++j) {
      alphas.push_back(to_double(charges[j]));
      zs.push_back(std::pow(q, static_cast<double>(j + 1)));
    }
    const double exact = free_boson_n_point(alphas, zs).real();
    const double rel = std::abs(mps.value - exact) / std::max(1e-300, std::abs(exact));
    const bool pass = rel <= tol;
    all_pass = all_pass && pass;
    cases.push_back({{"name", name},
                     {"value", mps.value},
                     {"oracle", exact},
                     {"relative_deviation", rel},
                     {"tolerance", tol},
                     {"certified_bound", mps.certified_bound},
                     {"pass", pass}});
    std::cout << (pass ? "PASS " : "FAIL ") << name << "  rel dev " << rel << "\n";
  };

  run_case("pair_d1", {1, -1}, 1.0, 10, 20, 2e-3);
  run_case("pair_d2", {1, -1}, 2.0, 8, 16, 1e-3);
  run_case("quad_d1", {1, -1, 1, -1}, 1.0, 6, 18, 2e-2);

  report["cases"] = cases;
  report["pass"] = all_pass;
  const auto path = out_path(cfg, "verify.json");
  write_json(path.string(), report);
  std::cout << "verify: " << (all_pass ? "all cases pass" : "FAILURES present") << " ("
            << path.string() << ")\n";
  if (!all_pass) throw ConvergenceError("verify: pipeline deviates from the oracle");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPS approximation of chiral correlation functions"};
  app.require_subcommand(1);

  std::string config_path, export_base;
  RunConfig flags;  // collected override values
  int mmax = 40, dmax = 4;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file; flags override its keys");
    sub->add_option("--algebra", flags.algebra, "preset (heisenberg|su2) or algebra JSON path");
    sub->add_option("--level", flags.level, "affine level k");
    sub->add_option("--charges", flags.charges, "heisenberg charges, one per insertion");
    sub->add_option("--spins", flags.spins, "su(2) doubled spins, one per insertion");
    sub->add_option("--components", flags.components, "charge-space component per insertion");
    sub->add_option("--chain", flags.chain_spins, "su(2) doubled spins of mu_0..mu_n");
    sub->add_option("-d,--spacing", flags.d, "insertion spacing d (q = e^{-d})");
    sub->add_option("--d0", flags.d0, "grid offset d0");
    sub->add_option("-N,--trunc", flags.N, "grade-shift truncation N");
    sub->add_option("-M,--cutoff", flags.M, "module cutoff M (>= nN + N)");
    sub->add_option("--bond-cap", flags.bond_cap, "bond level cap for assembly");
    sub->add_option("--d-grid", flags.d_grid, "sweep values of d");
    sub->add_option("--N-grid", flags.N_grid, "sweep values of N");
    sub->add_option("--eps-grid", flags.eps_grid, "error targets for scaling fits");
    sub->add_option("--output-dir", flags.output_dir, "directory for result files");
    sub->add_option("--module-cache,--cache-dir", flags.cache_dir, "cache directory");
    sub->add_option("--numeric-mode", flags.numeric_mode, "float | rational");
    sub->add_option("--seed", flags.seed, "seed for random test vectors");
    sub->add_option("--memory-budget-gb", flags.memory_budget_gb, "pre-flight memory budget");
    sub->add_option("-j,--jobs", flags.jobs, "worker threads for sweeps");
  };

  CLI::App* sc_build = app.add_subcommand("module-build", "build and cache modules and field blocks");
  CLI::App* sc_corr = app.add_subcommand("correlator", "evaluate one correlator with its certified bound");
  sc_corr->add_option("--export-mps", export_base, "write <base>.json + <base>.bin tensor export");
  CLI::App* sc_conv = app.add_subcommand("convergence", "sweep (d, N) and emit a CSV with bounds");
  CLI::App* sc_bounds = app.add_subcommand("bounds", "partition/bond-dimension tables and scaling fits");
  sc_bounds->add_option("--mmax", mmax, "largest partition size tabulated");
  sc_bounds->add_option("--dmax", dmax, "largest component count tabulated");
  CLI::App* sc_verify = app.add_subcommand("verify", "compare the pipeline against analytic oracles");
  for (CLI::App* s : {sc_build, sc_corr, sc_conv, sc_bounds, sc_verify}) add_common(s);

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    // start from the config document, then apply every flag the user passed
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    auto touched = [&](const std::string& name) { return sub->count(name) > 0; };
    if (touched("--algebra")) cfg.algebra = flags.algebra;
    if (touched("--level")) cfg.level = flags.level;
    if (touched("--charges")) cfg.charges = flags.charges;
    if (touched("--spins")) cfg.spins = flags.spins;
    if (touched("--components")) cfg.components = flags.components;
    if (touched("--chain")) cfg.chain_spins = flags.chain_spins;
    if (touched("--spacing")) cfg.d = flags.d;
    if (touched("--d0")) cfg.d0 = flags.d0;
    if (touched("--trunc")) cfg.N = flags.N;
    if (touched("--cutoff")) cfg.M = flags.M;
    if (touched("--bond-cap")) cfg.bond_cap = flags.bond_cap;
    if (touched("--d-grid")) cfg.d_grid = flags.d_grid;
    if (touched("--N-grid")) cfg.N_grid = flags.N_grid;
    if (touched("--eps-grid")) cfg.eps_grid = flags.eps_grid;
    if (touched("--output-dir")) cfg.output_dir = flags.output_dir;
    if (touched("--module-cache")) cfg.cache_dir = flags.cache_dir;
    if (touched("--numeric-mode")) cfg.numeric_mode = flags.numeric_mode;
    if (touched("--seed")) cfg.seed = flags.seed;
    if (touched("--memory-budget-gb")) cfg.memory_budget_gb = flags.memory_budget_gb;
    if (touched("--jobs")) cfg.jobs = flags.jobs;
    if (cfg.numeric_mode != "float" && cfg.numeric_mode != "rational")
      throw ValidationError("numeric_mode must be 'float' or 'rational'");

    if (sub == sc_build) return cmd_module_build(cfg);
    if (sub == sc_corr) return cmd_correlator(cfg, export_base);
    if (sub == sc_conv) return cmd_convergence(cfg);
    if (sub == sc_bounds) return cmd_bounds(cfg, mmax, dmax);
    if (sub == sc_verify) return cmd_verify(cfg);
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const RangeError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
