#include "blowup/commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <fmt/format.h>

#include "blowup/config.hpp"
#include "blowup/experiments.hpp"
#include "blowup/io.hpp"

namespace blowup {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* kTimeseriesColumns[] = {"t",      "s",      "dx_norm", "rate_ratio", "gamma",       "lambda",
                                    "b",      "a",      "j1",      "j2",         "j3",          "eps_L2",
                                    "m_norm", "m_s3",   "J",       "g",          "rstar_dev",   "rstar_ratio",
                                    "mass_drift", "energy_drift", "tail", "N_fun", "H_fun", "K_fun", "G_fun"};

nlohmann::json provenance(double h, double ymax) {
  nlohmann::json j;
  j["grid"] = {{"h", h}, {"ymax", ymax}};
  j["versions"] = {{"blowup-lab", std::string(kToolVersion)},
                   {"fftw", std::string(fftw_version)},
                   {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                   {"boost", std::string(BOOST_LIB_VERSION)}};
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
  LabConfig cfg;
  std::string config_path;
  bool print_config = false;
};

ProfileSet compute_profiles(double h, double ymax) {
  return ProfileSet::compute(RadialGrid::make(h, ymax));
}

// Profiles for a run: computed on the grid recorded in the constants file when
// one is given (and checked against it), else on the configured grid.
ProfileSet profiles_for_run(const Context& ctx, const std::string& constants_path, bool no_auto,
                            const fs::path& out_dir) {
  fs::path cp = constants_path.empty() ? out_dir / "constants.json" : fs::path(constants_path);
  if (!fs::exists(cp)) {
    if (no_auto) throw UsageError(fmt::format("missing constants file '{}' (run `profiles` first or drop --no-auto)", cp.string()));
    return compute_profiles(ctx.cfg.grid_h, ctx.cfg.grid_ymax);
  }
  auto j = nlohmann::json::parse(read_text(cp));
  UniversalConstants k = UniversalConstants::from_json(j);
  ProfileSet P = compute_profiles(k.h, k.ymax);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  if (!close(P.k.c1, k.c1) || !close(P.k.alpha1, k.alpha1) || !close(P.k.alpha3, k.alpha3))
    throw NumericalError(fmt::format("constants in '{}' do not match a recomputation on their grid", cp.string()));
  return P;
}

void write_profiles_csv(const fs::path& p, const ProfileSet& P, const std::string& hash) {
  CsvWriter w({"y", "Q", "rho", "phi1", "psi1", "phi2", "psi2", "phi0", "psi0"}, hash);
  const RadialGrid& g = P.gs.grid;
  std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.01 / g.h)));
  for (std::size_t i = 0; i < g.count; i += stride) {
    w.row({g.y(i), P.gs.Q[i], P.gs.rho[i], P.first.phi[i], P.first.psi[i], P.second.phi[i], P.second.psi[i],
           P.zero.phi[i], P.zero.psi[i]});
  }
  w.save(p);
}

std::vector<double> timeseries_row(const RunRow& r) {
  return {r.t,      r.s,      r.dx_norm, r.rate_ratio, r.g.gamma,   r.g.lambda,  r.g.b,          r.g.a,
          r.g.j1,   r.g.j2,   r.g.j3,    r.eps_L2,     r.m_norm,    r.m_s3,      r.J,            r.g_exit,
          r.rstar_dev, r.rstar_ratio, r.mass_drift, r.energy_drift, r.tail, r.N_fun, r.H_fun, r.K_fun, r.G_fun};
}

std::vector<std::string> timeseries_columns() {
  return std::vector<std::string>(std::begin(kTimeseriesColumns), std::end(kTimeseriesColumns));
}

// ---- subcommands ----

int cmd_profiles(const Context& ctx, const std::string& grid, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  double h = ctx.cfg.grid_h, ymax = ctx.cfg.grid_ymax;
  if (!grid.empty()) std::tie(h, ymax) = parse_grid(grid);
  LabConfig cfg = ctx.cfg;
  cfg.grid_h = h;
  cfg.grid_ymax = ymax;
  ProfileSet P = compute_profiles(h, ymax);
  fs::path dir(out);
  fs::create_directories(dir);
  Manifest m{"profiles", toml::dump(cfg.to_toml()), provenance(h, ymax), {"constants.json", "profiles.csv"}};
  write_text(dir / "constants.json", P.k.to_json().dump(2) + "\n");
  write_profiles_csv(dir / "profiles.csv", P, m.hash());
  m.wall_seconds = seconds_since(t0);
  m.save(dir);
  fmt::print("c1 = {:.12f}  kappa = {:.12f}  c2 = {:.12f}\n", P.k.c1, P.k.kappa, P.k.c2);
  fmt::print("alpha1..5 = {:.12f} {:.12f} {:.12f} {:.12f} {:.12f}\n", P.k.alpha1, P.k.alpha2, P.k.alpha3, P.k.alpha4,
             P.k.alpha5);
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

int cmd_constants(const Context& ctx, const std::string& grid, const std::string& from) {
  UniversalConstants k;
  if (!from.empty()) {
    if (!fs::exists(from)) throw UsageError(fmt::format("no constants file '{}'", from));
    k = UniversalConstants::from_json(nlohmann::json::parse(read_text(from)));
  } else {
    double h = ctx.cfg.grid_h, ymax = ctx.cfg.grid_ymax;
    if (!grid.empty()) std::tie(h, ymax) = parse_grid(grid);
    k = compute_profiles(h, ymax).k;
  }
  std::cout << k.to_json().dump(2) << "\n";
  return 0;
}

int cmd_residual_scan(const Context& ctx, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  ProfileSet P = compute_profiles(ctx.cfg.grid_h, ctx.cfg.grid_ymax);
  Ansatz an(P, ctx.cfg.sim.delta);
  Manifest m{"residual-scan", toml::dump(ctx.cfg.to_toml()), provenance(ctx.cfg.grid_h, ctx.cfg.grid_ymax),
             {"residual_scan.csv"}};
  CsvWriter w({"s", "R_L2", "R_H1", "yR_L2", "proj_iQ", "s3_H1", "s2_yR", "s4_proj", "env_s3_H1", "env_s2_yR", "env_s4_proj", "ds_error", "grid_N"},
              m.hash());
  for (double s : ctx.cfg.scan_s) {
    ResidualScanRow r = residual_scan_point(an, s, ctx.cfg.scan_samples, ctx.cfg.sim.beta);
    w.row({r.s, r.L2, r.H1, r.yR, r.proj, r.s3_H1, r.s2_yR, r.s4_proj, r.env_s3_H1, r.env_s2_yR, r.env_s4_proj, r.ds_error,
           static_cast<double>(r.grid_N)});
    fmt::print("s = {:6.1f}  s^3|R|_H1 = {:9.3f} (max {:9.3f})  s^2|yR| = {:8.3f} (max {:8.3f})  s^4|<R,iQ>| = {:9.3f} (max {:9.3f})\n",
               r.s, r.s3_H1, r.env_s3_H1, r.s2_yR, r.env_s2_yR, r.s4_proj, r.env_s4_proj);
  }
  fs::path dir(out);
  fs::create_directories(dir);
  w.save(dir / "residual_scan.csv");
  m.wall_seconds = seconds_since(t0);
  m.save(dir);
  return 0;
}

int cmd_simulate(const Context& ctx, const std::string& out, const std::string& constants, bool no_auto) {
  auto t0 = std::chrono::steady_clock::now();
  fs::path dir(out);
  ProfileSet P = profiles_for_run(ctx, constants, no_auto, dir);
  Ansatz an(P, ctx.cfg.sim.delta);
  LabConfig cfg = ctx.cfg;
  cfg.grid_h = P.k.h;
  cfg.grid_ymax = P.k.ymax;
  RunReport rep = blowup_run(an, cfg.sim);

  fs::create_directories(dir);
  Manifest m{"simulate", toml::dump(cfg.to_toml()), provenance(P.k.h, P.k.ymax), {}};
  const std::string hash = m.hash();
  CsvWriter w(timeseries_columns(), hash);
  for (const auto& r : rep.rows) w.row(timeseries_row(r));
  w.save(dir / "timeseries.csv");
  m.outputs.push_back("timeseries.csv");
  if (!fs::exists(dir / "constants.json") || constants.empty()) {
    write_text(dir / "constants.json", P.k.to_json().dump(2) + "\n");
  }
  m.outputs.push_back("constants.json");
  for (std::size_t i = 0; i < rep.snapshots.size(); ++i) {
    std::string name = fmt::format("snapshots/snap_{:04d}.bin", i + 1);
    write_snapshot(dir / name, rep.snapshots[i]);
    m.outputs.push_back(name);
  }
  nlohmann::json info = {{"manifest", hash},
                         {"completed", rep.completed},
                         {"halt_reason", rep.halt_reason},
                         {"last_valid_t", rep.last_valid_t},
                         {"steps", rep.steps},
                         {"decomposition_failures", rep.decomposition_failures},
                         {"first_decomposition_failure", rep.first_failure},
                         {"n", cfg.sim.n},
                         {"beta", cfg.sim.beta},
                         {"delta", cfg.sim.delta},
                         {"t_end", cfg.sim.t_end}};
  write_text(dir / "run.json", info.dump(2) + "\n");
  m.outputs.push_back("run.json");
  m.steps = rep.steps;
  m.wall_seconds = seconds_since(t0);
  m.save(dir);
  fmt::print("{} rows, {} steps, {} snapshots; {}\n", rep.rows.size(), rep.steps, rep.snapshots.size(), rep.halt_reason);
  if (!rep.completed) {
    fmt::print(stderr, "run stopped before t_end: last valid t = {:.6f}\n", rep.last_valid_t);
    return 1;
  }
  return 0;
}

int cmd_modulate(const Context& ctx, const std::vector<std::string>& files, const std::string& guess_s,
                 bool integrate_j, const std::string& out) {
  if (files.size() < 2) throw UsageError("modulate: at least two snapshot files are required");
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ComplexField> snaps;
  for (const auto& f : files) {
    if (!fs::exists(f)) throw UsageError(fmt::format("modulate: no snapshot '{}'", f));
    snaps.push_back(read_any_snapshot(f));
  }
  if (integrate_j && snaps[1].t > snaps[0].t)
    throw UsageError("modulate: --integrate-j needs snapshots ordered backward in time from T_n");
  ProfileSet P = compute_profiles(ctx.cfg.grid_h, ctx.cfg.grid_ymax);
  Ansatz an(P, ctx.cfg.sim.delta);
  const double t = snaps.front().t;
  ModParams guess;
  if (!guess_s.empty()) {
    auto v = parse_list(guess_s);
    if (v.size() != 4) throw UsageError("modulate: --guess expects gamma,lambda,b,a");
    guess.gamma = v[0];
    guess.lambda = v[1];
    guess.b = v[2];
    guess.a = v[3];
  } else if (std::abs(t - ctx.cfg.sim.T_n()) < 1e-12) {
    guess = initial_params(P.k, ctx.cfg.sim.n, ctx.cfg.sim.beta);
  } else {
    if (!(t < 0)) throw UsageError("modulate: default guess needs t < 0; pass --guess");
    guess.gamma = -1.0 / t;
    guess.lambda = guess.b = -t;
  }
  TrackOptions opt;
  opt.n = ctx.cfg.sim.n;
  opt.integrate_j = integrate_j;
  opt.beta_gap = 5.0;
  auto rows = track(an, snaps, guess, opt);
  Manifest m{"modulate", toml::dump(ctx.cfg.to_toml()), provenance(ctx.cfg.grid_h, ctx.cfg.grid_ymax), {}};
  for (const auto& f : files) m.provenance["inputs"].push_back({{"path", f}, {"sha256", sha256_file(f)}});
  CsvWriter w({"t", "s", "gamma", "lambda", "b", "a", "j1", "j2", "j3", "m_norm", "J", "g"}, m.hash());
  for (const auto& r : rows) {
    const ModParams& g = r.state.gamma;
    w.row({r.t, r.s, g.gamma, g.lambda, g.b, g.a, g.j1, g.j2, g.j3, r.m_norm, r.J, r.g});
  }
  fs::path p(out);
  w.save(p);
  m.outputs.push_back(p.filename().string());
  m.wall_seconds = seconds_since(t0);
  m.save(p.has_parent_path() ? p.parent_path() : fs::path("."));
  fmt::print("{} snapshots decomposed -> {}\n", rows.size(), p.string());
  return 0;
}

int cmd_beta_sweep(const Context& ctx, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  ProfileSet P = compute_profiles(ctx.cfg.grid_h, ctx.cfg.grid_ymax);
  Ansatz an(P, ctx.cfg.sim.delta);
  SimConfig base = ctx.cfg.sim;
  base.n = ctx.cfg.sweep_n;
  base.t_end = ctx.cfg.sweep_t_end;
  base.s_min = ctx.cfg.sweep_s_min;
  base.snapshots = 0;
  if (!(base.t_end < base.T_n())) throw UsageError("beta-sweep: sweep.t_end must precede T_n = -1/n");
  const auto& betas = ctx.cfg.sweep_betas;
  std::vector<SweepEntry> entries(betas.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(betas.size());
  auto worker = [&]() {
    for (std::size_t i = next++; i < betas.size(); i = next++) {
      try {
        SweepReport r = beta_sweep(an, base, {betas[i]});
        entries[i] = r.entries.front();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned nthreads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(betas.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < betas.size(); ++i)
    if (!errors[i].empty()) throw NumericalError(fmt::format("beta = {}: {}", betas[i], errors[i]));

  Manifest m{"beta-sweep", toml::dump(ctx.cfg.to_toml()), provenance(ctx.cfg.grid_h, ctx.cfg.grid_ymax),
             {"sweep.csv", "sweep.json"}};
  CsvWriter w({"beta", "exit_sign", "exit_s", "exit_t"}, m.hash());
  nlohmann::json j;
  j["manifest"] = m.hash();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    w.row({e.beta, static_cast<double>(e.exit_sign), e.exit_s, e.exit_t});
    j["runs"].push_back({{"beta", e.beta}, {"exit_sign", e.exit_sign}, {"exit_s", e.exit_s}, {"halt", e.halt_reason}});
    fmt::print("beta = {:+.3f}  exit {:+d} at s = {:.4f}  ({})\n", e.beta, e.exit_sign, e.exit_s, e.halt_reason);
  }
  j["brackets"] = nlohmann::json::array();
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i - 1].exit_sign && entries[i].exit_sign && entries[i - 1].exit_sign != entries[i].exit_sign)
      j["brackets"].push_back({entries[i - 1].beta, entries[i].beta});
  fs::path dir(out);
  fs::create_directories(dir);
  w.save(dir / "sweep.csv");
  write_text(dir / "sweep.json", j.dump(2) + "\n");
  m.wall_seconds = seconds_since(t0);
  m.save(dir);
  fmt::print("sign-change brackets: {}\n", j["brackets"].dump());
  return 0;
}

int cmd_conformal_check(double L, std::size_t N) {
  if (!is_power_of_two(N)) throw UsageError("conformal-check: N must be a power of two");
  ConformalReport r = conformal_check(L, N);
  nlohmann::json j = {{"soliton_to_S", r.soliton_to_S},
                      {"involution", r.involution},
                      {"mass_change", r.mass_change},
                      {"commutation", r.commutation}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::string& run_dir) {
  fs::path dir(run_dir);
  std::vector<std::string> missing;
  for (const char* f : {"timeseries.csv", "run.json", "constants.json"})
    if (!fs::exists(dir / f)) missing.push_back(f);
  std::vector<fs::path> snaps;
  if (fs::exists(dir / "snapshots"))
    for (const auto& e : fs::directory_iterator(dir / "snapshots"))
      if (e.path().extension() == ".bin") snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());
  if (snaps.empty()) missing.push_back("snapshots/*.bin");
  if (!missing.empty()) throw UsageError(fmt::format("report: incomplete run dir '{}', missing: {}", dir.string(), fmt::join(missing, ", ")));

  auto info = nlohmann::json::parse(read_text(dir / "run.json"));
  auto k = UniversalConstants::from_json(nlohmann::json::parse(read_text(dir / "constants.json")));
  const double delta = info.at("delta").get<double>();
  Cutoff cut(delta);
  CsvTable ts = read_csv(dir / "timeseries.csv");
  const std::string head = fmt::format("# manifest {}\n", ts.manifest_hash);

  std::string rate = head + "# t rate_ratio dx_norm\n";
  std::string gtr = head + "# s g b lambda\n";
  std::size_t ct = ts.col("t"), cr = ts.col("rate_ratio"), cd_ = ts.col("dx_norm"), cs = ts.col("s"), cg = ts.col("g"),
              cb = ts.col("b"), cl = ts.col("lambda");
  for (const auto& r : ts.rows) {
    rate += fmt::format("{} {} {}\n", format_number(r[ct]), format_number(r[cr]), format_number(r[cd_]));
    gtr += fmt::format("{} {} {} {}\n", format_number(r[cs]), format_number(r[cg]), format_number(r[cb]), format_number(r[cl]));
  }
  fs::path rd = dir / "report";
  write_text(rd / "rate.dat", rate);
  write_text(rd / "g_trace.dat", gtr);
  for (const auto& sp : snaps) {
    ComplexField u = read_snapshot(sp);
    if (!(u.t < 0)) continue;
    std::string txt = head + fmt::format("# t = {}\n# x re(u-S) im(u-S) re(r*) im(r*)\n", format_number(u.t));
    for (std::size_t i = 0; i < u.N; ++i) {
      double x = u.x(i);
      if (std::abs(x) >= delta) continue;
      cd d = u.values[i] - eval_S(u.t, x);
      double th = cut.value(x);
      cd r(th * std::abs(x), th * k.kappa * x * x);
      txt += fmt::format("{} {} {} {} {}\n", format_number(x), format_number(d.real()), format_number(d.imag()),
                         format_number(r.real()), format_number(r.imag()));
    }
    write_text(rd / fmt::format("profile_{}.dat", sp.stem().string()), txt);
  }
  fmt::print("wrote {} ({} profile files)\n", rd.string(), snaps.size());
  return 0;
}

}  // namespace

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BLOWUP_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Conformal blow-up laboratory for the one-dimensional quintic NLS"};
  app.require_subcommand(0, 1);
  Context ctx;
  app.add_option("--config", ctx.config_path, "TOML configuration file");
  app.add_flag("--print-config", ctx.print_config, "Print the effective configuration as TOML and exit");

  // overrides shared by several subcommands
  struct Overrides {
    std::optional<int> n;
    std::optional<double> beta, delta, L, c_dt, t_end;
    std::optional<std::size_t> N;
    std::optional<int> snapshots, decompose_every;
  } ov;
  auto add_sim = [&](CLI::App* sc) {
    sc->add_option("--n", ov.n, "T_n = -1/n, S_n = n");
    sc->add_option("--beta", ov.beta, "beta in (-1, 1)");
    sc->add_option("--delta", ov.delta, "cutoff scale delta in (0, 1)");
    sc->add_option("--L", ov.L, "half-width of the periodic domain");
    sc->add_option("--N", ov.N, "number of grid points (power of two)");
    sc->add_option("--c-dt", ov.c_dt, "dt = c_dt * lambda^2");
    sc->add_option("--t-end", ov.t_end, "final time (< 0)");
  };

  std::string grid, out, from, constants, guess;
  bool no_auto = false, integrate_j = false;
  std::vector<std::string> files;
  std::string run_dir, betas, scan_s;
  double cc_L = 32.0;
  std::size_t cc_N = 4096;
  std::optional<int> samples, sweep_n;
  std::optional<double> s_min;

  auto* sp = app.add_subcommand("profiles", "Solve the profile systems; write constants.json and profiles.csv");
  sp->add_option("--grid", grid, "radial grid as h,ymax");
  sp->add_option("--out", out, "output directory")->default_val("out/profiles");

  auto* sc = app.add_subcommand("constants", "Print the universal constants as JSON");
  sc->add_option("--grid", grid, "radial grid as h,ymax");
  sc->add_option("--from", from, "read an existing constants.json instead of solving");

  auto* sr = app.add_subcommand("residual-scan", "Ansatz residual norms along the initial-data family; CSV s,R_L2,R_H1,yR_L2,proj_iQ,s3_H1,s2_yR,s4_proj,env_s3_H1,env_s2_yR,env_s4_proj,ds_error,grid_N");
  sr->add_option("--s", scan_s, "comma-separated s values");
  sr->add_option("--delta", ov.delta, "cutoff scale delta");
  sr->add_option("--beta", ov.beta, "trajectory: Gamma_s^in with this beta");
  sr->add_option("--samples", samples, "phase samples per period for the envelope");
  sr->add_option("--out", out, "output directory")->default_val("out/residual-scan");

  auto* ss = app.add_subcommand(
      "simulate",
      "Blow-up run from the initial data at T_n. Writes timeseries.csv with columns: "
      "t,s,dx_norm,rate_ratio,gamma,lambda,b,a,j1,j2,j3,eps_L2,m_norm,m_s3,J,g,rstar_dev,rstar_ratio,"
      "mass_drift,energy_drift,tail,N_fun,H_fun,K_fun,G_fun (rate_ratio = |t| ||u_x|| / ||Q'||; "
      "rstar_dev = ||u - S - r*||_L2(|x|<delta); rstar_ratio = rstar_dev / |t|^{3/4}; NaN where no decomposition "
      "converged), plus snapshots/, run.json and manifest.json.");
  add_sim(ss);
  ss->add_option("--emit-snapshots", ov.snapshots, "number of evenly spaced snapshots");
  ss->add_option("--decompose-every", ov.decompose_every, "steps between decompositions");
  ss->add_option("--constants", constants, "constants.json to use (default: <out>/constants.json)");
  ss->add_flag("--no-auto", no_auto, "fail instead of solving the profiles when constants are missing");
  ss->add_option("--out", out, "run directory")->default_val("out/run");

  auto* sm = app.add_subcommand("modulate",
                                "Decompose snapshot files; writes CSV t,s,gamma,lambda,b,a,j1,j2,j3,m_norm,J,g");
  sm->add_option("files", files, "snapshot files (.bin or .csv), in time order")->required();
  sm->add_option("--n", ov.n, "s origin: s = n at the first snapshot");
  sm->add_option("--delta", ov.delta, "cutoff scale delta");
  sm->add_option("--guess", guess, "initial gamma,lambda,b,a");
  sm->add_flag("--integrate-j", integrate_j, "carry j1 = t0 - t and j2, j3 by the trapezoid rule");
  sm->add_option("--out", out, "output CSV")->default_val("out/modulation.csv");

  auto* sb = app.add_subcommand("beta-sweep", "Backward runs over beta monitoring the exit function g");
  sb->add_option("--n", sweep_n, "terminal s = n");
  sb->add_option("--betas", betas, "comma-separated beta values");
  sb->add_option("--t-end", ov.t_end, "earliest time of the backward runs");
  sb->add_option("--s-min", s_min, "stop when s falls below this");
  sb->add_option("--delta", ov.delta, "cutoff scale delta");
  sb->add_option("--N", ov.N, "grid points");
  sb->add_option("--out", out, "output directory")->default_val("out/beta-sweep");

  auto* sk = app.add_subcommand("conformal-check", "Pseudo-conformal transform consistency checks");
  sk->add_option("--L", cc_L, "half-width")->default_val(32.0);
  sk->add_option("--N", cc_N, "grid points")->default_val(4096);

  auto* sq = app.add_subcommand("report", "Emit gnuplot-ready .dat files from a simulate run directory");
  sq->add_option("run_dir", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!ctx.config_path.empty()) ctx.cfg = LabConfig::load(ctx.config_path);
    SimConfig& sim = ctx.cfg.sim;
    if (ov.n) sim.n = *ov.n;
    if (ov.beta) sim.beta = *ov.beta;
    if (ov.delta) sim.delta = *ov.delta;
    if (ov.L) sim.L = *ov.L;
    if (ov.N) sim.N = *ov.N;
    if (ov.c_dt) sim.c_dt = *ov.c_dt;
    if (ov.snapshots) sim.snapshots = *ov.snapshots;
    if (ov.decompose_every) sim.decompose_every = *ov.decompose_every;
    if (sb->parsed()) {
      if (ov.t_end) ctx.cfg.sweep_t_end = *ov.t_end;
      if (sweep_n) ctx.cfg.sweep_n = *sweep_n;
      if (s_min) ctx.cfg.sweep_s_min = *s_min;
      if (!betas.empty()) ctx.cfg.sweep_betas = parse_list(betas);
    } else if (ov.t_end) {
      sim.t_end = *ov.t_end;
    }
    if (!scan_s.empty()) ctx.cfg.scan_s = parse_list(scan_s);
    if (samples) ctx.cfg.scan_samples = *samples;
    try {
      sim.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    if (ctx.print_config) {
      std::cout << toml::dump(ctx.cfg.to_toml());
      return 0;
    }
    if (sp->parsed()) return cmd_profiles(ctx, grid, out);
    if (sc->parsed()) return cmd_constants(ctx, grid, from);
    if (sr->parsed()) return cmd_residual_scan(ctx, out);
    if (ss->parsed()) return cmd_simulate(ctx, out, constants, no_auto);
    if (sm->parsed()) return cmd_modulate(ctx, files, guess, integrate_j, out);
    if (sb->parsed()) return cmd_beta_sweep(ctx, out);
    if (sk->parsed()) return cmd_conformal_check(cc_L, cc_N);
    if (sq->parsed()) return cmd_report(run_dir);
    std::cout << app.help();
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 2;
  } catch (const IoError& e) {
    fmt::print(stderr, "i/o error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 1;
  }
}

}  // namespace blowup
