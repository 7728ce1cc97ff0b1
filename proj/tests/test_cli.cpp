#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "blowup/commands.hpp"
#include "blowup/config.hpp"
#include "blowup/io.hpp"
#include "fixtures.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / fmt_name(tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static std::string fmt_name(const std::string& tag) {
    return "blowup_lab_test_" + tag + "_" + std::to_string(::getpid());
  }
  std::string operator/(const std::string& p) const { return (path / p).string(); }
};

struct CaptureOut {
  std::ostringstream buf;
  std::streambuf* old;
  CaptureOut() : old(std::cout.rdbuf(buf.rdbuf())) {}
  ~CaptureOut() { std::cout.rdbuf(old); }
};

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "blowup-lab");
  return run_cli(args);
}

}  // namespace

TEST_CASE("toml subset") {
  auto d = toml::parse("# c\n[a]\nx = 1\ny = -2.5e-3 # trailing\nz = true\nw = \"hi\"\nv = [1, 2.5, -3]\n");
  CHECK(d.integer("a.x") == 1);
  CHECK(d.number("a.x") == 1.0);
  CHECK(d.number("a.y") == -2.5e-3);
  CHECK(d.boolean("a.z"));
  CHECK(d.string("a.w") == "hi");
  CHECK(d.array("a.v") == std::vector<double>{1, 2.5, -3});
  auto back = toml::parse(toml::dump(d));
  CHECK(toml::dump(back) == toml::dump(d));
  CHECK_THROWS_AS(toml::parse("[a]\nx = \n"), ConfigError);
  CHECK_THROWS_AS(toml::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(toml::parse("[a\nx = 1\n"), ConfigError);
}

TEST_CASE("lab config round trip and validation") {
  LabConfig c;
  c.sim.n = 17;
  c.sim.beta = -0.25;
  c.sweep_betas = {-0.5, 0.5};
  auto back = LabConfig::from_toml(toml::parse(toml::dump(c.to_toml())));
  CHECK(toml::dump(back.to_toml()) == toml::dump(c.to_toml()));
  CHECK(back.sim.n == 17);
  CHECK(back.sim.beta == -0.25);
  CHECK_THROWS_AS(LabConfig::from_toml(toml::parse("[sim]\nbogus = 1\n")), ConfigError);
  CHECK_THROWS_AS(LabConfig::from_toml(toml::parse("[sim]\nbeta = 2.0\n")), ConfigError);
  auto [h, y] = parse_grid("0.0005,25");
  CHECK(h == 0.0005);
  CHECK(y == 25.0);
  CHECK_THROWS_AS(parse_grid("0.001"), ConfigError);
  CHECK_THROWS_AS(parse_grid("abc,20"), ConfigError);
  CHECK_THROWS_AS(parse_grid("30,20"), ConfigError);
  CHECK(parse_list("1, -2,3.5") == std::vector<double>{1, -2, 3.5});
}

TEST_CASE("snapshot and csv io") {
  TempDir tmp("io");
  ComplexField u = ComplexField::zeros(1.5, 8, -0.3);
  for (std::size_t k = 0; k < 8; ++k) u.values[k] = cd(std::sin(k + 0.1), 1.0 / (k + 3.0));
  write_snapshot(tmp / "u.bin", u);
  CHECK(fs::file_size(tmp / "u.bin") == 20 + 16 * 8);
  ComplexField b = read_snapshot(tmp / "u.bin");
  CHECK(b.t == u.t);
  CHECK(b.L == u.L);
  CHECK(b.N == u.N);
  CHECK(b.values == u.values);
  write_snapshot_csv(tmp / "u.csv", u);
  ComplexField c = read_any_snapshot(tmp / "u.csv");
  CHECK(c.values == u.values);
  CHECK(c.t == u.t);
  write_text(tmp / "bad.bin", "short");
  CHECK_THROWS_AS(read_snapshot(tmp / "bad.bin"), IoError);

  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CsvWriter w({"a", "b"}, "h123");
  w.row({1.0, 0.1});
  w.row({std::nan(""), -2.0});
  w.save(tmp / "t.csv");
  CsvTable t = read_csv(tmp / "t.csv");
  CHECK(t.manifest_hash == "h123");
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.rows[0][t.col("b")] == 0.1);
  CHECK(std::isnan(t.rows[1][0]));
  CHECK_THROWS(w.row({1.0}));
}

TEST_CASE("cli usage errors exit with 2") {
  TempDir tmp("usage");
  CHECK(cli({"nonsense"}) == 2);
  CHECK(cli({"profiles", "--grid", "0.001", "--out", tmp / "p"}) == 2);
  CHECK(cli({"profiles", "--grid", "a,b", "--out", tmp / "p"}) == 2);
  CHECK(cli({"simulate", "--beta", "1.5", "--out", tmp / "r"}) == 2);
  CHECK(cli({"--config", tmp / "missing.toml", "constants"}) == 2);
  CHECK(cli({"simulate", "--no-auto", "--out", tmp / "r"}) == 2);
  CHECK_FALSE(fs::exists(tmp / "r/timeseries.csv"));
  fs::create_directories(tmp / "empty");
  CHECK(cli({"report", tmp / "empty"}) == 2);
}

TEST_CASE("print-config shows every default and reloads") {
  TempDir tmp("cfg");
  std::string text;
  {
    CaptureOut cap;
    CHECK(cli({"--print-config"}) == 0);
    text = cap.buf.str();
  }
  for (const char* key : {"h =", "ymax =", "n =", "beta =", "delta =", "L =", "N =", "c_dt =", "t_end =",
                          "decompose_every =", "snapshots =", "tail_limit =", "betas =", "s_min =", "samples =", "seed ="})
    CHECK(text.find(key) != std::string::npos);
  write_text(tmp / "c.toml", text);
  LabConfig c = LabConfig::load(tmp / "c.toml");
  CHECK(toml::dump(c.to_toml()) == text);
}

TEST_CASE("profiles and constants subcommands") {
  TempDir tmp("profiles");
  CHECK(cli({"profiles", "--out", tmp / "p"}) == 0);
  auto j = nlohmann::json::parse(read_text(tmp / "p/constants.json"));
  for (const char* k : {"c1", "kappa", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5"}) CHECK(j.contains(k));
  CHECK(j["kappa"].get<double>() == j["c1"].get<double>() / 2);
  CsvTable t = read_csv(tmp / "p/profiles.csv");
  CHECK(t.columns.front() == "y");
  auto m = nlohmann::json::parse(read_text(tmp / "p/manifest.json"));
  CHECK(m["hash"] == t.manifest_hash);
  CHECK(m["outputs"].size() == 2);

  CHECK(cli({"profiles", "--grid", "0.0005,25", "--out", tmp / "q"}) == 0);
  auto jq = nlohmann::json::parse(read_text(tmp / "q/constants.json"));
  for (const char* k : {"c1", "kappa", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5"})
    CHECK(fixtures::rel(jq[k].get<double>(), j[k].get<double>()) < 1e-5);

  std::string out;
  {
    CaptureOut cap;
    CHECK(cli({"constants", "--from", tmp / "p/constants.json"}) == 0);
    out = cap.buf.str();
  }
  CHECK(nlohmann::json::parse(out) == j);
}

TEST_CASE("simulate, report and modulate") {
  TempDir tmp("sim");
  const std::vector<std::string> run = {"simulate", "--n", "40", "--t-end", "-0.0245", "--emit-snapshots", "10"};
  auto a = run;
  a.insert(a.end(), {"--out", tmp / "a"});
  auto b = run;
  b.insert(b.end(), {"--out", tmp / "b"});
  REQUIRE(cli(a) == 0);
  REQUIRE(cli(b) == 0);
  std::vector<fs::path> snaps;
  for (const auto& e : fs::directory_iterator(tmp / "a/snapshots")) snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());
  CHECK(snaps.size() == 10);
  for (const auto& p : snaps) CHECK(read_text(p) == read_text(tmp / ("b/snapshots/" + p.filename().string())));
  CHECK(read_text(tmp / "a/timeseries.csv") == read_text(tmp / "b/timeseries.csv"));

  CsvTable ts = read_csv(tmp / "a/timeseries.csv");
  auto m = nlohmann::json::parse(read_text(tmp / "a/manifest.json"));
  CHECK(ts.manifest_hash == m["hash"]);
  std::size_t cr = ts.col("rate_ratio");
  for (const auto& r : ts.rows) {
    CHECK(r[cr] > 0.9);
    CHECK(r[cr] < 1.1);
  }

  // constants now present: --no-auto succeeds
  auto c = run;
  c.insert(c.end(), {"--out", tmp / "a", "--no-auto"});
  CHECK(cli(c) == 0);

  REQUIRE(cli({"report", tmp / "a"}) == 0);
  std::string first = read_text(tmp / "a/report/rate.dat");
  std::string prof = read_text(tmp / "a/report/profile_snap_0010.dat");
  REQUIRE(cli({"report", tmp / "a"}) == 0);
  CHECK(read_text(tmp / "a/report/rate.dat") == first);
  CHECK(read_text(tmp / "a/report/profile_snap_0010.dat") == prof);
  std::istringstream is(prof);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double v;
    int cols = 0;
    while (ls >> v) ++cols;
    CHECK(cols == 5);
    ++rows;
  }
  CHECK(rows > 100);
  CHECK(fs::exists(tmp / "a/report/g_trace.dat"));

  std::vector<std::string> mod = {"modulate", "--n", "40", "--out", tmp / "mod.csv"};
  for (int i = 1; i < 10; i += 3) mod.push_back(snaps[i].string());
  CHECK(cli(mod) == 0);
  CsvTable mt = read_csv(tmp / "mod.csv");
  CHECK(mt.columns == std::vector<std::string>{"t", "s", "gamma", "lambda", "b", "a", "j1", "j2", "j3", "m_norm", "J", "g"});
  CHECK(mt.rows.size() == 3);
  CHECK(cli({"modulate", snaps[0].string()}) == 2);
}

TEST_CASE("beta sweep and conformal check subcommands") {
  TempDir tmp("sweep");
  setenv("BLOWUP_LAB_THREADS", "2", 1);
  CHECK(worker_threads() == 2);
  CHECK(cli({"beta-sweep", "--betas", "-0.95,0.95", "--t-end", "-0.1", "--out", tmp / "s"}) == 0);
  CsvTable t = read_csv(tmp / "s/sweep.csv");
  CHECK(t.rows.size() == 2);
  CHECK(t.columns == std::vector<std::string>{"beta", "exit_sign", "exit_s", "exit_t"});
  auto j = nlohmann::json::parse(read_text(tmp / "s/sweep.json"));
  CHECK(j.contains("brackets"));
  unsetenv("BLOWUP_LAB_THREADS");
  CHECK(cli({"beta-sweep", "--t-end", "-0.01", "--out", tmp / "s2"}) == 2);

  std::string out;
  {
    CaptureOut cap;
    CHECK(cli({"conformal-check", "--L", "24", "--N", "2048"}) == 0);
    out = cap.buf.str();
  }
  auto r = nlohmann::json::parse(out);
  CHECK(r["involution"].get<double>() < 1e-9);
  CHECK(r["mass_change"].get<double>() < 1e-10);
  CHECK(cli({"conformal-check", "--N", "1000"}) == 2);
}
