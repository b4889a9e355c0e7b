#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "qedbohm/cli.hpp"
#include "qedbohm/manifest.hpp"

using namespace qedbohm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qedbohm_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small measured run: 5 pointer modes, short window, few trajectories.
ScenarioConfig small_measured() {
  ScenarioConfig cfg;
  cfg.pointer_truncation = 2;
  cfg.sim_duration = 12.0;
  cfg.meas_center_time = 8.0;
  cfg.meas_width = 1.0;
  cfg.n_trajectories = 16;
  cfg.rng_seed = 11;
  return cfg;
}

fs::path write_scenario(const fs::path& dir, const ScenarioConfig& cfg, const std::string& extra = "") {
  const fs::path p = dir / "scenario.scn";
  std::ofstream(p) << to_text(cfg) << extra;
  return p;
}

}  // namespace

TEST_CASE("SHA-256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest round trip and tamper detection") {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "a.csv") << "t,x\n0,1\n";
  std::ofstream(dir / "b.txt") << "key = value\n";
  const RunManifest written = write_manifest(dir, {"a.csv", "b.txt"}, sha256_hex("cfg"), 42, {{"evolve", 1.5}});
  const RunManifest read = read_manifest(dir);
  CHECK(read.config_hash == written.config_hash);
  CHECK(read.code_version == std::string(code_version()));
  CHECK(read.seed == 42);
  REQUIRE(read.files.size() == 2);
  CHECK(read.files[0].bytes == 8);
  CHECK(read.files[0].sha256 == file_sha256(dir / "a.csv"));
  CHECK(read.timings.size() == 1);
  CHECK(verify_manifest(dir).empty());

  std::ofstream(dir / "b.txt") << "key = other\n";
  CHECK(verify_manifest(dir) == std::vector<std::string>{"b.txt"});
  fs::remove(dir / "a.csv");
  CHECK(verify_manifest(dir).size() == 2);
}

TEST_CASE("trajectory plans") {
  ScenarioConfig cfg;
  const TrajectoryPlan measured = trajectory_plan(cfg, 115.0);
  CHECK(measured.t_end == cfg.sim_duration);
  CHECK(measured.dt == cfg.dt_traj);
  CHECK(measured.check_times == std::vector<double>{cfg.sim_duration});

  cfg.measurement_enabled = false;
  const TrajectoryPlan free = trajectory_plan(cfg, 115.0);
  CHECK(free.t_end == 115.0);
  CHECK(free.dt <= cfg.dt_traj);
  CHECK(free.output_cadence == doctest::Approx(115.0 / 200));
  const double per_output = free.output_cadence / free.dt;
  CHECK(per_output == doctest::Approx(std::round(per_output)).epsilon(1e-12));
  REQUIRE(free.check_times.size() == 3);
  CHECK(free.check_times[1] == doctest::Approx(57.5));
  CHECK(free.marginal_time == doctest::Approx(57.5));

  cfg.sim_duration = 60.0;
  CHECK(trajectory_plan(cfg, 115.0).check_times.size() == 2);
  CHECK(trajectory_plan(cfg, 115.0).t_end == 60.0);
  CHECK(trajectory_plan(cfg, std::numeric_limits<double>::quiet_NaN()).output_cadence ==
        doctest::Approx(rabi_estimate(cfg).period / 200));
}

TEST_CASE("invalid input exits 1") {
  const fs::path dir = scratch("invalid");
  std::ostringstream log, err;
  CHECK(cmd_run(dir / "missing.scn", dir / "out", {}, log, err) == 1);

  const fs::path unknown = write_scenario(dir, small_measured(), "no_such_key = 3\n");
  CHECK(cmd_run(unknown, dir / "out", {}, log, err) == 1);
  CHECK(err.str().find("no_such_key") != std::string::npos);

  const fs::path good = write_scenario(dir, small_measured());
  RunOptions bad_key;
  bad_key.overrides = {"no_such_key=1"};
  CHECK(cmd_run(good, dir / "out", bad_key, log, err) == 1);
  RunOptions bad_value;
  bad_value.overrides = {"dt_coeff=-1"};
  CHECK(cmd_run(good, dir / "out", bad_value, log, err) == 1);
  CHECK_FALSE(fs::exists(dir / "out" / kManifestName));
}

TEST_CASE("verify battery and fault hook") {
  std::ostringstream log, err;
  ScenarioConfig cfg;
  cfg.pointer_truncation = 1;
  const fs::path dir = scratch("verify");
  const fs::path scn = write_scenario(dir, cfg);
  CHECK(cmd_verify(scn, {}, log, err) == 0);
  CHECK(log.str().find("FAIL") == std::string::npos);

  VerifyOptions fault;
  fault.corrupt_coupling_sign = true;
  std::ostringstream flog;
  CHECK(cmd_verify(scn, fault, flog, err) == 2);
  CHECK(flog.str().find("FAIL hermiticity") != std::string::npos);
}

TEST_CASE("plot requires run outputs") {
  std::ostringstream log, err;
  CHECK(cmd_plot(scratch("empty"), log, err) == 1);
  CHECK(cmd_plot(fs::temp_directory_path() / "qedbohm_no_such_dir", log, err) == 1);
}

TEST_CASE("measured run is byte-deterministic and exit code follows the invariants") {
  const fs::path dir = scratch("determinism");
  const fs::path scn = write_scenario(dir, small_measured());
  std::ostringstream log, err;
  const int first = cmd_run(scn, dir / "a", {}, log, err);
  const int second = cmd_run(scn, dir / "b", {}, log, err);
  CHECK(first == second);

  const RunResult r = run_pipeline(small_measured());
  const bool invariant_failure = r.ensemble->n_both > 0 || r.abort_fraction() > kMaxAbortFraction;
  CHECK(first == (invariant_failure ? 2 : 0));

  const RunManifest a = read_manifest(dir / "a");
  const RunManifest b = read_manifest(dir / "b");
  CHECK(a.config_hash == sha256_hex(to_text(small_measured())));
  CHECK(a.seed == 11);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK_MESSAGE(a.files[i].sha256 == b.files[i].sha256, a.files[i].name);
  }
  CHECK(verify_manifest(dir / "a").empty());
  for (const char* name : {"populations.csv", "energies.csv", "trajectories.csv", "equivariance.csv",
                           "marginals.csv", "branch_summary.txt", "run_summary.txt", "config.scn"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
  }

  RunOptions seeded;
  seeded.seed = 12;
  cmd_run(scn, dir / "c", seeded, log, err);
  CHECK(read_manifest(dir / "c").seed == 12);
  CHECK(file_sha256(dir / "c" / "trajectories.csv") != file_sha256(dir / "a" / "trajectories.csv"));
  CHECK(file_sha256(dir / "c" / "populations.csv") == file_sha256(dir / "a" / "populations.csv"));

  CHECK(cmd_plot(dir / "a", log, err) == 0);
  CHECK(fs::exists(dir / "a" / "populations.svg"));
  CHECK(fs::exists(dir / "a" / "equivariance_q.svg"));

  const CsvTable pop = read_csv(dir / "a" / "populations.csv");
  CHECK(pop.has("p100"));
  const auto norm = pop.numbers("norm");
  CHECK(std::abs(norm.back() - 1.0) < 1e-6);
}

TEST_CASE("no-measure flag drops the pointer space") {
  const fs::path dir = scratch("nomeasure");
  ScenarioConfig cfg = small_measured();
  cfg.n_trajectories = 8;
  const fs::path scn = write_scenario(dir, cfg);
  RunOptions opt;
  opt.no_measure = true;
  std::ostringstream log, err;
  CHECK(cmd_run(scn, dir / "out", opt, log, err) == 0);
  CHECK(log.str().find("space 8 states") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "branch_summary.txt"));
  fs::remove_all(dir.parent_path());
}
