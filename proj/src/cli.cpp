#include "qedbohm/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qedbohm/manifest.hpp"
#include "qedbohm/svg.hpp"

namespace qedbohm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <class Writer>
std::string render_text(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

std::string ket(const std::string& label) { return "|" + label + "⟩"; }

std::size_t nearest_sample(const Trajectory& tr, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < tr.times.size(); ++i) {
    if (std::abs(tr.times[i] - t) < std::abs(tr.times[best] - t)) best = i;
  }
  return best;
}

void write_run_summary(std::ostream& out, const RunResult& r) {
  const Model& m = *r.model;
  const auto& u = r.unconditional;
  auto kv = [&](const std::string& k, double v) { out << k << " = " << format_number(v) << '\n'; };
  out << "measurement_enabled = " << (m.cfg.measurement_enabled ? "true" : "false") << '\n';
  out << "flat_size = " << m.space.size() << '\n';
  kv("E0", m.bases.well.energy(0));
  kv("E1", m.bases.well.energy(1));
  kv("gap", m.bases.well.energy(1) - m.bases.well.energy(0));
  kv("rabi_period_detected", u.rabi_period);
  kv("rabi_period_estimate", rabi_estimate(m.cfg).period);
  kv("max_norm_drift", r.series->max_norm_drift);
  kv("max_closure_error", u.max_closure_error);
  kv("max_energy_drift", u.max_energy_drift);
  kv("max_even_probability", u.max_even_probability);
  kv("timescale_ratio", r.corrections.timescale_ratio);
  kv("diamagnetic_shift", r.corrections.diamagnetic_shift);
  kv("dipole_self_shift", r.corrections.dipole_self_shift);
  kv("photon_energy", r.corrections.photon_energy);
  out << "corrections_negligible = " << (r.corrections.corrections_negligible ? "true" : "false") << '\n';
  if (r.ensemble) {
    out << "n_trajectories = " << r.ensemble->trajectories.size() << '\n';
    out << "n_aborted = " << r.ensemble->n_aborted << '\n';
    kv("abort_fraction", r.abort_fraction());
    for (const auto& row : r.equivariance) {
      out << "ks_" << coordinate_name(row.coord) << "_t" << format_number(row.t) << " = "
          << format_number(row.ks.distance) << '\n';
    }
    if (!r.equivariance.empty()) kv("ks_critical", r.equivariance.front().ks.critical);
  }
  for (const auto& e : r.exemplars) {
    const std::string p = std::string("exemplar_") + branch_name(e.branch) + "_";
    out << p << "id = " << e.traj_id << '\n';
    kv(p + "final_population", e.final_population);
    kv(p + "final_energy", e.final_energy);
    out << p << "target_met = " << (e.target_met ? "true" : "false") << '\n';
    kv(p + "pre_measurement_deviation", e.pre_measurement_deviation);
  }
}

}  // namespace

Model::Model(const ScenarioConfig& c)
    : cfg(c),
      space(build_space(c)),
      bases(make_bases(c)),
      terms(assemble(c, space, bases)),
      mu(c.measurement_enabled ? MuSchedule::from_config(c) : MuSchedule::none()) {}

double RunResult::abort_fraction() const {
  if (!ensemble || ensemble->trajectories.empty()) return 0.0;
  return static_cast<double>(ensemble->n_aborted) / static_cast<double>(ensemble->trajectories.size());
}

TrajectoryPlan trajectory_plan(const ScenarioConfig& cfg, double rabi_period) {
  TrajectoryPlan p;
  if (cfg.measurement_enabled) {
    p.t_end = cfg.sim_duration;
    p.dt = cfg.dt_traj;
    p.output_cadence = 5.0 * cfg.dt_traj;
    p.check_times = {p.t_end};
    p.marginal_time = p.t_end;
    return p;
  }
  const double period = std::isfinite(rabi_period) ? rabi_period : rabi_estimate(cfg).period;
  const double per_output = std::max(1.0, std::ceil(period / (200.0 * cfg.dt_traj) - 1e-9));
  p.dt = period / (200.0 * per_output);
  p.output_cadence = period / 200.0;
  p.t_end = std::min(period, cfg.sim_duration);
  for (double f : {0.25, 0.5, 1.0}) {
    if (f * period <= p.t_end * (1.0 + 1e-12)) p.check_times.push_back(f * period);
  }
  p.marginal_time = std::min(0.5 * period, p.t_end);
  return p;
}

RunResult run_pipeline(const ScenarioConfig& cfg, std::ostream* log) {
  auto note = [&](const std::string& s) {
    if (log) *log << s << '\n' << std::flush;
  };
  RunResult r;
  auto t = Clock::now();
  r.model = std::make_unique<Model>(cfg);
  const Model& m = *r.model;
  r.timings.emplace_back("assemble", seconds_since(t));
  note("space " + std::to_string(m.space.size()) + " states");

  t = Clock::now();
  const auto initial = initial_state(m.space, m.bases, default_initial_spec(cfg));
  r.series = std::make_unique<CoefficientSeries>(
      evolve(m.terms, initial, cfg.sim_duration, m.mu, {cfg.dt_coeff, cfg.dt_coeff}));
  r.coefficients = std::make_unique<SeriesInterpolator>(*r.series, m.terms, m.mu);
  r.timings.emplace_back("evolve", seconds_since(t));
  note("evolved to " + format_number(cfg.sim_duration) + " fs, norm drift " +
       format_number(r.series->max_norm_drift));

  t = Clock::now();
  r.unconditional = unconditional_series(*r.series, m.space, m.bases, m.terms, m.mu);
  r.corrections = correction_report(cfg, m.bases);
  r.timings.emplace_back("observables", seconds_since(t));

  if (cfg.n_trajectories == 0) return r;
  r.plan = trajectory_plan(cfg, r.unconditional.rabi_period);
  PropagateOptions opt;
  opt.dt = r.plan.dt;
  opt.output_cadence = r.plan.output_cadence;
  opt.measurement = cfg.measurement_enabled;
  if (cfg.measurement_enabled) opt.rule = default_branch_rule(cfg, m.bases);

  t = Clock::now();
  r.ensemble = run_ensemble(*r.coefficients, m.space, m.bases, r.plan.t_end, m.mu, opt, cfg.n_trajectories,
                            cfg.rng_seed);
  r.ensemble->config_hash = sha256_hex(to_text(cfg));
  r.timings.emplace_back("ensemble", seconds_since(t));
  note("ensemble of " + std::to_string(cfg.n_trajectories) + " trajectories, " +
       std::to_string(r.ensemble->n_aborted) + " aborted");

  t = Clock::now();
  r.equivariance = equivariance_table(*r.ensemble, r.plan.check_times, *r.coefficients, m.space, m.bases);
  const Eigen::VectorXcd c_marg = (*r.coefficients)(r.plan.marginal_time);
  for (Coordinate coord : kAllCoordinates) {
    r.marginals.push_back(marginal_comparison(*r.ensemble, r.plan.marginal_time, c_marg, m.space, m.bases, coord));
  }
  if (cfg.measurement_enabled) {
    BranchReport br;
    const double onset = std::max(0.0, measurement_onset(cfg));
    br.born = born_summary(*r.ensemble, (*r.coefficients)(onset), onset, m.space, 0);
    for (const auto& row : r.equivariance) {
      if (row.t == r.plan.t_end) {
        br.ks[static_cast<int>(row.coord)] = row.ks.distance;
        br.ks_critical = row.ks.critical;
      }
    }
    br.threshold = opt.rule.threshold_y;
    br.scales = pointer_scales(cfg, m.bases);
    r.branches = br;
    for (Branch b : {Branch::y, Branch::z}) {
      const auto id = first_in_branch(*r.ensemble, b);
      if (!id) continue;
      r.exemplars.push_back(conditional_series(*r.ensemble, *r.coefficients, m.space, m.bases, m.terms, cfg, *id));
      const Trajectory& tr = r.ensemble->trajectories[*id];
      for (double ts : {onset, cfg.meas_center_time, r.plan.t_end}) {
        const std::size_t i = nearest_sample(tr, std::min(ts, r.plan.t_end));
        r.slices.emplace_back(b, slice_x1x2((*r.coefficients)(tr.times[i]), m.space, m.bases, tr.times[i],
                                            tr.points[i]));
      }
    }
  }
  r.timings.emplace_back("analysis", seconds_since(t));
  return r;
}

std::vector<std::string> write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };
  put("config.scn", to_text(r.model->cfg));
  put("populations.csv", render_text([&](std::ostream& o) { write_populations_csv(o, r.unconditional); }));
  put("energies.csv", render_text([&](std::ostream& o) { write_energies_csv(o, r.unconditional); }));
  put("run_summary.txt", render_text([&](std::ostream& o) { write_run_summary(o, r); }));
  if (r.ensemble) {
    put("trajectories.csv", render_text([&](std::ostream& o) { write_trajectories_csv(o, *r.ensemble); }));
    put("equivariance.csv", render_text([&](std::ostream& o) { write_equivariance_csv(o, r.equivariance); }));
    put("marginals.csv", render_text([&](std::ostream& o) { write_marginals_csv(o, r.marginals); }));
  }
  if (r.branches) {
    put("branch_summary.txt", render_text([&](std::ostream& o) { write_branch_summary(o, *r.branches); }));
  }
  const auto labels = block_labels(r.model->space);
  for (const auto& e : r.exemplars) {
    put(std::string("conditional_") + branch_name(e.branch) + ".csv",
        render_text([&](std::ostream& o) { write_conditional_csv(o, e, labels); }));
  }
  if (!r.slices.empty()) put("slices.csv", render_text([&](std::ostream& o) { write_slices_csv(o, r.slices); }));
  return files;
}

int cmd_run(const std::filesystem::path& scenario, const std::filesystem::path& out_dir, const RunOptions& options,
            std::ostream& log, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(scenario);
    for (const auto& o : options.overrides) apply_override(cfg, o);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (options.seed) cfg.rng_seed = *options.seed;
  if (options.no_measure) cfg.measurement_enabled = false;
  const ValidationReport report = validate(cfg);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (!report.ok()) {
    for (const auto& e : report.errors) err << "error: " << e << '\n';
    return 1;
  }

  RunResult r;
  try {
    r = run_pipeline(cfg, &log);
  } catch (const NormDriftError& e) {
    err << "invariant failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  auto t = Clock::now();
  std::vector<std::string> files;
  try {
    files = write_outputs(r, out_dir);
    r.timings.emplace_back("export", seconds_since(t));
    write_manifest(out_dir, files, sha256_hex(to_text(cfg)), cfg.rng_seed, r.timings);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  log << "wrote " << files.size() << " files and " << kManifestName << " to " << out_dir.string() << '\n';

  int code = 0;
  if (r.ensemble && r.ensemble->n_both > 0) {
    err << "invariant failure: " << r.ensemble->n_both << " trajectories displaced both pointers\n";
    code = 2;
  }
  if (r.abort_fraction() > kMaxAbortFraction) {
    err << "invariant failure: " << r.ensemble->n_aborted << " of " << r.ensemble->trajectories.size()
        << " trajectories aborted\n";
    code = 2;
  }
  return code;
}

bool CsvTable::has(const std::string& column) const {
  return std::find(header.begin(), header.end(), column) != header.end();
}

std::vector<std::string> CsvTable::strings(const std::string& column) const {
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw std::out_of_range("no column '" + column + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(idx < row.size() ? row[idx] : std::string());
  return out;
}

std::vector<double> CsvTable::numbers(const std::string& column) const {
  std::vector<double> out;
  for (const auto& s : strings(column)) out.push_back(std::stod(s));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

int cmd_plot(const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err) {
  const auto pop_path = out_dir / "populations.csv";
  if (!std::filesystem::exists(pop_path)) {
    err << "error: no run outputs in " << out_dir.string() << " (populations.csv missing)\n";
    return 1;
  }
  std::vector<std::string> written;
  auto save = [&](const std::string& name, const std::vector<svg::Panel>& panels) {
    write_text(out_dir / name, svg::render(panels));
    written.push_back(name);
  };
  auto populated_series = [](const CsvTable& t, const std::vector<double>& x) {
    std::vector<svg::Series> out;
    for (const auto& h : t.header) {
      if (h.size() != 4 || h[0] != 'p') continue;
      const auto y = t.numbers(h);
      if (!y.empty() && *std::max_element(y.begin(), y.end()) > 1e-6) out.push_back({ket(h.substr(1)), x, y});
    }
    return out;
  };

  try {
    const CsvTable pop = read_csv(pop_path);
    const auto t = pop.numbers("t");
    save("populations.svg", {{"Populations", "t [fs]", "|c_nmk|²", populated_series(pop, t), {}}});

    if (std::filesystem::exists(out_dir / "energies.csv")) {
      const CsvTable en = read_csv(out_dir / "energies.csv");
      const auto te = en.numbers("t");
      save("energies.svg", {{"Energy expectation values", "t [fs]", "energy [eV]",
                             {{"⟨H_x1⟩", te, en.numbers("E_x1")},
                              {"⟨H_x2⟩", te, en.numbers("E_x2")},
                              {"⟨H_field⟩", te, en.numbers("E_field")},
                              {"⟨H⟩", te, en.numbers("E_total")}},
                             {}}});
    }

    if (std::filesystem::exists(out_dir / "marginals.csv")) {
      const CsvTable mg = read_csv(out_dir / "marginals.csv");
      const auto coords = mg.strings("coord");
      const auto center = mg.numbers("center"), hist = mg.numbers("histogram"), dens = mg.numbers("density");
      const auto times = mg.numbers("t");
      for (Coordinate c : kAllCoordinates) {
        svg::Panel p;
        p.xlabel = coordinate_name(c);
        p.ylabel = "probability density";
        svg::Series line{"|Φ|² marginal", {}, {}};
        p.bars.label = "trajectories";
        for (std::size_t i = 0; i < coords.size(); ++i) {
          if (coords[i] != coordinate_name(c)) continue;
          p.title = std::string("Ensemble vs |Φ|² in ") + coordinate_name(c) + " at t = " +
                    format_number(times[i]) + " fs";
          p.bars.centers.push_back(center[i]);
          p.bars.heights.push_back(hist[i]);
          line.x.push_back(center[i]);
          line.y.push_back(dens[i]);
        }
        if (line.x.empty()) continue;
        p.lines.push_back(std::move(line));
        save(std::string("equivariance_") + coordinate_name(c) + ".svg", {p});
      }
    }

    for (const char* b : {"Y", "Z"}) {
      const auto path = out_dir / (std::string("conditional_") + b + ".csv");
      if (!std::filesystem::exists(path)) continue;
      const CsvTable cd = read_csv(path);
      const auto tc = cd.numbers("t");
      const std::string branch = std::string(b) + "-branch";
      save(std::string("conditional_") + b + ".svg",
           {{"Conditional populations, " + branch, "t [fs]", "|c_nmk|²", populated_series(cd, tc), {}},
            {"Conditional energies, " + branch,
             "t [fs]",
             "energy [eV]",
             {{"⟨H_x1⟩", tc, cd.numbers("E_x1")},
              {"⟨H_x2⟩", tc, cd.numbers("E_x2")},
              {"⟨H_field⟩", tc, cd.numbers("E_field")}},
             {}},
            {"Pointer positions, " + branch, "t [fs]", "position [nm]",
             {{"y", tc, cd.numbers("y")}, {"z", tc, cd.numbers("z")}}, {}}});
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& w : written) log << "wrote " << (out_dir / w).string() << '\n';
  return 0;
}

int cmd_verify(const std::filesystem::path& scenario, const VerifyOptions& options, std::ostream& log,
               std::ostream& err) {
  ScenarioConfig cfg;
  try {
    if (!scenario.empty()) cfg = load_scenario(scenario);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const ValidationReport report = validate(cfg);
  if (!report.ok()) {
    for (const auto& e : report.errors) err << "error: " << e << '\n';
    return 1;
  }
  const auto checks = run_oracle_battery(cfg, options);
  print_oracle_table(log, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass; });
  log << (ok ? "all oracles pass" : "oracle failure") << '\n';
  return ok ? 0 : 2;
}

}  // namespace qedbohm
