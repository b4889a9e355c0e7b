#include "qedbohm/observables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace qedbohm {

namespace {

MultiIndex block_tuple(const MultiIndexSpace& space, std::size_t b) { return space.tuple(b * space.pointer_block()); }

/// Matter vector embedded at pointer entry (0, 0); the coupling does not act on pointers.
Eigen::VectorXcd embed(const Eigen::VectorXcd& matter, const MultiIndexSpace& space) {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t b = 0; b < space.matter_size(); ++b) {
    full(static_cast<Eigen::Index>(b * space.pointer_block())) = matter(static_cast<Eigen::Index>(b));
  }
  return full;
}

double coupling_expectation(const HamiltonianTerms& terms, const Eigen::VectorXcd& c) {
  const Eigen::VectorXd vre = terms.coupling * c.real();
  const Eigen::VectorXd vim = terms.coupling * c.imag();
  return c.real().dot(vre) + c.imag().dot(vim);
}

}  // namespace

std::string ket_label(std::size_t n, std::size_t m, std::size_t k) {
  return std::to_string(n) + std::to_string(m) + std::to_string(k);
}

std::vector<std::string> block_labels(const MultiIndexSpace& space) {
  std::vector<std::string> out;
  for (std::size_t b = 0; b < space.matter_size(); ++b) {
    const MultiIndex t = block_tuple(space, b);
    out.push_back(ket_label(t.n, t.m, t.k));
  }
  return out;
}

double detect_rabi_period(const std::vector<double>& times, const Eigen::VectorXd& p, double band) {
  const auto n = static_cast<Eigen::Index>(times.size());
  if (p.size() != n || n < 3) return std::numeric_limits<double>::quiet_NaN();
  const double level = 1.0 - band;
  Eigen::Index i = 0;
  while (i < n && p(i) >= level) ++i;
  while (i < n && p(i) < level) ++i;
  if (i >= n) return std::numeric_limits<double>::quiet_NaN();
  Eigen::Index best = i;
  for (Eigen::Index j = i; j < n && p(j) >= level; ++j) {
    if (p(j) > p(best)) best = j;
  }
  if (best == 0 || best + 1 >= n) return times[static_cast<std::size_t>(best)];
  const double a = p(best - 1), b = p(best), c = p(best + 1);
  const double curvature = a - 2.0 * b + c;
  const double step = times[static_cast<std::size_t>(best) + 1] - times[static_cast<std::size_t>(best)];
  const double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
  return times[static_cast<std::size_t>(best)] + std::clamp(shift, -0.5, 0.5) * step;
}

UnconditionalSeries unconditional_series(const CoefficientSeries& series, const MultiIndexSpace& space,
                                         const Bases& bases, const HamiltonianTerms& terms, const MuSchedule& mu) {
  UnconditionalSeries out;
  out.times = series.times;
  out.labels = block_labels(space);
  const auto rows = static_cast<Eigen::Index>(series.size());
  out.populations.resize(rows, static_cast<Eigen::Index>(space.matter_size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& c = series.states[static_cast<std::size_t>(r)];
    const double t = series.times[static_cast<std::size_t>(r)];
    out.populations.row(r) = block_populations(c, space).transpose();
    out.energies.push_back(energies(c, space, bases, terms, mu.value(t)));
    out.norm.push_back(c.squaredNorm());
    out.even_probability.push_back(even_sector_probability(c, space));
    out.max_closure_error = std::max(out.max_closure_error, std::abs(out.populations.row(r).sum() - 1.0));
    out.max_energy_drift =
        std::max(out.max_energy_drift, std::abs(out.energies.back().total - out.energies.front().total));
    out.max_even_probability = std::max(out.max_even_probability, out.even_probability.back());
  }
  if (rows > 0) {
    Eigen::Index start = 0;
    out.populations.row(0).maxCoeff(&start);
    out.rabi_period = detect_rabi_period(out.times, out.populations.col(start));
  }
  return out;
}

Eigen::VectorXd populations_at(const UnconditionalSeries& s, double t) {
  if (s.times.empty()) throw std::out_of_range("empty population series");
  const auto it = std::lower_bound(s.times.begin(), s.times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - s.times.begin());
  if (i == s.times.size() || (i > 0 && t - s.times[i - 1] < s.times[i] - t)) --i;
  return s.populations.row(static_cast<Eigen::Index>(i)).transpose();
}

double measurement_onset(const ScenarioConfig& cfg) { return cfg.meas_center_time - 3.0 * cfg.meas_width; }
double measurement_end(const ScenarioConfig& cfg) { return cfg.meas_center_time + 3.0 * cfg.meas_width; }

ConditionalSeries conditional_series(const Ensemble& ensemble, const SeriesInterpolator& coefficients,
                                     const MultiIndexSpace& space, const Bases& bases,
                                     const HamiltonianTerms& terms, const ScenarioConfig& cfg,
                                     std::size_t traj_id) {
  if (traj_id >= ensemble.trajectories.size()) throw std::out_of_range("trajectory id out of range");
  const Trajectory& tr = ensemble.trajectories[traj_id];
  if (tr.aborted || tr.branch == Branch::unresolved) {
    throw std::invalid_argument("conditional series needs a resolved trajectory (id " + std::to_string(traj_id) +
                                ")");
  }
  ConditionalSeries out;
  out.traj_id = traj_id;
  out.branch = tr.branch;
  out.times = tr.times;
  const auto rows = static_cast<Eigen::Index>(tr.times.size());
  out.populations.resize(rows, static_cast<Eigen::Index>(space.matter_size()));
  const double onset = measurement_onset(cfg);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double t = tr.times[static_cast<std::size_t>(r)];
    const ConfigPoint& p = tr.points[static_cast<std::size_t>(r)];
    const Eigen::VectorXcd c = coefficients(t);
    const ConditionalState cond = conditional_coefficients(c, space, bases, p.y, p.z);
    out.y.push_back(p.y);
    out.z.push_back(p.z);
    out.populations.row(r) = conditional_populations(cond).transpose();
    out.e_x1.push_back(conditional_energy(cond, space, bases, Subsystem::x1));
    out.e_x2.push_back(conditional_energy(cond, space, bases, Subsystem::x2));
    out.e_field.push_back(conditional_energy(cond, space, bases, Subsystem::field));
    out.e_interaction.push_back(coupling_expectation(terms, embed(cond.coefficients, space)));
    if (t < onset) {
      const Eigen::VectorXd uncond = block_populations(c, space) / c.squaredNorm();
      out.pre_measurement_deviation =
          std::max(out.pre_measurement_deviation, (out.populations.row(r).transpose() - uncond).cwiseAbs().maxCoeff());
    }
  }
  const bool y = tr.branch == Branch::y;
  const auto target = static_cast<Eigen::Index>(y ? space.block(1, 0, 0) : space.block(0, 1, 0));
  out.final_population = out.populations(rows - 1, target);
  out.final_energy = y ? out.e_x1.back() : out.e_x2.back();
  out.target_met = out.final_population >= kCollapsedPopulation &&
                   std::abs(out.final_energy - bases.well.energy(1)) <= kEnergyTolerance;
  return out;
}

std::optional<std::size_t> first_in_branch(const Ensemble& ensemble, Branch branch) {
  for (std::size_t i = 0; i < ensemble.trajectories.size(); ++i) {
    const auto& t = ensemble.trajectories[i];
    if (!t.aborted && t.branch == branch) return i;
  }
  return std::nullopt;
}

BornSummary born_summary(const Ensemble& ensemble, const Eigen::VectorXcd& c_meas, double t_meas,
                         const MultiIndexSpace& space, std::size_t min_resolved) {
  BornSummary s;
  s.n_total = ensemble.trajectories.size();
  s.n_y = ensemble.n_y;
  s.n_z = ensemble.n_z;
  s.n_unresolved = ensemble.n_unresolved;
  s.n_aborted = ensemble.n_aborted;
  s.n_both = ensemble.n_both;
  s.n_resolved = s.n_y + s.n_z;
  if (s.n_resolved < min_resolved) {
    throw std::invalid_argument("born summary needs at least " + std::to_string(min_resolved) +
                                " resolved trajectories, got " + std::to_string(s.n_resolved));
  }
  const auto res = static_cast<double>(s.n_resolved);
  s.y_fraction = static_cast<double>(s.n_y) / res;
  s.z_fraction = static_cast<double>(s.n_z) / res;
  s.t_meas = t_meas;
  const Eigen::VectorXd p = block_populations(c_meas, space) / c_meas.squaredNorm();
  s.p100 = p(static_cast<Eigen::Index>(space.block(1, 0, 0)));
  s.p010 = p(static_cast<Eigen::Index>(space.block(0, 1, 0)));
  s.expected_y = s.p100 / (s.p100 + s.p010);
  s.y_sigma = std::sqrt(s.expected_y * (1.0 - s.expected_y) / res);
  s.consistent = std::abs(s.y_fraction - s.expected_y) <= 3.0 * s.y_sigma;
  return s;
}

std::vector<EquivarianceRow> equivariance_table(const Ensemble& ensemble, const std::vector<double>& times,
                                                const SeriesInterpolator& coefficients,
                                                const MultiIndexSpace& space, const Bases& bases) {
  std::vector<EquivarianceRow> rows;
  for (double t : times) {
    const Eigen::VectorXcd c = coefficients(t);
    for (Coordinate coord : kAllCoordinates) {
      rows.push_back({coord, t, equivariance_check(ensemble, t, c, space, bases, coord)});
    }
  }
  return rows;
}

MarginalComparison marginal_comparison(const Ensemble& ensemble, double t, const Eigen::VectorXcd& c,
                                       const MultiIndexSpace& space, const Bases& bases, Coordinate coord,
                                       std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("marginal comparison needs at least one bin");
  std::vector<double> samples;
  for (const auto& tr : ensemble.trajectories) {
    if (tr.aborted) continue;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      if (std::abs(tr.times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
        samples.push_back(coordinate_of(tr.points[i], coord));
        break;
      }
    }
  }
  const MarginalTable table = marginal(c, space, bases, coord);
  // bins over the central 99.98% of the analytic marginal
  const double lo = table.quantile(1e-4), hi = table.quantile(1.0 - 1e-4);
  const double width = (hi - lo) / static_cast<double>(bins);
  MarginalComparison out;
  out.coord = coord;
  out.t = t;
  const auto nb = static_cast<Eigen::Index>(bins);
  out.centers.resize(nb);
  out.histogram = Eigen::VectorXd::Zero(nb);
  out.density.resize(nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const double a = lo + width * static_cast<double>(b);
    out.centers(b) = a + 0.5 * width;
    out.density(b) = (table.cdf(a + width) - table.cdf(a)) / width;
  }
  for (double v : samples) {
    const auto b = static_cast<Eigen::Index>(std::floor((v - lo) / width));
    if (b >= 0 && b < nb) out.histogram(b) += 1.0;
  }
  if (!samples.empty()) out.histogram /= static_cast<double>(samples.size()) * width;
  return out;
}

Slice slice_x1x2(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases, double t,
                 const ConfigPoint& at, std::size_t grid) {
  Slice s;
  s.t = t;
  s.at = at;
  const auto g = static_cast<Eigen::Index>(grid);
  const double l = bases.well.length();
  s.x1 = Eigen::VectorXd::LinSpaced(g, 0.0, l);
  s.x2 = s.x1;
  s.magnitude.resize(g, g);
  FieldEvaluator eval(space, bases);
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = 0; j < g; ++j) {
      ConfigPoint p = at;
      p.x1 = s.x1(i);
      p.x2 = s.x2(j);
      s.magnitude(i, j) = std::abs(eval(c, p).value);
    }
  }
  return s;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_populations_csv(std::ostream& out, const UnconditionalSeries& s) {
  out << "t";
  for (const auto& l : s.labels) out << ",p" << l;
  out << ",norm,even_sector\n";
  for (std::size_t r = 0; r < s.times.size(); ++r) {
    out << format_number(s.times[r]);
    for (Eigen::Index b = 0; b < s.populations.cols(); ++b) {
      out << ',' << format_number(s.populations(static_cast<Eigen::Index>(r), b));
    }
    out << ',' << format_number(s.norm[r]) << ',' << format_number(s.even_probability[r]) << '\n';
  }
}

void write_energies_csv(std::ostream& out, const UnconditionalSeries& s) {
  out << "t,E_x1,E_x2,E_field,E_pointers,E_interaction,E_measurement,E_total\n";
  for (std::size_t r = 0; r < s.times.size(); ++r) {
    const auto& e = s.energies[r];
    out << format_number(s.times[r]);
    for (double v : {e.x1, e.x2, e.field, e.pointers, e.interaction, e.measurement, e.total}) {
      out << ',' << format_number(v);
    }
    out << '\n';
  }
}

void write_trajectories_csv(std::ostream& out, const Ensemble& ensemble) {
  out << "traj_id,t,x1,x2,q,y,z\n";
  for (std::size_t i = 0; i < ensemble.trajectories.size(); ++i) {
    const auto& tr = ensemble.trajectories[i];
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
      const auto& p = tr.points[j];
      out << i << ',' << format_number(tr.times[j]);
      for (double v : {p.x1, p.x2, p.q, p.y, p.z}) out << ',' << format_number(v);
      out << '\n';
    }
  }
}

void write_conditional_csv(std::ostream& out, const ConditionalSeries& s, const std::vector<std::string>& labels) {
  out << "t,y,z";
  for (const auto& l : labels) out << ",p" << l;
  out << ",E_x1,E_x2,E_field,E_interaction\n";
  for (std::size_t r = 0; r < s.times.size(); ++r) {
    out << format_number(s.times[r]) << ',' << format_number(s.y[r]) << ',' << format_number(s.z[r]);
    for (Eigen::Index b = 0; b < s.populations.cols(); ++b) {
      out << ',' << format_number(s.populations(static_cast<Eigen::Index>(r), b));
    }
    for (double v : {s.e_x1[r], s.e_x2[r], s.e_field[r], s.e_interaction[r]}) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_equivariance_csv(std::ostream& out, const std::vector<EquivarianceRow>& rows) {
  out << "coord,t,distance,critical,pass\n";
  for (const auto& r : rows) {
    out << coordinate_name(r.coord) << ',' << format_number(r.t) << ',' << format_number(r.ks.distance) << ','
        << format_number(r.ks.critical) << ',' << (r.ks.pass ? 1 : 0) << '\n';
  }
}

void write_marginals_csv(std::ostream& out, const std::vector<MarginalComparison>& rows) {
  out << "coord,t,center,histogram,density\n";
  for (const auto& m : rows) {
    for (Eigen::Index b = 0; b < m.centers.size(); ++b) {
      out << coordinate_name(m.coord) << ',' << format_number(m.t) << ',' << format_number(m.centers(b)) << ','
          << format_number(m.histogram(b)) << ',' << format_number(m.density(b)) << '\n';
    }
  }
}

void write_slices_csv(std::ostream& out, const std::vector<std::pair<Branch, Slice>>& slices) {
  out << "branch,t,q,y,z,x1,x2,abs_phi\n";
  for (const auto& [branch, s] : slices) {
    for (Eigen::Index i = 0; i < s.x1.size(); ++i) {
      for (Eigen::Index j = 0; j < s.x2.size(); ++j) {
        out << branch_name(branch) << ',' << format_number(s.t) << ',' << format_number(s.at.q) << ','
            << format_number(s.at.y) << ',' << format_number(s.at.z) << ',' << format_number(s.x1(i)) << ','
            << format_number(s.x2(j)) << ',' << format_number(s.magnitude(i, j)) << '\n';
      }
    }
  }
}

void write_branch_summary(std::ostream& out, const BranchReport& r) {
  const auto& b = r.born;
  out << "n_total = " << b.n_total << '\n'
      << "n_y_branch = " << b.n_y << '\n'
      << "n_z_branch = " << b.n_z << '\n'
      << "n_unresolved = " << b.n_unresolved << '\n'
      << "n_aborted = " << b.n_aborted << '\n'
      << "n_both_displaced = " << b.n_both << '\n'
      << "y_fraction = " << format_number(b.y_fraction) << '\n'
      << "z_fraction = " << format_number(b.z_fraction) << '\n'
      << "y_sigma = " << format_number(b.y_sigma) << '\n'
      << "expected_y = " << format_number(b.expected_y) << '\n'
      << "t_meas = " << format_number(b.t_meas) << '\n'
      << "p100_meas = " << format_number(b.p100) << '\n'
      << "p010_meas = " << format_number(b.p010) << '\n'
      << "born_consistent = " << (b.consistent ? "true" : "false") << '\n';
  for (Coordinate c : kAllCoordinates) {
    out << "ks_" << coordinate_name(c) << " = " << format_number(r.ks[static_cast<int>(c)]) << '\n';
  }
  out << "ks_critical = " << format_number(r.ks_critical) << '\n'
      << "threshold = " << format_number(r.threshold) << '\n'
      << "sigma0 = " << format_number(r.scales.sigma0) << '\n'
      << "five_sigma0 = " << format_number(r.scales.five_sigma) << '\n'
      << "shift_full_window = " << format_number(r.scales.shift_full) << '\n'
      << "shift_half_window = " << format_number(r.scales.shift_half) << '\n';
}

}  // namespace qedbohm
