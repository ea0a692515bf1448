// Acceptance run: one PASS/FAIL line per criterion, followed by indented
// measurements. Exit status is the number of failed criteria.

#include <cmc/entanglement.hpp>
#include <cmc/resonance.hpp>
#include <cmc/runner.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

using namespace cmc;

namespace {

const double kPi = 3.14159265358979323846;

struct Report {
  int failed = 0;
  std::vector<std::string> details;

  void note(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    details.emplace_back(buf);
  }

  void verdict(const char* name, bool pass) {
    std::printf("%s %s\n", pass ? "PASS" : "FAIL", name);
    for (const auto& d : details) std::printf("      %s\n", d.c_str());
    std::fflush(stdout);
    details.clear();
    failed += pass ? 0 : 1;
  }
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Index of the extremum of y over grid points with t <= t_limit, refined by a
// parabola through the neighbours. Returns (time, value).
std::pair<double, double> extremum(const TimeGrid& grid, const std::vector<double>& y, double t_limit, bool maximum) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < y.size() && grid.at(i) <= t_limit; ++i)
    if (maximum ? y[i] > y[best] : y[i] < y[best]) best = i;
  if (best == 0 || best + 1 >= y.size()) return {grid.at(best), y[best]};
  const double h = grid.at(1) - grid.at(0);
  const double a = y[best - 1], b = y[best], c = y[best + 1];
  const double den = a - 2 * b + c;
  if (den == 0) return {grid.at(best), b};
  const double off = 0.5 * (a - c) / den;
  return {grid.at(best) + off * h, b - 0.25 * (a - c) * off};
}

// Vertex of a least-squares parabola through the points within half_width of
// the raw extremum, re-centred once on the first vertex. Ensemble means are
// too noisy near a flat extremum for a pointwise argmax.
std::pair<double, double> fitted_extremum(const TimeGrid& grid, const std::vector<double>& y, double t_limit,
                                          bool maximum, double half_width) {
  double centre = extremum(grid, y, t_limit, maximum).first;
  double value = 0;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (std::abs(grid.at(i) - centre) <= half_width) idx.push_back(i);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), 3);
    Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double x = grid.at(idx[k]) - centre;
      m.row(static_cast<Eigen::Index>(k)) << 1.0, x, x * x;
      v(static_cast<Eigen::Index>(k)) = y[idx[k]];
    }
    const Eigen::Vector3d c = m.colPivHouseholderQr().solve(v);
    const double dx = -c(1) / (2 * c(2));
    value = c(0) + c(1) * dx + c(2) * dx * dx;
    centre += dx;
  }
  return {centre, value};
}

std::size_t nearest(const TimeGrid& grid, double t) {
  const double h = grid.at(1) - grid.at(0);
  return std::min(grid.n_points - 1, static_cast<std::size_t>(std::lround((t - grid.t_start) / h)));
}

bool same(const TrajectoryResult& x, const TrajectoryResult& y) {
  if (x.jumps.size() != y.jumps.size()) return false;
  for (std::size_t i = 0; i < x.jumps.size(); ++i)
    if (x.jumps[i].time != y.jumps[i].time || x.jumps[i].channel != y.jumps[i].channel) return false;
  for (std::size_t m = 0; m < 3; ++m)
    if (x.occupations[m] != y.occupations[m]) return false;
  return true;
}

double max_gated_deviation(const std::vector<SwVerificationRow>& rows, Report& rep) {
  double worst = 0;
  for (const auto& r : rows) {
    if (!r.gated) continue;
    worst = std::max(worst, r.deviation);
    if (!r.passed())
      rep.note("%s %s: closed form %.6e, numeric %.6e (ratio %.6f)", r.scenario.c_str(), r.quantity.c_str(),
               r.closed_form, r.numeric, r.closed_form != 0 ? r.numeric / r.closed_form : 0.0);
  }
  return worst;
}

void sw_two_photon(Report& rep) {
  SystemParams p;
  p.g = 0.05;
  p.omega_a = p.omega_c = 1.0 + p.g * p.g;
  const auto rows = verify_sw(ScenarioKind::TwoPhoton, p, ModeDims(7, 4, 7));
  const double worst = max_gated_deviation(rows, rep);
  rep.note("max gated deviation %.3e (tolerance 1e-9), %zu rows", worst, rows.size());
  rep.verdict("SW oracle equivalence, two-photon block at order 2", worst < 1e-9);
}

void sw_third_order(Report& rep) {
  const SystemParams four = resolve(preset_config(ScenarioKind::FourPhoton)).params;
  const SystemParams janus = resolve(preset_config(ScenarioKind::Janus)).params;
  const double w4 = max_gated_deviation(verify_sw(ScenarioKind::FourPhoton, four, ModeDims(7, 3, 7)), rep);
  const double wj = max_gated_deviation(verify_sw(ScenarioKind::Janus, janus, ModeDims(7, 3, 7)), rep);
  rep.note("max gated deviation: four-photon %.3e, Janus %.3e (tolerance 1e-9)", w4, wj);
  rep.verdict("SW oracle equivalence, four-photon and Janus at order 3", w4 < 1e-9 && wj < 1e-9);
}

void geff_root(Report& rep) {
  SystemParams p;
  p.g = 0.05;
  p.omega_a = p.omega_c = 0.3;
  const double g = janus_coefficients(p).g_eff;
  rep.note("g_eff at Omega = 1: %.17g", g);
  rep.verdict("Janus g_eff vanishes at Omega = 1", g == 0.0);
}

void four_photon_resonance(Report& rep) {
  SystemParams p;
  p.g = 0.03;
  const ResonanceResult r = optimize_resonance(ScenarioKind::FourPhoton, p);
  rep.note("analytic %.7f, optimized %.9f, difference %.3e, window [0.2560, 0.2572]", r.analytic_value,
           r.optimized_value, r.difference());
  rep.verdict("four-photon resonance refinement",
              r.optimized_value >= 0.2560 && r.optimized_value <= 0.2572 && r.difference() != 0.0);
}

struct TwoPhotonRun {
  ResolvedConfig resolved;
  TimeGrid grid;
  MasterResult me;
  std::vector<double> cavity_negativity;
  double max_rho_asymmetry;
  std::vector<TrajectoryResult> runs;
};

TwoPhotonRun two_photon_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = preset_config(ScenarioKind::TwoPhoton);
  ResolvedConfig resolved = resolve(cfg);
  const ModeDims dims = ModeDims::three(cfg.truncation);
  const OpenSystem sys(resolved.params, dims);
  const StateVector psi0 = basis_state({0, 2, 0}, dims);
  std::vector<double> negativity(cfg.grid.n_points);
  double asym = 0;
  MasterResult me = evolve_master(DensityMatrix::pure(psi0), sys, cfg.grid, {},
                                  [&](std::size_t i, double, const DensityMatrix& rho) {
                                    asym = std::max(asym, (rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff());
                                    negativity[i] = log_negativity(partial_trace(rho, {Mode::A, Mode::C}), Mode::A);
                                  });
  std::printf("# two-photon master equation: %.1f s\n", seconds_since(t0));
  const auto t1 = std::chrono::steady_clock::now();
  auto runs = run_trajectories(psi0, sys, cfg.grid, cfg.n_traj, cfg.base_seed, workers());
  std::printf("# two-photon trajectories (%zu): %.1f s\n", cfg.n_traj, seconds_since(t1));
  std::fflush(stdout);
  return {std::move(resolved), cfg.grid, std::move(me), std::move(negativity), asym, std::move(runs)};
}

void ensemble_dynamics(const TwoPhotonRun& run, Report& rep) {
  const SystemParams& p = run.resolved.params;
  const double coupling = two_photon_coupling(p);
  const double t_rabi = 2 * kPi / (2 * coupling);
  const double half = t_rabi / 2;
  const EnsembleResult ens = ensemble_mean(run.runs, run.runs.size(), run.runs.front().seed);
  const auto& nb = ens.occupations[1];
  const double window = t_rabi / 8;
  const auto [t_min_b, v_min_b] = fitted_extremum(run.grid, nb, 0.75 * t_rabi, false, window);
  const auto [t_max_a, v_max_a] = fitted_extremum(run.grid, ens.occupations[0], 0.75 * t_rabi, true, window);
  const auto [t_max_c, v_max_c] = fitted_extremum(run.grid, ens.occupations[2], 0.75 * t_rabi, true, window);
  const double raw_b = extremum(run.grid, nb, 0.75 * t_rabi, false).first;
  const double raw_a = extremum(run.grid, ens.occupations[0], 0.75 * t_rabi, true).first;
  const double raw_c = extremum(run.grid, ens.occupations[2], 0.75 * t_rabi, true).first;
  const double env_a = std::exp(-p.gamma_a * t_max_a), env_c = std::exp(-p.gamma_c * t_max_c);
  double dev[3];
  for (std::size_t m = 0; m < 3; ++m) {
    dev[m] = 0;
    for (std::size_t i = 0; i < run.grid.n_points; ++i)
      dev[m] = std::max(dev[m], std::abs(ens.occupations[m][i] - run.me.occupations[m][i]));
  }
  const bool start_ok = std::abs(nb[0] - 2.0) < 0.1;
  const bool min_ok = std::abs(t_min_b - half) <= 0.05 * half;
  const bool peak_ok = std::abs(t_max_a - half) <= 0.05 * half && std::abs(t_max_c - half) <= 0.05 * half &&
                       std::abs(v_max_a / env_a - 1) <= 0.1 && std::abs(v_max_c / env_c - 1) <= 0.1;
  const bool dev_ok = dev[0] < 0.1 && dev[1] < 0.1 && dev[2] < 0.1;
  rep.note("n = %zu, T_R/2 = %.2f", run.runs.size(), half);
  rep.note("n_b(0) = %.4f (target 2 +- 0.1)", nb[0]);
  rep.note("first n_b minimum at t = %.2f (%.2f%% from T_R/2, limit 5%%), value %.4f", t_min_b,
           100 * (t_min_b - half) / half, v_min_b);
  rep.note("cavity peaks: a %.4f at t = %.2f (envelope %.4f), c %.4f at t = %.2f (envelope %.4f); limits 5%% in t, 10%% in value",
           v_max_a, t_max_a, env_a, v_max_c, t_max_c, env_c);
  rep.note("parabola fits over +-T_R/8; pointwise argmax for reference: b %.2f, a %.2f, c %.2f", raw_b, raw_a, raw_c);
  rep.note("ensemble vs master equation max |dev|: a %.4f, b %.4f, c %.4f (limit 0.1)", dev[0], dev[1], dev[2]);
  rep.verdict("two-photon ensemble dynamics", start_ok && min_ok && peak_ok && dev_ok);
}

void trapping(const TwoPhotonRun& run, Report& rep) {
  const TrajectoryResult* b_run = nullptr;
  const TrajectoryResult* c_run = nullptr;
  std::size_t b_index = 0, c_index = 0;
  for (std::size_t i = 0; i < run.runs.size() && (!b_run || !c_run); ++i) {
    const auto& r = run.runs[i];
    if (r.jumps.empty()) continue;
    // A b-jump trajectory needs grid points between its first two jumps.
    if (!b_run && r.jumps[0].channel == Mode::B) {
      const double stop = r.jumps.size() > 1 ? r.jumps[1].time : run.grid.t_end;
      if (nearest(run.grid, stop) > nearest(run.grid, r.jumps[0].time) + 2) {
        b_run = &r;
        b_index = i;
      }
    }
    if (!c_run && r.jumps[0].channel == Mode::C && r.jumps[0].time < run.grid.t_end - (run.grid.at(1) - run.grid.at(0))) {
      c_run = &r;
      c_index = i;
    }
  }
  bool ok = b_run && c_run;
  if (b_run) {
    const double t1 = b_run->jumps[0].time;
    const double t2 = b_run->jumps.size() > 1 ? b_run->jumps[1].time : run.grid.t_end + 1;
    std::size_t first = 0;
    while (run.grid.at(first) <= t1) ++first;
    double drift = 0;
    std::size_t points = 0;
    for (std::size_t i = first; i < run.grid.n_points && run.grid.at(i) < t2; ++i, ++points)
      for (std::size_t m = 0; m < 3; ++m)
        drift = std::max(drift, std::abs(b_run->occupations[m][i] - b_run->occupations[m][first]));
    rep.note("b-jump trajectory #%zu (seed %llu): first jump t = %.3f, %zu grid points before the next jump, "
             "max drift %.3e (limit 1e-6); occupations %.4f %.4f %.4f",
             b_index, static_cast<unsigned long long>(b_run->seed), t1, points, drift, b_run->occupations[0][first],
             b_run->occupations[1][first], b_run->occupations[2][first]);
    ok = ok && drift <= 1e-6;
  } else {
    rep.note("no trajectory with a first b-jump and a resolvable interval");
  }
  if (c_run) {
    const double t1 = c_run->jumps[0].time;
    std::size_t first = 0;
    while (run.grid.at(first) <= t1) ++first;
    const double na = c_run->occupations[0][first];
    rep.note("c-jump trajectory #%zu (seed %llu): first jump t = %.3f, n_a = %.3e at t = %.2f (limit 0.05)", c_index,
             static_cast<unsigned long long>(c_run->seed), t1, na, run.grid.at(first));
    ok = ok && na < 0.05;
  } else {
    rep.note("no trajectory with a first c-jump");
  }
  rep.verdict("trajectory trapping signatures", ok);
}

void convergence(const TwoPhotonRun& run, Report& rep) {
  const std::uint64_t base = preset_config(ScenarioKind::TwoPhoton).base_seed;
  double dev[3];
  const std::size_t ns[3] = {10, 100, 1000};
  for (int k = 0; k < 3; ++k)
    dev[k] = max_abs_deviation(ensemble_mean(run.runs, ns[k], base).occupations, run.me.occupations);
  const double factor = dev[1] / dev[2];
  rep.note("max |ensemble - master| at n = 10, 100, 1000: %.4f, %.4f, %.4f (base seed %llu)", dev[0], dev[1], dev[2],
           static_cast<unsigned long long>(base));
  rep.note("reduction 100 -> 1000: %.3f (window [1.5, 6])", factor);
  rep.verdict("trajectory convergence scaling", dev[0] > dev[1] && dev[1] > dev[2] && factor >= 1.5 && factor <= 6);
}

void entanglement(const TwoPhotonRun& run, Report& rep) {
  const double t_rabi = 2 * kPi / (2 * two_photon_coupling(run.resolved.params));
  std::vector<double> cav(run.grid.n_points);
  for (std::size_t i = 0; i < cav.size(); ++i) cav[i] = run.me.occupations[0][i] + run.me.occupations[2][i];
  std::size_t peak = 0;
  for (std::size_t i = 0; i < cav.size() && run.grid.at(i) <= 0.75 * t_rabi; ++i)
    if (cav[i] > cav[peak]) peak = i;
  const double en = run.cavity_negativity[peak];

  const ModeDims two({3, 3}, {Mode::A, Mode::C});
  Vector v = Vector::Zero(9);
  v(static_cast<Eigen::Index>(two.flatten({2, 0}))) = 1 / std::sqrt(2.0);
  v(static_cast<Eigen::Index>(two.flatten({0, 2}))) = 1 / std::sqrt(2.0);
  const double noon = log_negativity(DensityMatrix::pure(StateVector(v, two)), Mode::A);

  rep.note("first cavity maximum at t = %.1f (n_a + n_c = %.4f): E_N = %.4f (limit > 0.9)", run.grid.at(peak), cav[peak],
           en);
  rep.note("NOON state E_N = %.12f (|E_N - 1| limit 1e-9)", noon);
  rep.verdict("entanglement quantification", en > 0.9 && std::abs(noon - 1) < 1e-9);
}

void janus_dynamics(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = preset_config(ScenarioKind::Janus);
  const ResolvedConfig res = resolve(cfg);
  const ModeDims dims = ModeDims::three(cfg.truncation);
  const MasterResult me =
      evolve_master(DensityMatrix::pure(basis_state({2, 0, 2}, dims)), res.params, dims, cfg.grid);
  std::printf("# Janus master equation: %.1f s\n", seconds_since(t0));
  const auto& na = me.occupations[0];
  const auto& nb = me.occupations[1];
  const auto& nc = me.occupations[2];
  const auto [t_peak, v_peak] = extremum(cfg.grid, nb, cfg.grid.t_end, true);
  const std::size_t ip = nearest(cfg.grid, t_peak);
  const double g_eff = janus_coefficients(res.params).g_eff;
  const double f_pred = 2 * (2 * std::abs(g_eff)) / (2 * kPi);
  const double f_obs = 1 / (2 * t_peak);

  // Pearson correlation of n_b against n_a + n_c.
  double mb = 0, mc = 0;
  const std::size_t n = cfg.grid.n_points;
  for (std::size_t i = 0; i < n; ++i) {
    mb += nb[i] / n;
    mc += (na[i] + nc[i]) / n;
  }
  double sbc = 0, sbb = 0, scc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = nb[i] - mb, y = na[i] + nc[i] - mc;
    sbc += x * y;
    sbb += x * x;
    scc += y * y;
  }
  const double corr = sbc / std::sqrt(sbb * scc);

  const bool shape = nb[0] < 0.2 && na[0] > 1.8 && nc[0] > 1.8 && v_peak > 0.8 && na[ip] < 0.2 && nc[ip] < 0.2 &&
                     corr < -0.9;
  const bool freq = std::abs(f_obs / f_pred - 1) <= 0.1;
  rep.note("omega_c = %.9f (Omega = %.5f)", res.params.omega_c, res.params.ratio());
  rep.note("start n_a %.3f n_b %.3f n_c %.3f; first n_b maximum %.3f at t = %.0f with n_a %.3f n_c %.3f", na[0], nb[0],
           nc[0], v_peak, t_peak, na[ip], nc[ip]);
  rep.note("correlation(n_b, n_a + n_c) = %.4f (limit < -0.9)", corr);
  rep.note("population frequency %.4e vs 2(2 g_eff)/2pi = %.4e with closed-form g_eff = %.4e (ratio %.3f, limit 10%%)",
           f_obs, f_pred, g_eff, f_obs / f_pred);
  rep.verdict("Janus anticorrelated oscillation and frequency", shape && freq);
}

void chevron(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const ResolvedConfig res = resolve(preset_config(ScenarioKind::TwoPhoton));
  const double gc = two_photon_coupling(res.params);
  const double t_rabi = 2 * kPi / (2 * gc);
  const std::vector<double> mult{-4, -2, -1, 0, 1, 2, 4};
  std::vector<double> deltas;
  for (double m : mult) deltas.push_back(m * gc);
  ChevronOptions opts;
  opts.dims = ModeDims(7, 4, 7);
  opts.workers = workers();
  const TimeGrid grid(0.0, 1.2 * t_rabi, 241);
  const DetuningScan scan = chevron_scan(res.params, deltas, grid, opts);
  std::printf("# chevron scan (%zu detunings): %.1f s\n", deltas.size(), seconds_since(t0));

  auto peak = [](const std::vector<double>& c) { return *std::max_element(c.begin(), c.end()); };
  const std::size_t zero = 3;
  bool maximal = true;
  for (std::size_t d = 0; d < deltas.size(); ++d)
    if (d != zero) maximal = maximal && peak(scan.log_negativity[d]) < peak(scan.log_negativity[zero]);

  double asym = 0;
  for (std::size_t d = 0; d < zero; ++d) {
    const auto& x = scan.log_negativity[d];
    const auto& y = scan.log_negativity[deltas.size() - 1 - d];
    double diff = 0;
    for (std::size_t i = 0; i < x.size(); ++i) diff = std::max(diff, std::abs(x[i] - y[i]));
    const double rel = diff / std::max(peak(x), peak(y));
    asym = std::max(asym, rel);
    rep.note("delta = +-%.0f g_eff: peak E_N %.4f / %.4f, max |E_N(d) - E_N(-d)| relative %.4f", mult[deltas.size() - 1 - d],
             peak(x), peak(y), rel);
  }
  rep.note("delta = 0: peak E_N %.4f", peak(scan.log_negativity[zero]));

  double amp_err = 0;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const double a = detuned_rabi_profile(deltas[d], gc).amplitude;
    const double err = std::abs(scan.transfer_amplitude[d] / a - 1);
    amp_err = std::max(amp_err, err);
    rep.note("delta = %+.0f g_eff: transfer amplitude %.4f, A(delta) %.4f, g^2/(g^2+delta^2) %.4f", mult[d],
             scan.transfer_amplitude[d], a, gc * gc / (gc * gc + deltas[d] * deltas[d]));
  }
  rep.note("maximal at delta = 0: %s; symmetry %.4f (limit 0.02); amplitude max relative error %.3f (limit 0.1)",
           maximal ? "yes" : "no", asym, amp_err);
  rep.verdict("detuning chevron", maximal && asym <= 0.02 && amp_err <= 0.1);
}

void invariants(const TwoPhotonRun& run, Report& rep) {
  const SystemParams& p = run.resolved.params;
  const ModeDims dims(7, 4, 7);
  const OpenSystem sys(p, dims);
  const double herm = (sys.hamiltonian().matrix() - sys.hamiltonian().matrix().adjoint()).cwiseAbs().maxCoeff();

  double trace_err = 0, min_eig = 0;
  for (std::size_t i = 0; i < run.grid.n_points; ++i) {
    trace_err = std::max(trace_err, std::abs(run.me.trace[i] - 1));
    min_eig = std::min(min_eig, run.me.min_eigenvalue[i]);
  }

  double norm_up = 0;
  for (const auto& r : run.runs) norm_up = std::max(norm_up, r.max_norm_increase);

  bool triangular = true;
  for (const auto& x : sys.operators().x_plus_eigen)
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c <= r; ++c) triangular = triangular && x(r, c) == Complex(0, 0);

  SystemParams bare = p;
  bare.g = 0;
  const OpenSystem free_sys(bare, ModeDims(4, 3, 4));
  double bare_dev = 0;
  for (Mode m : {Mode::A, Mode::B, Mode::C})
    bare_dev = std::max(bare_dev, (free_sys.operators().plus(m).matrix() - lowering(m, ModeDims(4, 3, 4)).matrix())
                                      .cwiseAbs()
                                      .maxCoeff());

  const StateVector psi0 = basis_state({0, 2, 0}, dims);
  bool reruns = true;
  for (std::size_t i = 0; i < 5; ++i)
    reruns = reruns && same(evolve_trajectory(psi0, sys, run.grid, run.runs[i].seed), run.runs[i]);

  const std::uint64_t base = preset_config(ScenarioKind::TwoPhoton).base_seed;
  const auto serial = run_trajectories(psi0, sys, run.grid, 16, base, 1);
  const auto parallel = run_trajectories(psi0, sys, run.grid, 16, base, 4);
  bool equal = true;
  for (std::size_t i = 0; i < 16; ++i) equal = equal && same(serial[i], parallel[i]);
  equal = equal && ensemble_mean(serial, 16, base).occupations == ensemble_mean(parallel, 16, base).occupations;

  rep.note("H hermiticity %.2e (limit 1e-12); rho hermiticity %.2e (limit 1e-10)", herm, run.max_rho_asymmetry);
  rep.note("trace error %.2e (limit 1e-7); min eigenvalue %.2e (limit -1e-6)", trace_err, min_eig);
  rep.note("largest norm^2 increase between jumps %.2e over %zu trajectories (limit 1e-7)", norm_up, run.runs.size());
  rep.note("dressed X+ strictly upper triangular: %s; bare-limit deviation %.2e", triangular ? "yes" : "no", bare_dev);
  rep.note("seeded reruns identical: %s; 1 vs 4 workers identical: %s", reruns ? "yes" : "no", equal ? "yes" : "no");
  rep.verdict("invariant suites", herm < 1e-12 && run.max_rho_asymmetry < 1e-10 && trace_err < 1e-7 &&
                                      min_eig >= -1e-6 && norm_up <= 1e-7 && triangular && bare_dev < 1e-14 &&
                                      reruns && equal);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  try {
    sw_two_photon(rep);
    sw_third_order(rep);
    geff_root(rep);
    four_photon_resonance(rep);
    const TwoPhotonRun run = two_photon_run();
    ensemble_dynamics(run, rep);
    trapping(run, rep);
    convergence(run, rep);
    janus_dynamics(rep);
    entanglement(run, rep);
    chevron(rep);
    invariants(run, rep);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 100;
  }
  std::printf("# %d criteria failed; total %.0f s\n", rep.failed, seconds_since(start));
  return rep.failed;
}
