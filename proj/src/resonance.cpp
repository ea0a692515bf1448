#include <cmc/dressed.hpp>
#include <cmc/resonance.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cmc {

std::string_view objective_name(ResonanceObjective kind) {
  return kind == ResonanceObjective::Gap ? "gap" : "amplitude";
}

ResonanceObjective objective_from_name(std::string_view name) {
  if (name == "gap") return ResonanceObjective::Gap;
  if (name == "amplitude") return ResonanceObjective::Amplitude;
  fail(ErrorCode::InvalidArgument, "unknown resonance objective '" + std::string(name) + "' (gap, amplitude)");
}

SystemParams with_resonant_frequency(ScenarioKind kind, const SystemParams& p, double value) {
  SystemParams q = p;
  if (kind == ScenarioKind::Janus)
    q.omega_c = value;
  else
    q.omega_a = q.omega_c = value;
  return q;
}

double resonant_frequency(ScenarioKind kind, const SystemParams& p) {
  return kind == ScenarioKind::Janus ? p.omega_c : p.omega_a;
}

namespace {

double janus_mismatch(const SystemParams& p, double omega_c) {
  SystemParams q = p;
  q.omega_c = omega_c;
  const Eigen::Matrix2d b = janus_block(q);
  return b(0, 0) - b(1, 1);
}

}  // namespace

double analytic_resonance(ScenarioKind kind, const SystemParams& p) {
  const double wb = p.omega_b, g2 = p.g * p.g;
  switch (kind) {
    case ScenarioKind::TwoPhoton: return wb + g2 / wb;
    case ScenarioKind::FourPhoton: return wb / 4 + 7 * g2 / wb;
    case ScenarioKind::Janus: break;
  }

  const double bare = wb / 2 - p.omega_a;
  if (!(bare > 0)) fail(ErrorCode::NoResonance, "Janus resonance needs omega_a < omega_b / 2");
  // Scan for sign changes around the bare root, keep the one nearest to it.
  constexpr int kScan = 400;
  std::optional<std::pair<double, double>> best;
  double prev_x = 0, prev_f = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= kScan; ++k) {
    const double x = bare * (0.5 + static_cast<double>(k) / kScan);
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      f = janus_mismatch(p, x);
    } catch (const Error&) {
    }
    if (std::isfinite(f) && std::isfinite(prev_f) && (f == 0 || (f < 0) != (prev_f < 0))) {
      const double mid = 0.5 * (x + prev_x);
      if (!best || std::abs(mid - bare) < std::abs(0.5 * (best->first + best->second) - bare)) best = {prev_x, x};
    }
    prev_x = x;
    prev_f = f;
  }
  if (!best) fail(ErrorCode::NoResonance, "no Janus resonance near omega_c = omega_b/2 - omega_a");

  double lo = best->first, hi = best->second;
  double f_lo = janus_mismatch(p, lo);
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = janus_mismatch(p, mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (f_lo < 0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<Vector, Vector> resonant_pair_kets(ScenarioKind kind, const ModeDims& dims) {
  const Matrix b = scenario_basis(kind, dims);
  if (kind == ScenarioKind::Janus) return {b.col(1), b.col(0)};
  return {b.col(0), b.col(1)};
}

namespace {

struct Identified {
  ResonantLevels levels;
  Eigen::Index lo = 0, hi = 0;
};

Identified identify(ScenarioKind kind, const DressedBasis& basis) {
  const auto [init, target] = resonant_pair_kets(kind, basis.dims);
  const Vector oi = basis.eigenvectors.adjoint() * init;
  const Vector ot = basis.eigenvectors.adjoint() * target;
  const RealVector w = oi.cwiseAbs2() + ot.cwiseAbs2();
  Eigen::Index k1 = 0;
  w.maxCoeff(&k1);
  Eigen::Index k2 = k1 == 0 ? 1 : 0;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (k != k1 && w(k) > w(k2)) k2 = k;
  Identified id;
  id.lo = std::min(k1, k2);
  id.hi = std::max(k1, k2);
  auto& l = id.levels;
  l.energy_lo = basis.eigenvalues(id.lo);
  l.energy_hi = basis.eigenvalues(id.hi);
  l.lo_initial = std::norm(oi(id.lo));
  l.lo_target = std::norm(ot(id.lo));
  l.hi_initial = std::norm(oi(id.hi));
  l.hi_target = std::norm(ot(id.hi));
  l.ambiguous = w(k1) < 0.3 || w(k2) < 0.3;
  return id;
}

double transfer_at(const DressedBasis& basis, const Vector& init, const Vector& target, double t) {
  const Vector oi = basis.eigenvectors.adjoint() * init;
  const Vector ot = basis.eigenvectors.adjoint() * target;
  Complex amp = 0;
  for (Eigen::Index k = 0; k < oi.size(); ++k)
    amp += std::conj(ot(k)) * oi(k) * std::polar(1.0, -basis.eigenvalues(k) * t);
  return std::norm(amp);
}

// Closed-form estimate of the resonant coupling, used to size the time window
// of the amplitude objective.
double coupling_estimate(ScenarioKind kind, const SystemParams& p) {
  const double wb = p.omega_b, g = p.g;
  switch (kind) {
    case ScenarioKind::TwoPhoton: return 2 * std::sqrt(2.0) * g * g / wb;
    case ScenarioKind::FourPhoton: return 8 * g * g * g / (std::sqrt(3.0) * wb * wb);
    case ScenarioKind::Janus: return 2 * std::abs(janus_coefficients(p).g_eff);
  }
  return 0;
}

}  // namespace

ResonantLevels resonant_levels(ScenarioKind kind, const SystemParams& p, const ModeDims& dims) {
  const DressedBasis basis = diagonalize(build_full_hamiltonian(p, dims));
  return identify(kind, basis).levels;
}

double half_period_transfer(ScenarioKind kind, const SystemParams& p, const ModeDims& dims) {
  const DressedBasis basis = diagonalize(build_full_hamiltonian(p, dims));
  const Identified id = identify(kind, basis);
  const auto [init, target] = resonant_pair_kets(kind, dims);
  return transfer_at(basis, init, target, std::numbers::pi / id.levels.gap());
}

double default_search_width(const SystemParams& p) { return 40 * p.g * p.g * p.g / (p.omega_b * p.omega_b); }

ResonanceResult optimize_resonance(ScenarioKind kind, const SystemParams& p, const TunerOptions& opts) {
  p.validate();
  const ModeDims dims = opts.dims.value_or(default_dims(kind));
  const double width = opts.search_width.value_or(default_search_width(p));
  if (!(width > 0)) fail(ErrorCode::InvalidArgument, "search width must be positive");
  if (!(opts.tolerance > 0)) fail(ErrorCode::InvalidArgument, "optimizer tolerance must be positive");

  ResonanceResult res;
  res.scenario = kind;
  res.objective = opts.objective;
  res.search_width = width;
  res.tolerance = opts.tolerance;
  res.analytic_value = analytic_resonance(kind, p);

  const auto [init, target] = resonant_pair_kets(kind, dims);
  const double window = 1.5 * std::numbers::pi / (2 * coupling_estimate(kind, with_resonant_frequency(kind, p, res.analytic_value)));

  auto objective = [&](double x) {
    const SystemParams q = with_resonant_frequency(kind, p, x);
    double value = std::numeric_limits<double>::infinity();
    try {
      const DressedBasis basis = diagonalize(build_full_hamiltonian(q, dims));
      const Identified id = identify(kind, basis);
      if (!id.levels.ambiguous) {
        if (opts.objective == ResonanceObjective::Gap) {
          value = id.levels.gap();
        } else {
          constexpr int kSamples = 400;
          double best = 0;
          for (int s = 1; s <= kSamples; ++s)
            best = std::max(best, transfer_at(basis, init, target, window * s / kSamples));
          value = 1.0 - best;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
    }
    res.objective_trace.emplace_back(x, value);
    return value;
  };

  res.analytic_objective = objective(res.analytic_value);
  double a = res.analytic_value - width / 2, b = res.analytic_value + width / 2;

  // Coarse scan for unimodality before bracketing.
  constexpr int kCoarse = 12;
  std::vector<double> fs(kCoarse + 1);
  for (int k = 0; k <= kCoarse; ++k) fs[static_cast<std::size_t>(k)] = objective(a + (b - a) * k / kCoarse);
  int minima = 0, arg = 0;
  for (int k = 0; k <= kCoarse; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (fs[i] < fs[static_cast<std::size_t>(arg)]) arg = k;
    const bool left = k == 0 || fs[i] < fs[i - 1];
    const bool right = k == kCoarse || fs[i] < fs[i + 1];
    if (left && right && std::isfinite(fs[i])) ++minima;
  }
  if (minima > 1) {
    std::ostringstream msg;
    msg << "objective has " << minima << " local minima in a bracket of width " << width << "; use a narrower width";
    fail(ErrorCode::NonUnimodal, msg.str());
  }
  if (!std::isfinite(fs[static_cast<std::size_t>(arg)]))
    fail(ErrorCode::NoResonance, "no resonant level pair could be identified in the search bracket");
  if (arg == 0 || arg == kCoarse) {
    std::ostringstream msg;
    msg << "objective minimum lies on the edge of the bracket [" << a << ", " << b << "]; use a wider width";
    fail(ErrorCode::NonUnimodal, msg.str());
  }
  a = a + (b - a) * (arg - 1) / kCoarse;
  b = a + 2 * width / kCoarse;

  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > opts.tolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  res.optimized_value = f1 <= f2 ? x1 : x2;
  res.optimized_objective = std::min(f1, f2);
  if (res.analytic_objective < res.optimized_objective) {
    res.optimized_value = res.analytic_value;
    res.optimized_objective = res.analytic_objective;
  }
  return res;
}

}  // namespace cmc
