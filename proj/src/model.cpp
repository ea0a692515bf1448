#include <cmc/model.hpp>

#include <cmath>
#include <sstream>

namespace cmc {

double SystemParams::gamma(Mode m) const {
  switch (m) {
    case Mode::A: return gamma_a;
    case Mode::B: return gamma_b;
    case Mode::C: return gamma_c;
  }
  return 0.0;
}

void SystemParams::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(omega_a) || !finite(omega_b) || !finite(omega_c) || !finite(g) || !finite(gamma_a) ||
      !finite(gamma_b) || !finite(gamma_c))
    fail(ErrorCode::InvalidArgument, "system parameters must be finite");
  if (omega_a <= 0 || omega_b <= 0 || omega_c <= 0)
    fail(ErrorCode::InvalidArgument, "all mode frequencies must be positive");
  if (g < 0) fail(ErrorCode::InvalidArgument, "coupling g must be non-negative");
  if (gamma_a < 0 || gamma_b < 0 || gamma_c < 0)
    fail(ErrorCode::InvalidArgument, "dissipation rates must be non-negative");
}

std::string_view scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::TwoPhoton: return "two-photon";
    case ScenarioKind::FourPhoton: return "four-photon";
    case ScenarioKind::Janus: return "janus";
  }
  return "?";
}

ScenarioKind scenario_from_name(std::string_view name) {
  if (name == "two-photon") return ScenarioKind::TwoPhoton;
  if (name == "four-photon") return ScenarioKind::FourPhoton;
  if (name == "janus") return ScenarioKind::Janus;
  fail(ErrorCode::InvalidArgument,
       "unknown scenario '" + std::string(name) + "' (expected two-photon, four-photon or janus)");
}

std::string_view resonance_condition(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::TwoPhoton: return "omega_a ~ omega_b ~ omega_c";
    case ScenarioKind::FourPhoton: return "omega_b ~ 4 omega, omega = omega_a = omega_c";
    case ScenarioKind::Janus: return "omega_b ~ 2 (omega_a + omega_c)";
  }
  return "?";
}

namespace {

struct Ladders {
  Matrix a, b, c, ad, bd, cd;
};

Ladders ladders(const ModeDims& dims) {
  if (dims.mode_count() != 3 || dims.modes() != std::vector<Mode>{Mode::A, Mode::B, Mode::C})
    fail(ErrorCode::DimensionMismatch, "model operators need the three-mode [a, b, c] space");
  Ladders l;
  l.a = lowering(Mode::A, dims).matrix();
  l.b = lowering(Mode::B, dims).matrix();
  l.c = lowering(Mode::C, dims).matrix();
  l.ad = l.a.adjoint();
  l.bd = l.b.adjoint();
  l.cd = l.c.adjoint();
  return l;
}

double guarded(double denom, const char* label) {
  if (std::abs(denom) < kSingularGuard) {
    std::ostringstream msg;
    msg << "singular Schrieffer-Wolff generator: denominator " << label << " = " << denom;
    fail(ErrorCode::SingularGenerator, msg.str());
  }
  return denom;
}

}  // namespace

Operator bare_hamiltonian(const SystemParams& p, const ModeDims& dims) {
  p.validate();
  const Ladders l = ladders(dims);
  Matrix h = p.omega_a * l.ad * l.a + p.omega_b * l.bd * l.b + p.omega_c * l.cd * l.c;
  return Operator(std::move(h), dims);
}

Operator interaction_hamiltonian(const SystemParams& p, const ModeDims& dims) {
  p.validate();
  const Ladders l = ladders(dims);
  const double r2 = p.ratio() * p.ratio();
  const Matrix xa = l.a + l.ad;
  const Matrix xb = l.b + l.bd;
  const Matrix xc = l.c + l.cd;
  Matrix h = -(p.g / 2.0) * ((xa * xa - r2 * (xc * xc)) * xb);
  return Operator(std::move(h), dims);
}

Operator build_full_hamiltonian(const SystemParams& p, const ModeDims& dims) {
  return bare_hamiltonian(p, dims) + interaction_hamiltonian(p, dims);
}

Operator build_sw_generator(const SystemParams& p, const ModeDims& dims) {
  p.validate();
  const double wb = guarded(p.omega_b, "omega_b");
  const double da_minus = guarded(4 * p.omega_a - 2 * p.omega_b, "4 omega_a - 2 omega_b");
  const double da_plus = guarded(4 * p.omega_a + 2 * p.omega_b, "4 omega_a + 2 omega_b");
  const double dc_minus = guarded(4 * p.omega_c - 2 * p.omega_b, "4 omega_c - 2 omega_b");
  const double dc_plus = guarded(4 * p.omega_c + 2 * p.omega_b, "4 omega_c + 2 omega_b");

  const Ladders l = ladders(dims);
  const double g = p.g;
  const double r2 = p.ratio() * p.ratio();
  const Matrix bm = l.b - l.bd;
  const Matrix a2 = l.a * l.a, ad2 = l.ad * l.ad;
  const Matrix c2 = l.c * l.c, cd2 = l.cd * l.cd;

  Matrix s = (g * (1 - r2) / (2 * wb)) * bm;
  s += (g / wb) * (l.ad * l.a * bm);
  s -= (r2 * g / wb) * (l.cd * l.c * bm);
  s -= (g / da_minus) * (ad2 * l.b - a2 * l.bd);
  s += (g / da_plus) * (a2 * l.b - ad2 * l.bd);
  s += (r2 * g / dc_minus) * (cd2 * l.b - c2 * l.bd);
  s -= (r2 * g / dc_plus) * (c2 * l.b - cd2 * l.bd);
  return Operator(std::move(s), dims);
}

Operator effective_hamiltonian_numeric(const SystemParams& p, const ModeDims& dims, int order,
                                       const std::optional<SystemParams>& expansion) {
  if (order != 2 && order != 3) fail(ErrorCode::InvalidArgument, "effective Hamiltonian order must be 2 or 3");
  const SystemParams& at = expansion ? *expansion : p;
  if (expansion) {
    if (std::abs(at.g - p.g) > 1e-15 || std::abs(at.ratio() - p.ratio()) > 1e-12)
      fail(ErrorCode::InvalidArgument, "expansion point must share g and Omega with the system parameters");
  }
  const Operator s = build_sw_generator(at, dims);
  const Operator hi = interaction_hamiltonian(p, dims);
  const Operator first = commutator(s, hi);
  Operator h = bare_hamiltonian(p, dims) + 0.5 * first;
  if (order == 3) h += (1.0 / 3.0) * commutator(s, first);
  return h;
}

SystemParams resonant_expansion_point(ScenarioKind kind, const SystemParams& p) {
  SystemParams e = p;
  switch (kind) {
    case ScenarioKind::TwoPhoton:
      e.omega_a = e.omega_c = p.omega_b;
      break;
    case ScenarioKind::FourPhoton:
      e.omega_a = e.omega_c = p.omega_b / 4;
      break;
    case ScenarioKind::Janus: {
      const double r = p.ratio();
      e.omega_a = p.omega_b / (2 * (1 + r));
      e.omega_c = r * e.omega_a;
      break;
    }
  }
  return e;
}

Eigen::Matrix3d two_photon_block(const SystemParams& p) {
  const double wb = p.omega_b, g2 = p.g * p.g;
  const double w = 0.5 * (p.omega_a + p.omega_c);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = 2 * wb - 3 * g2 / wb;
  m(0, 1) = m(1, 0) = -2 * std::sqrt(2.0) * g2 / wb;
  m(1, 1) = 2 * w - 5 * g2 / wb;
  m(2, 2) = 2 * w - 13 * g2 / (3 * wb);
  return m;
}

Eigen::Matrix4d four_photon_block(const SystemParams& p) {
  const double wb = p.omega_b, g = p.g, g2 = g * g;
  const double w = 0.5 * (p.omega_a + p.omega_c);
  const double s3 = std::sqrt(3.0);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = wb + 4 * g2 / (3 * wb);
  m(0, 1) = m(1, 0) = 8 * g2 * g / (s3 * wb * wb);
  m(1, 1) = 4 * w - 80 * g2 / (3 * wb);
  m(2, 2) = 4 * w - 80 * g2 / (3 * wb);
  m(2, 3) = m(3, 2) = 8 * g2 / (s3 * wb);
  m(3, 3) = 4 * w - 16 * g2 / (3 * wb);
  return m;
}

JanusCoefficients janus_coefficients(const SystemParams& p) {
  const double r = p.ratio();
  if (std::abs(r + 2) < 1e-12 || std::abs(2 * r + 1) < 1e-12 || std::abs(r) < 1e-12)
    fail(ErrorCode::InvalidArgument, "Janus coefficients are singular at Omega in {0, -2, -1/2}");
  const double wb = p.omega_b;
  const double g2 = p.g * p.g, g3 = g2 * p.g;
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r, r6 = r5 * r, r7 = r6 * r, r8 = r7 * r;
  const double quad = 2 * r2 + 5 * r + 2;  // (2 Omega + 1)(Omega + 2)

  JanusCoefficients k;
  k.Omega_a = g2 * (r3 + 2 * r2 - 3 * r - 5) / (wb * (r + 2));
  k.Omega_b = g2 * (r8 + 3 * r7 + 2 * r6 + 2 * r2 + 3 * r + 1) / (r * wb * quad);
  k.Omega_c = r2 * g2 * (-5 * r3 - 3 * r2 + 2 * r + 1) / (wb * (2 * r + 1));
  k.alpha_a = g2 * (-3 * r2 - 6 * r - 1) / (2 * r * wb * (r + 2));
  k.alpha_c = r4 * g2 * (-r2 - 6 * r - 3) / (2 * wb * (2 * r + 1));
  k.alpha_ab = 2 * g2 * (r + 1) / (r * wb * (r + 2));
  k.alpha_ac = 2 * r2 * g2 / wb;
  k.alpha_bc = 2 * r5 * g2 * (r + 1) / (wb * (2 * r + 1));
  k.g_eff = r * g3 * (2 * r6 + 5 * r5 + 4 * r4 - 4 * r2 - 5 * r - 2) / (2 * wb * wb * quad);
  return k;
}

Eigen::Matrix2d janus_block(const SystemParams& p) {
  const JanusCoefficients k = janus_coefficients(p);
  Eigen::Matrix2d m;
  m(0, 0) = p.omega_b + k.Omega_b;
  m(0, 1) = m(1, 0) = 2 * k.g_eff;
  m(1, 1) = 2 * p.omega_a + 2 * p.omega_c + 2 * (k.Omega_a + k.Omega_c + k.alpha_a + k.alpha_c + 2 * k.alpha_ac);
  return m;
}

JanusCoefficients janus_coefficients_numeric(const SystemParams& p, const ModeDims& dims) {
  const SystemParams at = resonant_expansion_point(ScenarioKind::Janus, p);
  const Matrix h0 = bare_hamiltonian(at, dims).matrix();
  const Matrix second = effective_hamiltonian_numeric(at, dims, 2).matrix() - h0;
  const Matrix third = effective_hamiltonian_numeric(at, dims, 3).matrix() - h0 - second;

  auto shift = [&](int na, int nb, int nc) {
    const auto i = static_cast<Eigen::Index>(dims.flatten({na, nb, nc}));
    return second(i, i).real();
  };
  const double s0 = shift(0, 0, 0);
  JanusCoefficients k;
  k.Omega_a = shift(1, 0, 0) - s0;
  k.Omega_b = shift(0, 1, 0) - s0;
  k.Omega_c = shift(0, 0, 1) - s0;
  k.alpha_a = (shift(2, 0, 0) - s0 - 2 * k.Omega_a) / 2;
  k.alpha_c = (shift(0, 0, 2) - s0 - 2 * k.Omega_c) / 2;
  k.alpha_ab = shift(1, 1, 0) - s0 - k.Omega_a - k.Omega_b;
  k.alpha_ac = shift(1, 0, 1) - s0 - k.Omega_a - k.Omega_c;
  k.alpha_bc = shift(0, 1, 1) - s0 - k.Omega_b - k.Omega_c;
  // <2,0,2| a^+2 c^+2 b |0,1,0> = 2
  const auto hi = static_cast<Eigen::Index>(dims.flatten({2, 0, 2}));
  const auto lo = static_cast<Eigen::Index>(dims.flatten({0, 1, 0}));
  k.g_eff = third(hi, lo).real() / 2;
  return k;
}

Matrix scenario_basis(ScenarioKind kind, const ModeDims& dims) {
  auto ket = [&](int na, int nb, int nc) { return basis_state({na, nb, nc}, dims).amplitudes(); };
  const double h = 1.0 / std::sqrt(2.0);
  const auto n = static_cast<Eigen::Index>(dims.total());
  switch (kind) {
    case ScenarioKind::TwoPhoton: {
      Matrix b(n, 3);
      b.col(0) = ket(0, 2, 0);
      b.col(1) = h * (ket(2, 0, 0) + ket(0, 0, 2));
      b.col(2) = h * (ket(2, 0, 0) - ket(0, 0, 2));
      return b;
    }
    case ScenarioKind::FourPhoton: {
      Matrix b(n, 4);
      b.col(0) = ket(0, 1, 0);
      b.col(1) = h * (ket(4, 0, 0) - ket(0, 0, 4));
      b.col(2) = h * (ket(4, 0, 0) + ket(0, 0, 4));
      b.col(3) = ket(2, 0, 2);
      return b;
    }
    case ScenarioKind::Janus: {
      Matrix b(n, 2);
      b.col(0) = ket(0, 1, 0);
      b.col(1) = ket(2, 0, 2);
      return b;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown scenario");
}

Occupation scenario_initial_state(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::TwoPhoton: return {0, 2, 0};
    case ScenarioKind::FourPhoton: return {0, 1, 0};
    case ScenarioKind::Janus: return {2, 0, 2};
  }
  return {0, 0, 0};
}

ModeDims default_dims(ScenarioKind kind) {
  return kind == ScenarioKind::TwoPhoton ? ModeDims(7, 4, 7) : ModeDims(7, 3, 7);
}

RealMatrix project(const Operator& h, const Matrix& basis) {
  if (basis.rows() != static_cast<Eigen::Index>(h.dimension()))
    fail(ErrorCode::DimensionMismatch, "projection basis does not match operator dimension");
  const Matrix m = basis.adjoint() * h.matrix() * basis;
  if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorCode::NotHermitian, "projected block has a non-negligible imaginary part");
  return m.real();
}

std::vector<std::size_t> interior_indices(const ModeDims& dims, const std::array<int, 3>& margin) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dims.total(); ++i) {
    const Occupation occ = dims.unflatten(i);
    bool inside = true;
    for (std::size_t s = 0; s < occ.size(); ++s) {
      const int m = margin.at(static_cast<std::size_t>(dims.mode(s)));
      if (occ[s] > dims.size(s) - 1 - m) inside = false;
    }
    if (inside) out.push_back(i);
  }
  return out;
}

double max_abs_on(const Matrix& m, const std::vector<std::size_t>& indices) {
  double worst = 0;
  for (auto i : indices)
    for (auto j : indices)
      worst = std::max(worst, std::abs(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  return worst;
}

double sw_condition_residual(const SystemParams& p, const ModeDims& dims) {
  const Operator s = build_sw_generator(p, dims);
  const Operator residual = commutator(s, bare_hamiltonian(p, dims)) + interaction_hamiltonian(p, dims);
  return max_abs_on(residual.matrix(), interior_indices(dims, {2, 1, 2}));
}

namespace {

std::string entry_label(Eigen::Index i, Eigen::Index j) {
  std::ostringstream s;
  s << "H[" << i << "," << j << "]";
  return s.str();
}

}  // namespace

std::vector<SwVerificationRow> verify_sw(ScenarioKind kind, const SystemParams& p, const ModeDims& dims) {
  const std::string name(scenario_name(kind));
  const int order = kind == ScenarioKind::TwoPhoton ? 2 : 3;
  const SystemParams at = resonant_expansion_point(kind, p);

  RealMatrix closed;
  switch (kind) {
    case ScenarioKind::TwoPhoton: closed = two_photon_block(p); break;
    case ScenarioKind::FourPhoton: closed = four_photon_block(p); break;
    case ScenarioKind::Janus: closed = janus_block(p); break;
  }

  const Matrix basis = scenario_basis(kind, dims);
  auto numeric_block = [&](const std::optional<SystemParams>& expansion) {
    const Operator heff = effective_hamiltonian_numeric(p, dims, order, expansion);
    RealMatrix blk = project(heff, basis);
    if (kind != ScenarioKind::TwoPhoton) {
      // Energies measured from the second-order vacuum shift.
      const auto v = static_cast<Eigen::Index>(dims.flatten({0, 0, 0}));
      const SystemParams& gen = expansion ? *expansion : p;
      const double s0 =
          (effective_hamiltonian_numeric(gen, dims, 2).matrix() - bare_hamiltonian(gen, dims).matrix())(v, v).real();
      blk -= s0 * RealMatrix::Identity(blk.rows(), blk.cols());
    }
    return blk;
  };

  std::vector<SwVerificationRow> rows;
  const RealMatrix numeric = numeric_block(at);
  for (Eigen::Index i = 0; i < closed.rows(); ++i)
    for (Eigen::Index j = i; j < closed.cols(); ++j) {
      SwVerificationRow row;
      row.scenario = name;
      row.quantity = entry_label(i, j);
      row.closed_form = closed(i, j);
      row.numeric = numeric(i, j);
      row.deviation = std::abs(closed(i, j) - numeric(i, j));
      rows.push_back(row);
    }

  {
    const RealMatrix literal = numeric_block(std::nullopt);
    SwVerificationRow row;
    row.scenario = name;
    row.quantity = "block max deviation without expansion point";
    row.closed_form = 0;
    row.numeric = (literal - closed).cwiseAbs().maxCoeff();
    row.deviation = row.numeric;
    row.gated = false;
    rows.push_back(row);
  }

  {
    SwVerificationRow row;
    row.scenario = name;
    row.quantity = "|[S,H0] + H_I| on truncation interior";
    row.closed_form = 0;
    row.numeric = sw_condition_residual(p, dims);
    row.deviation = row.numeric;
    rows.push_back(row);
  }

  if (kind == ScenarioKind::Janus) {
    const JanusCoefficients c = janus_coefficients(p);
    const JanusCoefficients n = janus_coefficients_numeric(p, dims);
    const std::pair<const char*, std::pair<double, double>> table[] = {
        {"Omega_a", {c.Omega_a, n.Omega_a}},    {"Omega_b", {c.Omega_b, n.Omega_b}},
        {"Omega_c", {c.Omega_c, n.Omega_c}},    {"alpha_a", {c.alpha_a, n.alpha_a}},
        {"alpha_c", {c.alpha_c, n.alpha_c}},    {"alpha_ab", {c.alpha_ab, n.alpha_ab}},
        {"alpha_ac", {c.alpha_ac, n.alpha_ac}}, {"alpha_bc", {c.alpha_bc, n.alpha_bc}},
        {"g_eff", {c.g_eff, n.g_eff}},
    };
    for (const auto& [label, values] : table) {
      SwVerificationRow row;
      row.scenario = name;
      row.quantity = label;
      row.closed_form = values.first;
      row.numeric = values.second;
      row.deviation = std::abs(values.first - values.second);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace cmc
