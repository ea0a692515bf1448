#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmc/model.hpp>

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace cmc;
using cmc::test::error_of;

namespace {

SystemParams two_photon_point() {
  SystemParams p;
  p.g = 0.05;
  p.omega_a = p.omega_c = 1.0 + p.g * p.g;
  return p;
}

SystemParams four_photon_point() {
  SystemParams p;
  p.g = 0.03;
  p.omega_a = p.omega_c = 0.25 + 7 * p.g * p.g;
  return p;
}

SystemParams janus_point() {
  SystemParams p;
  p.g = 0.05;
  p.omega_a = 0.25 + 1.0 / 15;
  p.omega_c = 0.6067 * p.omega_a;
  return p;
}

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

}  // namespace

TEST_CASE("parameter validation") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.omega_c = 0;
  CHECK(error_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = SystemParams{};
  p.g = -0.1;
  CHECK(error_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = SystemParams{};
  p.gamma_b = -1e-3;
  CHECK(error_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = SystemParams{};
  p.omega_a = 0.5;
  p.omega_c = 0.3;
  CHECK(p.ratio() == doctest::Approx(0.6));
}

TEST_CASE("full Hamiltonian") {
  const ModeDims d(4, 3, 4);
  SUBCASE("bare limit is diagonal") {
    SystemParams p;
    p.omega_a = 0.3;
    p.omega_c = 0.45;
    const Matrix h = build_full_hamiltonian(p, d).matrix();
    for (std::size_t i = 0; i < d.total(); ++i) {
      const auto n = d.unflatten(i);
      CHECK(h(i, i).real() == doctest::Approx(0.3 * n[0] + 1.0 * n[1] + 0.45 * n[2]).epsilon(1e-15));
    }
    CHECK((h - Matrix(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hermitian and sign structure") {
    SystemParams p = janus_point();
    const Operator h = build_full_hamiltonian(p, d);
    CHECK((h.matrix() - h.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const auto vac = d.flatten({0, 0, 0});
    const double omega2 = p.ratio() * p.ratio();
    CHECK(h.matrix()(d.flatten({2, 1, 0}), vac).real() == doctest::Approx(-p.g / 2 * kSqrt2).epsilon(1e-14));
    CHECK(h.matrix()(d.flatten({0, 1, 2}), vac).real() == doctest::Approx(p.g / 2 * omega2 * kSqrt2).epsilon(1e-14));
  }
  CHECK(error_of([] { build_full_hamiltonian(SystemParams{}, ModeDims({3, 3}, {Mode::A, Mode::B})); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("SW generator") {
  const ModeDims d(7, 4, 7);
  const SystemParams p = two_photon_point();
  const Operator s = build_sw_generator(p, d);
  CHECK((s.matrix() + s.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(sw_condition_residual(p, d) < 1e-9);
  CHECK(sw_condition_residual(janus_point(), ModeDims(7, 3, 7)) < 1e-9);

  SystemParams free = p;
  free.g = 0;
  CHECK(build_sw_generator(free, d).max_abs() == 0.0);

  SystemParams singular = p;
  singular.omega_a = 0.5;
  CHECK(error_of([&] { build_sw_generator(singular, d); }) == ErrorCode::SingularGenerator);
}

TEST_CASE("effective Hamiltonian") {
  const ModeDims d(7, 4, 7);
  const SystemParams p = two_photon_point();
  const Operator h2 = effective_hamiltonian_numeric(p, d, 2);
  CHECK(h2.is_hermitian(1e-10));
  CHECK(effective_hamiltonian_numeric(p, d, 3).is_hermitian(1e-10));
  CHECK(error_of([&] { effective_hamiltonian_numeric(p, d, 4); }) == ErrorCode::InvalidArgument);
  SystemParams other = p;
  other.g = 0.04;
  CHECK(error_of([&] { effective_hamiltonian_numeric(p, d, 2, other); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("two-photon block") {
  const SystemParams p = two_photon_point();
  const auto b = two_photon_block(p);
  CHECK(b(0, 0) == doctest::Approx(2 - 3 * p.g * p.g).epsilon(1e-15));
  CHECK(b(0, 1) == doctest::Approx(-2 * kSqrt2 * p.g * p.g).epsilon(1e-15));
  CHECK(std::abs(b(0, 0) - b(1, 1)) < 1e-15);
  CHECK(b(0, 2) == 0.0);
  CHECK(b(1, 2) == 0.0);

  SystemParams free;
  free.omega_a = free.omega_c = 1.1;
  const auto f = two_photon_block(free);
  CHECK(f(0, 0) == doctest::Approx(2.0));
  CHECK(f(1, 1) == doctest::Approx(2.2));
  CHECK(f(2, 2) == doctest::Approx(2.2));
  CHECK(f(0, 1) == 0.0);
}

TEST_CASE("two-photon block matches the numeric second-order reduction") {
  const ModeDims d(7, 4, 7);
  const SystemParams p = two_photon_point();
  const auto expansion = resonant_expansion_point(ScenarioKind::TwoPhoton, p);
  const Operator h2 = effective_hamiltonian_numeric(p, d, 2, expansion);
  const RealMatrix numeric = project(h2, scenario_basis(ScenarioKind::TwoPhoton, d));
  const Eigen::Matrix3d closed = two_photon_block(p);
  CHECK((numeric - closed).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-photon subspace is closed against degenerate outside states") {
  // Bare states at the block's unperturbed energy 2 omega_b must not couple
  // to it at second order.
  const ModeDims d(7, 4, 7);
  const SystemParams p = two_photon_point();
  const Operator h2 = effective_hamiltonian_numeric(p, d, 2, resonant_expansion_point(ScenarioKind::TwoPhoton, p));
  const Matrix basis = scenario_basis(ScenarioKind::TwoPhoton, d);
  const Matrix proj = basis * basis.adjoint();
  int checked = 0;
  for (std::size_t i = 0; i < d.total(); ++i) {
    const auto n = d.unflatten(i);
    const double e0 = n[0] + n[1] + n[2];
    if (std::abs(e0 - 2.0) > 1e-12 || proj(i, i).real() > 0.5) continue;
    Vector k = Vector::Zero(static_cast<Eigen::Index>(d.total()));
    k(static_cast<Eigen::Index>(i)) = 1;
    CHECK((basis.adjoint() * h2.matrix() * k).cwiseAbs().maxCoeff() < 1e-12);
    ++checked;
  }
  CHECK(checked == 3);  // |1,1,0>, |1,0,1>, |0,1,1>
}

TEST_CASE("four-photon block") {
  const SystemParams p = four_photon_point();
  const auto b = four_photon_block(p);
  const double g = p.g;
  CHECK(b(0, 1) == doctest::Approx(8 * g * g * g / kSqrt3).epsilon(1e-14));
  CHECK(b(2, 3) == doctest::Approx(8 * g * g / kSqrt3).epsilon(1e-14));
  CHECK(std::abs(b(0, 0) - b(1, 1)) < 1e-14);
  CHECK(b(0, 2) == 0.0);
  CHECK(b(0, 3) == 0.0);
  CHECK(b(1, 2) == 0.0);
  CHECK(b(1, 3) == 0.0);
  CHECK((b - b.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

// Every gated row agrees except the third-order coupling, which the numeric
// reduction gives at exactly twice the closed form.
void check_third_order_rows(ScenarioKind kind, const SystemParams& p, const std::vector<std::string>& doubled) {
  const auto rows = verify_sw(kind, p, default_dims(kind));
  std::size_t seen = 0;
  for (const auto& r : rows) {
    const bool twice = std::find(doubled.begin(), doubled.end(), r.quantity) != doubled.end();
    if (twice) {
      ++seen;
      CHECK_MESSAGE(r.numeric == doctest::Approx(2 * r.closed_form).epsilon(1e-6), r.quantity);
      CHECK(!r.passed());
    } else {
      CHECK_MESSAGE(r.passed(), r.quantity);
    }
  }
  CHECK(seen == doubled.size());
}

TEST_CASE("four-photon numeric reduction") {
  check_third_order_rows(ScenarioKind::FourPhoton, four_photon_point(), {"H[0,1]"});
}

TEST_CASE("Janus numeric reduction") {
  check_third_order_rows(ScenarioKind::Janus, janus_point(), {"H[0,1]", "g_eff"});
}

TEST_CASE("Janus coefficients") {
  SystemParams p = janus_point();
  SUBCASE("effective coupling vanishes for equal cavities") {
    p.omega_c = p.omega_a;
    CHECK(janus_coefficients(p).g_eff == 0.0);
    CHECK(janus_block(p)(0, 1) == 0.0);
  }
  SUBCASE("cross-Kerr between the cavities") {
    const auto c = janus_coefficients(p);
    const double om = p.ratio();
    CHECK(c.alpha_ac == doctest::Approx(2 * om * om * p.g * p.g).epsilon(1e-14));
    CHECK(c.alpha_ac > 0);
  }
  SUBCASE("block layout") {
    const auto c = janus_coefficients(p);
    const auto b = janus_block(p);
    CHECK(b(0, 1) == doctest::Approx(2 * c.g_eff).epsilon(1e-15));
    CHECK(b(0, 0) == doctest::Approx(p.omega_b + c.Omega_b).epsilon(1e-15));
    CHECK(b(1, 1) == doctest::Approx(2 * p.omega_a + 2 * p.omega_c +
                                     2 * (c.Omega_a + c.Omega_c + c.alpha_a + c.alpha_c + 2 * c.alpha_ac))
                         .epsilon(1e-15));
  }
  SUBCASE("singular ratio") {
    p.omega_c = 0;
    CHECK(error_of([&] { janus_coefficients(p); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("verify_sw rows") {
  const auto rows = verify_sw(ScenarioKind::TwoPhoton, two_photon_point(), ModeDims(7, 4, 7));
  REQUIRE(!rows.empty());
  for (const auto& r : rows) CHECK_MESSAGE(r.passed(), r.quantity);
}

TEST_CASE("interior mask") {
  const ModeDims d(5, 3, 5);
  const auto idx = interior_indices(d, {2, 1, 2});
  CHECK(idx.size() == 3u * 2u * 3u);
  for (auto i : idx) {
    const auto n = d.unflatten(i);
    CHECK(n[0] <= 2);
    CHECK(n[1] <= 1);
    CHECK(n[2] <= 2);
  }
}

TEST_CASE("scenario names") {
  for (auto k : {ScenarioKind::TwoPhoton, ScenarioKind::FourPhoton, ScenarioKind::Janus})
    CHECK(scenario_from_name(scenario_name(k)) == k);
  CHECK(error_of([] { scenario_from_name("five-photon"); }) == ErrorCode::InvalidArgument);
  CHECK(default_dims(ScenarioKind::TwoPhoton) == ModeDims(7, 4, 7));
  CHECK(default_dims(ScenarioKind::Janus) == ModeDims(7, 3, 7));
}
