#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmc/resonance.hpp>

#include "support.hpp"

#include <cmath>

using namespace cmc;
using cmc::test::error_of;

namespace {

SystemParams coupling(double g) {
  SystemParams p;
  p.g = g;
  return p;
}

SystemParams janus_params() {
  SystemParams p = coupling(0.05);
  p.omega_a = 0.25 + 1.0 / 15;
  return p;
}

}  // namespace

TEST_CASE("objective names") {
  CHECK(objective_from_name("gap") == ResonanceObjective::Gap);
  CHECK(objective_from_name(objective_name(ResonanceObjective::Amplitude)) == ResonanceObjective::Amplitude);
  CHECK(error_of([] { objective_from_name("fidelity"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tuned frequency per scenario") {
  const SystemParams p = janus_params();
  const SystemParams two = with_resonant_frequency(ScenarioKind::TwoPhoton, p, 1.1);
  CHECK(two.omega_a == 1.1);
  CHECK(two.omega_c == 1.1);
  const SystemParams jan = with_resonant_frequency(ScenarioKind::Janus, p, 0.2);
  CHECK(jan.omega_a == p.omega_a);
  CHECK(jan.omega_c == 0.2);
  CHECK(resonant_frequency(ScenarioKind::Janus, jan) == 0.2);
  CHECK(resonant_frequency(ScenarioKind::FourPhoton, two) == 1.1);
}

TEST_CASE("analytic resonance points") {
  CHECK(analytic_resonance(ScenarioKind::TwoPhoton, coupling(0.05)) == doctest::Approx(1.0025).epsilon(1e-15));
  CHECK(analytic_resonance(ScenarioKind::FourPhoton, coupling(0.03)) == doctest::Approx(0.2563).epsilon(1e-15));

  const SystemParams p = janus_params();
  const double wc = analytic_resonance(ScenarioKind::Janus, p);
  CHECK(wc / p.omega_a == doctest::Approx(0.6067).epsilon(0.005));
  const auto blk = janus_block(with_resonant_frequency(ScenarioKind::Janus, p, wc));
  CHECK(std::abs(blk(0, 0) - blk(1, 1)) < 1e-12);

  SystemParams bad = p;
  bad.omega_a = 0.6;
  CHECK(error_of([&] { analytic_resonance(ScenarioKind::Janus, bad); }) == ErrorCode::NoResonance);
}

TEST_CASE("two-photon refinement stays near the analytic point") {
  const SystemParams p = coupling(0.05);
  const ResonanceResult r = optimize_resonance(ScenarioKind::TwoPhoton, p);
  CHECK(std::abs(r.difference()) < 5e-4);
  CHECK(r.optimized_objective <= r.analytic_objective);
  CHECK(r.search_width == doctest::Approx(default_search_width(p)));
  CHECK(default_search_width(p) == doctest::Approx(40 * 0.05 * 0.05 * 0.05));
  CHECK(!r.objective_trace.empty());
  CHECK(half_period_transfer(ScenarioKind::TwoPhoton,
                             with_resonant_frequency(ScenarioKind::TwoPhoton, p, r.optimized_value),
                             default_dims(ScenarioKind::TwoPhoton)) > 0.95);
}

TEST_CASE("four-photon refinement") {
  const SystemParams p = coupling(0.03);
  const ResonanceResult r = optimize_resonance(ScenarioKind::FourPhoton, p);
  CHECK(r.optimized_value >= 0.2560);
  CHECK(r.optimized_value <= 0.2572);
  CHECK(r.difference() != 0.0);
  CHECK(r.optimized_objective <= r.analytic_objective);

  SUBCASE("converged") {
    TunerOptions half;
    half.tolerance = r.tolerance / 2;
    const ResonanceResult h = optimize_resonance(ScenarioKind::FourPhoton, p, half);
    CHECK(std::abs(h.optimized_value - r.optimized_value) < r.tolerance);
  }
  SUBCASE("third-order shift exceeds the second-order one") {
    const ResonanceResult two = optimize_resonance(ScenarioKind::TwoPhoton, p);
    CHECK(std::abs(two.difference()) < std::abs(r.difference()));
  }
  SUBCASE("transfer at half the Rabi period") {
    const SystemParams q = with_resonant_frequency(ScenarioKind::FourPhoton, p, r.optimized_value);
    CHECK(half_period_transfer(ScenarioKind::FourPhoton, q, default_dims(ScenarioKind::FourPhoton)) > 0.95);
  }
  SUBCASE("amplitude objective lands in the same window") {
    TunerOptions amp;
    amp.objective = ResonanceObjective::Amplitude;
    const ResonanceResult a = optimize_resonance(ScenarioKind::FourPhoton, p, amp);
    CHECK(a.optimized_value >= 0.2560);
    CHECK(a.optimized_value <= 0.2572);
    CHECK(a.optimized_objective <= a.analytic_objective);
  }
}

TEST_CASE("Janus refinement hybridises the pair") {
  const SystemParams p = janus_params();
  const ResonanceResult r = optimize_resonance(ScenarioKind::Janus, p);
  const SystemParams q = with_resonant_frequency(ScenarioKind::Janus, p, r.optimized_value);
  CHECK(q.ratio() == doctest::Approx(0.6067).epsilon(1e-3));
  const ResonantLevels lv = resonant_levels(ScenarioKind::Janus, q, default_dims(ScenarioKind::Janus));
  CHECK(!lv.ambiguous);
  for (double w : {lv.lo_initial, lv.lo_target, lv.hi_initial, lv.hi_target}) CHECK(w == doctest::Approx(0.5).epsilon(0.05));
  CHECK(half_period_transfer(ScenarioKind::Janus, q, default_dims(ScenarioKind::Janus)) > 0.95);
}

TEST_CASE("tuner failures") {
  const SystemParams p = coupling(0.03);
  TunerOptions narrow;
  narrow.search_width = 1e-6;  // excludes the four-photon optimum
  CHECK(error_of([&] { optimize_resonance(ScenarioKind::FourPhoton, p, narrow); }) == ErrorCode::NonUnimodal);
  TunerOptions zero;
  zero.search_width = 0.0;
  CHECK(error_of([&] { optimize_resonance(ScenarioKind::FourPhoton, p, zero); }) == ErrorCode::InvalidArgument);
  TunerOptions tol;
  tol.tolerance = -1;
  CHECK(error_of([&] { optimize_resonance(ScenarioKind::FourPhoton, p, tol); }) == ErrorCode::InvalidArgument);
}
