#ifndef CMC_RUNNER_HPP
#define CMC_RUNNER_HPP

// Scenario configuration, presets and batch execution.
//
// Configs are JSON documents. A document names a scenario and overrides any
// subset of that scenario's preset; see README for the full key list. The
// tuned frequencies may be given as numbers or as "analytic" / "optimized".

#include <cmc/entanglement.hpp>
#include <cmc/resonance.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cmc {

inline constexpr const char* kVersion = "0.3.0";

struct FrequencySpec {
  enum class Kind { Value, Analytic, Optimized };
  Kind kind = Kind::Value;
  double value = 0;
};

struct ChevronSettings {
  double span = 6.0;  // in units of the two-photon coupling 2 sqrt2 g^2 / omega_b
  std::size_t n_delta = 13;
  double t_end = 0;  // 0: use the main grid
  std::size_t n_points = 0;
};

struct OutputSettings {
  bool master = true;
  bool ensemble = true;
  bool chevron = false;
  bool sw_verification = true;
  bool convergence_probe = true;
  std::vector<std::size_t> dump_trajectories;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::TwoPhoton;
  SystemParams params;           // numeric fields; tuned ones are filled on resolve
  FrequencySpec omega_a, omega_c;
  std::array<int, 3> truncation{7, 4, 7};
  std::array<int, 3> initial_state{0, 2, 0};
  TimeGrid grid{0.0, 1.0, 2};
  std::size_t n_traj = 1;
  std::uint64_t base_seed = 0;
  unsigned workers = 0;
  ResonanceObjective objective = ResonanceObjective::Gap;
  std::optional<double> search_width;
  double tuner_tolerance = 1e-8;
  OutputSettings outputs;
  ChevronSettings chevron;
};

std::vector<std::string> preset_names();
// JSON text of a preset; parse_config(preset_json(name)) == preset(name).
std::string preset_json(ScenarioKind kind);

// Builds a config from preset + document + dotted overrides ("params.g=0.04").
// The document may also be a run manifest, whose stored config is used.
// Unknown keys raise a Config error listing all of them.
ScenarioConfig load_config(const std::string& document, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
ScenarioConfig preset_config(ScenarioKind kind, const std::vector<std::string>& overrides = {});

// Canonical JSON for a config (round-trips through load_config).
std::string config_json(const ScenarioConfig& cfg);

struct ResolvedConfig {
  ScenarioConfig config;
  SystemParams params;  // every frequency numeric
  std::optional<ResonanceResult> resonance;
};

// Fills in tuned frequencies and validates the physics.
ResolvedConfig resolve(const ScenarioConfig& cfg);

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::map<std::string, double> timings;
  std::vector<std::string> warnings;
  bool sw_passed = true;
};

using LogSink = std::function<void(const std::string&)>;

// Executes every requested output into out_dir and writes manifest.json.
RunReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir, const LogSink& log = {});

// sw_verification.csv rows for one parameter set.
std::string sw_verification_csv(const std::vector<SwVerificationRow>& rows);

// Output directory: the flag when given, else CMC_OUT_DIR, else `fallback`.
std::filesystem::path output_directory(const std::optional<std::string>& flag, const std::filesystem::path& fallback);

}  // namespace cmc

#endif
