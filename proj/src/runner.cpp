#include <cmc/runner.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace cmc {

using json = nlohmann::ordered_json;

namespace {

const std::array<ScenarioKind, 3> kScenarios{ScenarioKind::TwoPhoton, ScenarioKind::FourPhoton, ScenarioKind::Janus};

json frequency_json(const FrequencySpec& f) {
  switch (f.kind) {
    case FrequencySpec::Kind::Analytic: return "analytic";
    case FrequencySpec::Kind::Optimized: return "optimized";
    case FrequencySpec::Kind::Value: break;
  }
  return f.value;
}

json preset_document(ScenarioKind kind) {
  json params;
  json grid;
  json traj;
  std::array<int, 3> trunc{7, 3, 7};
  std::array<int, 3> init{};
  switch (kind) {
    case ScenarioKind::TwoPhoton:
      params = {{"omega_a", "analytic"}, {"omega_b", 1.0}, {"omega_c", "analytic"}, {"g", 0.05},
                {"gamma_a", 5e-4},       {"gamma_b", 5e-4}, {"gamma_c", 5e-4}};
      trunc = {7, 4, 7};
      init = {0, 2, 0};
      grid = {{"t_start", 0.0}, {"t_end", 1400.0}, {"n_points", 701}};
      break;
    case ScenarioKind::FourPhoton:
      params = {{"omega_a", "optimized"}, {"omega_b", 1.0}, {"omega_c", "optimized"}, {"g", 0.03},
                {"gamma_a", 2e-5},        {"gamma_b", 2e-5}, {"gamma_c", 2e-5}};
      init = {0, 1, 0};
      grid = {{"t_start", 0.0}, {"t_end", 25000.0}, {"n_points", 1001}};
      break;
    case ScenarioKind::Janus:
      params = {{"omega_a", 0.25 + 1.0 / 15.0}, {"omega_b", 1.0}, {"omega_c", "optimized"}, {"g", 0.05},
                {"gamma_a", 2e-5},              {"gamma_b", 2e-5}, {"gamma_c", 2e-5}};
      init = {2, 0, 2};
      grid = {{"t_start", 0.0}, {"t_end", 40000.0}, {"n_points", 1001}};
      break;
  }
  json doc;
  doc["scenario"] = std::string(scenario_name(kind));
  doc["params"] = params;
  doc["truncation"] = trunc;
  doc["initial_state"] = init;
  doc["grid"] = grid;
  doc["trajectories"] = {{"count", 1000}, {"seed", 20240611}, {"dump", {0, 1, 2, 3, 4}}, {"workers", 0}};
  doc["tuning"] = {{"objective", "gap"}, {"width", nullptr}, {"tolerance", 1e-8}};
  doc["outputs"] = {{"master", true},
                    {"ensemble", true},
                    {"chevron", false},
                    {"sw_verification", true},
                    {"convergence_probe", true}};
  doc["chevron"] = {{"span", 6.0}, {"n_delta", 13}, {"t_end", 0.0}, {"n_points", 0}};
  return doc;
}

// Deep-merge `src` into `dst`; keys absent from `dst` are reported, not added.
void merge(json& dst, const json& src, const std::string& prefix, std::vector<std::string>& unknown) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) {
      unknown.push_back(path);
      continue;
    }
    json& d = dst[it.key()];
    if (d.is_object() && it.value().is_object())
      merge(d, it.value(), path, unknown);
    else
      d = it.value();
  }
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
}

json override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::pair<std::string, std::string> split_override(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::Config, "override '" + item + "' is not key=value");
  return {item.substr(0, eq), item.substr(eq + 1)};
}

FrequencySpec frequency_from(const json& v, const char* key) {
  FrequencySpec f;
  if (v.is_number()) {
    f.value = v.get<double>();
    return f;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "analytic") {
      f.kind = FrequencySpec::Kind::Analytic;
      return f;
    }
    if (s == "optimized") {
      f.kind = FrequencySpec::Kind::Optimized;
      return f;
    }
  }
  fail(ErrorCode::Config, std::string("params.") + key + " must be a number, \"analytic\" or \"optimized\"");
}

template <typename T>
T get_as(const json& doc, const char* section, const char* key) {
  const json& v = section ? doc.at(section).at(key) : doc.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    std::string path = section ? std::string(section) + "." + key : std::string(key);
    fail(ErrorCode::Config, "config key '" + path + "' has the wrong type");
  }
}

ScenarioConfig from_document(const json& doc) {
  ScenarioConfig cfg;
  cfg.scenario = scenario_from_name(get_as<std::string>(doc, nullptr, "scenario"));
  const json& p = doc.at("params");
  cfg.omega_a = frequency_from(p.at("omega_a"), "omega_a");
  cfg.omega_c = frequency_from(p.at("omega_c"), "omega_c");
  cfg.params.omega_a = cfg.omega_a.value;
  cfg.params.omega_c = cfg.omega_c.value;
  cfg.params.omega_b = get_as<double>(doc, "params", "omega_b");
  cfg.params.g = get_as<double>(doc, "params", "g");
  cfg.params.gamma_a = get_as<double>(doc, "params", "gamma_a");
  cfg.params.gamma_b = get_as<double>(doc, "params", "gamma_b");
  cfg.params.gamma_c = get_as<double>(doc, "params", "gamma_c");

  const auto trunc = get_as<std::vector<int>>(doc, nullptr, "truncation");
  const auto init = get_as<std::vector<int>>(doc, nullptr, "initial_state");
  if (trunc.size() != 3) fail(ErrorCode::Config, "truncation must list three sizes [a, b, c]");
  if (init.size() != 3) fail(ErrorCode::Config, "initial_state must list three occupations [a, b, c]");
  for (std::size_t i = 0; i < 3; ++i) {
    cfg.truncation[i] = trunc[i];
    cfg.initial_state[i] = init[i];
    if (trunc[i] < 2) fail(ErrorCode::Config, "every truncation must be >= 2");
    if (init[i] < 0 || init[i] >= trunc[i]) fail(ErrorCode::Config, "initial_state lies outside the truncation");
  }

  const auto t0 = get_as<double>(doc, "grid", "t_start");
  const auto t1 = get_as<double>(doc, "grid", "t_end");
  const auto np = get_as<long long>(doc, "grid", "n_points");
  if (np < 2 || !(t1 > t0)) fail(ErrorCode::Config, "grid needs t_end > t_start and n_points >= 2");
  cfg.grid = TimeGrid(t0, t1, static_cast<std::size_t>(np));

  const auto count = get_as<long long>(doc, "trajectories", "count");
  if (count < 1) fail(ErrorCode::Config, "trajectories.count must be >= 1");
  cfg.n_traj = static_cast<std::size_t>(count);
  cfg.base_seed = get_as<std::uint64_t>(doc, "trajectories", "seed");
  const auto workers = get_as<long long>(doc, "trajectories", "workers");
  if (workers < 0) fail(ErrorCode::Config, "trajectories.workers must be >= 0");
  cfg.workers = static_cast<unsigned>(workers);
  for (const auto& k : get_as<std::vector<long long>>(doc, "trajectories", "dump")) {
    if (k < 0) fail(ErrorCode::Config, "trajectories.dump indices must be >= 0");
    cfg.outputs.dump_trajectories.push_back(static_cast<std::size_t>(k));
  }

  cfg.objective = objective_from_name(get_as<std::string>(doc, "tuning", "objective"));
  const json& width = doc.at("tuning").at("width");
  if (!width.is_null()) {
    if (!width.is_number() || !(width.get<double>() > 0)) fail(ErrorCode::Config, "tuning.width must be positive or null");
    cfg.search_width = width.get<double>();
  }
  cfg.tuner_tolerance = get_as<double>(doc, "tuning", "tolerance");
  if (!(cfg.tuner_tolerance > 0)) fail(ErrorCode::Config, "tuning.tolerance must be positive");

  cfg.outputs.master = get_as<bool>(doc, "outputs", "master");
  cfg.outputs.ensemble = get_as<bool>(doc, "outputs", "ensemble");
  cfg.outputs.chevron = get_as<bool>(doc, "outputs", "chevron");
  cfg.outputs.sw_verification = get_as<bool>(doc, "outputs", "sw_verification");
  cfg.outputs.convergence_probe = get_as<bool>(doc, "outputs", "convergence_probe");

  cfg.chevron.span = get_as<double>(doc, "chevron", "span");
  const auto nd = get_as<long long>(doc, "chevron", "n_delta");
  cfg.chevron.t_end = get_as<double>(doc, "chevron", "t_end");
  const auto cnp = get_as<long long>(doc, "chevron", "n_points");
  if (!(cfg.chevron.span > 0) || nd < 2) fail(ErrorCode::Config, "chevron needs span > 0 and n_delta >= 2");
  if (cnp < 0 || cnp == 1) fail(ErrorCode::Config, "chevron.n_points must be 0 (main grid) or >= 2");
  cfg.chevron.n_delta = static_cast<std::size_t>(nd);
  cfg.chevron.n_points = static_cast<std::size_t>(cnp);

  // Only the tuned frequencies may be symbolic.
  const bool janus = cfg.scenario == ScenarioKind::Janus;
  if (janus && cfg.omega_a.kind != FrequencySpec::Kind::Value)
    fail(ErrorCode::Config, "janus: params.omega_a must be a number (omega_c is the tuned frequency)");
  if (!janus && cfg.omega_a.kind != cfg.omega_c.kind)
    fail(ErrorCode::Config, "params.omega_a and params.omega_c must both be numbers or share the same keyword");
  return cfg;
}

json to_document(const ScenarioConfig& cfg) {
  json doc = preset_document(cfg.scenario);
  doc["params"] = {{"omega_a", frequency_json(cfg.omega_a)},
                   {"omega_b", cfg.params.omega_b},
                   {"omega_c", frequency_json(cfg.omega_c)},
                   {"g", cfg.params.g},
                   {"gamma_a", cfg.params.gamma_a},
                   {"gamma_b", cfg.params.gamma_b},
                   {"gamma_c", cfg.params.gamma_c}};
  doc["truncation"] = cfg.truncation;
  doc["initial_state"] = cfg.initial_state;
  doc["grid"] = {{"t_start", cfg.grid.t_start}, {"t_end", cfg.grid.t_end}, {"n_points", cfg.grid.n_points}};
  doc["trajectories"] = {{"count", cfg.n_traj},
                         {"seed", cfg.base_seed},
                         {"dump", cfg.outputs.dump_trajectories},
                         {"workers", cfg.workers}};
  doc["tuning"] = {{"objective", std::string(objective_name(cfg.objective))},
                   {"width", cfg.search_width ? json(*cfg.search_width) : json(nullptr)},
                   {"tolerance", cfg.tuner_tolerance}};
  doc["outputs"] = {{"master", cfg.outputs.master},
                    {"ensemble", cfg.outputs.ensemble},
                    {"chevron", cfg.outputs.chevron},
                    {"sw_verification", cfg.outputs.sw_verification},
                    {"convergence_probe", cfg.outputs.convergence_probe}};
  doc["chevron"] = {{"span", cfg.chevron.span},
                    {"n_delta", cfg.chevron.n_delta},
                    {"t_end", cfg.chevron.t_end},
                    {"n_points", cfg.chevron.n_points}};
  return doc;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

std::string series_csv(const std::string& title, const std::vector<std::string>& comments, const TimeGrid& grid,
                       const ModeSeries& occ, const std::vector<std::pair<std::string, const std::vector<double>*>>& extra = {}) {
  std::ostringstream out;
  out << "# " << title << "\n";
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "# units: t in 1/omega_b; n_a, n_b, n_c are dressed occupations <X^- X^+> (dimensionless)\n";
  out << "t,n_a,n_b,n_c";
  for (const auto& [name, _] : extra) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    out << num(grid.at(i)) << "," << num(occ[0][i]) << "," << num(occ[1][i]) << "," << num(occ[2][i]);
    for (const auto& [_, col] : extra) out << "," << num((*col)[i]);
    out << "\n";
  }
  return out.str();
}

std::string params_comment(const SystemParams& p) {
  std::ostringstream out;
  out << "params: omega_a=" << num(p.omega_a) << " omega_b=" << num(p.omega_b) << " omega_c=" << num(p.omega_c)
      << " g=" << num(p.g) << " gamma_a=" << num(p.gamma_a) << " gamma_b=" << num(p.gamma_b)
      << " gamma_c=" << num(p.gamma_c);
  return out.str();
}

json params_json(const SystemParams& p) {
  return {{"omega_a", p.omega_a}, {"omega_b", p.omega_b}, {"omega_c", p.omega_c}, {"g", p.g},
          {"gamma_a", p.gamma_a}, {"gamma_b", p.gamma_b}, {"gamma_c", p.gamma_c}};
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (auto k : kScenarios) out.emplace_back(scenario_name(k));
  return out;
}

std::string preset_json(ScenarioKind kind) { return preset_document(kind).dump(2); }

ScenarioConfig load_config(const std::string& document, const std::vector<std::string>& overrides) {
  json doc = parse_document(document);
  if (!doc.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
  if (doc.contains("manifest_version")) {
    if (!doc.contains("config")) fail(ErrorCode::Config, "manifest has no stored config");
    doc = json(doc.at("config"));
  }

  std::string scenario = doc.contains("scenario") && doc["scenario"].is_string() ? doc["scenario"].get<std::string>()
                                                                               : std::string();
  for (const auto& item : overrides) {
    const auto [key, value] = split_override(item);
    if (key == "scenario") {
      const json v = override_value(value);
      scenario = v.is_string() ? v.get<std::string>() : value;
    }
  }
  if (scenario.empty()) fail(ErrorCode::Config, "config does not name a scenario");
  const ScenarioKind kind = scenario_from_name(scenario);

  json merged = preset_document(kind);
  std::vector<std::string> unknown;
  merge(merged, doc, "", unknown);
  for (const auto& item : overrides) {
    const auto [key, value] = split_override(item);
    json* node = &merged;
    std::string part;
    std::istringstream path(key);
    bool ok = true;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size() && ok; ++i) {
      if (!node->is_object() || !node->contains(parts[i])) {
        ok = false;
        break;
      }
      node = &(*node)[parts[i]];
    }
    if (!ok || node->is_object()) {
      unknown.push_back(key);
      continue;
    }
    *node = override_value(value);
  }
  merged["scenario"] = std::string(scenario_name(kind));
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    fail(ErrorCode::Config, "unknown config keys: " + list);
  }
  try {
    return from_document(merged);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed config: ") + e.what());
  }
}

ScenarioConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str(), overrides);
}

ScenarioConfig preset_config(ScenarioKind kind, const std::vector<std::string>& overrides) {
  return load_config(json{{"scenario", std::string(scenario_name(kind))}}.dump(), overrides);
}

std::string config_json(const ScenarioConfig& cfg) { return to_document(cfg).dump(2); }

ResolvedConfig resolve(const ScenarioConfig& cfg) {
  ResolvedConfig out{cfg, cfg.params, std::nullopt};
  const FrequencySpec& tuned = cfg.scenario == ScenarioKind::Janus ? cfg.omega_c : cfg.omega_a;
  SystemParams p = cfg.params;
  if (tuned.kind != FrequencySpec::Kind::Value) {
    // Placeholder for the tuned value so validation of the rest can run.
    const double guess = cfg.scenario == ScenarioKind::Janus ? p.omega_b / 2 - p.omega_a
                                                             : (cfg.scenario == ScenarioKind::TwoPhoton ? p.omega_b : p.omega_b / 4);
    p = with_resonant_frequency(cfg.scenario, p, guess > 0 ? guess : 1.0);
  }
  p.validate();
  if (tuned.kind == FrequencySpec::Kind::Analytic) {
    p = with_resonant_frequency(cfg.scenario, p, analytic_resonance(cfg.scenario, p));
  } else if (tuned.kind == FrequencySpec::Kind::Optimized) {
    TunerOptions opts;
    opts.objective = cfg.objective;
    opts.search_width = cfg.search_width;
    opts.tolerance = cfg.tuner_tolerance;
    opts.dims = ModeDims::three(cfg.truncation);
    out.resonance = optimize_resonance(cfg.scenario, p, opts);
    p = with_resonant_frequency(cfg.scenario, p, out.resonance->optimized_value);
  }
  p.validate();
  out.params = p;
  return out;
}

std::string sw_verification_csv(const std::vector<SwVerificationRow>& rows) {
  std::ostringstream out;
  out << "# closed-form vs numeric Schrieffer-Wolff reduction\n";
  out << "# units: energies in omega_b; gated rows must satisfy deviation < tolerance\n";
  out << "scenario,quantity,closed_form,numeric,deviation,tolerance,gated,passed\n";
  for (const auto& r : rows)
    out << r.scenario << "," << r.quantity << "," << num(r.closed_form) << "," << num(r.numeric) << ","
        << num(r.deviation) << "," << num(r.tolerance) << "," << (r.gated ? "yes" : "no") << ","
        << (r.passed() ? "yes" : "no") << "\n";
  return out.str();
}

std::filesystem::path output_directory(const std::optional<std::string>& flag, const std::filesystem::path& fallback) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("CMC_OUT_DIR"); env && *env) return env;
  return fallback;
}

RunReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir, const LogSink& log) {
  using clock = std::chrono::steady_clock;
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  RunReport report;
  auto timed = [&](const std::string& stage, auto&& body) {
    const auto start = clock::now();
    body();
    report.timings[stage] = std::chrono::duration<double>(clock::now() - start).count();
  };

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  const std::string name(scenario_name(cfg.scenario));
  const unsigned workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
  json manifest;
  manifest["manifest_version"] = 1;
  manifest["tool"] = "cmc";
  manifest["version"] = kVersion;
  manifest["created_utc"] = utc_now();
  manifest["config"] = to_document(cfg);

  ResolvedConfig resolved{cfg, cfg.params, std::nullopt};
  timed("resolve", [&] { resolved = resolve(cfg); });
  const SystemParams& p = resolved.params;
  say("resolved " + params_comment(p));
  manifest["resolved_params"] = params_json(p);
  if (resolved.resonance) {
    const auto& r = *resolved.resonance;
    json trace = json::array();
    for (const auto& [x, f] : r.objective_trace) trace.push_back({x, std::isfinite(f) ? json(f) : json(nullptr)});
    manifest["resonance"] = {{"objective", std::string(objective_name(r.objective))},
                             {"analytic_value", r.analytic_value},
                             {"optimized_value", r.optimized_value},
                             {"difference", r.difference()},
                             {"analytic_objective", r.analytic_objective},
                             {"optimized_objective", r.optimized_objective},
                             {"search_width", r.search_width},
                             {"tolerance", r.tolerance},
                             {"objective_trace", trace}};
  }

  const ModeDims dims = ModeDims::three(cfg.truncation);
  manifest["truncation"] = cfg.truncation;
  manifest["hilbert_dimension"] = dims.total();
  const Occupation init(cfg.initial_state.begin(), cfg.initial_state.end());
  const StateVector psi0 = basis_state(init, dims);

  std::unique_ptr<OpenSystem> sys;
  timed("dressed_basis", [&] { sys = std::make_unique<OpenSystem>(p, dims); });

  const std::vector<std::string> head{"scenario: " + name, params_comment(p),
                                      "truncation: " + std::to_string(cfg.truncation[0]) + "," +
                                          std::to_string(cfg.truncation[1]) + "," + std::to_string(cfg.truncation[2]),
                                      "initial_state: " + std::to_string(init[0]) + "," + std::to_string(init[1]) + "," +
                                          std::to_string(init[2])};
  json files = json::array();
  auto emit = [&](const std::string& file, const std::string& text) {
    const auto path = out_dir / file;
    write_file(path, text);
    report.files.push_back(path);
    files.push_back(file);
  };

  if (cfg.outputs.master) {
    say("master equation");
    timed("master", [&] {
      const MasterResult me = evolve_master(DensityMatrix::pure(psi0), *sys, cfg.grid);
      emit("occupations_me.csv", series_csv("cmc master-equation occupations", head, cfg.grid, me.occupations,
                                            {{"trace", &me.trace}, {"min_eigenvalue", &me.min_eigenvalue}}));
      manifest["master"] = {{"integrator_steps", me.steps}};
    });
  }

  std::size_t needed = cfg.outputs.ensemble ? cfg.n_traj : 0;
  for (auto k : cfg.outputs.dump_trajectories) needed = std::max(needed, k + 1);
  json seeds = json::object();
  if (needed > 0) {
    say("trajectories: " + std::to_string(needed) + " on " + std::to_string(workers) + " workers");
    timed("trajectories", [&] {
      const auto runs = run_trajectories(psi0, *sys, cfg.grid, needed, cfg.base_seed, workers);
      for (auto k : cfg.outputs.dump_trajectories) {
        const auto& r = runs[k];
        std::vector<std::string> comments = head;
        comments.push_back("trajectory: " + std::to_string(k) + " seed: " + std::to_string(r.seed));
        for (const auto& j : r.jumps)
          comments.push_back(std::string("jump t=") + num(j.time) + " channel=" + mode_name(j.channel));
        emit("occupations_traj_" + std::to_string(k) + ".csv",
             series_csv("cmc single quantum trajectory", comments, cfg.grid, r.occupations));
        seeds[std::to_string(k)] = r.seed;
      }
      if (cfg.outputs.ensemble) {
        const EnsembleResult ens = ensemble_mean(runs, cfg.n_traj, cfg.base_seed);
        std::vector<std::string> comments = head;
        comments.push_back("n_traj: " + std::to_string(ens.n_traj) + " base_seed: " + std::to_string(ens.base_seed));
        emit("occupations_ensemble.csv", series_csv("cmc trajectory-ensemble mean occupations", comments, cfg.grid,
                                                    ens.occupations));
      }
    });
  }
  manifest["seeds"] = {{"base_seed", cfg.base_seed},
                       {"rule", "splitmix64(base_seed + (index + 1) * 0x9E3779B97F4A7C15)"},
                       {"dumped", seeds}};

  if (cfg.outputs.sw_verification) {
    say("sw verification");
    timed("sw_verification", [&] {
      const auto rows = verify_sw(cfg.scenario, p, dims);
      emit("sw_verification.csv", sw_verification_csv(rows));
      for (const auto& r : rows)
        if (!r.passed()) {
          report.sw_passed = false;
          report.warnings.push_back("sw verification: " + r.scenario + " " + r.quantity + " deviates by " +
                                    num(r.deviation));
        }
      manifest["sw_verification_passed"] = report.sw_passed;
    });
  }

  if (cfg.outputs.chevron) {
    if (cfg.scenario != ScenarioKind::TwoPhoton)
      fail(ErrorCode::Config, "chevron output needs the two-photon scenario");
    say("chevron scan");
    timed("chevron", [&] {
      const double coupling = two_photon_coupling(p);
      const auto deltas = symmetric_deltas(cfg.chevron.span * coupling, cfg.chevron.n_delta);
      const TimeGrid grid = cfg.chevron.n_points == 0
                                ? cfg.grid
                                : TimeGrid(cfg.grid.t_start, cfg.chevron.t_end > 0 ? cfg.chevron.t_end : cfg.grid.t_end,
                                           cfg.chevron.n_points);
      ChevronOptions opts;
      opts.dims = dims;
      opts.workers = workers;
      const DetuningScan scan = chevron_scan(p, deltas, grid, opts);
      std::ostringstream out;
      out << "# cmc detuning chevron, master equation from |0,2,0>, mirror traced out, transpose on cavity a\n";
      for (const auto& c : head) out << "# " << c << "\n";
      out << "# delta = omega_b - omega_b(resonant); coupling 2*sqrt2*g^2/omega_b = " << num(coupling) << "\n";
      out << "# units: t in 1/omega_b; delta in omega_b; log_negativity in bits\n";
      out << "t,delta,log_negativity\n";
      for (std::size_t d = 0; d < deltas.size(); ++d)
        for (std::size_t i = 0; i < grid.n_points; ++i)
          out << num(grid.at(i)) << "," << num(deltas[d]) << "," << num(scan.log_negativity[d][i]) << "\n";
      emit("chevron.csv", out.str());

      std::ostringstream amp;
      amp << "# cmc chevron transfer amplitude max_t P_cav/(P_cav+P_b) against the two-level Lorentzian\n";
      amp << "# units: delta in omega_b; amplitudes dimensionless\n";
      amp << "delta,transfer_amplitude,lorentzian_delta_over_2\n";
      for (std::size_t d = 0; d < deltas.size(); ++d)
        amp << num(deltas[d]) << "," << num(scan.transfer_amplitude[d]) << ","
            << num(detuned_rabi_profile(deltas[d], coupling).amplitude) << "\n";
      emit("chevron_amplitude.csv", amp.str());
    });
  }

  if (cfg.outputs.convergence_probe) {
    say("convergence probe");
    timed("convergence_probe", [&] {
      const std::size_t pts = std::min<std::size_t>(cfg.grid.n_points, 201);
      const TimeGrid probe(cfg.grid.t_start, cfg.grid.t_end, pts);
      const ModeSeries base = unitary_occupations(psi0, *sys, probe);
      const ModeDims bigger(cfg.truncation[0] + 2, cfg.truncation[1] + 2, cfg.truncation[2] + 2);
      const OpenSystem big(p, bigger);
      const ModeSeries wide = unitary_occupations(basis_state(init, bigger), big, probe);
      json shifts = json::object();
      double worst = 0;
      for (Mode m : {Mode::A, Mode::B, Mode::C}) {
        const auto& x = base[static_cast<std::size_t>(m)];
        const auto& y = wide[static_cast<std::size_t>(m)];
        double diff = 0, scale = 0;
        for (std::size_t i = 0; i < pts; ++i) {
          diff = std::max(diff, std::abs(x[i] - y[i]));
          scale = std::max(scale, std::abs(x[i]));
        }
        const double rel = diff / std::max(scale, 1e-12);
        shifts[std::string(1, mode_name(m))] = rel;
        worst = std::max(worst, rel);
      }
      const bool ok = worst <= 1e-4;
      manifest["convergence_probe"] = {{"observable", "closed-system dressed occupations"},
                                       {"truncation", {bigger.size(0), bigger.size(1), bigger.size(2)}},
                                       {"relative_shift", shifts},
                                       {"threshold", 1e-4},
                                       {"converged", ok}};
      if (!ok)
        report.warnings.push_back("convergence probe: occupations shift by " + num(worst) +
                                  " (relative) at truncation +2; results are truncation-sensitive");
    });
  }

  manifest["warnings"] = report.warnings;
  manifest["files"] = files;
  json timings = json::object();
  for (const auto& [k, v] : report.timings) timings[k] = v;
  manifest["timings_seconds"] = timings;
  manifest["workers"] = workers;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  report.files.push_back(out_dir / "manifest.json");
  for (const auto& w : report.warnings) say("warning: " + w);
  return report;
}

}  // namespace cmc
