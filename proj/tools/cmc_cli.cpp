// Command-line front end. Talks to the simulator through the C API only.

#include <cmc/cmc.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
  void operator()(cmc_config* c) const { cmc_config_free(c); }
};
using ConfigPtr = std::unique_ptr<cmc_config, ConfigDeleter>;

struct CString {
  char* p = nullptr;
  ~CString() { cmc_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Failure {
  cmc_status status;
};

void check(cmc_status s) {
  if (s != CMC_OK) throw Failure{s};
}

struct Common {
  std::string scenario = "two-photon";
  std::string config_path;
  std::vector<std::string> overrides;
  std::string truncation;
  std::optional<long long> n_traj;
  std::optional<unsigned long long> seed;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Common& c, bool dynamics) {
  cmd->add_option("--scenario", c.scenario, "two-photon, four-photon or janus")->capture_default_str();
  cmd->add_option("--config", c.config_path, "JSON config or run manifest");
  cmd->add_option("--override", c.overrides, "dotted.key=value, repeatable");
  cmd->add_option("--truncation", c.truncation, "Fock truncation a,b,c");
  if (dynamics) {
    cmd->add_option("--n-traj", c.n_traj, "number of trajectories in the ensemble");
    cmd->add_option("--seed", c.seed, "base seed of the trajectory ensemble");
    cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  }
}

ConfigPtr build_config(const Common& c, const CLI::App* cmd) {
  cmc_config* raw = nullptr;
  if (!c.config_path.empty()) {
    check(cmc_config_from_file(c.config_path.c_str(), &raw));
  } else {
    check(cmc_config_from_preset(c.scenario.c_str(), &raw));
  }
  ConfigPtr cfg(raw);
  std::vector<std::string> items;
  if (!c.config_path.empty() && cmd->count("--scenario") > 0) items.push_back("scenario=" + c.scenario);
  if (!c.truncation.empty()) items.push_back("truncation=[" + c.truncation + "]");
  if (c.n_traj) items.push_back("trajectories.count=" + std::to_string(*c.n_traj));
  if (c.seed) items.push_back("trajectories.seed=" + std::to_string(*c.seed));
  if (c.workers) items.push_back("trajectories.workers=" + std::to_string(*c.workers));
  items.insert(items.end(), c.overrides.begin(), c.overrides.end());
  std::vector<const char*> ptrs;
  for (const auto& s : items) ptrs.push_back(s.c_str());
  check(cmc_config_override_all(cfg.get(), ptrs.data(), ptrs.size()));
  return cfg;
}

void log_line(const char* msg, void*) { std::fprintf(stderr, "cmc: %s\n", msg); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-mirror-cavity quantum trajectory and master-equation simulator"};
  app.set_version_flag("--version", std::string(cmc_version()));
  app.require_subcommand(1);

  Common run_opts;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run a scenario and write its data files");
  add_common(run, run_opts, true);
  run->add_option("--out-dir", out_dir, "output directory (default: $CMC_OUT_DIR or ./cmc_out)");

  std::string preset_name;
  auto* presets = app.add_subcommand("presets", "list presets or print one as JSON");
  presets->add_option("name", preset_name, "preset to print");

  Common sw_opts;
  std::string sw_out;
  bool strict = false;
  auto* verify = app.add_subcommand("verify-sw", "compare closed-form and numeric effective Hamiltonians");
  add_common(verify, sw_opts, false);
  verify->add_option("--out", sw_out, "write the CSV table here instead of stdout");
  verify->add_flag("--strict", strict, "exit with status 3 when a gated row fails");

  Common tune_opts;
  std::string objective;
  double width = 0;
  auto* tune = app.add_subcommand("tune-resonance", "refine the resonant frequency on the full Hamiltonian");
  add_common(tune, tune_opts, false);
  tune->add_option("--objective", objective, "gap or amplitude (default from config)");
  tune->add_option("--width", width, "search bracket width in omega_b (default 40 g^3/omega_b^2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ConfigPtr cfg = build_config(run_opts, run);
      std::string dir = out_dir;
      if (dir.empty()) {
        const char* env = std::getenv("CMC_OUT_DIR");
        dir = env && *env ? env : "cmc_out";
      }
      int sw_passed = 1;
      check(cmc_run(cfg.get(), dir.c_str(), log_line, nullptr, &sw_passed));
      std::fprintf(stderr, "cmc: wrote %s\n", dir.c_str());
    } else if (*presets) {
      CString text;
      if (preset_name.empty()) {
        check(cmc_preset_names(&text.p));
      } else {
        check(cmc_preset_json(preset_name.c_str(), &text.p));
      }
      std::cout << text.str();
      if (!preset_name.empty()) std::cout << "\n";
    } else if (*verify) {
      ConfigPtr cfg = build_config(sw_opts, verify);
      CString csv;
      int ok = 0;
      check(cmc_verify_sw(cfg.get(), &csv.p, &ok));
      if (sw_out.empty()) {
        std::cout << csv.str();
      } else {
        std::FILE* f = std::fopen(sw_out.c_str(), "wb");
        if (!f) {
          std::fprintf(stderr, "cmc: error: cannot write %s\n", sw_out.c_str());
          return 1;
        }
        std::fputs(csv.str().c_str(), f);
        std::fclose(f);
      }
      std::fprintf(stderr, "cmc: gated rows %s\n", ok ? "all pass" : "FAIL");
      if (strict && !ok) return 3;
    } else if (*tune) {
      ConfigPtr cfg = build_config(tune_opts, tune);
      cmc_resonance r{};
      check(cmc_tune_resonance(cfg.get(), objective.empty() ? nullptr : objective.c_str(), width, &r));
      std::printf("analytic_value   %.12f\n", r.analytic_value);
      std::printf("optimized_value  %.12f\n", r.optimized_value);
      std::printf("difference       %.6e\n", r.optimized_value - r.analytic_value);
      std::printf("objective        %.6e -> %.6e\n", r.analytic_objective, r.optimized_objective);
      std::printf("search_width     %.6e\n", r.search_width);
      std::printf("evaluations      %zu\n", r.evaluations);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "cmc: error: %s: %s\n", cmc_status_name(f.status), cmc_last_error());
    return 1;
  }
  return 0;
}
