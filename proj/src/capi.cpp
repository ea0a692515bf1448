#include <cmc/cmc.h>
#include <cmc/runner.hpp>

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

struct cmc_config {
  cmc::ScenarioConfig cfg;
};

struct cmc_system {
  cmc::OpenSystem sys;
};

namespace {

std::string& last_error() {
  thread_local std::string message;
  return message;
}

cmc_status set_error(cmc_status status, const std::string& msg) {
  last_error() = msg;
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <typename F>
cmc_status guarded(F&& body) {
  try {
    body();
    return CMC_OK;
  } catch (const cmc::Error& e) {
    return set_error(static_cast<cmc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CMC_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CMC_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(CMC_E_INTERNAL, "unknown failure");
  }
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) cmc::fail(cmc::ErrorCode::InvalidArgument, what);
}

cmc::SystemParams to_params(const cmc_params& p) {
  cmc::SystemParams q;
  q.omega_a = p.omega_a;
  q.omega_b = p.omega_b;
  q.omega_c = p.omega_c;
  q.g = p.g;
  q.gamma_a = p.gamma_a;
  q.gamma_b = p.gamma_b;
  q.gamma_c = p.gamma_c;
  return q;
}

void copy_series(const cmc::ModeSeries& occ, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < 3; ++m) out[3 * i + m] = occ[m][i];
}

}  // namespace

extern "C" {

CMC_API const char* cmc_version(void) { return cmc::kVersion; }

CMC_API const char* cmc_last_error(void) { return last_error().c_str(); }

CMC_API const char* cmc_status_name(cmc_status status) {
  switch (status) {
    case CMC_OK: return "ok";
    case CMC_E_INVALID_ARGUMENT: return "invalid argument";
    case CMC_E_INVALID_TRUNCATION: return "invalid truncation";
    case CMC_E_DIMENSION_MISMATCH: return "dimension mismatch";
    case CMC_E_SINGULAR_GENERATOR: return "singular generator";
    case CMC_E_NOT_HERMITIAN: return "not hermitian";
    case CMC_E_NOT_NORMALIZED: return "not normalized";
    case CMC_E_INTEGRATOR: return "integrator failure";
    case CMC_E_JUMP_FAILURE: return "jump failure";
    case CMC_E_NO_RESONANCE: return "no resonance";
    case CMC_E_NON_UNIMODAL: return "non-unimodal objective";
    case CMC_E_CONFIG: return "config error";
    case CMC_E_IO: return "i/o error";
    case CMC_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

CMC_API void cmc_string_free(char* s) { delete[] s; }

CMC_API cmc_status cmc_preset_names(char** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    std::string text;
    for (const auto& n : cmc::preset_names()) text += n + "\n";
    *out = duplicate(text);
  });
}

CMC_API cmc_status cmc_preset_json(const char* scenario, char** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    *out = duplicate(cmc::preset_json(cmc::scenario_from_name(scenario)));
  });
}

CMC_API cmc_status cmc_config_from_preset(const char* scenario, cmc_config** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    *out = new cmc_config{cmc::preset_config(cmc::scenario_from_name(scenario))};
  });
}

CMC_API cmc_status cmc_config_from_json(const char* document, cmc_config** out) {
  return guarded([&] {
    require(document != nullptr && out != nullptr, "null argument");
    *out = new cmc_config{cmc::load_config(document)};
  });
}

CMC_API cmc_status cmc_config_from_file(const char* path, cmc_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new cmc_config{cmc::load_config_file(path)};
  });
}

CMC_API cmc_status cmc_config_override(cmc_config* cfg, const char* key_value) {
  return guarded([&] {
    require(cfg != nullptr && key_value != nullptr, "null argument");
    cfg->cfg = cmc::load_config(cmc::config_json(cfg->cfg), {key_value});
  });
}

CMC_API cmc_status cmc_config_override_all(cmc_config* cfg, const char* const* items, size_t count) {
  return guarded([&] {
    require(cfg != nullptr && (items != nullptr || count == 0), "null argument");
    std::vector<std::string> list;
    for (size_t i = 0; i < count; ++i) {
      require(items[i] != nullptr, "null override");
      list.emplace_back(items[i]);
    }
    cfg->cfg = cmc::load_config(cmc::config_json(cfg->cfg), list);
  });
}

CMC_API cmc_status cmc_config_to_json(const cmc_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = duplicate(cmc::config_json(cfg->cfg));
  });
}

CMC_API cmc_status cmc_config_scenario(const cmc_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = duplicate(std::string(cmc::scenario_name(cfg->cfg.scenario)));
  });
}

CMC_API void cmc_config_free(cmc_config* cfg) { delete cfg; }

CMC_API cmc_status cmc_run(const cmc_config* cfg, const char* out_dir, cmc_log_fn log, void* user, int* sw_passed) {
  return guarded([&] {
    require(cfg != nullptr && out_dir != nullptr, "null argument");
    cmc::LogSink sink;
    if (log) sink = [log, user](const std::string& msg) { log(msg.c_str(), user); };
    const auto report = cmc::run_scenario(cfg->cfg, out_dir, sink);
    if (sw_passed) *sw_passed = report.sw_passed ? 1 : 0;
  });
}

CMC_API cmc_status cmc_verify_sw(const cmc_config* cfg, char** out_csv, int* all_passed) {
  return guarded([&] {
    require(cfg != nullptr && out_csv != nullptr, "null argument");
    const auto resolved = cmc::resolve(cfg->cfg);
    const auto rows = cmc::verify_sw(cfg->cfg.scenario, resolved.params, cmc::ModeDims::three(cfg->cfg.truncation));
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.passed();
    *out_csv = duplicate(cmc::sw_verification_csv(rows));
    if (all_passed) *all_passed = ok ? 1 : 0;
  });
}

CMC_API cmc_status cmc_tune_resonance(const cmc_config* cfg, const char* objective, double width, cmc_resonance* out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    const auto& c = cfg->cfg;
    cmc::TunerOptions opts;
    opts.objective = objective ? cmc::objective_from_name(objective) : c.objective;
    opts.search_width = width > 0 ? std::optional<double>(width) : c.search_width;
    opts.tolerance = c.tuner_tolerance;
    opts.dims = cmc::ModeDims::three(c.truncation);
    // Untuned frequencies come from the config; the tuned one is searched
    // around its analytic value.
    cmc::ScenarioConfig probe = c;
    if (c.scenario == cmc::ScenarioKind::Janus)
      probe.omega_c.kind = cmc::FrequencySpec::Kind::Analytic;
    else
      probe.omega_a.kind = probe.omega_c.kind = cmc::FrequencySpec::Kind::Analytic;
    const auto resolved = cmc::resolve(probe);
    const auto r = cmc::optimize_resonance(c.scenario, resolved.params, opts);
    out->analytic_value = r.analytic_value;
    out->optimized_value = r.optimized_value;
    out->analytic_objective = r.analytic_objective;
    out->optimized_objective = r.optimized_objective;
    out->search_width = r.search_width;
    out->evaluations = r.objective_trace.size();
  });
}

CMC_API cmc_status cmc_system_create(const cmc_params* params, const int dims[3], cmc_system** out) {
  return guarded([&] {
    require(params != nullptr && dims != nullptr && out != nullptr, "null argument");
    *out = new cmc_system{cmc::OpenSystem(to_params(*params), cmc::ModeDims(dims[0], dims[1], dims[2]))};
  });
}

CMC_API void cmc_system_free(cmc_system* sys) { delete sys; }

CMC_API cmc_status cmc_system_dimension(const cmc_system* sys, size_t* out) {
  return guarded([&] {
    require(sys != nullptr && out != nullptr, "null argument");
    *out = sys->sys.dims().total();
  });
}

CMC_API cmc_status cmc_system_eigenvalues(const cmc_system* sys, double* out) {
  return guarded([&] {
    require(sys != nullptr && out != nullptr, "null argument");
    const auto& e = sys->sys.basis().eigenvalues;
    for (Eigen::Index k = 0; k < e.size(); ++k) out[k] = e(k);
  });
}

CMC_API cmc_status cmc_system_evolve_master(const cmc_system* sys, const int initial[3], double t_start, double t_end,
                                            size_t n_points, double* occupations) {
  return guarded([&] {
    require(sys != nullptr && initial != nullptr && occupations != nullptr, "null argument");
    const cmc::TimeGrid grid(t_start, t_end, n_points);
    const auto psi = cmc::basis_state({initial[0], initial[1], initial[2]}, sys->sys.dims());
    const auto me = cmc::evolve_master(cmc::DensityMatrix::pure(psi), sys->sys, grid);
    copy_series(me.occupations, n_points, occupations);
  });
}

CMC_API cmc_status cmc_system_evolve_trajectory(const cmc_system* sys, const int initial[3], double t_start,
                                                double t_end, size_t n_points, uint64_t seed, double* occupations,
                                                size_t* n_jumps) {
  return guarded([&] {
    require(sys != nullptr && initial != nullptr && occupations != nullptr, "null argument");
    const cmc::TimeGrid grid(t_start, t_end, n_points);
    const auto psi = cmc::basis_state({initial[0], initial[1], initial[2]}, sys->sys.dims());
    const auto tr = cmc::evolve_trajectory(psi, sys->sys, grid, seed);
    copy_series(tr.occupations, n_points, occupations);
    if (n_jumps) *n_jumps = tr.jumps.size();
  });
}

}  // extern "C"
