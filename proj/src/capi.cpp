#include "idrl/idrl.h"

#include "config.hpp"
#include "binary_io.hpp"
#include "report.hpp"
#include "theory.hpp"
#include "training.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

struct idrl_config {
  idrl::RunConfig cfg;
};

struct idrl_dataset {
  idrl::ExpertDataset ds;
};

namespace {

thread_local std::string g_error;

idrl_status fail(idrl_status code, const std::string& msg) {
  g_error = msg;
  return code;
}

template <class F>
idrl_status guarded(F&& f) {
  g_error.clear();
  try {
    return f();
  } catch (const idrl::ValidationError& e) {
    return fail(IDRL_ERR_VALIDATION, e.what());
  } catch (const idrl::IoError& e) {
    return fail(IDRL_ERR_IO, e.what());
  } catch (const idrl::NumericalError& e) {
    return fail(IDRL_ERR_RUNTIME, std::string("numerical failure: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(IDRL_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(IDRL_ERR_RUNTIME, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// Fails before any expensive work when the file could not be created later.
void check_writable_file(const std::string& path) {
  const fs::path p(path);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw idrl::IoError("cannot write " + path + ": directory " + dir.string() + " does not exist");
  if (fs::is_directory(p)) throw idrl::IoError("cannot write " + path + ": is a directory");
  const fs::path probe = dir / (".idrl_probe_" + p.filename().string());
  {
    std::FILE* f = std::fopen(probe.c_str(), "wb");
    if (!f) throw idrl::IoError("cannot write " + path + ": " + std::strerror(errno));
    std::fclose(f);
  }
  std::error_code ec;
  fs::remove(probe, ec);
}

std::vector<idrl::MetricsRow> read_metrics(const std::string& dir) {
  fs::path p(dir);
  if (fs::is_directory(p)) p /= "metrics.csv";
  if (!fs::exists(p)) throw idrl::IoError("no metrics.csv at " + p.string());
  return idrl::parse_metrics_csv(idrl::bin::read_file(p.string()));
}

}  // namespace

extern "C" {

const char* idrl_last_error(void) { return g_error.c_str(); }

const char* idrl_version(void) { return "0.1.0"; }

const char* idrl_metrics_schema(void) {
  return "metrics.csv columns (one row per evaluation, comma separated, header first):\n"
         "  step              environment steps taken (BC: epoch)\n"
         "  eval_return_mean  mean undiscounted true return of the deterministic policy\n"
         "  eval_return_std   population std of that return over evaluation episodes\n"
         "  disc_loss         mean discriminator loss since the previous row (0 when unused)\n"
         "  critic_loss       mean critic loss since the previous row\n"
         "  actor_loss        mean actor loss since the previous row (BC: negative log-likelihood)\n"
         "  reward_mean       mean reward fed to the critics since the previous row\n";
}

void idrl_string_free(char* s) { std::free(s); }

idrl_status idrl_config_load(const char* path, idrl_config** out) {
  if (!path || !out) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (!fs::exists(path)) throw idrl::IoError(std::string("config not found: ") + path);
    *out = new idrl_config{idrl::load_config(path)};
    return IDRL_OK;
  });
}

idrl_status idrl_config_parse(const char* toml, idrl_config** out) {
  if (!toml || !out) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new idrl_config{idrl::parse_config(toml)};
    return IDRL_OK;
  });
}

void idrl_config_free(idrl_config* cfg) { delete cfg; }

idrl_status idrl_config_set_seed(idrl_config* cfg, uint64_t seed) {
  if (!cfg) return fail(IDRL_ERR_ARGUMENT, "null config");
  return guarded([&] {
    idrl::RunConfig c = cfg->cfg;
    c.seed = seed;
    c.resolve();
    cfg->cfg = c;
    return IDRL_OK;
  });
}

idrl_status idrl_config_get_seed(const idrl_config* cfg, uint64_t* seed) {
  if (!cfg || !seed) return fail(IDRL_ERR_ARGUMENT, "null argument");
  *seed = cfg->cfg.seed;
  g_error.clear();
  return IDRL_OK;
}

idrl_status idrl_config_to_toml(const idrl_config* cfg, char** out) {
  if (!cfg || !out) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup(cfg->cfg.to_toml());
    return IDRL_OK;
  });
}

idrl_status idrl_dataset_load(const char* path, idrl_dataset** out) {
  if (!path || !out) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new idrl_dataset{idrl::load_expert(path)};
    return IDRL_OK;
  });
}

void idrl_dataset_free(idrl_dataset* ds) { delete ds; }

idrl_status idrl_dataset_info(const idrl_dataset* ds, size_t* n_trajectories, int* delay, int* state_dim,
                              int* action_dim) {
  if (!ds) return fail(IDRL_ERR_ARGUMENT, "null dataset");
  if (n_trajectories) *n_trajectories = ds->ds.trajectories.size();
  if (delay) *delay = static_cast<int>(ds->ds.header.delay);
  if (state_dim) *state_dim = static_cast<int>(ds->ds.header.state_dim);
  if (action_dim) *action_dim = static_cast<int>(ds->ds.header.action_dim);
  g_error.clear();
  return IDRL_OK;
}

idrl_status idrl_cmd_expert(const idrl_config* cfg, int n_traj, const char* out_path, const char* summary_csv) {
  if (!cfg || !out_path) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    idrl::RunConfig c = cfg->cfg;
    if (n_traj > 0) c.expert.trajectories = n_traj;
    c.resolve();
    check_writable_file(out_path);
    if (summary_csv) check_writable_file(summary_csv);
    const idrl::ExpertResult r = idrl::train_expert(c);
    idrl::save_expert(out_path, r.dataset);
    if (summary_csv) idrl::bin::write_file(summary_csv, idrl::expert_summary_csv(r.dataset, r.returns));
    return IDRL_OK;
  });
}

idrl_status idrl_cmd_train(const idrl_config* cfg, const char* algo, const char* expert_path, const char* out_dir,
                           int resume) {
  if (!cfg || !algo || !out_dir) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string a = algo;
    if (a != "idrl" && a != "bc-delayed" && a != "bc-augmented")
      throw idrl::ValidationError("unknown algo '" + a + "' (expected idrl, bc-delayed or bc-augmented)");
    const std::string path = expert_path && *expert_path ? expert_path : cfg->cfg.expert_path;
    if (path.empty()) throw idrl::ValidationError("no expert dataset given (--expert or run.expert_path)");
    const idrl::ExpertDataset ds = idrl::load_expert(path);
    if (static_cast<int>(ds.header.delay) != cfg->cfg.delay)
      throw idrl::ValidationError("expert dataset delay " + std::to_string(ds.header.delay) +
                                  " does not match config delay " + std::to_string(cfg->cfg.delay));
    idrl::TrainOptions opt;
    opt.out_dir = out_dir;
    opt.resume = resume != 0;
    if (a == "idrl") {
      idrl::train_idrl(cfg->cfg, ds, opt);
    } else {
      if (opt.resume) throw idrl::ValidationError("--resume applies to idrl runs only");
      idrl::train_bc(cfg->cfg, ds, a == "bc-augmented" ? idrl::BcMode::Augmented : idrl::BcMode::DelayedObs, opt);
    }
    return IDRL_OK;
  });
}

idrl_status idrl_cmd_certify(const idrl_config* cfg, const char* out_dir, int* failures) {
  if (!cfg || !out_dir) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw idrl::IoError(std::string("cannot create ") + out_dir + ": " + ec.message());
    const auto certs = idrl::run_certify_suite(cfg->cfg.certify);
    const auto summary = idrl::summarize(certs);
    idrl::bin::write_file((fs::path(out_dir) / "certificates.csv").string(), idrl::certificates_csv(certs));
    idrl::bin::write_file((fs::path(out_dir) / "summary.json").string(), idrl::summary_json(summary));
    if (failures) *failures = summary.failures;
    return IDRL_OK;
  });
}

idrl_status idrl_cmd_plot(const char* const* series, size_t n_series, const char* out_svg, const char* title) {
  if (!series || n_series == 0 || !out_svg) return fail(IDRL_ERR_ARGUMENT, "no series or output path");
  return guarded([&] {
    std::vector<idrl::Curve> curves;
    for (size_t i = 0; i < n_series; ++i) {
      if (!series[i]) throw idrl::ValidationError("null series");
      std::string spec = series[i], label;
      if (const auto eq = spec.find('='); eq != std::string::npos) {
        label = spec.substr(0, eq);
        spec = spec.substr(eq + 1);
      }
      std::vector<std::string> dirs;
      for (std::size_t pos = 0; pos <= spec.size();) {
        const auto comma = spec.find(',', pos);
        const std::string d = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!d.empty()) dirs.push_back(d);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (dirs.empty()) throw idrl::ValidationError("empty series '" + std::string(series[i]) + "'");
      if (label.empty()) label = fs::path(dirs[0]).filename().string();
      if (dirs.size() == 1) {
        curves.push_back(idrl::curve_from_metrics(label, read_metrics(dirs[0])));
      } else {
        std::vector<std::vector<idrl::MetricsRow>> runs;
        for (const auto& d : dirs) runs.push_back(read_metrics(d));
        curves.push_back(idrl::aggregate_seeds(label, runs));
      }
    }
    idrl::bin::write_file(out_svg, idrl::render_svg(curves, title ? title : "return vs. steps"));
    return IDRL_OK;
  });
}

idrl_status idrl_cmd_eval(const idrl_config* cfg, const char* checkpoint, int episodes, double* mean, double* std) {
  if (!cfg || !checkpoint) return fail(IDRL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const idrl::RunConfig& c = cfg->cfg;
    const int n = episodes > 0 ? episodes : c.eval_episodes;
    const auto env = idrl::make_env(c.env_id, c.env_params);
    const idrl::Checkpoint ckpt = idrl::load_checkpoint(checkpoint);
    const std::uint64_t seed = idrl::eval_seed(c);
    idrl::EvalResult r;
    if (ckpt.has("bc.mode")) {
      const idrl::BcResult bc = idrl::load_bc(c, ckpt);
      r = idrl::evaluate(
          env, c.delay, [&](const idrl::AugmentedState& x) { return idrl::bc_act(bc.policy, bc.mode, x); }, n, seed);
    } else {
      const idrl::AuxDelayAgent agent = idrl::load_agent(c, checkpoint);
      r = idrl::evaluate(
          env, c.delay,
          [&](const idrl::AugmentedState& x) {
            return idrl::Vec(agent.actor.deterministic_action(x.flatten().transpose()).row(0).transpose());
          },
          n, seed);
    }
    if (mean) *mean = r.mean;
    if (std) *std = r.std;
    return IDRL_OK;
  });
}

}  // extern "C"
