#include <idrl/idrl.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

int exit_code(idrl_status s) {
  switch (s) {
    case IDRL_OK: return 0;
    case IDRL_ERR_RUNTIME: return 1;
    default: return 2;
  }
}

int report(idrl_status s, const char* what) {
  if (s != IDRL_OK) std::fprintf(stderr, "idrl %s: %s\n", what, idrl_last_error());
  return exit_code(s);
}

using ConfigPtr = std::unique_ptr<idrl_config, decltype(&idrl_config_free)>;

idrl_status open_config(const std::string& path, ConfigPtr& out) {
  idrl_config* raw = nullptr;
  const idrl_status s = idrl_config_load(path.c_str(), &raw);
  out.reset(raw);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imitation learning from delayed demonstrations (IDRL)"};
  app.require_subcommand(1);
  app.footer(std::string("\nIDRL_SEED in the environment overrides [run] seed.\nExit codes: 0 success, 1 runtime failure, "
                         "2 validation or I/O failure.\n\n") +
             idrl_metrics_schema());

  std::string config, out, expert, algo = "idrl", checkpoint, title = "return vs. steps", summary;
  int traj = 0, episodes = 0;
  bool resume = false;
  std::vector<std::string> series;

  auto* expert_cmd = app.add_subcommand("expert", "train an expert on true rewards and record delayed demonstrations");
  expert_cmd->add_option("config", config, "config file")->required();
  expert_cmd->add_option("--traj", traj, "number of trajectories (default: [expert] trajectories)");
  expert_cmd->add_option("--out", out, "dataset path")->required();
  expert_cmd->add_option("--summary", summary, "per-trajectory return CSV");

  auto* train_cmd = app.add_subcommand("train", "train an imitator; writes metrics.csv, checkpoints/, resolved_config.toml");
  train_cmd->add_option("config", config, "config file")->required();
  train_cmd->add_option("--algo", algo, "idrl | bc-delayed | bc-augmented")
      ->check(CLI::IsMember({"idrl", "bc-delayed", "bc-augmented"}));
  train_cmd->add_option("--expert", expert, "expert dataset (default: [run] expert_path)");
  train_cmd->add_option("--out", out, "run directory")->required();
  train_cmd->add_flag("--resume", resume, "continue from the latest checkpoint in the run directory");

  auto* certify_cmd = app.add_subcommand("certify", "check the delay bounds on random tabular MDPs");
  certify_cmd->add_option("config", config, "config file")->required();
  certify_cmd->add_option("--out", out, "output directory for certificates.csv and summary.json")->required();

  auto* plot_cmd = app.add_subcommand("plot", "render return curves as SVG");
  plot_cmd->add_option("series", series, "run directory or label=dir1,dir2,... (seeds averaged)")->required();
  plot_cmd->add_option("--out", out, "SVG path")->required();
  plot_cmd->add_option("--title", title, "plot title");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the true reward");
  eval_cmd->add_option("config", config, "config file")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("--episodes", episodes, "episodes (default: [run] eval_episodes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*plot_cmd) {
    std::vector<const char*> ptrs;
    for (const auto& s : series) ptrs.push_back(s.c_str());
    return report(idrl_cmd_plot(ptrs.data(), ptrs.size(), out.c_str(), title.c_str()), "plot");
  }

  ConfigPtr cfg(nullptr, &idrl_config_free);
  if (const idrl_status s = open_config(config, cfg); s != IDRL_OK) return report(s, "config");

  if (*expert_cmd)
    return report(idrl_cmd_expert(cfg.get(), traj, out.c_str(), summary.empty() ? nullptr : summary.c_str()), "expert");
  if (*train_cmd)
    return report(idrl_cmd_train(cfg.get(), algo.c_str(), expert.empty() ? nullptr : expert.c_str(), out.c_str(), resume),
                  "train");
  if (*certify_cmd) {
    int failures = 0;
    const idrl_status s = idrl_cmd_certify(cfg.get(), out.c_str(), &failures);
    if (s == IDRL_OK) std::printf("certificate failures: %d\n", failures);
    return report(s, "certify");
  }
  if (*eval_cmd) {
    double mean = 0.0, std = 0.0;
    const idrl_status s = idrl_cmd_eval(cfg.get(), checkpoint.c_str(), episodes, &mean, &std);
    if (s == IDRL_OK) std::printf("return %.6f +- %.6f\n", mean, std);
    return report(s, "eval");
  }
  return 2;
}
