#include "mmrelax/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "mmrelax/config.hpp"
#include "mmrelax/harness.hpp"

namespace mmrelax {

namespace {

struct CommonOpts {
  std::string scenario;
  std::string config_file;
  std::string out_dir;
  // raw override strings; only applied when the flag was given
  std::optional<int> n;
  std::optional<std::string> tau;
  std::optional<int> mmpde;
  std::optional<double> gamma;
  std::optional<int> ip;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> t_end;
  std::optional<int> max_order;
  std::optional<double> min_step;
  std::optional<double> initial_step;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("scenario", opts.scenario, "scenario name")->required();
  cmd->add_option("--config", opts.config_file, "key=value config file");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--N", opts.n, "number of mesh intervals");
  cmd->add_option("--tau", opts.tau,
                  "fixed:<value> or adaptive[:<tau_o>[,<min>,<max>]]");
  cmd->add_option("--mmpde", opts.mmpde, "mesh equation variant (4 or 6)");
  cmd->add_option("--smoothing-gamma", opts.gamma, "monitor smoothing weight");
  cmd->add_option("--smoothing-ip", opts.ip, "monitor smoothing half-width");
  cmd->add_option("--rtol", opts.rtol, "relative tolerance");
  cmd->add_option("--atol", opts.atol, "absolute tolerance");
  cmd->add_option("--tend", opts.t_end, "integration horizon");
  cmd->add_option("--max-order", opts.max_order, "maximum BDF order");
  cmd->add_option("--min-step", opts.min_step, "absolute step floor");
  cmd->add_option("--initial-step", opts.initial_step,
                  "initial step (0 = automatic)");
}

Scenario build_scenario(const CommonOpts& opts) {
  const auto id = scenario_from_string(opts.scenario);
  if (!id) {
    throw std::invalid_argument("unknown scenario '" + opts.scenario +
                                "' (see list-scenarios)");
  }
  Scenario s = make_scenario(*id);
  if (!opts.config_file.empty()) {
    for (const auto& [key, value] : parse_config_file(opts.config_file)) {
      apply_config_entry(s.config, key, value);
    }
  }
  // flags win over the config file
  if (opts.n) s.config.n_intervals = *opts.n;
  if (opts.tau) s.config.tau = tau_from_string(*opts.tau);
  if (opts.mmpde) {
    if (*opts.mmpde == 4) {
      s.config.variant = MmpdeVariant::mmpde4;
    } else if (*opts.mmpde == 6) {
      s.config.variant = MmpdeVariant::mmpde6;
    } else {
      throw std::invalid_argument("mmpde: expected 4 or 6");
    }
  }
  if (opts.gamma) s.config.smoothing.gamma = *opts.gamma;
  if (opts.ip) s.config.smoothing.ip = *opts.ip;
  if (opts.rtol) s.config.rtol = *opts.rtol;
  if (opts.atol) s.config.atol = *opts.atol;
  if (opts.t_end) s.config.t_end = *opts.t_end;
  if (opts.max_order) s.config.max_order = *opts.max_order;
  if (opts.min_step) s.config.min_step = *opts.min_step;
  if (opts.initial_step) s.config.initial_step = *opts.initial_step;
  validate_config(s.config);
  return s;
}

std::string default_out_dir(const CommonOpts& opts, const char* suffix) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv("MMRELAX_OUT")) {
    return std::string(env) + "/" + opts.scenario + suffix;
  }
  return "out/" + opts.scenario + suffix;
}

int cmd_run(const CommonOpts& opts) {
  Scenario s = build_scenario(opts);
  RunResult result = run_experiment(s);
  const std::string dir = default_out_dir(opts, "");
  export_result(result, dir);
  std::printf("scenario      %s\n", to_string(result.scenario));
  std::printf("t*            %.10g\n", result.t_end);
  std::printf("u_max         %.6g\n", result.u_max_final);
  std::printf("steps         %ld accepted, %ld failed\n", result.n_accepted,
              result.n_failed);
  std::printf("wall clock    %.3f s\n", result.wall_clock_seconds);
  std::printf("output        %s\n", dir.c_str());
  return 0;
}

int cmd_sweep(const CommonOpts& opts, std::vector<int> n_values) {
  Scenario s = build_scenario(opts);
  if (n_values.size() < 2) {
    throw std::invalid_argument("sweep: need at least two --N values");
  }
  auto rows = refinement_study(s, n_values);
  std::printf("%8s %16s %14s %12s %10s\n", "N", "t*", "u_max", "wall[s]",
              "steps");
  const std::string dir = default_out_dir(opts, "_sweep");
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir + "/sweep.csv");
  csv << "N,t_star,u_max_final,wall_clock_seconds,steps_accepted,failed\n";
  bool any_failed = false;
  for (const auto& row : rows) {
    if (row.failed) {
      any_failed = true;
      std::printf("%8d %16s %14s %12s %10s  (%s)\n", row.n_intervals, "-",
                  "-", "-", "-", row.message.c_str());
    } else {
      std::printf("%8d %16.10g %14.6g %12.3f %10ld\n", row.n_intervals,
                  row.t_star, row.u_max_final, row.wall_clock_seconds,
                  row.n_accepted);
    }
    csv << row.n_intervals << ',' << format_double(row.t_star) << ','
        << format_double(row.u_max_final) << ','
        << format_double(row.wall_clock_seconds) << ',' << row.n_accepted
        << ',' << (row.failed ? 1 : 0) << '\n';
  }
  std::printf("output        %s/sweep.csv\n", dir.c_str());
  return any_failed ? 1 : 0;
}

int cmd_compare(const CommonOpts& opts, std::vector<int> n_values,
                double fixed_tau) {
  Scenario s = build_scenario(opts);
  if (n_values.empty()) {
    throw std::invalid_argument("compare: need at least one --N value");
  }
  auto rows = compare_study(s, n_values, fixed_tau);
  std::printf("%8s %14s %14s %12s %12s %8s\n", "N", "umax(fixed)",
              "umax(adapt)", "wall(fixed)", "wall(adapt)", "ratio");
  const std::string dir = default_out_dir(opts, "_compare");
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir + "/compare.csv");
  csv << "N,t_star_fixed,u_max_fixed,wall_fixed,t_star_adaptive,"
         "u_max_adaptive,wall_adaptive,wall_ratio\n";
  bool any_failed = false;
  for (const auto& row : rows) {
    any_failed = any_failed || row.fixed.failed || row.adaptive.failed;
    std::printf("%8d %14.4g %14.4g %12.3f %12.3f %8.2f\n", row.n_intervals,
                row.fixed.u_max_final, row.adaptive.u_max_final,
                row.fixed.wall_clock_seconds, row.adaptive.wall_clock_seconds,
                row.wall_clock_ratio);
    csv << row.n_intervals << ',' << format_double(row.fixed.t_star) << ','
        << format_double(row.fixed.u_max_final) << ','
        << format_double(row.fixed.wall_clock_seconds) << ','
        << format_double(row.adaptive.t_star) << ','
        << format_double(row.adaptive.u_max_final) << ','
        << format_double(row.adaptive.wall_clock_seconds) << ','
        << format_double(row.wall_clock_ratio) << '\n';
  }
  std::printf("output        %s/compare.csv\n", dir.c_str());
  return any_failed ? 1 : 0;
}

int cmd_list() {
  for (const auto& s : scenario_catalog()) {
    const auto cfg = config_to_map(s.config);
    std::printf("%-12s %s\n", to_string(s.id), s.description.c_str());
    std::printf("             N=%s mmpde=%s tau=%s gamma=%s ip=%s tend=%s%s\n",
                cfg.at("N").c_str(), cfg.at("mmpde").c_str(),
                cfg.at("tau").c_str(), cfg.at("gamma").c_str(),
                cfg.at("ip").c_str(), cfg.at("t_end").c_str(),
                s.mesh_only ? " (mesh only)" : "");
  }
  return 0;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"moving-mesh solver with variable mesh relaxation time"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, compare_opts;
  std::vector<int> sweep_n, compare_n;
  double compare_fixed_tau = 1e-5;

  CLI::App* run = app.add_subcommand("run", "run one scenario");
  add_common_flags(run, run_opts);

  CLI::App* sweep =
      app.add_subcommand("sweep", "refinement study over mesh sizes");
  add_common_flags(sweep, sweep_opts);
  sweep->add_option("--N-list", sweep_n, "mesh sizes (repeat or comma list)")
      ->delimiter(',')
      ->required();

  CLI::App* compare = app.add_subcommand(
      "compare", "matched fixed-tau vs adaptive-tau runs (sequential)");
  add_common_flags(compare, compare_opts);
  compare
      ->add_option("--N-list", compare_n, "mesh sizes (repeat or comma list)")
      ->delimiter(',')
      ->required();
  compare->add_option("--fixed-tau", compare_fixed_tau,
                      "tau for the fixed-policy runs");

  app.add_subcommand("list-scenarios", "print the scenario catalog");

  // CLI11 wants mutable char** style input
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help
      app.exit(e);
      return 0;
    }
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_opts);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts, sweep_n);
    if (app.got_subcommand("compare")) {
      return cmd_compare(compare_opts, compare_n, compare_fixed_tau);
    }
    if (app.got_subcommand("list-scenarios")) return cmd_list();
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace mmrelax
