#include "kvfem/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kvfem/analysis.hpp"
#include "kvfem/config.hpp"
#include "kvfem/io.hpp"
#include "kvfem/problems.hpp"
#include "kvfem/timestepper.hpp"
#include "parallel.hpp"

namespace kvfem {

namespace {

constexpr double kSteadyIncrementTolerance = 1e-8;

struct Invocation {
  Experiment subcommand;
  RunConfig config;
  std::size_t threads = 1;
};

std::string kappa_tag(double kappa) { return "kappa" + format_parameter(kappa); }

ProblemDefinition problem_by_name(const std::string& name) {
  if (name == "decay") return decay_problem();
  if (name == "cavity") return cavity_problem();
  return manufactured_problem();
}

void write_snapshot(const Discretization& disc, const State& s, const std::filesystem::path& path) {
  write_vtk_legacy({disc.mesh, disc.dofs, s.velocity, s.pressure, s.t}, path);
}

int run_convergence(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  std::vector<ConvergenceResult> results(cfg.kappa_list.size());
  for (std::size_t i = 0; i < cfg.kappa_list.size(); ++i) {
    results[i] = convergence_study(cfg.h_list, cfg.kappa_list[i], cfg.nu, cfg.k_rule, cfg.T, cfg.solver, inv.threads);
  }

  std::vector<std::pair<double, RateTable>> l2, h1, pl2;
  for (const auto& r : results) {
    l2.emplace_back(r.kappa, r.l2_velocity);
    h1.emplace_back(r.kappa, r.h1_velocity);
    pl2.emplace_back(r.kappa, r.l2_pressure);
  }
  write_rate_table_csv(l2, cfg.output_dir / "rates_velocity_l2.csv");
  write_rate_table_csv(h1, cfg.output_dir / "rates_velocity_h1.csv");
  write_rate_table_csv(pl2, cfg.output_dir / "rates_pressure_l2.csv");

  std::ofstream runs(cfg.output_dir / "runs.csv", std::ios::trunc);
  runs << "h,kappa,status,l2_velocity,h1_velocity,l2_pressure,max_picard_iterations,accelerated_steps,max_divergence\n";
  int failures = 0;
  for (const auto& r : results) {
    for (const auto& run : r.runs) {
      runs << "1/" << run.cells_per_side << ',' << format_parameter(run.kappa) << ',';
      if (run.errors) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "ok,%.12e,%.12e,%.12e,%d,%d,%.3e", run.errors->l2_velocity,
                      run.errors->h1_velocity, run.errors->l2_pressure, run.max_picard_iterations,
                      run.accelerated_steps, run.max_divergence);
        runs << buf << "\n";
      } else {
        runs << "failed,,,,,,\n";
        ++failures;
        std::cerr << "run h=1/" << run.cells_per_side << " kappa=" << format_parameter(run.kappa)
                  << " failed: " << run.failure << "\n";
      }
    }
  }
  std::cout << "wrote rate tables for " << results.size() << " kappa values to " << cfg.output_dir.string() << "\n";
  return failures == 0 ? 0 : 2;
}

int run_decay(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  std::vector<double> kappas = cfg.kappa_list;
  if (std::find(kappas.begin(), kappas.end(), 0.0) == kappas.end()) kappas.push_back(0.0);

  const Discretization disc = Discretization::structured(cfg.h_list.front());
  const ProblemDefinition problem = decay_problem();
  const TimeGrid grid = TimeGrid::from_step(cfg.k_rule.step_for(cfg.h_list.front()), cfg.T);

  std::vector<RunResult> results(kappas.size());
  detail::parallel_for(kappas.size(), inv.threads, [&](std::size_t i) {
    results[i] = run(problem, disc, {kappas[i], cfg.nu}, grid, cfg.solver);
  });
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const std::string tag = kappa_tag(kappas[i]);
    write_energy_csv(energy_history(results[i].history, kappas[i]), cfg.output_dir / ("energy_" + tag + ".csv"));
    write_snapshot(disc, results[i].final_state, cfg.output_dir / ("decay_" + tag + ".vtk"));
    std::cout << "kappa=" << format_parameter(kappas[i]) << " kinetic energy at T: " << results[i].history.back().kinetic
              << "\n";
  }
  return 0;
}

int run_cavity(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  const Discretization disc = Discretization::structured(cfg.h_list.front());
  const ProblemDefinition problem = cavity_problem();
  const TimeGrid grid = TimeGrid::from_step(cfg.k_rule.step_for(cfg.h_list.front()), cfg.T);

  // Slot 0 is the Navier-Stokes reference.
  std::vector<double> kappas{0.0};
  kappas.insert(kappas.end(), cfg.kappa_list.begin(), cfg.kappa_list.end());
  std::vector<RunResult> results(kappas.size());
  detail::parallel_for(kappas.size(), inv.threads, [&](std::size_t i) {
    results[i] = run(problem, disc, {kappas[i], cfg.nu}, grid, cfg.solver);
  });

  const RunResult& reference = results.front();
  const double rate = reference.final_increment / grid.k;
  if (!(rate <= kSteadyIncrementTolerance)) {
    std::cerr << "reference Navier-Stokes run is not steady at T: |U^N - U^N-1| / k = " << rate << "\n";
    return 1;
  }
  write_snapshot(disc, reference.final_state, cfg.output_dir / "cavity_reference.vtk");

  std::vector<GapSample> gaps;
  for (std::size_t i = 1; i < kappas.size(); ++i) {
    const double gap = steady_state_gap(results[i].final_state, reference.final_state, disc.ops);
    gaps.push_back({kappas[i], gap});
    write_snapshot(disc, results[i].final_state, cfg.output_dir / ("cavity_" + kappa_tag(kappas[i]) + ".vtk"));
    std::cout << "kappa=" << format_parameter(kappas[i]) << " steady-state gap " << gap << "\n";
  }
  write_gap_csv(gaps, cfg.output_dir / "steady_gap.csv");
  return 0;
}

int run_single(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  const Discretization disc = Discretization::structured(cfg.h_list.front());
  const ProblemDefinition problem = problem_by_name(cfg.problem);
  const TimeGrid grid = TimeGrid::from_step(cfg.k_rule.step_for(cfg.h_list.front()), cfg.T);
  const double kappa = cfg.kappa_list.front();
  const RunResult res = run(problem, disc, {kappa, cfg.nu}, grid, cfg.solver);
  write_snapshot(disc, res.final_state, cfg.output_dir / ("single_" + problem.name + ".vtk"));
  std::cout << problem.name << " h=1/" << cfg.h_list.front() << " kappa=" << format_parameter(kappa)
            << " steps=" << grid.steps << " max_picard=" << res.max_picard_iterations << "\n";
  if (problem.has_exact_solution()) {
    const ErrorReport err = error_norms(res.final_state, problem, disc);
    std::cout << "errors at T: velocity L2 " << err.l2_velocity << ", velocity H1 " << err.h1_velocity
              << ", pressure L2 " << err.l2_pressure << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Mixed finite element solver for the Kelvin-Voigt viscoelastic fluid model", "kvfem"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  std::size_t threads = 1;
  const std::pair<Experiment, const char*> commands[] = {
      {Experiment::convergence, "Manufactured-solution convergence tables"},
      {Experiment::decay, "Force-free energy decay, kappa versus Navier-Stokes"},
      {Experiment::cavity, "Lid-driven cavity approach to the Navier-Stokes steady state"},
      {Experiment::single, "One run with a final VTK snapshot"}};
  std::vector<CLI::App*> subs;
  for (const auto& [exp, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(exp), help);
    sub->add_option("--config", config_path, "key=value run configuration")->required();
    sub->add_option("--output-dir", output_dir, "Override output_dir from the config");
    sub->add_option("--threads", threads, "Worker threads for independent runs")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }

  if (argc <= 1) {
    std::cerr << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 1;
  }

  try {
    Invocation inv;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) inv.subcommand = commands[i].first;
    }
    inv.config = load_config(config_path);
    if (inv.config.experiment != inv.subcommand) {
      std::cerr << "config '" << config_path << "' describes experiment '" << to_string(inv.config.experiment)
                << "' but subcommand '" << to_string(inv.subcommand) << "' was requested\n";
      return 1;
    }
    if (output_dir) inv.config.output_dir = *output_dir;
    inv.threads = threads;
    std::filesystem::create_directories(inv.config.output_dir);

    switch (inv.subcommand) {
      case Experiment::convergence:
        return run_convergence(inv);
      case Experiment::decay:
        return run_decay(inv);
      case Experiment::cavity:
        return run_cavity(inv);
      case Experiment::single:
        return run_single(inv);
    }
  } catch (const std::exception& e) {
    std::cerr << "kvfem: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace kvfem
