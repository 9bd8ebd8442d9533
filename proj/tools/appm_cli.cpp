// Experiment runner: writes the residual curves of one experiment as CSV.
#include <iostream>

#include "CLI11.hpp"
#include "appm/experiment.hpp"

int main(int argc, char** argv) {
  using appm::cli::ExitCode;
  appm::cli::RunConfig cfg;
  CLI::App app{"Accelerated proximal point experiments"};

  std::string scale = "full";
  app.add_option("--experiment,-e", cfg.experiment, "fig1 | fig2 | fig3 | fig4 | fig5 | cert")->required();
  app.add_option("--method,-m", cfg.methods, "ppm | accel | guler1 | guler2 | restart@k (repeatable)");
  app.add_option("--iters", cfg.iters, "iteration count");
  app.add_option("--lambda", cfg.lambda);
  app.add_option("--mu", cfg.mu);
  app.add_option("--rho", cfg.rho);
  app.add_option("--tau", cfg.tau);
  app.add_option("--sigma", cfg.sigma);
  app.add_option("--gamma", cfg.gamma);
  app.add_option("--seed", cfg.seed);
  app.add_option("--restart", cfg.restart, "also run the accelerated method restarted every k iterations");
  app.add_flag("--adaptive-restart", cfg.adaptive_restart, "restart accelerated runs when the residual grows");
  app.add_option("--n", cfg.n, "horizon N of the toy operators");
  app.add_option("--nmax", cfg.nmax, "largest N for cert");
  app.add_option("--d1", cfg.d1);
  app.add_option("--d2", cfg.d2);
  app.add_option("--p", cfg.p);
  app.add_option("--scale", scale, "full | desk")->check(CLI::IsMember({"full", "desk"}));
  app.add_option("--out,-o", cfg.out, "output CSV path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config);
  }
  cfg.scale = scale == "desk" ? appm::cli::Scale::desk : appm::cli::Scale::full;
  return static_cast<int>(appm::cli::run_experiment(cfg));
}
