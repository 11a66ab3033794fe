// fmx: parameter scans over periodically driven oscillators and the kicked
// rotor. Exit codes: 0 success, 2 usage error, 1 numerical or I/O failure.

#include <CLI11.hpp>

#include <iostream>

#include "fmx/cli.hpp"

namespace {

constexpr const char* kSubcommandHelp =
    "entropy | energy-scan | level-stats | magnus-ratios | tc-estimate | resonance-scan | kicked-scan | oracle-check";

}  // namespace

int main(int argc, char** argv) {
  using fmx::cli::RunConfig;
  RunConfig cfg;
  CLI::App app{"Floquet-Magnus convergence and driven-oscillator scans", "fmx"};
  app.set_version_flag("--version", fmx::cli::kVersion);
  app.set_config("--config", "", "Key = value (TOML/INI) file; command-line flags take precedence");

  app.add_option("subcommand", cfg.subcommand, kSubcommandHelp)->required();

  app.add_option("--model", cfg.model, "driven-ho | parametric-ho | anharmonic | kicked-rotor")->capture_default_str();
  app.add_option("--omega0", cfg.omega0, "Oscillator frequency")->capture_default_str();
  app.add_option("--g", cfg.g, "Drive amplitude")->capture_default_str();
  app.add_option("--beta", cfg.betas, "Quartic coupling(s); anharmonic model only")->capture_default_str()->delimiter(',');
  app.add_option("--K", cfg.K, "Kick strength (kicked rotor)")->capture_default_str();

  app.add_option("--dims", cfg.dims, "Truncation dimension(s)")->capture_default_str()->delimiter(',');
  app.add_option("--t-min", cfg.t_min, "First period of the T grid");
  app.add_option("--t-max", cfg.t_max, "Last period of the T grid (inclusive)");
  app.add_option("--t-step", cfg.t_step, "T grid step");
  app.add_option("--t-list", cfg.t_list, "Explicit periods (overrides min/max/step)")->delimiter(',');
  app.add_flag("--t-in-4pi", cfg.t_in_4pi, "Kicked rotor: grid values are T/(4 pi)");

  app.add_option("--order", cfg.order, "Magnus order N")->capture_default_str();
  app.add_option("--precision", cfg.precision, "double | extended | quad | octuple")->capture_default_str();
  app.add_flag("--certify,!--no-certify", cfg.certify, "Certify Magnus terms against the next precision")
      ->capture_default_str();
  app.add_option("--certify-tol", cfg.certify_tol, "Relative deviation accepted by certification")->capture_default_str();
  app.add_option("--certify-scope", cfg.certify_scope, "tc-estimate: series | element")
      ->capture_default_str()
      ->check(CLI::IsMember({"series", "element"}));
  std::vector<int> element{cfg.elem_i, cfg.elem_j};
  app.add_option("--element", element, "Matrix element i,j")->expected(2)->delimiter(',')->capture_default_str();
  app.add_option("--norm", cfg.norm, "element | frobenius")->capture_default_str();
  app.add_option("--ratio-stride", cfg.ratio_stride, "Orders spanned by each ratio (root-test step)")->capture_default_str();
  app.add_option("--limit-tol", cfg.limit_tol, "Agreement required between consecutive dims")->capture_default_str();
  app.add_option("--plateau-eps", cfg.plateau_eps, "Relative step allowed inside a plateau")->capture_default_str();
  app.add_option("--plateau-min-len", cfg.plateau_min_len, "Minimum plateau length")->capture_default_str();
  app.add_option("--n-min", cfg.n_min, "Start of the asymptotic regime (overrides the detector)");
  app.add_option("--asym-window", cfg.asym_window, "Detector window length")->capture_default_str();
  app.add_option("--asym-smooth", cfg.asym_smooth, "Detector tolerance on steps of n*rho")->capture_default_str();

  app.add_option("--n-av", cfg.n_av, "Averaging horizons")->capture_default_str()->delimiter(',');
  app.add_option("--bins", cfg.bins, "Histogram bins")->capture_default_str();
  app.add_option("--energy-max", cfg.energy_max, "entropy: drop states above this energy (0 keeps all)")
      ->capture_default_str();
  app.add_flag("--series", cfg.series, "kicked-scan: emit E(nT) for n <= n-max");
  app.add_option("--n-max", cfg.n_max, "kicked-scan series length")->capture_default_str();

  std::string format = "csv";
  app.add_option("-o,--output", cfg.output, "Output file (default stdout)");
  app.add_option("--format", format, "csv | json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", cfg.workers, "Worker threads (default FMX_WORKERS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.elem_i = element[0];
  cfg.elem_j = element[1];
  cfg.format = format == "json" ? fmx::cli::Format::Json : fmx::cli::Format::Csv;

  try {
    const auto result = fmx::cli::run(cfg);
    if (cfg.output.empty())
      fmx::cli::emit(result, cfg.format, std::cout);
    else
      fmx::cli::emit(result, cfg.format, cfg.output);
  } catch (const fmx::cli::UsageError& e) {
    std::cerr << "fmx: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fmx " << cfg.subcommand << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
