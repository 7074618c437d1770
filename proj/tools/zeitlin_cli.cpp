// Command line front end: simulate, precompute a basis cache, or extract an
// energy spectrum from a checkpoint.

#include "zeitlin/zeitlin.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace zeitlin;

int run_simulate(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& overrides,
                 const std::optional<std::string>& resume) {
  SimConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  RunOptions opts;
  if (resume) opts.resume = *resume;
  return run(cfg, opts);
}

int run_basis(int n, const std::string& out) {
  try {
    io::write_basis(out, compute_basis(n));
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

int run_spectrum(const std::string& checkpoint, const std::string& basis_path, const std::string& out) {
  try {
    const io::Checkpoint ck = io::read_checkpoint(checkpoint);
    const QuantizedBasis basis = io::read_basis(basis_path);
    if (basis.n() != ck.w.rows()) {
      std::cerr << "config error: basis N=" << basis.n() << " does not match checkpoint N=" << ck.w.rows()
                << '\n';
      return kExitConfig;
    }
    io::write_spectrum_csv(out, energy_spectrum(extract(ck.w, basis)));
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir-preserving Euler equations on the sphere"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a simulation");
  sim->set_help_flag("--help", "print this help message and exit");  // frees -h for the step size
  std::string config_path;
  std::optional<std::string> resume;
  std::vector<std::pair<std::string, std::string>> overrides;
  sim->add_option("--config", config_path, "key=value configuration file");
  sim->add_option("--resume", resume, "checkpoint to continue from");
  for (const char* key : {"n", "h", "steps", "seed", "tol", "threads"}) {
    sim->add_option_function<std::string>(
        std::string("--") + key, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        std::string("override '") + key + "'");
  }
  sim->add_option_function<std::string>(
      "--output-dir", [&overrides](const std::string& v) { overrides.emplace_back("output_dir", v); },
      "override 'output_dir'");

  auto* basis = app.add_subcommand("basis", "precompute a basis cache");
  int basis_n = 0;
  std::string basis_out;
  basis->add_option("--n", basis_n, "matrix size")->required();
  basis->add_option("--out", basis_out, "output file")->required();

  auto* spec = app.add_subcommand("spectrum", "energy spectrum of a checkpoint");
  std::string spec_ck, spec_basis, spec_out;
  spec->add_option("--checkpoint", spec_ck)->required();
  spec->add_option("--basis", spec_basis)->required();
  spec->add_option("--out", spec_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : zeitlin::kExitConfig;
  }

  if (*sim) return run_simulate(config_path, overrides, resume);
  if (*basis) return run_basis(basis_n, basis_out);
  return run_spectrum(spec_ck, spec_basis, spec_out);
}
