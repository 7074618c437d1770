#pragma once

// Simulation driver: configuration, random initial data, the time loop,
// checkpoints and diagnostics output.

#include "zeitlin/basis.hpp"
#include "zeitlin/diagnostics.hpp"
#include "zeitlin/integrator.hpp"
#include "zeitlin/io.hpp"
#include "zeitlin/matrix.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace zeitlin {

enum class TimeUnits {
  absorbed,  ///< commutator scale 1; N^{3/2}/sqrt(16 pi) absorbed into h
  physical,  ///< commutator scaled by N^{3/2}/sqrt(16 pi)
  semiclassical,  ///< commutator scaled by N/2; vorticity values track the eigenvalues of W
};

struct SimConfig {
  int n = 64;
  double h = 0.0;  ///< 0 selects the default step
  std::int64_t steps = 0;
  double tol = 1e-12;
  int max_iter = 10;
  std::uint64_t seed = 1;
  int l_min = 2;
  int l_max = 20;
  std::int64_t sample_every = 5000;
  std::int64_t checkpoint_every = 0;  ///< 0 disables periodic checkpoints
  std::filesystem::path output_dir = "out";
  int threads = 0;  ///< 0 keeps the runtime default
  bool deterministic = false;
  TimeUnits time_units = TimeUnits::absorbed;
  bool write_spectrum = true;
  bool write_grid = false;
  int l_render = 0;  ///< 0 selects min(N-1, 512)
  int k_max = 5;
  double basis_memory_mb = 512.0;  ///< above this the basis is cached on disk between samples

  double comm_scale() const {
    switch (time_units) {
      case TimeUnits::physical: return physical_commutator_scale(n);
      case TimeUnits::semiclassical: return 0.5 * n;
      case TimeUnits::absorbed: break;
    }
    return 1.0;
  }
  int render_degree() const { return l_render > 0 ? l_render : std::min(n - 1, 512); }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (n < 2) fail("n must be >= 2");
    if (l_min < 2 || l_min > l_max || l_max > n - 1) {
      fail("need 2 <= l_min <= l_max <= n-1 (got l_min=" + std::to_string(l_min) +
           ", l_max=" + std::to_string(l_max) + ", n=" + std::to_string(n) + ")");
    }
    if (h < 0.0) fail("h must be > 0");
    if (steps < 0) fail("steps must be >= 0");
    if (!(tol > 0.0)) fail("tol must be > 0");
    if (max_iter < 1) fail("max_iter must be >= 1");
    if (sample_every < 1) fail("sample_every must be >= 1");
    if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
    if (k_max < 2 || k_max > n) fail("k_max must be in [2, n]");
    if (l_render < 0 || l_render > n - 1) fail("l_render must be in [0, n-1]");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value for '" + key + "': " + value);
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + value);
}

}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(SimConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  if (key == "n") cfg.n = parse_number<int>(key, value);
  else if (key == "h") cfg.h = parse_number<double>(key, value);
  else if (key == "steps") cfg.steps = parse_number<std::int64_t>(key, value);
  else if (key == "tol") cfg.tol = parse_number<double>(key, value);
  else if (key == "max_iter") cfg.max_iter = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "l_min") cfg.l_min = parse_number<int>(key, value);
  else if (key == "l_max") cfg.l_max = parse_number<int>(key, value);
  else if (key == "sample_every") cfg.sample_every = parse_number<std::int64_t>(key, value);
  else if (key == "checkpoint_every") cfg.checkpoint_every = parse_number<std::int64_t>(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "threads") cfg.threads = parse_number<int>(key, value);
  else if (key == "deterministic") cfg.deterministic = parse_bool(key, value);
  else if (key == "write_spectrum") cfg.write_spectrum = parse_bool(key, value);
  else if (key == "write_grid") cfg.write_grid = parse_bool(key, value);
  else if (key == "l_render") cfg.l_render = parse_number<int>(key, value);
  else if (key == "k_max") cfg.k_max = parse_number<int>(key, value);
  else if (key == "basis_memory_mb") cfg.basis_memory_mb = parse_number<double>(key, value);
  else if (key == "time_units") {
    if (value == "absorbed") cfg.time_units = TimeUnits::absorbed;
    else if (value == "physical") cfg.time_units = TimeUnits::physical;
    else if (value == "semiclassical") cfg.time_units = TimeUnits::semiclassical;
    else throw ConfigError("time_units must be 'absorbed', 'physical' or 'semiclassical'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Flat key=value text; '#' starts a comment.
inline SimConfig parse_config(std::istream& in, SimConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Initial data

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Random coefficients on l_min <= l <= l_max: |omega_lm| uniform in [0.8, 1.2]
/// with uniform phase for m > 0, random sign for m = 0, and the reality
/// condition for m < 0.
inline HarmonicCoefficients random_coefficients(const SimConfig& cfg, std::mt19937_64& rng) {
  if (cfg.l_max >= cfg.n) throw ConfigError("l_max must be < n");
  HarmonicCoefficients c(cfg.n);
  for (int l = cfg.l_min; l <= cfg.l_max; ++l) {
    for (int m = 0; m <= l; ++m) {
      const double amp = 0.8 + 0.4 * uniform01(rng);
      const double u = uniform01(rng);
      if (m == 0) {
        c(l, 0) = u < 0.5 ? -amp : amp;
      } else {
        c(l, m) = std::polar(amp, 2.0 * std::numbers::pi * u);
        c(l, -m) = ((m % 2) ? -1.0 : 1.0) * std::conj(c(l, m));
      }
    }
  }
  return c;
}

/// Projects random coefficients and rescales to unit spectral norm.
inline Matrix random_initial_condition(const SimConfig& cfg, const QuantizedBasis& basis,
                                       std::mt19937_64& rng) {
  if (basis.n() != cfg.n) throw std::invalid_argument("random_initial_condition: basis N mismatch");
  Matrix w = project(random_coefficients(cfg, rng), basis);
  const double norm = spectral_norm_skew(w);
  w /= norm;
  return w;
}

inline Matrix random_initial_condition(const SimConfig& cfg, const QuantizedBasis& basis) {
  std::mt19937_64 rng(cfg.seed);
  return random_initial_condition(cfg, basis, rng);
}

/// Advective number h * comm_scale * ||P_0||_2 used when no step is given.
/// At 0.1 the fixed point needs 8-12 iterations for N <= 64; at 0.01 it needs 4-6.
inline constexpr double kDefaultAdvectiveNumber = 0.01;

inline double default_time_step(const QuantizedLaplacian& lap, const Matrix& w0, double comm_scale,
                                double advective = kDefaultAdvectiveNumber) {
  const double p_norm = spectral_norm_skew(lap.solve_stream(w0));
  if (!(p_norm > 0.0)) throw ConfigError("cannot choose a default step for zero initial data");
  return advective / (comm_scale * p_norm);
}

// ---------------------------------------------------------------------------
// Run

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> resume;
  std::ostream* log = nullptr;
};

/// Keeps the basis in memory when small, otherwise on disk between samples.
class BasisStore {
 public:
  BasisStore(QuantizedBasis basis, const std::filesystem::path& cache, double memory_mb) {
    const double bytes = 8.0 * basis.n() * basis.n() * basis.n() / 3.0;
    if (bytes <= memory_mb * 1024.0 * 1024.0) {
      basis_ = std::move(basis);
    } else {
      io::write_basis(cache, basis);
      cache_ = cache;
    }
  }

  template <typename F>
  void with(F&& f) const {
    if (basis_) {
      f(*basis_);
    } else {
      const QuantizedBasis b = io::read_basis(cache_);
      f(b);
    }
  }

 private:
  std::optional<QuantizedBasis> basis_;
  std::filesystem::path cache_;
};

class Simulation {
 public:
  explicit Simulation(SimConfig cfg, RunOptions opts = {}) : cfg_(std::move(cfg)), opts_(std::move(opts)) {}

  /// Runs to completion; returns an ExitCode.
  int run() {
    try {
      cfg_.validate();
      set_thread_count(cfg_.threads);
      std::optional<io::Checkpoint> ck;
      if (opts_.resume) {
        ck = io::read_checkpoint(*opts_.resume);
        if (ck->w.rows() != cfg_.n) throw ConfigError("checkpoint N does not match config n");
        cfg_.seed = ck->seed;
      }
      std::filesystem::create_directories(cfg_.output_dir);
      execute(ck);
      return kExitOk;
    } catch (const ConfigError& e) {
      log() << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::invalid_argument& e) {
      log() << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const SolverError& e) {
      log() << "solver failure: " << e.what() << '\n';
      return kExitSolver;
    } catch (const IoError& e) {
      log() << "I/O error: " << e.what() << '\n';
      return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
      log() << "I/O error: " << e.what() << '\n';
      return kExitIo;
    }
  }

  const SimConfig& config() const { return cfg_; }
  double time_step() const { return h_; }
  const std::vector<DiagnosticsRecord>& records() const { return records_; }

 private:
  std::ostream& log() { return opts_.log ? *opts_.log : std::cerr; }

  std::filesystem::path out(const std::string& name) const { return cfg_.output_dir / name; }

  static std::string step_tag(std::int64_t step) {
    std::ostringstream os;
    os << std::setw(9) << std::setfill('0') << step;
    return os.str();
  }

  void execute(const std::optional<io::Checkpoint>& ck) {
    const int n = cfg_.n;
    QuantizedBasis basis = compute_basis(n);
    std::mt19937_64 rng(cfg_.seed);
    const Matrix w0 = random_initial_condition(cfg_, basis, rng);
    if (ck) {
      std::istringstream is(ck->rng_state);
      is >> rng;
      if (!is) throw IoError("checkpoint rng state is unreadable");
    }

    StepperParams params;
    params.comm_scale = cfg_.comm_scale();
    params.tol = cfg_.tol;
    params.max_iter = cfg_.max_iter;
    params.deterministic = cfg_.deterministic;
    IsospectralMidpoint probe(n, params);
    h_ = cfg_.h > 0.0 ? cfg_.h : default_time_step(probe.laplacian(), w0, params.comm_scale);
    params.h = h_;
    const IsospectralMidpoint stepper(n, params);

    reference_ = casimirs(w0, cfg_.k_max);
    BasisStore store(std::move(basis), out("basis.zeb"), cfg_.basis_memory_mb);

    StepperState state = ck ? stepper.make_state(ck->w, ck->time, static_cast<std::int64_t>(ck->step))
                            : stepper.make_state(w0);

    std::ofstream diag = open_diagnostics(ck.has_value(), state.time);
    log() << "N=" << n << " h=" << h_ << " comm_scale=" << params.comm_scale
          << " steps=" << cfg_.steps << (ck ? " (resumed at step " + std::to_string(state.step_index) + ")" : "")
          << '\n';

    if (state.step_index % cfg_.sample_every == 0 || state.step_index == cfg_.steps) {
      sample(stepper, state, store, diag);
    }
    const auto t_start = std::chrono::steady_clock::now();
    const std::int64_t first_step = state.step_index;
    while (state.step_index < cfg_.steps) {
      try {
        stepper.step(state);
      } catch (const SolverError& e) {
        throw SolverError("step " + std::to_string(state.step_index + 1) + ": " + e.what(),
                          e.residual(), e.iterations());
      }
      const std::int64_t s = state.step_index;
      if (s % cfg_.sample_every == 0 || s == cfg_.steps) {
        sample(stepper, state, store, diag);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        log() << "step " << s << " t=" << state.time << " iters=" << state.last_iterations
              << " sec/step=" << elapsed / static_cast<double>(s - first_step) << '\n';
      }
      if (cfg_.checkpoint_every > 0 && s % cfg_.checkpoint_every == 0) checkpoint(state, rng);
    }
    checkpoint(state, rng);
  }

  std::ofstream open_diagnostics(bool resumed, double resume_time) {
    const auto path = out("diagnostics.csv");
    std::vector<std::string> kept;
    if (resumed && std::filesystem::exists(path)) {
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        if (std::stod(line.substr(0, comma)) < resume_time) kept.push_back(line);
      }
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string());
    f << io::diagnostics_header(cfg_.k_max) << '\n';
    for (const auto& line : kept) f << line << '\n';
    return f;
  }

  void sample(const IsospectralMidpoint& stepper, const StepperState& state, const BasisStore& store,
              std::ofstream& diag) {
    DiagnosticsRecord rec;
    rec.step = state.step_index;
    rec.time = state.time;
    const auto drift = casimir_drift({{0.0, reference_}, {state.time, casimirs(state.w, cfg_.k_max)}});
    rec.casimir_rel_err = drift.back().error;
    rec.hamiltonian = hamiltonian(stepper.laplacian(), state.w);
    rec.mean_energy = rec.hamiltonian / kHamiltonianScale;
    if (cfg_.write_spectrum || cfg_.write_grid) {
      store.with([&](const QuantizedBasis& basis) {
        const HarmonicCoefficients coeffs = extract(state.w, basis);
        rec.spectrum = energy_spectrum(coeffs);
        rec.mean_energy = rec.spectrum.total();
        if (cfg_.write_spectrum) {
          io::write_spectrum_csv(out("spectrum_" + step_tag(rec.step) + ".csv"), rec.spectrum);
        }
        if (cfg_.write_grid) {
          const int l = cfg_.render_degree();
          GridField g = evaluate_on_grid(coeffs, 2 * l, 4 * l, l);
          g.time = state.time;
          io::write_grid(out("grid_" + step_tag(rec.step) + ".zgd"), g);
        }
      });
    }
    diag << io::diagnostics_row(rec) << '\n';
    diag.flush();
    if (!diag) throw IoError("write failed: diagnostics.csv");
    records_.push_back(std::move(rec));
  }

  void checkpoint(const StepperState& state, const std::mt19937_64& rng) const {
    io::Checkpoint ck;
    ck.step = static_cast<std::uint64_t>(state.step_index);
    ck.time = state.time;
    ck.seed = cfg_.seed;
    std::ostringstream os;
    os << rng;
    ck.rng_state = os.str();
    ck.w = state.w;
    io::write_checkpoint(out("checkpoint_" + step_tag(state.step_index) + ".zck"), ck);
  }

  SimConfig cfg_;
  RunOptions opts_;
  double h_ = 0.0;
  std::vector<double> reference_;
  std::vector<DiagnosticsRecord> records_;
};

inline int run(const SimConfig& cfg, RunOptions opts = {}) { return Simulation(cfg, std::move(opts)).run(); }

}  // namespace zeitlin
