#pragma once

#include "zeitlin/basis.hpp"
#include "zeitlin/laplacian.hpp"
#include "zeitlin/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace zeitlin {

/// Normalization constant of the discrete Hamiltonian.
inline constexpr double kHamiltonianScale = 1.0;

/// H = -1/2 Re Tr(W^H P), P = Delta_N^{-1} W. Nonnegative.
inline double hamiltonian(const QuantizedLaplacian& lap, const Matrix& w) {
  const Matrix p = lap.solve_stream(w);
  return -0.5 * real_inner(w, p) * kHamiltonianScale;
}

/// Kinetic energy per degree l = 1..N-1. `by_degree[0]` is unused and zero.
struct EnergySpectrum {
  std::vector<double> by_degree;

  int max_degree() const { return static_cast<int>(by_degree.size()) - 1; }
  double operator[](int l) const { return by_degree.at(l); }

  /// K = sum_l E(l)
  double total() const {
    double k = 0.0;
    for (double e : by_degree) k += e;
    return k;
  }
};

/// E(l) = sum_m |omega_lm|^2 / (2 l (l+1)).
inline EnergySpectrum energy_spectrum(const HarmonicCoefficients& coeffs) {
  EnergySpectrum s;
  s.by_degree.assign(coeffs.n(), 0.0);
  for (int l = 1; l < coeffs.n(); ++l) {
    double acc = 0.0;
    for (int m = -l; m <= l; ++m) acc += std::norm(coeffs(l, m));
    s.by_degree[l] = acc / (2.0 * l * (l + 1.0));
  }
  return s;
}

/// Coefficient-space Hamiltonian; equal to hamiltonian() by Parseval.
inline double hamiltonian(const HarmonicCoefficients& coeffs) {
  return energy_spectrum(coeffs).total() * kHamiltonianScale;
}

// ---------------------------------------------------------------------------
// Grid evaluation

/// Real field on an equiangular grid. Rows are colatitudes
/// theta_j = pi j / (n_lat - 1) (poles included), columns longitudes
/// phi_k = 2 pi k / n_lon. Row-major.
struct GridField {
  int n_lat = 0;
  int n_lon = 0;
  double time = 0.0;
  std::vector<double> values;

  double& operator()(int j, int k) { return values[static_cast<std::size_t>(j) * n_lon + k]; }
  double operator()(int j, int k) const {
    return values[static_cast<std::size_t>(j) * n_lon + k];
  }
  double colatitude(int j) const { return std::numbers::pi * j / (n_lat - 1); }
  double longitude(int k) const { return 2.0 * std::numbers::pi * k / n_lon; }

  /// Trapezoidal quadrature of f over the sphere with area element sin(theta).
  template <typename F>
  double integrate(F&& f) const {
    const double dtheta = std::numbers::pi / (n_lat - 1);
    const double dphi = 2.0 * std::numbers::pi / n_lon;
    double acc = 0.0;
    for (int j = 0; j < n_lat; ++j) {
      const double wj = (j == 0 || j == n_lat - 1) ? 0.5 : 1.0;
      double row = 0.0;
      for (int k = 0; k < n_lon; ++k) row += f((*this)(j, k));
      acc += wj * std::sin(colatitude(j)) * row;
    }
    return acc * dtheta * dphi;
  }
};

/// Orthonormal associated Legendre functions Pbar_lm(cos theta) for
/// 0 <= m <= l <= l_max, with the Condon-Shortley phase, so that
/// Y_lm = Pbar_lm e^{i m phi} has unit L2 norm on the sphere.
/// Stored at index l (l+1)/2 + m.
inline std::vector<double> normalized_legendre(int l_max, double theta) {
  const double x = std::cos(theta);
  const double y = std::sin(theta);
  std::vector<double> p(static_cast<std::size_t>(l_max + 1) * (l_max + 2) / 2, 0.0);
  auto at = [](int l, int m) { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; };
  double pmm = std::sqrt(1.0 / (4.0 * std::numbers::pi));
  for (int m = 0; m <= l_max; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * y;
    p[at(m, m)] = pmm;
    if (m + 1 <= l_max) p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= l_max; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p[at(l, m)] = a * (x * p[at(l - 1, m)] - b * p[at(l - 2, m)]);
    }
  }
  return p;
}

/// omega(theta, phi) = sum_{1 <= l <= l_render} sum_m omega_lm Y_lm(theta, phi).
inline GridField evaluate_on_grid(const HarmonicCoefficients& coeffs, int n_lat, int n_lon,
                                  int l_render = -1) {
  if (n_lat < 2 || n_lon < 2) throw std::invalid_argument("evaluate_on_grid: grid too small");
  const int l_max = l_render < 0 ? coeffs.max_degree() : l_render;
  if (l_max < 1 || l_max > coeffs.max_degree()) {
    throw std::invalid_argument("evaluate_on_grid: render degree out of range");
  }
  if (coeffs.reality_residual() > kRealityTol * std::max(1.0, coeffs.max_abs())) {
    throw std::invalid_argument("evaluate_on_grid: coefficients violate the reality condition");
  }
  GridField g;
  g.n_lat = n_lat;
  g.n_lon = n_lon;
  g.values.assign(static_cast<std::size_t>(n_lat) * n_lon, 0.0);

  // e^{i m phi_k}, one row per longitude
  std::vector<Complex> phase(static_cast<std::size_t>(n_lon) * (l_max + 1));
  for (int k = 0; k < n_lon; ++k) {
    const double phi = g.longitude(k);
    for (int m = 0; m <= l_max; ++m) phase[static_cast<std::size_t>(k) * (l_max + 1) + m] = std::polar(1.0, m * phi);
  }

#pragma omp parallel for schedule(dynamic, 4)
  for (int j = 0; j < n_lat; ++j) {
    const std::vector<double> p = normalized_legendre(l_max, g.colatitude(j));
    // F_m = sum_l omega_lm Pbar_lm; the real field is F_0 + 2 Re sum_{m>0} F_m e^{i m phi}.
    std::vector<Complex> f(l_max + 1, 0.0);
    for (int m = 0; m <= l_max; ++m) {
      for (int l = std::max(m, 1); l <= l_max; ++l) {
        f[m] += coeffs(l, m) * p[static_cast<std::size_t>(l) * (l + 1) / 2 + m];
      }
    }
    for (int k = 0; k < n_lon; ++k) {
      const Complex* e = &phase[static_cast<std::size_t>(k) * (l_max + 1)];
      double v = f[0].real();
      for (int m = 1; m <= l_max; ++m) v += 2.0 * (f[m] * e[m]).real();
      g(j, k) = v;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Casimir drift

struct CasimirSample {
  double time = 0.0;
  std::vector<double> values;  // C_1..C_kmax as returned by casimirs()
};

/// Relative drift of C_k, k = 2..k_max, against the first sample.
struct CasimirDrift {
  double time = 0.0;
  std::vector<double> error;    // index 0 is k = 2
  std::vector<bool> absolute;   // true where |C_k(0)| was below the guard
};

/// Below this magnitude the reference value is treated as zero and the
/// absolute error is reported instead.
inline constexpr double kCasimirZeroGuard = 1e-14;

inline std::vector<CasimirDrift> casimir_drift(const std::vector<CasimirSample>& series) {
  std::vector<CasimirDrift> out;
  if (series.empty()) return out;
  const std::vector<double>& ref = series.front().values;
  for (const CasimirSample& s : series) {
    if (s.values.size() != ref.size()) {
      throw std::invalid_argument("casimir_drift: inconsistent number of Casimirs");
    }
    CasimirDrift d;
    d.time = s.time;
    for (std::size_t k = 1; k < ref.size(); ++k) {
      const double diff = std::abs(s.values[k] - ref[k]);
      const bool guard = std::abs(ref[k]) < kCasimirZeroGuard;
      d.error.push_back(guard ? diff : diff / std::abs(ref[k]));
      d.absolute.push_back(guard);
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// One diagnostics sample.
struct DiagnosticsRecord {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<double> casimir_rel_err;  // k = 2..k_max
  double hamiltonian = 0.0;
  EnergySpectrum spectrum;               // may be empty when not sampled
  double mean_energy = 0.0;              // K
};

}  // namespace zeitlin
