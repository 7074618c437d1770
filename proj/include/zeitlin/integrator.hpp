#pragma once

// Isospectral midpoint integrator for W' = [P, W], Delta_N P = W.
//
//   W_n     = (I - h/2 P~) W~ (I + h/2 P~)
//   W_{n+1} = (I + h/2 P~) W~ (I - h/2 P~),      P~ = Delta_N^{-1} W~
//
// W~ is found by fixed-point iteration. P and W are skew-Hermitian, so
// W~ P~ = (P~ W~)^H and every update costs two dense products: P~W~ and
// (P~W~)P~.
//
// W~ itself is not traceless: Tr W~ = (h/2)^2 Tr(P~^2 W~). Its identity
// component lies in the kernel of Delta_N and is dropped when forming P~.

#include "zeitlin/laplacian.hpp"
#include "zeitlin/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace zeitlin {

/// Commutator scale N^{3/2} / sqrt(16 pi) that makes the matrix bracket converge
/// to the Poisson bracket on the sphere.
inline double physical_commutator_scale(int n) {
  return std::pow(static_cast<double>(n), 1.5) / std::sqrt(16.0 * std::numbers::pi);
}

struct StepperParams {
  double h = 0.0;          ///< time step, in simulation time units
  double tol = 1e-12;      ///< fixed-point tolerance, entrywise infinity norm
  int max_iter = 10;
  double comm_scale = 1.0; ///< multiplies the commutator; the solver uses h * comm_scale
  bool deterministic = false;

  double effective_step() const { return h * comm_scale; }
};

struct StepperState {
  Matrix w;
  double time = 0.0;
  std::int64_t step_index = 0;
  StepperParams params;
  int last_iterations = 0;
  double last_residual = 0.0;
};

struct FixedPointResult {
  Matrix w_tilde;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

// out = base + (a/2)(PX - (PX)^H) + sign_b (a^2/4) (PX)P, with P = Delta^{-1} X.
// Two dense products.
inline void conjugation_update(const QuantizedLaplacian& lap, const Matrix& x, const Matrix& base,
                               double a, double sign_b, bool deterministic, Matrix& px,
                               Matrix& pxp, Matrix& out) {
  const Matrix p = lap.solve_stream(x, TracePolicy::project);
  multiply(p, x, px, deterministic);
  multiply(px, p, pxp, deterministic);
  out = base;
  out += (0.5 * a) * (px - px.adjoint());
  out += (sign_b * 0.25 * a * a) * pxp;
}

}  // namespace detail

/// Solves the implicit midpoint stage for W~, starting from W~ = W_n.
/// `h` is the effective step (commutator scale included).
inline FixedPointResult fixed_point_solve(const QuantizedLaplacian& lap, const Matrix& w_n,
                                          double h, double tol, int max_iter,
                                          bool deterministic = false) {
  require_square(w_n, lap.n(), "fixed_point_solve");
  if (!(h >= 0.0)) throw std::invalid_argument("fixed_point_solve: h must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("fixed_point_solve: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("fixed_point_solve: max_iter must be >= 1");

  Matrix current = w_n;
  Matrix next, px, pxp;
  double residual = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    detail::conjugation_update(lap, current, w_n, h, +1.0, deterministic, px, pxp, next);
    residual = max_abs(next - current);
    current.swap(next);
    if (residual <= tol) return {std::move(current), k, residual};
  }
  throw SolverError("fixed point iteration did not converge in " + std::to_string(max_iter) +
                        " iterations (residual " + std::to_string(residual) + ")",
                    residual, max_iter);
}

/// W_{n+1} from a converged W~.
inline Matrix midpoint_update(const QuantizedLaplacian& lap, const Matrix& w_tilde, double h,
                              bool deterministic = false) {
  Matrix px, pxp, out;
  detail::conjugation_update(lap, w_tilde, w_tilde, h, -1.0, deterministic, px, pxp, out);
  return out;
}

/// W_n recovered from W~ through the first line of the scheme; for consistency checks.
inline Matrix reconstruct_previous(const QuantizedLaplacian& lap, const Matrix& w_tilde, double h) {
  return midpoint_update(lap, w_tilde, -h);
}

inline StepperState midpoint_step(const QuantizedLaplacian& lap, StepperState state) {
  const StepperParams& p = state.params;
  if (!(p.h > 0.0)) throw std::invalid_argument("midpoint_step: h must be > 0");
  const double h = p.effective_step();
  FixedPointResult fp = fixed_point_solve(lap, state.w, h, p.tol, p.max_iter, p.deterministic);
  state.w = midpoint_update(lap, fp.w_tilde, h, p.deterministic);
  state.time += p.h;
  state.step_index += 1;
  state.last_iterations = fp.iterations;
  state.last_residual = fp.residual;
  return state;
}

/// Stepper that owns the Laplacian for one N.
class IsospectralMidpoint {
 public:
  IsospectralMidpoint(int n, StepperParams params) : lap_(n), params_(params) {}

  const QuantizedLaplacian& laplacian() const { return lap_; }
  const StepperParams& params() const { return params_; }

  StepperState make_state(Matrix w, double time = 0.0, std::int64_t step = 0) const {
    require_square(w, lap_.n(), "IsospectralMidpoint");
    StepperState s;
    s.w = std::move(w);
    s.time = time;
    s.step_index = step;
    s.params = params_;
    return s;
  }

  void step(StepperState& state) const { state = midpoint_step(lap_, std::move(state)); }

 private:
  QuantizedLaplacian lap_;
  StepperParams params_;
};

/// Casimirs C_k = Tr(W^k), k = 1..k_max, by repeated multiplication.
/// Tr(W^k) is real for even k and imaginary for odd k (W skew-Hermitian); the
/// nonvanishing part is reported: Re for even k, Im for odd k.
inline std::vector<double> casimirs(const Matrix& w, int k_max) {
  if (w.rows() != w.cols()) throw std::invalid_argument("casimirs: matrix is not square");
  if (k_max < 1 || k_max > w.rows()) throw std::invalid_argument("casimirs: k_max out of range");
  std::vector<double> c(k_max);
  Matrix power = w;
  Matrix tmp;
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1) {
      tmp.noalias() = power * w;
      power.swap(tmp);
    }
    const Complex t = power.trace();
    c[k - 1] = (k % 2 == 0) ? t.real() : t.imag();
  }
  return c;
}

/// Same quantities from eigenvalues of W.
inline std::vector<double> casimirs_from_eigenvalues(const Eigen::VectorXcd& eigenvalues, int k_max) {
  std::vector<double> c(k_max);
  for (int k = 1; k <= k_max; ++k) {
    Complex t = 0.0;
    for (const Complex& lam : eigenvalues) t += std::pow(lam, k);
    c[k - 1] = (k % 2 == 0) ? t.real() : t.imag();
  }
  return c;
}

}  // namespace zeitlin
