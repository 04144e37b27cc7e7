#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "fptb/boundary.hpp"
#include "fptb/errors.hpp"

namespace fptb {
namespace fourier {

// Spectral weight for the heat-kernel representation.  The weight is
// user-supplied; the default is the unit Gaussian exp(-y^2/2), which has
// the closed-form image (2 pi (1+tau))^{-1/2} exp(-x^2 / (2 (1+tau))).
struct FourierData {
  std::function<double(double)> pi_fn = [](double y) {
    return std::exp(-0.5 * y * y);
  };
  double y_max = 12.0;
  int n_y = 512;
};

namespace detail {

inline std::complex<double> omega_quadrature(const FourierData& fd, double tau,
                                             double x, int n_y) {
  // Trapezoid over [-y_max, y_max]; spectrally accurate for weights that
  // decay (or vanish identically) at the truncation edge.
  const double h = 2.0 * fd.y_max / n_y;
  std::complex<double> acc = 0.0;
  for (int i = 0; i <= n_y; ++i) {
    const double y = -fd.y_max + h * i;
    const double amp = fd.pi_fn(y) * std::exp(-0.5 * y * y * tau);
    const std::complex<double> term =
        amp * std::complex<double>(std::cos(y * x), std::sin(y * x));
    acc += (i == 0 || i == n_y) ? 0.5 * term : term;
  }
  return acc * (h / (2.0 * std::numbers::pi));
}

}  // namespace detail

// omega(tau, x) = (1/2 pi) int Pi(y) exp(-y^2 tau / 2 + i y x) dy, real
// part.  A doubling check guards the quadrature: if refining the grid
// moves the result by more than 1e-8 the weight was not resolved.
inline double heat_omega(const FourierData& fd, double tau, double x) {
  if (!(tau >= 0.0)) throw std::invalid_argument("heat_omega: tau must be >= 0");
  if (fd.n_y < 8) throw std::invalid_argument("heat_omega: n_y must be >= 8");
  if (!fd.pi_fn) throw std::invalid_argument("heat_omega: pi_fn not set");
  const std::complex<double> coarse = detail::omega_quadrature(fd, tau, x, fd.n_y);
  const std::complex<double> fine = detail::omega_quadrature(fd, tau, x, 2 * fd.n_y);
  const double drift = std::abs(fine - coarse);
  if (drift > 1e-8 * std::max(1.0, std::abs(fine))) {
    throw NumericalError("heat_omega: quadrature not converged (raise n_y or y_max)");
  }
  return fine.real();
}

// w(t, a) = exp(1/2 int_t^s (f')^2 du + a f'(t)) * omega(s-t, a + int_t^s f' du).
inline double w_from_heat(const Boundary& b, const FourierData& fd, double s,
                          double t, double a) {
  if (!(t >= 0.0) || t > s) throw std::invalid_argument("w_from_heat: need 0 <= t <= s");
  const double amp = std::exp(0.5 * b.integral_fp_sq(t, s) + a * b.fp(t));
  return amp * heat_omega(fd, s - t, a + b.integral_fp(t, s));
}

}  // namespace fourier
}  // namespace fptb
