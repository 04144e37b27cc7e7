#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fptb {

// Density of the first time standard Brownian motion started at 0 hits the
// fixed level a:
//
//   h(s, a) = |a| / sqrt(2 pi s^3) * exp(-a^2 / (2 s)),   s > 0.
//
// h(s, 0) = 0 for s > 0, and h is symmetric in the sign of a.
inline double level_density(double s, double a) {
  if (!(s > 0.0)) throw std::domain_error("level_density: s must be > 0");
  const double s3 = s * s * s;
  return std::abs(a) / std::sqrt(2.0 * std::numbers::pi * s3) *
         std::exp(-a * a / (2.0 * s));
}

struct ValidationReport {
  bool passed = false;
  bool degenerate_linear = false;  // f'' identically zero on the horizon
  std::vector<std::string> reasons;
};

// A moving boundary f(t) = a + int_0^t f'(u) du with evaluators for f, f',
// f'' and exact integrals of f' and (f')^2.  Two kinds:
//
//   Polynomial: f given by coefficients c0..cK, K <= 4; all evaluators and
//               integrals are closed-form.
//   Tabulated:  f' and f'' sampled on a strictly increasing time grid
//               starting at 0 and interpolated piecewise-linearly; integrals
//               are exact for the interpolant (per-cell Simpson).
//
// Instances are immutable after construction; every method is const and
// safe to call concurrently.
class Boundary {
 public:
  static Boundary polynomial(std::vector<double> coeffs) {
    if (coeffs.empty() || coeffs.size() > 5) {
      throw std::invalid_argument(
          "Boundary::polynomial: need 1..5 coefficients (degree <= 4)");
    }
    for (double c : coeffs) {
      if (!std::isfinite(c)) {
        throw std::invalid_argument("Boundary::polynomial: non-finite coefficient");
      }
    }
    Boundary b;
    b.kind_ = Kind::kPolynomial;
    b.coeffs_ = std::move(coeffs);
    b.init_polynomial();
    return b;
  }

  static Boundary tabulated(double a, std::vector<double> times,
                            std::vector<double> fp, std::vector<double> fpp) {
    if (times.size() < 2 || times.size() != fp.size() ||
        times.size() != fpp.size()) {
      throw std::invalid_argument(
          "Boundary::tabulated: times/fp/fpp must have equal length >= 2");
    }
    if (times.front() != 0.0) {
      throw std::invalid_argument("Boundary::tabulated: grid must start at t = 0");
    }
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (!(times[i] < times[i + 1])) {
        throw std::invalid_argument(
            "Boundary::tabulated: times must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i]) || !std::isfinite(fp[i]) ||
          !std::isfinite(fpp[i])) {
        throw std::invalid_argument("Boundary::tabulated: non-finite entry");
      }
    }
    if (!std::isfinite(a)) {
      throw std::invalid_argument("Boundary::tabulated: non-finite start level");
    }
    Boundary b;
    b.kind_ = Kind::kTabulated;
    b.a_ = a;
    b.times_ = std::move(times);
    b.fp_ = std::move(fp);
    b.fpp_ = std::move(fpp);
    b.init_tabulated();
    return b;
  }

  double a() const { return a_; }

  // Largest time the boundary can be evaluated at (infinite for polynomials).
  double horizon() const {
    return kind_ == Kind::kPolynomial ? std::numeric_limits<double>::infinity()
                                      : times_.back();
  }

  double f(double t) const {
    check_time(t);
    if (kind_ == Kind::kPolynomial) return horner(coeffs_, t);
    const std::size_t i = cell_index(t);
    const double dt = t - times_[i];
    // exact integral of the piecewise-linear f' over the partial cell
    return a_ + prefix_int_fp_[i] + dt * (fp_[i] + fp_at(i, t)) * 0.5;
  }

  double fp(double t) const {
    check_time(t);
    if (kind_ == Kind::kPolynomial) return horner(dcoeffs_, t);
    return fp_at(cell_index(t), t);
  }

  double fpp(double t) const {
    check_time(t);
    if (kind_ == Kind::kPolynomial) return horner(ddcoeffs_, t);
    const std::size_t i = cell_index(t);
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return fpp_[i] + w * (fpp_[i + 1] - fpp_[i]);
  }

  // int_{t0}^{t1} f'(u) du == f(t1) - f(t0)
  double integral_fp(double t0, double t1) const {
    check_range(t0, t1);
    return f(t1) - f(t0);
  }

  // int_{t0}^{t1} (f'(u))^2 du; closed-form for polynomials, per-cell
  // Simpson (exact for the piecewise-linear interpolant) when tabulated.
  double integral_fp_sq(double t0, double t1) const {
    check_range(t0, t1);
    if (kind_ == Kind::kPolynomial) {
      return horner(int_fp_sq_coeffs_, t1) - horner(int_fp_sq_coeffs_, t0);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
      const double lo = std::max(t0, times_[i]);
      const double hi = std::min(t1, times_[i + 1]);
      if (lo >= hi) continue;
      const double g0 = fp_at(i, lo);
      const double gm = fp_at(i, 0.5 * (lo + hi));
      const double g1 = fp_at(i, hi);
      acc += (hi - lo) / 6.0 * (g0 * g0 + 4.0 * gm * gm + g1 * g1);
    }
    return acc;
  }

  // True when f'' is identically zero (linear boundary), the documented
  // degenerate limit in which the bridge expectation is identically 1.
  bool is_linear() const {
    if (kind_ == Kind::kPolynomial) {
      for (std::size_t k = 2; k < coeffs_.size(); ++k) {
        if (coeffs_[k] != 0.0) return false;
      }
      return true;
    }
    return std::all_of(fpp_.begin(), fpp_.end(),
                       [](double v) { return v == 0.0; });
  }

  // Admissibility on [0, horizon]: f'' > 0 on a 1024-point grid (linear
  // boundaries with f'' == 0 everywhere pass with the degenerate flag),
  // finite int (f')^2, and a strictly positive start level.
  ValidationReport validate(double horizon) const {
    if (!(horizon > 0.0)) {
      throw std::invalid_argument("Boundary::validate: horizon must be > 0");
    }
    ValidationReport report;
    if (horizon > this->horizon()) {
      report.reasons.push_back("horizon exceeds tabulated range");
      return report;
    }
    constexpr int kGrid = 1024;
    constexpr double kZeroTol = 1e-14;
    int n_zero = 0;
    bool any_negative = false;
    for (int i = 0; i < kGrid; ++i) {
      const double t = horizon * static_cast<double>(i) / (kGrid - 1);
      const double c = fpp(t);
      if (c < -kZeroTol) {
        any_negative = true;
      } else if (c <= kZeroTol) {
        ++n_zero;
      }
    }
    if (any_negative || (n_zero > 0 && n_zero < kGrid)) {
      report.reasons.push_back("f'' <= 0 somewhere on [0, horizon]");
    } else if (n_zero == kGrid) {
      report.degenerate_linear = true;
    }
    if (a_ == 0.0) {
      report.reasons.push_back("a == 0");
    } else if (a_ < 0.0) {
      report.reasons.push_back("a < 0 (boundary must start above the process)");
    }
    if (!std::isfinite(integral_fp_sq(0.0, horizon))) {
      report.reasons.push_back("integral of (f')^2 is not finite");
    }
    report.passed = report.reasons.empty();
    return report;
  }

 private:
  enum class Kind { kPolynomial, kTabulated };

  Boundary() = default;

  static double horner(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
  }

  void init_polynomial() {
    a_ = coeffs_[0];
    dcoeffs_.assign(coeffs_.size() > 1 ? coeffs_.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
      dcoeffs_[k - 1] = static_cast<double>(k) * coeffs_[k];
    }
    ddcoeffs_.assign(dcoeffs_.size() > 1 ? dcoeffs_.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < dcoeffs_.size(); ++k) {
      ddcoeffs_[k - 1] = static_cast<double>(k) * dcoeffs_[k];
    }
    // (f')^2 has degree <= 6; store the antiderivative's coefficients
    std::vector<double> sq(2 * dcoeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < dcoeffs_.size(); ++i) {
      for (std::size_t j = 0; j < dcoeffs_.size(); ++j) {
        sq[i + j] += dcoeffs_[i] * dcoeffs_[j];
      }
    }
    int_fp_sq_coeffs_.assign(sq.size() + 1, 0.0);
    for (std::size_t k = 0; k < sq.size(); ++k) {
      int_fp_sq_coeffs_[k + 1] = sq[k] / static_cast<double>(k + 1);
    }
  }

  void init_tabulated() {
    prefix_int_fp_.assign(times_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
      const double dt = times_[i + 1] - times_[i];
      prefix_int_fp_[i + 1] =
          prefix_int_fp_[i] + dt * (fp_[i] + fp_[i + 1]) * 0.5;
    }
  }

  void check_time(double t) const {
    if (!(t >= 0.0) || t > horizon()) {
      throw std::domain_error("Boundary: time outside validated horizon");
    }
  }

  void check_range(double t0, double t1) const {
    if (!(t0 <= t1)) {
      throw std::invalid_argument("Boundary: need t0 <= t1");
    }
    check_time(t0);
    check_time(t1);
  }

  std::size_t cell_index(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    if (i > 0) --i;
    return std::min(i, times_.size() - 2);
  }

  double fp_at(std::size_t cell, double t) const {
    const double w = (t - times_[cell]) / (times_[cell + 1] - times_[cell]);
    return fp_[cell] + w * (fp_[cell + 1] - fp_[cell]);
  }

  Kind kind_ = Kind::kPolynomial;
  double a_ = 0.0;

  // polynomial state
  std::vector<double> coeffs_;
  std::vector<double> dcoeffs_;
  std::vector<double> ddcoeffs_;
  std::vector<double> int_fp_sq_coeffs_;

  // tabulated state
  std::vector<double> times_;
  std::vector<double> fp_;
  std::vector<double> fpp_;
  std::vector<double> prefix_int_fp_;
};

}  // namespace fptb
