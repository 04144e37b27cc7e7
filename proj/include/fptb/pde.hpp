#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/errors.hpp"

namespace fptb {
namespace pde {

enum class Equation { kCauchy, kSchrodinger, kHeat };

struct GridSpec {
  std::size_t n_t = 2000;
  std::size_t n_a = 400;
  double a_min = 1e-3;
  double a_max = 0.0;  // <= 0 requests the default a + 6 sqrt(s)
};

// A (time x space) field on uniform grids with a tag naming the equation
// it is supposed to satisfy.
struct Field2D {
  std::vector<double> t_grid;
  std::vector<double> a_grid;
  std::vector<double> values;  // row-major, values[it * a_grid.size() + ja]
  Equation meta = Equation::kHeat;

  double& at(std::size_t it, std::size_t ja) {
    return values[it * a_grid.size() + ja];
  }
  double at(std::size_t it, std::size_t ja) const {
    return values[it * a_grid.size() + ja];
  }

  // Bilinear interpolation; clamps to the grid box edges.
  double interp(double t, double a) const {
    const auto locate = [](const std::vector<double>& g, double x,
                           std::size_t& i, double& w) {
      const double lo = g.front();
      const double step = (g.back() - lo) / static_cast<double>(g.size() - 1);
      double pos = (x - lo) / step;
      pos = std::clamp(pos, 0.0, static_cast<double>(g.size() - 1));
      i = std::min(static_cast<std::size_t>(pos), g.size() - 2);
      w = pos - static_cast<double>(i);
    };
    std::size_t it, ja;
    double wt, wa;
    locate(t_grid, t, it, wt);
    locate(a_grid, a, ja, wa);
    return (1.0 - wt) * ((1.0 - wa) * at(it, ja) + wa * at(it, ja + 1)) +
           wt * ((1.0 - wa) * at(it + 1, ja) + wa * at(it + 1, ja + 1));
  }

  // Rows with t <= t_cut; used to keep v = w/h away from the t -> s blowup
  // of 1/h before differentiating.
  Field2D slice_max_t(double t_cut) const {
    Field2D out;
    out.a_grid = a_grid;
    out.meta = meta;
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
      if (t_grid[it] <= t_cut * (1.0 + 1e-12)) {
        out.t_grid.push_back(t_grid[it]);
        out.values.insert(out.values.end(), values.begin() + it * a_grid.size(),
                          values.begin() + (it + 1) * a_grid.size());
      }
    }
    return out;
  }
};

namespace detail {

inline void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                         std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t j = 1; j < n; ++j) {
    const double m = lower[j] / diag[j - 1];
    diag[j] -= m * upper[j - 1];
    rhs[j] -= m * rhs[j - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) {
    rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) / diag[j];
  }
}

inline double max_fpp(const Boundary& b, double s) {
  double m = 0.0;
  for (int i = 0; i <= 256; ++i) {
    m = std::max(m, std::abs(b.fpp(s * i / 256.0)));
  }
  return m;
}

inline void check_grid(const Boundary& b, double s, const GridSpec& g,
                       double a_max) {
  if (!(s > 0.0)) throw std::invalid_argument("pde: s must be > 0");
  if (g.n_t < 16 || g.n_a < 16) {
    throw ConfigError("pde: grid too coarse (need n_t >= 16 and n_a >= 16)");
  }
  if (!(g.a_min > 0.0) || !(a_max > g.a_min)) {
    throw ConfigError("pde: need 0 < a_min < a_max");
  }
  // Coarse-grid diagnostic: one time step must resolve the zero-order
  // term f''(t) * a over the whole domain.
  const double dt = s / static_cast<double>(g.n_t);
  if (dt * max_fpp(b, s) * a_max > 0.25) {
    throw ConfigError("pde: grid too coarse for the potential term (raise n_t)");
  }
}

struct Tridiag {
  std::vector<double> lower, diag, upper;
  explicit Tridiag(std::size_t n) : lower(n), diag(n), upper(n) {}
};

}  // namespace detail

// Backward Crank-Nicolson solve of the Feynman-Kac problem
//
//   -v_t + f''(t) a v = 1/2 v_aa + (1/a - a/(s-t)) v_a,   v(s, a) = 1,
//
// on [0, s] x [a_min, a_max].  The drift blows up as t -> s, so marching
// starts one step below s with v = 1 there (the stochastic representation
// is continuous with limit 1).  Space discretization is central where the
// cell Peclet number |mu| da permits and upwinded elsewhere; the a_min row
// uses a one-sided upwind first derivative with no extra boundary
// condition (the inward drift 1/a dominates there), and a_max carries the
// heuristic Dirichlet value exp(-a_max int_t^s f''(u)(1 - u/s) du) modeled
// on the bridge's linearly decaying mean.  The first four steps are fully
// implicit to damp any stiff transient before Crank-Nicolson takes over.
inline Field2D solve_cauchy(const Boundary& b, double s, GridSpec g) {
  const double a_max = g.a_max > 0.0 ? g.a_max : b.a() + 6.0 * std::sqrt(s);
  detail::check_grid(b, s, g, a_max);

  const std::size_t n_t = g.n_t;
  const std::size_t n_a = g.n_a;
  const double dt = s / static_cast<double>(n_t);
  const double da = (a_max - g.a_min) / static_cast<double>(n_a);

  Field2D field;
  field.meta = Equation::kCauchy;
  field.t_grid.resize(n_t + 1);
  for (std::size_t i = 0; i <= n_t; ++i) field.t_grid[i] = dt * static_cast<double>(i);
  field.a_grid.resize(n_a + 1);
  for (std::size_t j = 0; j <= n_a; ++j) field.a_grid[j] = g.a_min + da * static_cast<double>(j);
  field.values.assign((n_t + 1) * (n_a + 1), 0.0);

  // int_t^s f''(u) (1 - u/s) du, exactly, for the a_max edge value.
  const auto edge_exponent = [&](double t) {
    return -b.fp(t) * (1.0 - t / s) + (b.f(s) - b.f(t)) / s;
  };
  const auto edge_value = [&](double t) {
    return std::exp(-a_max * edge_exponent(t));
  };

  // Terminal row and the continuity extension one step below it.
  for (std::size_t j = 0; j <= n_a; ++j) {
    field.at(n_t, j) = 1.0;
    field.at(n_t - 1, j) = 1.0;
  }
  field.at(n_t - 1, n_a) = edge_value(field.t_grid[n_t - 1]);

  // Spatial operator L at time t: (Lv)_j over unknown rows j = 0..n_a-1.
  const auto build = [&](double t, detail::Tridiag& op) {
    const double alpha = 0.5 / (da * da);
    const double fpp_t = b.fpp(t);
    {
      const double a0 = field.a_grid[0];
      const double mu = std::max(1.0 / a0 - a0 / (s - t), 0.0);
      op.lower[0] = 0.0;
      op.upper[0] = mu / da;
      op.diag[0] = -mu / da - fpp_t * a0;
    }
    for (std::size_t j = 1; j < n_a; ++j) {
      const double aj = field.a_grid[j];
      const double mu = 1.0 / aj - aj / (s - t);
      double lo, up;
      if (std::abs(mu) * da <= 1.0) {
        lo = alpha - mu / (2.0 * da);
        up = alpha + mu / (2.0 * da);
      } else if (mu > 0.0) {
        lo = alpha;
        up = alpha + mu / da;
      } else {
        lo = alpha - mu / da;
        up = alpha;
      }
      op.lower[j] = lo;
      op.upper[j] = up;
      op.diag[j] = -(lo + up) - fpp_t * aj;
    }
  };

  detail::Tridiag op_explicit(n_a), op_implicit(n_a);
  std::vector<double> cur(n_a + 1), rhs(n_a);
  std::vector<double> lo(n_a), di(n_a), up(n_a);
  for (std::size_t j = 0; j <= n_a; ++j) cur[j] = field.at(n_t - 1, j);

  for (std::size_t i = n_t - 1; i >= 1; --i) {
    const std::size_t step_index = (n_t - 1) - i;
    const double theta = step_index < 4 ? 1.0 : 0.5;
    const double t_new = field.t_grid[i - 1];

    if (theta < 1.0) {
      build(field.t_grid[i], op_explicit);
      const double w = (1.0 - theta) * dt;
      rhs[0] = cur[0] + w * (op_explicit.diag[0] * cur[0] + op_explicit.upper[0] * cur[1]);
      for (std::size_t j = 1; j < n_a; ++j) {
        rhs[j] = cur[j] + w * (op_explicit.lower[j] * cur[j - 1] +
                               op_explicit.diag[j] * cur[j] +
                               op_explicit.upper[j] * cur[j + 1]);
      }
    } else {
      for (std::size_t j = 0; j < n_a; ++j) rhs[j] = cur[j];
    }

    build(t_new, op_implicit);
    const double edge_new = edge_value(t_new);
    const double w = theta * dt;
    for (std::size_t j = 0; j < n_a; ++j) {
      lo[j] = -w * op_implicit.lower[j];
      di[j] = 1.0 - w * op_implicit.diag[j];
      up[j] = -w * op_implicit.upper[j];
    }
    rhs[n_a - 1] += w * op_implicit.upper[n_a - 1] * edge_new;
    up[n_a - 1] = 0.0;
    detail::thomas_solve(lo, di, up, rhs);

    for (std::size_t j = 0; j < n_a; ++j) cur[j] = rhs[j];
    cur[n_a] = edge_new;
    for (std::size_t j = 0; j <= n_a; ++j) field.at(i - 1, j) = cur[j];
  }
  return field;
}

// Backward Crank-Nicolson solve of the potential-only equation
//
//   -w_t + f''(t) a w = 1/2 w_aa,   w(s, .) = terminal_w,
//
// with Dirichlet edges held at the terminal data's edge values (callers
// supply decayed terminal data on a wide enough domain).
inline Field2D solve_schrodinger(const Boundary& b, double s, GridSpec g,
                                 const std::vector<double>& terminal_w) {
  const double a_max = g.a_max > 0.0 ? g.a_max : b.a() + 6.0 * std::sqrt(s);
  detail::check_grid(b, s, g, a_max);
  if (terminal_w.size() != g.n_a + 1) {
    throw std::invalid_argument("solve_schrodinger: terminal_w must have n_a + 1 entries");
  }

  const std::size_t n_t = g.n_t;
  const std::size_t n_a = g.n_a;
  const double dt = s / static_cast<double>(n_t);
  const double da = (a_max - g.a_min) / static_cast<double>(n_a);

  Field2D field;
  field.meta = Equation::kSchrodinger;
  field.t_grid.resize(n_t + 1);
  for (std::size_t i = 0; i <= n_t; ++i) field.t_grid[i] = dt * static_cast<double>(i);
  field.a_grid.resize(n_a + 1);
  for (std::size_t j = 0; j <= n_a; ++j) field.a_grid[j] = g.a_min + da * static_cast<double>(j);
  field.values.assign((n_t + 1) * (n_a + 1), 0.0);

  for (std::size_t j = 0; j <= n_a; ++j) field.at(n_t, j) = terminal_w[j];
  const double edge_lo = terminal_w.front();
  const double edge_hi = terminal_w.back();

  const double alpha = 0.5 / (da * da);
  const std::size_t n_unknown = n_a - 1;  // j = 1..n_a-1
  std::vector<double> cur(terminal_w);
  std::vector<double> rhs(n_unknown), lo(n_unknown), di(n_unknown), up(n_unknown);

  for (std::size_t i = n_t; i >= 1; --i) {
    const std::size_t step_index = n_t - i;
    const double theta = step_index < 4 ? 1.0 : 0.5;
    const double fpp_old = b.fpp(field.t_grid[i]);
    const double fpp_new = b.fpp(field.t_grid[i - 1]);

    for (std::size_t j = 1; j < n_a; ++j) {
      double r = cur[j];
      if (theta < 1.0) {
        const double w = (1.0 - theta) * dt;
        const double diag = -2.0 * alpha - fpp_old * field.a_grid[j];
        r += w * (alpha * cur[j - 1] + diag * cur[j] + alpha * cur[j + 1]);
      }
      rhs[j - 1] = r;
    }
    const double w = theta * dt;
    for (std::size_t j = 1; j < n_a; ++j) {
      lo[j - 1] = -w * alpha;
      di[j - 1] = 1.0 + w * (2.0 * alpha + fpp_new * field.a_grid[j]);
      up[j - 1] = -w * alpha;
    }
    rhs[0] += w * alpha * edge_lo;
    rhs[n_unknown - 1] += w * alpha * edge_hi;
    lo[0] = 0.0;
    up[n_unknown - 1] = 0.0;
    detail::thomas_solve(lo, di, up, rhs);

    cur[0] = edge_lo;
    cur[n_a] = edge_hi;
    for (std::size_t j = 1; j < n_a; ++j) cur[j] = rhs[j - 1];
    for (std::size_t j = 0; j <= n_a; ++j) field.at(i - 1, j) = cur[j];
  }
  return field;
}

// Pointwise transform v(t, a) = w(t, a) / h(s - t, a).  The input grid must
// stay strictly below t = s, where h degenerates.
inline Field2D v_from_w(const Field2D& w, double s) {
  Field2D v = w;
  v.meta = Equation::kCauchy;
  for (std::size_t it = 0; it < w.t_grid.size(); ++it) {
    const double t = w.t_grid[it];
    if (!(t < s)) {
      throw std::domain_error("v_from_w: grid must satisfy t < s strictly");
    }
    for (std::size_t ja = 0; ja < w.a_grid.size(); ++ja) {
      const double h = level_density(s - t, w.a_grid[ja]);
      if (h < 1e-300) {
        throw NumericalError(
            "v_from_w: h(s - t, a) underflowed; restrict the grid to smaller t or a");
      }
      v.at(it, ja) = w.at(it, ja) / h;
    }
  }
  return v;
}

// Max over interior nodes of the centered-difference residual of the
// field's governing equation, normalized by max |field|.
inline double pde_residual(const Field2D& field, const Boundary& b, double s) {
  const std::size_t m = field.t_grid.size();
  const std::size_t p = field.a_grid.size();
  if (m < 3 || p < 3) {
    throw std::invalid_argument("pde_residual: need at least 3x3 grid");
  }
  const double dt = field.t_grid[1] - field.t_grid[0];
  const double da = field.a_grid[1] - field.a_grid[0];
  double norm = 0.0;
  for (double v : field.values) norm = std::max(norm, std::abs(v));
  norm = std::max(norm, 1e-300);

  double worst = 0.0;
  for (std::size_t it = 1; it + 1 < m; ++it) {
    const double t = field.t_grid[it];
    for (std::size_t ja = 1; ja + 1 < p; ++ja) {
      const double a = field.a_grid[ja];
      const double v = field.at(it, ja);
      const double v_t = (field.at(it + 1, ja) - field.at(it - 1, ja)) / (2.0 * dt);
      const double v_a = (field.at(it, ja + 1) - field.at(it, ja - 1)) / (2.0 * da);
      const double v_aa =
          (field.at(it, ja + 1) - 2.0 * v + field.at(it, ja - 1)) / (da * da);
      double r = 0.0;
      switch (field.meta) {
        case Equation::kCauchy:
          r = -v_t + b.fpp(t) * a * v - 0.5 * v_aa -
              (1.0 / a - a / (s - t)) * v_a;
          break;
        case Equation::kSchrodinger:
          r = -v_t + b.fpp(t) * a * v - 0.5 * v_aa;
          break;
        case Equation::kHeat:
          r = v_t - 0.5 * v_aa;
          break;
      }
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst / norm;
}

}  // namespace pde
}  // namespace fptb
