#pragma once

// Shared helpers for the test suites: independent quadrature oracles,
// Kolmogorov-Smirnov statistics, and a tiny subprocess harness for the CLI
// round-trip tests.  Nothing here may call into the code paths it is used
// to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

// Adaptive Simpson quadrature with absolute tolerance; the independent
// integration route used to check Gauss-Legendre results.
namespace detail {
template <class F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_step(F&& f, double a, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12,
                        int max_depth = 48) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_two_sample(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  return d;
}

// One-sample KS distance against a CDF callable.
inline double ks_one_sample(std::vector<double> x,
                            const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = cdf(x[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Runs a command, captures stdout, returns the exit code.
struct RunResult {
  int exit_code = -1;
  std::string output;
};

inline RunResult run_command(const std::string& cmd) {
  RunResult result;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return result;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), got);
  }
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Parses a CSV with a header row into named numeric columns.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("csv: no column named " + name);
  }
};

inline Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (first) {
      while (std::getline(ls, cell, ',')) csv.header.push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

}  // namespace testutil
