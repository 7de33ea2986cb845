#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dcsl/errors.hpp"

namespace dcsl {

inline double huber(double r, double delta) {
  double a = std::fabs(r);
  if (a <= delta) return 0.5 * r * r;
  return delta * (a - 0.5 * delta);
}

struct MinimizeResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_iters = 4000;
  double f_tol = 1e-15;       // absolute spread of simplex values
  double x_tol = 1e-12;       // simplex diameter
  double init_step = 0.5;     // relative/absolute initial simplex step
  // Records the best objective value after each accepted iteration.
  std::vector<double>* trace = nullptr;
};

// Standard Nelder-Mead downhill simplex. Deterministic for a given start.
inline MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                  const std::vector<double>& x0,
                                  const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    double step = opts.init_step * std::max(1.0, std::fabs(x0[i]));
    pts[i + 1][i] += step;
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  MinimizeResult res;
  std::vector<std::size_t> order(n + 1);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];

    if (opts.trace) opts.trace->push_back(fv[best]);

    double spread = std::fabs(fv[worst] - fv[best]);
    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      diam = std::max(diam, std::fabs(pts[worst][i] - pts[best][i]));
    if (spread <= opts.f_tol && diam <= opts.x_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
    }
    for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = centroid[i] + t * (pts[worst][i] - centroid[i]);
      return p;
    };

    std::vector<double> xr = blend(-alpha);
    double fr = f(xr);
    if (fr < fv[best]) {
      std::vector<double> xe = blend(-gamma);
      double fe = f(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      bool outside = fr < fv[worst];
      std::vector<double> xc = blend(outside ? -rho : rho);
      double fc = f(xc);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            pts[k][i] = pts[best][i] + sigma * (pts[k][i] - pts[best][i]);
          fv[k] = f(pts[k]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = pts[best];
  res.fx = fv[best];
  res.iterations = it;
  return res;
}

// Golden-section search for a minimum of a unimodal function on [lo, hi].
inline std::pair<double, double> golden_section_min(
    const std::function<double(double)>& f, double lo, double hi,
    double x_tol = 1e-12, int max_iter = 200) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > x_tol * std::max(1.0, std::fabs(a) + std::fabs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// Bisection root finder; requires opposite signs at the bracket ends.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double x_tol = 1e-12, int max_iter = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw InfeasibleError("bisect_root: same sign at both bracket ends");
  for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

inline OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InputError("ols_fit: need at least two (x, y) points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0 || !std::isfinite(denom))
    throw InputError("ols_fit: zero variance in x");
  OlsFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.max_abs_residual = std::max(
        fit.max_abs_residual, std::fabs(y[i] - fit.slope * x[i] - fit.intercept));
  return fit;
}

// 9 significant digits, the CSV float convention.
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace dcsl
