#pragma once

// Adaptive Gauss-Kronrod quadrature and hybrid bisection/Newton root finding.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace levygrow {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule, on [-1,1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& res, double& err) {
  double half = 0.5 * (b - a);
  double mid = 0.5 * (a + b);
  double fk = 0.0, fg = 0.0;
  double fc = f(mid);
  fk += kKronrodWeights[7] * fc;
  fg += kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = half * kKronrodNodes[i];
    double fv = f(mid - x) + f(mid + x);
    fk += kKronrodWeights[i] * fv;
    if (i % 2 == 1) fg += kGaussWeights[i / 2] * fv;
  }
  res = fk * half;
  err = std::fabs((fk - fg) * half);
}

}  // namespace detail

// Adaptive quadrature on a finite interval. Throws NumericError when the
// subdivision budget is exhausted before reaching the requested tolerance.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                 int max_intervals = 20000) {
  if (a == b) return 0.0;
  struct Seg {
    double a, b, res, err;
  };
  std::vector<Seg> segs;
  double r, e;
  detail::gk15(f, a, b, r, e);
  segs.push_back({a, b, r, e});
  double total = r, total_err = e;
  int iter = 0;
  while (total_err > rel_tol * (std::fabs(total) + 1e-300) && total_err > 1e-300) {
    if (++iter > max_intervals) throw NumericError("quadrature did not converge");
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Seg s = segs[worst];
    double m = 0.5 * (s.a + s.b);
    if (m == s.a || m == s.b) break;  // interval at fp resolution
    Seg l{s.a, m, 0, 0}, rgt{m, s.b, 0, 0};
    detail::gk15(f, l.a, l.b, l.res, l.err);
    detail::gk15(f, rgt.a, rgt.b, rgt.res, rgt.err);
    total += l.res + rgt.res - s.res;
    total_err += l.err + rgt.err - s.err;
    segs[worst] = l;
    segs.push_back(rgt);
  }
  return total;
}

// Integral over [a, infinity) via u = a + t/(1-t), t in [0,1).
template <typename F>
double integrate_to_inf(const F& f, double a, double rel_tol = 1e-10) {
  auto g = [&](double t) {
    double om = 1.0 - t;
    double u = a + t / om;
    return f(u) / (om * om);
  };
  return integrate(g, 0.0, 1.0 - 1e-14, rel_tol);
}

// Root of an increasing function on [lo, hi] (f(lo) <= 0 <= f(hi)),
// hybrid Newton/bisection to absolute tolerance on x.
template <typename F, typename DF>
double solve_increasing(const F& f, const DF& df, double lo, double hi,
                        double x_tol = 1e-12, int max_iter = 200) {
  double flo = f(lo);
  if (flo > 0) return lo;
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < max_iter; ++i) {
    double fx = f(x);
    if (fx > 0)
      hi = x;
    else
      lo = x;
    if (hi - lo <= x_tol) break;
    double d = df(x);
    double xn = (d > 0) ? x - fx / d : lo;
    x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

// Bisection-only variant for functions whose derivative is unavailable.
template <typename F>
double bisect_increasing(const F& f, double lo, double hi, double x_tol = 1e-12,
                         int max_iter = 400) {
  for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
    double m = 0.5 * (lo + hi);
    if (m == lo || m == hi) break;
    if (f(m) < 0)
      lo = m;
    else
      hi = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace levygrow
