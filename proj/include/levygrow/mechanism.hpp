#pragma once

// Branching mechanisms psi(c) = alpha*c + beta*c^2 + integral part, with the
// numeric services the samplers need: derivatives of every order, the inverse
// on the increasing branch, the largest root gamma, the extinction-time
// integral test, the CSBP flow exponent and the height-law inversions.
//
// All operations are pure functions of immutable mechanism values and are
// safe to call concurrently.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "levygrow/numerics.hpp"

namespace levygrow {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroMeasure {};

// Finite collection of atoms (x_i, mass_i), x_i > 0 distinct.
struct AtomicMeasure {
  std::vector<std::pair<double, double>> atoms;
};

// Contributes exactly scale * c^index to psi (compensation convention folded
// into the closed form); index strictly inside (1,2). The underlying density
// is proportional to x^{-1-index} dx.
struct StablePower {
  double index;
  double scale;
};

// Tabulated density with support [x_min, x_max], integrated by adaptive
// quadrature. x_min > 0 so all moments exist.
struct NumericDensity {
  std::function<double(double)> density;
  double x_min;
  double x_max;
};

using LevyMeasure = std::variant<ZeroMeasure, AtomicMeasure, StablePower, NumericDensity>;

enum class Grey { kTrue, kFalse, kUnknown };

class BranchingMechanism {
 public:
  BranchingMechanism(double alpha, double beta, LevyMeasure levy = ZeroMeasure{})
      : alpha_(alpha), beta_(beta), levy_(std::move(levy)) {
    if (beta_ < 0) throw DomainError("beta must be >= 0");
    if (auto* st = std::get_if<StablePower>(&levy_)) {
      if (!(st->index > 1.0 && st->index < 2.0))
        throw DomainError("stable index must lie in (1,2)");
      if (!(st->scale > 0)) throw DomainError("stable scale must be > 0");
    }
    if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
      for (auto& [x, m] : at->atoms)
        if (!(x > 0) || !(m > 0)) throw DomainError("atoms need x > 0, mass > 0");
    }
    gamma_ = compute_gamma();
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const LevyMeasure& levy() const { return levy_; }

  // psi'(0+); finite for every constructible instance.
  double mean() const {
    double m = alpha_;
    if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
      for (auto& [x, mass] : at->atoms)
        if (x >= 1.0) m -= x * mass;
    } else if (auto* nd = std::get_if<NumericDensity>(&levy_)) {
      double lo = std::max(1.0, nd->x_min);
      if (lo < nd->x_max)
        m -= integrate([&](double x) { return x * nd->density(x); }, lo, nd->x_max);
    }
    // Stable convention contributes slope 0 at 0+.
    return m;
  }

  double psi(double c) const {
    if (c < 0) throw DomainError("psi requires c >= 0");
    double v = alpha_ * c + beta_ * c * c;
    if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
      for (auto& [x, m] : at->atoms)
        v += m * (std::exp(-c * x) - 1.0 + (x < 1.0 ? c * x : 0.0));
    } else if (auto* st = std::get_if<StablePower>(&levy_)) {
      v += st->scale * std::pow(c, st->index);
    } else if (auto* nd = std::get_if<NumericDensity>(&levy_)) {
      v += integrate(
          [&](double x) {
            return (std::exp(-c * x) - 1.0 + (x < 1.0 ? c * x : 0.0)) * nd->density(x);
          },
          nd->x_min, nd->x_max);
    }
    return v;
  }

  // k-th derivative, k >= 1. Orders >= 2 may blow up at c = 0 for
  // infinite-activity measures, hence c > 0 there.
  double psi_derivative(double c, int k) const {
    if (k < 1) throw DomainError("psi_derivative requires k >= 1");
    if (k >= 2 && !(c > 0) && std::holds_alternative<StablePower>(levy_))
      throw DomainError("derivative of order >= 2 requires c > 0");
    if (k == 1) {
      double v = alpha_ + 2.0 * beta_ * c;
      if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
        for (auto& [x, m] : at->atoms)
          v += m * x * ((x < 1.0 ? 1.0 : 0.0) - std::exp(-c * x));
      } else if (auto* st = std::get_if<StablePower>(&levy_)) {
        v += st->scale * st->index * std::pow(c, st->index - 1.0);
      } else if (auto* nd = std::get_if<NumericDensity>(&levy_)) {
        v += integrate(
            [&](double x) {
              return x * ((x < 1.0 ? 1.0 : 0.0) - std::exp(-c * x)) * nd->density(x);
            },
            nd->x_min, nd->x_max);
      }
      return v;
    }
    double v = (k == 2) ? 2.0 * beta_ : 0.0;
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    v += sign * levy_moment(c, k);
    return v;
  }

  // integral x^k e^{-cx} Pi(dx), k >= 2.
  double levy_moment(double c, int k) const {
    if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
      double s = 0.0;
      for (auto& [x, m] : at->atoms) s += m * std::pow(x, k) * std::exp(-c * x);
      return s;
    }
    if (auto* st = std::get_if<StablePower>(&levy_)) {
      double th = st->index;
      // prod_{j=1}^{k-1} (j - th), times scale * th, equals the Gamma-ratio
      // closed form of the k-th tilted moment.
      double prod = st->scale * th;
      for (int j = 1; j < k; ++j) prod *= std::fabs(static_cast<double>(j) - th);
      return prod * std::pow(c, th - k);
    }
    if (auto* nd = std::get_if<NumericDensity>(&levy_)) {
      return integrate(
          [&](double x) { return std::pow(x, k) * std::exp(-c * x) * nd->density(x); },
          nd->x_min, nd->x_max);
    }
    return 0.0;
  }

  // log of levy_moment, stable for large k where the direct products overflow.
  double log_levy_moment(double c, int k) const {
    if (auto* at = std::get_if<AtomicMeasure>(&levy_)) {
      double peak = -std::numeric_limits<double>::infinity();
      for (auto& [x, m] : at->atoms)
        peak = std::max(peak, std::log(m) + k * std::log(x) - c * x);
      if (!std::isfinite(peak)) return peak;
      double s = 0.0;
      for (auto& [x, m] : at->atoms)
        s += std::exp(std::log(m) + k * std::log(x) - c * x - peak);
      return peak + std::log(s);
    }
    if (auto* st = std::get_if<StablePower>(&levy_)) {
      double th = st->index;
      return std::log(st->scale * th * (th - 1.0)) +
             std::lgamma(static_cast<double>(k) - th) - std::lgamma(2.0 - th) +
             (th - static_cast<double>(k)) * std::log(c);
    }
    double m = levy_moment(c, k);
    return m > 0 ? std::log(m) : -std::numeric_limits<double>::infinity();
  }

  // Largest root of psi; 0 unless supercritical.
  double gamma_root() const { return gamma_; }

  // Inverse on the increasing branch [gamma, infinity); psi_inverse(0) = gamma.
  double psi_inverse(double lambda) const {
    if (lambda < 0) throw DomainError("psi_inverse requires lambda >= 0");
    if (lambda == 0.0) return gamma_;
    double hi = std::max(gamma_, 1.0);
    while (psi(hi) < lambda) hi *= 2.0;
    auto f = [&](double c) { return psi(c) - lambda; };
    auto df = [&](double c) { return psi_derivative(c, 1); };
    return solve_increasing(f, df, gamma_, hi, 1e-12 * (1.0 + hi));
  }

  // Extinction-in-finite-time test: integral^infty dc/psi(c) < infinity.
  Grey grey_condition() const {
    if (std::holds_alternative<StablePower>(levy_)) return Grey::kTrue;
    if (beta_ > 0) return Grey::kTrue;
    // Remaining cases have finite activity: psi grows at most linearly.
    return Grey::kFalse;
  }

  // CSBP flow: u(t, lambda) with integral_{u}^{lambda} dc/psi(c) = t.
  double csbp_exponent(double t, double lambda) const {
    if (t < 0 || lambda < 0) throw DomainError("csbp_exponent requires t, lambda >= 0");
    if (t == 0.0) return lambda;
    if (lambda == gamma_ || psi(lambda) == 0.0) return lambda;
    if (lambda > gamma_) {
      // u in (gamma, lambda); integrate in y = log(c - gamma), which removes
      // the simple zero of psi at gamma from the integrand.
      auto flow = [&](double u) {
        return integrate(
            [&](double y) {
              double e = std::exp(y);
              return e / psi(gamma_ + e);
            },
            std::log(u - gamma_), std::log(lambda - gamma_), 1e-11);
      };
      auto f = [&](double u) { return t - flow(u); };  // increasing in u
      double lo = gamma_ + 1e-30 * (1.0 + lambda);
      if (f(lo) > 0) return gamma_;  // flow effectively reached gamma
      return bisect_increasing(f, lo, lambda, 1e-13 * (1.0 + lambda));
    }
    // lambda < gamma: psi < 0 there, flow increases toward gamma.
    auto flow_up = [&](double u) {
      return integrate(
          [&](double y) {
            double e = std::exp(y);
            return e / -psi(gamma_ - e);
          },
          std::log(gamma_ - u), std::log(gamma_ - lambda), 1e-11);
    };
    auto g = [&](double u) { return flow_up(u) - t; };  // increasing in u
    double hi = gamma_ - 1e-30 * (1.0 + gamma_);
    if (g(hi) < 0) return gamma_;
    return bisect_increasing(g, lambda, hi, 1e-13 * (1.0 + gamma_));
  }

  // v(x) with integral_{v}^{infinity} du/psi(u) = x (requires Grey true).
  double grey_v(double x) const {
    if (grey_condition() != Grey::kTrue)
      throw DomainError("grey_v requires Grey's condition");
    return gamma_ + tail_inverse(gamma_, 0.0, x);
  }

  // Same for the shifted mechanism psi_mu(u) = psi(u + psi^{-1}(mu)) - mu;
  // returns v with integral_v^infty du/psi_mu(u) = x.
  double grey_v_shifted(double mu, double x) const {
    if (grey_condition() != Grey::kTrue)
      throw DomainError("grey_v_shifted requires Grey's condition");
    return tail_inverse(psi_inverse(mu), mu, x);
  }

  // Height-CDF exponent for a single GW(xi_{mu,lambda}) real tree:
  // P(h <= t) = exp(-v) where w = (D)(1 - e^{-v}) solves
  // integral_w^D dx / (psi(r_mu + x) - mu) = t, D = r_lambda - r_mu.
  double finite_level_v(double mu, double lambda, double t) const {
    if (!(lambda > mu) || mu < 0) throw DomainError("finite_level_v needs 0 <= mu < lambda");
    if (!(t > 0)) throw DomainError("finite_level_v needs t > 0");
    double w = finite_level_w(mu, lambda, t);
    double d = psi_inverse(lambda) - psi_inverse(mu);
    if (w <= 0.0) return 0.0;
    double ratio = w / d;
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-ratio);
  }

  // The bracket w = (r_lambda - r_mu)(1 - e^{-v_{mu,lambda}(t)}) itself;
  // converges to grey_v_shifted(mu, t) as lambda -> infinity.
  double finite_level_w(double mu, double lambda, double t) const {
    double r_mu = psi_inverse(mu);
    double d = psi_inverse(lambda) - r_mu;
    // Integrate in y = log x: the integrand e^y / (psi(r_mu + e^y) - mu) is
    // bounded near the lower endpoint where psi_mu has its simple zero.
    auto den = shifted_psi(r_mu, mu);
    auto remaining = [&](double w) {
      return integrate(
          [&](double y) {
            double e = std::exp(y);
            return e / den(e);
          },
          std::log(w), std::log(d), 1e-11);
    };
    // Solve on a log scale; integral diverges logarithmically at w -> 0.
    auto f = [&](double s) { return t - remaining(std::exp(s)); };
    double s_hi = std::log(d) - 1e-12;
    if (f(s_hi) < 0) return d;  // t smaller than any attainable height mass
    double s_lo = std::log(d) - 80.0;
    if (f(s_lo) > 0) return 0.0;  // t beyond the total integral
    return std::exp(bisect_increasing(f, s_lo, s_hi, 1e-13));
  }

 private:
  double compute_gamma() const {
    if (mean() >= 0) return 0.0;
    double hi = 1.0;
    while (psi(hi) < 0) hi *= 2.0;
    auto f = [&](double c) { return psi(c); };
    return bisect_increasing(f, 1e-300, hi, 1e-14 * (1.0 + hi));
  }

  // psi(base + u) - off evaluated without cancellation when off = psi(base)
  // up to root-finding error: for tiny u the direct difference can round to
  // zero or flip sign, so switch to a Taylor expansion at base.  Only valid
  // for base > 0 where the derivatives are finite; at base = 0 the direct
  // formula has no cancellation (off = 0 there).
  std::function<double(double)> shifted_psi(double base, double off) const {
    if (base <= 0.0) {
      return [this, base, off](double u) { return psi(base + u) - off; };
    }
    double off_eff = psi(base);
    double p1 = psi_derivative(base, 1);
    double p2 = psi_derivative(base, 2);
    double p3 = psi_derivative(base, 3);
    double cut = 1e-6 * (1.0 + base);
    return [this, base, off_eff, p1, p2, p3, cut](double u) {
      if (u < cut) return u * (p1 + u * (0.5 * p2 + u * p3 / 6.0));
      return psi(base + u) - off_eff;
    };
  }

  // Solve integral_w^infty du/(psi(base + u) - off) = x for w > 0.
  double tail_inverse(double base, double off, double x) const {
    auto den = shifted_psi(base, off);
    if (!(x > 0)) throw DomainError("tail_inverse requires x > 0");
    // u = w / t^2 maps [w, inf) to (0, 1]; for psi growing like u^p with
    // p in (1, 2] the transformed integrand behaves like t^{2p-3}, which the
    // adaptive rule resolves cleanly.
    auto tail = [&](double w) {
      return integrate(
          [&](double t) {
            double u = w / (t * t);
            return 2.0 * w / (t * t * t * den(u));
          },
          0.0, 1.0, 1e-11);
    };
    auto f = [&](double s) { return x - tail(std::exp(s)); };  // increasing in s
    double s_hi = 1.0;
    while (f(s_hi) < 0) s_hi += 2.0;
    double s_lo = -1.0;
    while (f(s_lo) > 0 && s_lo > -80.0) s_lo -= 4.0;
    return std::exp(bisect_increasing(f, s_lo, s_hi, 1e-13));
  }

  double alpha_;
  double beta_;
  LevyMeasure levy_;
  double gamma_;
};

// --- mechanism spec files -------------------------------------------------
//
// Whitespace-separated key=value text, e.g.
//   kind=quadratic alpha=0 beta=0.5
//   kind=stable index=1.5 scale=1.0
//   kind=atomic atoms=0.5:1.0,2.0:0.3 alpha=0 beta=0
inline BranchingMechanism parse_mechanism(const std::string& text) {
  std::istringstream in(text);
  std::string tok, kind;
  double alpha = 0.0, beta = 0.0, index = 0.0, scale = 0.0;
  std::vector<std::pair<double, double>> atoms;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw DomainError("bad mechanism token: " + tok);
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "kind")
      kind = val;
    else if (key == "alpha")
      alpha = std::stod(val);
    else if (key == "beta")
      beta = std::stod(val);
    else if (key == "index")
      index = std::stod(val);
    else if (key == "scale")
      scale = std::stod(val);
    else if (key == "atoms") {
      std::istringstream as(val);
      std::string pair;
      while (std::getline(as, pair, ',')) {
        auto colon = pair.find(':');
        if (colon == std::string::npos) throw DomainError("bad atom: " + pair);
        atoms.emplace_back(std::stod(pair.substr(0, colon)),
                           std::stod(pair.substr(colon + 1)));
      }
    } else
      throw DomainError("unknown mechanism key: " + key);
  }
  if (kind == "quadratic" || kind == "zero")
    return BranchingMechanism(alpha, beta, ZeroMeasure{});
  if (kind == "stable")
    return BranchingMechanism(alpha, beta, StablePower{index, scale});
  if (kind == "atomic")
    return BranchingMechanism(alpha, beta, AtomicMeasure{std::move(atoms)});
  throw DomainError("unknown mechanism kind: " + kind);
}

inline std::string mechanism_to_spec(const BranchingMechanism& mech) {
  std::ostringstream out;
  out.precision(17);
  if (auto* st = std::get_if<StablePower>(&mech.levy())) {
    out << "kind=stable index=" << st->index << " scale=" << st->scale;
    out << " alpha=" << mech.alpha() << " beta=" << mech.beta();
  } else if (auto* at = std::get_if<AtomicMeasure>(&mech.levy())) {
    out << "kind=atomic atoms=";
    for (std::size_t i = 0; i < at->atoms.size(); ++i) {
      if (i) out << ',';
      out << at->atoms[i].first << ':' << at->atoms[i].second;
    }
    out << " alpha=" << mech.alpha() << " beta=" << mech.beta();
  } else {
    out << "kind=quadratic alpha=" << mech.alpha() << " beta=" << mech.beta();
  }
  return out.str();
}

}  // namespace levygrow
