// Statistical verification helpers: two-sample KS, chi-square goodness of
// fit, Poisson dispersion, and the CSV report schema shared by the CLI.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "levygrow/numerics.hpp"

namespace levygrow {

enum class Verdict { kPass, kFail, kWarn };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    default: return "warn";
  }
}

struct StatReport {
  std::string name;
  std::size_t n = 0;
  double statistic = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> target;
  std::optional<double> p_value;
  Verdict verdict = Verdict::kWarn;
};

constexpr double kAlpha = 1e-3;  // acceptance significance level

// --- special functions ------------------------------------------------------

// Regularized upper incomplete gamma Q(a, x); series for x < a+1, continued
// fraction otherwise (Lentz).
inline double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw NumericError("gamma_q domain");
  if (x == 0) return 1.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16)
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    throw NumericError("gamma_q series stalled");
  }
  double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - gln) * h;
  }
  throw NumericError("gamma_q fraction stalled");
}

// Two-sided standard normal tail probability P(|Z| > |z|).
inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Asymptotic Kolmogorov distribution tail Q(t) = 2 sum (-1)^{k-1} e^{-2k^2t^2}.
inline double kolmogorov_tail(double t) {
  if (t <= 0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = 2.0 * std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// --- tests -------------------------------------------------------------------

inline StatReport ks_two_sample(std::vector<double> xs, std::vector<double> ys,
                                const std::string& name) {
  if (xs.size() < 30 || ys.size() < 30)
    throw NumericError("ks_two_sample needs n >= 30 per sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double nx = static_cast<double>(xs.size());
  double ny = static_cast<double>(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  double en = std::sqrt(nx * ny / (nx + ny));
  StatReport r;
  r.name = name;
  r.n = xs.size() + ys.size();
  r.statistic = d;
  r.estimate = d;
  r.std_error = 1.0 / en;
  r.p_value = kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
  r.verdict = *r.p_value > kAlpha ? Verdict::kPass : Verdict::kFail;
  return r;
}

// counts[k] observed in bin k; probs[k] the null probabilities (must sum to
// ~1 over the provided bins).  Adjacent bins are pooled until every expected
// count is >= 5.
inline StatReport chi_square_gof(const std::vector<double>& counts,
                                 const std::vector<double>& probs,
                                 const std::string& name) {
  if (counts.size() != probs.size() || counts.empty())
    throw NumericError("chi_square_gof shape mismatch");
  double n = 0.0;
  for (double c : counts) n += c;
  std::vector<double> oc, ec;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    o_acc += counts[k];
    e_acc += n * probs[k];
    if (e_acc >= 5.0) {
      oc.push_back(o_acc);
      ec.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!ec.empty()) {
      oc.back() += o_acc;
      ec.back() += e_acc;
    } else {
      oc.push_back(o_acc);
      ec.push_back(e_acc);
    }
  }
  if (oc.size() < 2) throw NumericError("chi_square_gof: <2 bins after pooling");
  double stat = 0.0;
  for (std::size_t k = 0; k < oc.size(); ++k)
    stat += (oc[k] - ec[k]) * (oc[k] - ec[k]) / ec[k];
  double df = static_cast<double>(oc.size() - 1);
  StatReport r;
  r.name = name;
  r.n = static_cast<std::size_t>(n);
  r.statistic = stat;
  r.estimate = stat / df;
  r.std_error = std::sqrt(2.0 / df);
  r.p_value = gamma_q(df / 2.0, stat / 2.0);
  r.verdict = *r.p_value > kAlpha ? Verdict::kPass : Verdict::kFail;
  return r;
}

// Index-of-dispersion test combined with a mean z-test against mean_target.
inline StatReport poisson_dispersion(const std::vector<double>& counts,
                                     double mean_target,
                                     const std::string& name) {
  std::size_t n = counts.size();
  if (n < 30) throw NumericError("poisson_dispersion needs n >= 30");
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  double var = ss / static_cast<double>(n - 1);
  // Under Poisson, (n-1)*var/mean ~ chi2(n-1); use the normal approximation
  // z = sqrt(2*chi2) - sqrt(2*df-1).
  StatReport r;
  r.name = name;
  r.n = n;
  r.estimate = mean;
  r.std_error = std::sqrt(std::max(mean, 1e-300) / static_cast<double>(n));
  r.target = mean_target;
  if (mean <= 0.0) {
    // all-zero counts: fail unless the target is (numerically) zero too
    r.statistic = 0.0;
    r.p_value = mean_target < 1e-12 ? 1.0 : 0.0;
    r.verdict = *r.p_value > kAlpha ? Verdict::kPass : Verdict::kFail;
    return r;
  }
  double chi2 = ss / mean;
  double df = static_cast<double>(n - 1);
  double z_disp = std::sqrt(2.0 * chi2) - std::sqrt(2.0 * df - 1.0);
  double z_mean = (mean - mean_target) / r.std_error;
  r.statistic = std::max(std::abs(z_disp), std::abs(z_mean));
  double p_disp = normal_two_sided_p(z_disp);
  double p_mean = normal_two_sided_p(z_mean);
  // Bonferroni over the two component tests.
  r.p_value = std::min(1.0, 2.0 * std::min(p_disp, p_mean));
  r.verdict = *r.p_value > kAlpha ? Verdict::kPass : Verdict::kFail;
  return r;
}

// Mean-vs-target report: pass iff |estimate - target| < 3 std errors.
inline StatReport mean_vs_target(const std::vector<double>& xs, double target,
                                 const std::string& name, double extra_bias = 0.0) {
  std::size_t n = xs.size();
  if (n < 2) throw NumericError("mean_vs_target needs n >= 2");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  StatReport r;
  r.name = name;
  r.n = n;
  r.estimate = mean;
  r.std_error = se;
  r.target = target;
  double slack = 3.0 * se + extra_bias;
  r.statistic = se > 0 ? (mean - target) / se : (mean == target ? 0.0 : 1e300);
  r.p_value = se > 0 ? normal_two_sided_p((std::abs(mean - target) -
                                           std::min(extra_bias, std::abs(mean - target))) /
                                          se)
                     : (mean == target ? 1.0 : 0.0);
  r.verdict = std::abs(mean - target) <= slack ? Verdict::kPass : Verdict::kFail;
  return r;
}

// --- CSV ---------------------------------------------------------------------

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_number(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

inline void write_report_csv(std::ostream& os,
                             const std::vector<StatReport>& reports) {
  os << "check-name,statistic,estimate,ci_low,ci_high,target,p_value,verdict\n";
  for (const auto& r : reports) {
    os << csv_quote(r.name) << ',' << csv_number(r.statistic) << ','
       << csv_number(r.estimate) << ','
       << csv_number(r.estimate - 3.0 * r.std_error) << ','
       << csv_number(r.estimate + 3.0 * r.std_error) << ','
       << (r.target ? csv_number(*r.target) : std::string()) << ','
       << (r.p_value ? csv_number(*r.p_value) : std::string()) << ','
       << verdict_name(r.verdict) << '\n';
  }
}

}  // namespace levygrow
