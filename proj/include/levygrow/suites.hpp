// Named verification suites: batteries of statistical checks over the
// samplers, runnable from the command line and reused by the acceptance
// tests.  Every suite is deterministic in the master seed: replicate k
// always draws from Rng::stream(seed, k) and writes into slot k, whatever
// the thread interleaving.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "levygrow/growth.hpp"
#include "levygrow/measures.hpp"
#include "levygrow/stats.hpp"

namespace levygrow {

struct SuiteOptions {
  std::vector<double> levels = {1.0, 4.0};
  double radius = 4.0;
  int reps = 2000;
  std::uint64_t seed = 1;
  std::size_t node_budget = 1u << 22;
};

// Run fn(k, rng) for k in [0, n_rep) across worker threads, replicate k
// owning stream k.  fn must confine itself to its own result slots; a
// replicate that cannot complete (node budget) should record NaN rather
// than throw, so that the surviving sample is the same in every run.
template <class F>
inline void parallel_reps(std::uint64_t seed, int n_rep, F&& fn) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned n_threads = std::min<unsigned>(hw, static_cast<unsigned>(n_rep));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int k = next.fetch_add(1); k < n_rep; k = next.fetch_add(1)) {
          Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
          fn(k, rng);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

inline std::vector<double> drop_nan(const std::vector<double>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs)
    if (!std::isnan(x)) out.push_back(x);
  return out;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Edge lengths of the tree with degree-two interior nodes contracted away:
// one entry per maximal unbranched chain.
inline std::vector<double> contracted_edge_lengths(const RealTree& t) {
  std::vector<double> out;
  for (std::size_t u = 1; u < t.size(); ++u) {
    if (t.nodes[u].children.size() == 1) continue;  // chain interior
    double len = 0.0;
    int v = static_cast<int>(u);
    while (v != 0) {
      len += t.nodes[v].edge_length;
      v = t.nodes[v].parent;
      if (v == 0 || t.nodes[v].children.size() != 1) break;
    }
    out.push_back(len);
  }
  return out;
}

// Number of individuals alive at depth t in a forest sampled with
// radius cap exactly t: the cut points are precisely the crossing edges.
inline double frontier_count(const RealTree& t) {
  double n = 0.0;
  for (const auto& node : t.nodes)
    if (node.frontier) n += 1.0;
  return n;
}

// Offspring histogram bins 0..K plus an overflow bin covering all but
// ~1e-9 of the mass.
inline std::vector<double> law_bin_probs(const OffspringDistribution& xi,
                                         std::size_t max_bins = 64) {
  std::vector<double> probs;
  double cum = 0.0;
  for (std::size_t k = 0; k < max_bins; ++k) {
    probs.push_back(xi.mass(k));
    cum += probs.back();
    if (1.0 - cum < 1e-9) break;
  }
  probs.push_back(std::max(0.0, 1.0 - cum));
  return probs;
}

inline StatReport offspring_chi_square(const OffspringDistribution& xi,
                                       int n_draws, Rng& rng,
                                       const std::string& name) {
  std::vector<double> probs = law_bin_probs(xi);
  std::vector<double> counts(probs.size(), 0.0);
  for (int i = 0; i < n_draws; ++i) {
    std::size_t k = xi.sample(rng);
    counts[std::min(k, probs.size() - 1)] += 1.0;
  }
  // A degenerate law (Brownian nu_1 = delta_1) leaves a single usable bin,
  // where the chi-square statistic is undefined; check the mean exactly.
  std::size_t live = 0;
  for (double p : probs)
    if (p > 1e-9) ++live;
  if (live < 2) {
    std::size_t k_star = 0;
    for (std::size_t k = 0; k < probs.size(); ++k)
      if (probs[k] > 0.5) k_star = k;
    std::vector<double> draws;
    for (std::size_t k = 0; k < counts.size(); ++k)
      for (int i = 0; i < counts[k]; ++i) draws.push_back(static_cast<double>(k));
    return mean_vs_target(draws, static_cast<double>(k_star), name);
  }
  return chi_square_gof(counts, probs, name);
}

}  // namespace detail

// --- offspring and height laws ----------------------------------------------

// Exact-law checks: offspring histograms of the level and two-level laws,
// and the closed-form height distribution of a single grafted tree.
inline std::vector<StatReport> suite_laws(const LevyFamilyParams& params,
                                          const SuiteOptions& opt) {
  std::vector<StatReport> out;
  int n_draws = std::max(opt.reps, 20000);
  std::uint64_t sub = 0;
  for (double lambda : opt.levels) {
    Rng rng = Rng::stream(opt.seed, 1000 + sub++);
    out.push_back(detail::offspring_chi_square(
        xi_lambda_law(params, lambda), n_draws, rng,
        "offspring chi2 lambda=" + std::to_string(lambda)));
  }
  double mu = opt.levels.size() >= 2 ? opt.levels.front() : 0.0;
  double lambda = opt.levels.back();
  if (mu > 0) {
    Rng rng = Rng::stream(opt.seed, 1100);
    out.push_back(detail::offspring_chi_square(
        xi_mu_lambda_law(params, mu, lambda), n_draws, rng,
        "offspring chi2 two-level"));
  }

  // Height of one grafted tree: P(h <= t) = exp(-v_{mu,lambda}(t)).
  std::vector<double> ts = {0.5, 1.0, 2.0};
  double cap = 2.25;
  OffspringDistribution xi = xi_mu_lambda_law(params, mu, lambda);
  double q = c_lambda(params, lambda);
  std::vector<std::vector<double>> hits(ts.size());
  Rng rng = Rng::stream(opt.seed, 1200);
  int n_h = std::max(opt.reps, 20000);
  for (int i = 0; i < n_h; ++i) {
    RealTree t = RealTree::point_tree();
    try {
      detail::append_gw_real_tree(t, 0, xi, q, cap, rng, opt.node_budget);
    } catch (const NumericError&) {
      continue;
    }
    double h = 0.0;
    for (double d : t.depths()) h = std::max(h, d);
    for (std::size_t j = 0; j < ts.size(); ++j)
      hits[j].push_back(h <= ts[j] ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < ts.size(); ++j) {
    double target = std::exp(-params.mech.finite_level_v(mu, lambda, ts[j]));
    out.push_back(mean_vs_target(hits[j], target,
                                 "tree height law t=" + std::to_string(ts[j])));
  }
  return out;
}

// --- leaf colouring consistency ----------------------------------------------

// Colour the leaves of a level-lambda forest black with probability
// mu/lambda; the black span has the law of a level-mu forest.  Compares the
// span statistics against direct sampling and the contracted edge lengths
// between the two sides, plus the all-red probability per component.
inline std::vector<StatReport> suite_colouring(const LevyFamilyParams& params,
                                               const SuiteOptions& opt) {
  if (opt.levels.size() < 2)
    throw DomainError("colouring suite needs two levels");
  double mu = opt.levels.front(), lambda = opt.levels.back();
  double keep = mu / lambda;
  int n = opt.reps;
  std::vector<double> roots_b(n, detail::kNaN), roots_d(n, detail::kNaN),
      leaves_b(n, detail::kNaN), leaves_d(n, detail::kNaN),
      h_b(n, detail::kNaN), h_d(n, detail::kNaN), len_b(n, detail::kNaN),
      len_d(n, detail::kNaN);
  std::vector<std::vector<double>> edges_b(n), edges_d(n), allred(n);
  double inf = std::numeric_limits<double>::infinity();
  parallel_reps(opt.seed, n, [&](int k, Rng& rng) {
    try {
      RealTree big = sample_gw_real_forest(params, lambda, rng, inf,
                                           opt.node_budget);
      std::vector<int> kept;
      std::vector<char> black(big.size(), 0);
      for (int u : real_leaves(big))
        if (rng.uniform() < keep) {
          kept.push_back(u);
          black[u] = 1;
        }
      RealTree span = leaf_span(big, kept);
      detail::SpanStats a = detail::span_stats(span);
      roots_b[k] = a.root_count;
      leaves_b[k] = a.leaf_count;
      h_b[k] = a.height;
      len_b[k] = a.length;
      edges_b[k] = detail::contracted_edge_lengths(span);
      // one all-red indicator per root component of the coloured forest
      std::vector<char> has_black(big.size(), 0);
      for (std::size_t u = 0; u < big.size(); ++u)
        if (black[u])
          for (int v = static_cast<int>(u); v != 0 && !has_black[v];
               v = big.nodes[v].parent)
            has_black[v] = 1;
      for (int c : big.nodes[0].children)
        allred[k].push_back(has_black[c] ? 0.0 : 1.0);

      RealTree small = sample_gw_real_forest(params, mu, rng, inf,
                                             opt.node_budget);
      RealTree dspan = leaf_span(small, real_leaves(small));
      detail::SpanStats b = detail::span_stats(dspan);
      roots_d[k] = b.root_count;
      leaves_d[k] = b.leaf_count;
      h_d[k] = b.height;
      len_d[k] = b.length;
      edges_d[k] = detail::contracted_edge_lengths(dspan);
    } catch (const NumericError&) {
      roots_b[k] = roots_d[k] = leaves_b[k] = leaves_d[k] = detail::kNaN;
      h_b[k] = h_d[k] = len_b[k] = len_d[k] = detail::kNaN;
      edges_b[k].clear();
      edges_d[k].clear();
      allred[k].clear();
    }
  });
  std::vector<double> eb, ed, red;
  for (int k = 0; k < n; ++k) {
    if (std::isnan(roots_b[k])) continue;
    eb.insert(eb.end(), edges_b[k].begin(), edges_b[k].end());
    ed.insert(ed.end(), edges_d[k].begin(), edges_d[k].end());
    red.insert(red.end(), allred[k].begin(), allred[k].end());
  }
  double root_target = params.a * params.mech.psi_inverse(mu);
  std::vector<StatReport> out;
  out.push_back(poisson_dispersion(detail::drop_nan(roots_b), root_target,
                                   "black root count"));
  out.push_back(ks_two_sample(detail::drop_nan(roots_b),
                              detail::drop_nan(roots_d), "root count KS"));
  out.push_back(ks_two_sample(detail::drop_nan(leaves_b),
                              detail::drop_nan(leaves_d), "leaf count KS"));
  out.push_back(
      ks_two_sample(detail::drop_nan(h_b), detail::drop_nan(h_d), "height KS"));
  out.push_back(ks_two_sample(detail::drop_nan(len_b), detail::drop_nan(len_d),
                              "length KS"));
  out.push_back(ks_two_sample(eb, ed, "contracted edge KS"));
  double red_target =
      1.0 - params.mech.psi_inverse(mu) / params.mech.psi_inverse(lambda);
  out.push_back(mean_vs_target(red, red_target, "all-red probability"));
  return out;
}

// --- the two grafting samplers agree ------------------------------------------

// Graft a fixed single-edge base from level mu to level lambda with both
// samplers; the skeleton attachment points are Poisson with rate
// psi'(r_lambda) - psi'(r_mu) per unit length, carry nu_1-many trees each,
// and the component heights agree between the samplers.
inline std::vector<StatReport> suite_dual(const LevyFamilyParams& params,
                                          const SuiteOptions& opt) {
  if (opt.levels.size() < 2) throw DomainError("dual suite needs two levels");
  double mu = opt.levels.front(), lambda = opt.levels.back();
  double edge_len = std::min(opt.radius / 2.0, 3.0);
  RealTree base = RealTree::point_tree();
  base.add_child(0, edge_len);
  double rate = c_lambda(params, lambda) - c_lambda(params, mu);
  int n = opt.reps;
  // per replicate: site count for each sampler, then per-site tree counts
  // and component heights
  std::vector<double> sites_p(n, detail::kNaN), sites_d(n, detail::kNaN);
  std::vector<std::vector<double>> trees_p(n), trees_d(n), heights_p(n),
      heights_d(n);
  auto analyze = [&](const RealTree& t, double& n_sites,
                     std::vector<double>& trees, std::vector<double>& heights) {
    auto d = t.depths();
    std::vector<double> high(t.size(), 0.0);
    auto order = t.dfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int u = *it;
      high[u] = std::max(high[u], d[u]);
      if (u != 0) high[t.nodes[u].parent] =
          std::max(high[t.nodes[u].parent], high[u]);
    }
    // path from the old tip (index 1, preserved by grafting) to the root;
    // its interior nodes are the skeleton attachment points
    std::vector<char> on_path(t.size(), 0);
    for (int v = 1; v != -1; v = t.nodes[v].parent) on_path[v] = 1;
    n_sites = 0.0;
    for (std::size_t u = 1; u < t.size(); ++u) {
      if (!on_path[u] || u == 1) continue;
      double n_trees = 0.0;
      for (int c : t.nodes[u].children) {
        if (on_path[c]) continue;
        n_trees += 1.0;
        heights.push_back(high[c] - d[u]);
      }
      if (n_trees > 0) {
        n_sites += 1.0;
        trees.push_back(n_trees);
      }
    }
  };
  parallel_reps(opt.seed, n, [&](int k, Rng& rng) {
    try {
      RealTree tp = graft_q(params, base, mu, lambda, 0.0, rng, opt.radius,
                            opt.node_budget);
      analyze(tp, sites_p[k], trees_p[k], heights_p[k]);
      RealTree td = graft_q_dual(params, base, mu, lambda, 0.0, rng,
                                 opt.radius, opt.node_budget);
      analyze(td, sites_d[k], trees_d[k], heights_d[k]);
    } catch (const NumericError&) {
      sites_p[k] = sites_d[k] = detail::kNaN;
      trees_p[k].clear();
      trees_d[k].clear();
      heights_p[k].clear();
      heights_d[k].clear();
    }
  });
  std::vector<double> tp_all, td_all, hp_all, hd_all;
  for (int k = 0; k < n; ++k) {
    if (std::isnan(sites_p[k])) continue;
    tp_all.insert(tp_all.end(), trees_p[k].begin(), trees_p[k].end());
    td_all.insert(td_all.end(), trees_d[k].begin(), trees_d[k].end());
    hp_all.insert(hp_all.end(), heights_p[k].begin(), heights_p[k].end());
    hd_all.insert(hd_all.end(), heights_d[k].begin(), heights_d[k].end());
  }
  OffspringDistribution nu1 = nu_law(params, mu, lambda, 1);
  auto trees_chi2 = [&](const std::vector<double>& xs,
                        const std::string& name) {
    std::vector<double> probs = detail::law_bin_probs(nu1);
    std::vector<double> counts(probs.size(), 0.0);
    for (double x : xs)
      counts[std::min<std::size_t>(static_cast<std::size_t>(x),
                                   probs.size() - 1)] += 1.0;
    std::size_t live = 0;
    for (double p : probs)
      if (p > 1e-9) ++live;
    if (live < 2) return mean_vs_target(xs, 1.0, name);
    return chi_square_gof(counts, probs, name);
  };
  std::vector<StatReport> out;
  out.push_back(poisson_dispersion(detail::drop_nan(sites_p),
                                   rate * edge_len, "skeleton sites primal"));
  out.push_back(poisson_dispersion(detail::drop_nan(sites_d),
                                   rate * edge_len, "skeleton sites dual"));
  out.push_back(trees_chi2(tp_all, "trees per site primal"));
  out.push_back(trees_chi2(td_all, "trees per site dual"));
  out.push_back(ks_two_sample(hp_all, hd_all, "component height KS"));
  return out;
}

// --- semigroup of the growth procedure ----------------------------------------

// Growing 0 -> mu -> lambda and 0 -> lambda in one step give the same forest
// law; compared through four summary statistics.
inline std::vector<StatReport> suite_chain(const LevyFamilyParams& params,
                                           const SuiteOptions& opt) {
  if (opt.levels.size() < 2) throw DomainError("chain suite needs two levels");
  double mu = opt.levels.front(), lambda = opt.levels.back();
  int n = opt.reps;
  std::vector<double> r2(n, detail::kNaN), r1(n, detail::kNaN),
      l2(n, detail::kNaN), l1(n, detail::kNaN), h2(n, detail::kNaN),
      h1(n, detail::kNaN), t2(n, detail::kNaN), t1(n, detail::kNaN);
  // The height law has an atom at the radius cap, but accumulated frontier
  // depths land at cap +- a few ulp along arithmetic paths that differ
  // between the two growth routes; snap the atom to one value so the KS
  // statistic compares the laws rather than the rounding noise.
  double cap = opt.radius;
  auto snap = [cap](double h) {
    return h > cap - 1e-9 * std::max(1.0, cap) ? cap : h;
  };
  parallel_reps(opt.seed, n, [&](int k, Rng& rng) {
    try {
      GrowthState two = grow(params, RealTree::point_tree(), {mu, lambda}, rng,
                             opt.radius, opt.node_budget);
      detail::SpanStats a = detail::span_stats(two.forest);
      GrowthState one = grow(params, RealTree::point_tree(), {lambda}, rng,
                             opt.radius, opt.node_budget);
      detail::SpanStats b = detail::span_stats(one.forest);
      r2[k] = a.root_count;
      l2[k] = a.leaf_count;
      h2[k] = snap(a.height);
      t2[k] = a.length;
      r1[k] = b.root_count;
      l1[k] = b.leaf_count;
      h1[k] = snap(b.height);
      t1[k] = b.length;
    } catch (const NumericError&) {
      r2[k] = r1[k] = l2[k] = l1[k] = detail::kNaN;
      h2[k] = h1[k] = t2[k] = t1[k] = detail::kNaN;
    }
  });
  std::vector<StatReport> out;
  out.push_back(ks_two_sample(detail::drop_nan(r2), detail::drop_nan(r1),
                              "chained root count KS"));
  out.push_back(ks_two_sample(detail::drop_nan(l2), detail::drop_nan(l1),
                              "chained leaf count KS"));
  out.push_back(ks_two_sample(detail::drop_nan(h2), detail::drop_nan(h1),
                              "chained height KS"));
  out.push_back(ks_two_sample(detail::drop_nan(t2), detail::drop_nan(t1),
                              "chained length KS"));
  return out;
}

// --- excursion tail -----------------------------------------------------------

inline std::vector<StatReport> suite_excursions(const LevyFamilyParams& params,
                                                const SuiteOptions& opt) {
  Rng rng = Rng::stream(opt.seed, 0);
  return theta_tail_check(params, opt.levels.back(), {0.5, 1.0, 2.0},
                          opt.reps, rng, opt.node_budget);
}

// --- CSBP marginal -------------------------------------------------------------

namespace detail {

// F(t) = E[s^{Z_t}] for one tree of the branching process with offspring xi
// and Exp(q) lifetimes: dF/dt = q (f(F) - F), F(0) = s, integrated by RK4.
inline double pgf_flow(const OffspringDistribution& xi, double q, double s,
                       double t, int steps = 2000) {
  auto rhs = [&](double y) { return q * (xi.pgf(y) - y); };
  double y = s, h = t / steps;
  for (int i = 0; i < steps; ++i) {
    double k1 = rhs(y);
    double k2 = rhs(y + 0.5 * h * k1);
    double k3 = rhs(y + 0.5 * h * k2);
    double k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

// Limit cumulant u(t, theta): du/dt = -psi(u), u(0) = theta.
inline double csbp_cumulant(const BranchingMechanism& mech, double t,
                            double theta, int steps = 2000) {
  auto rhs = [&](double y) { return -mech.psi(y); };
  double y = theta, h = t / steps;
  for (int i = 0; i < steps; ++i) {
    double k1 = rhs(y);
    double k2 = rhs(y + 0.5 * h * k1);
    double k3 = rhs(y + 0.5 * h * k2);
    double k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

}  // namespace detail

// Laplace transform of the rescaled population at depth t of a level-lambda
// forest against the limit CSBP cumulant; the finite-level transform is
// itself computable, so the gap enters as an explicit bias allowance.
inline StatReport csbp_marginal_check(const LevyFamilyParams& params,
                                      double lambda, double t, double theta,
                                      int n_rep, std::uint64_t seed,
                                      std::size_t node_budget = 1u << 22) {
  double r = params.mech.psi_inverse(lambda);
  double s = std::exp(-theta / r);
  double flow =
      detail::pgf_flow(xi_lambda_law(params, lambda),
                       c_lambda(params, lambda), s, t);
  double exact = std::exp(params.a * r * (flow - 1.0));
  double limit = std::exp(-params.a * detail::csbp_cumulant(params.mech, t, theta));
  std::vector<double> xs(n_rep, detail::kNaN);
  parallel_reps(seed, n_rep, [&](int k, Rng& rng) {
    try {
      RealTree f = sample_gw_real_forest(params, lambda, rng, t, node_budget);
      xs[k] = std::exp(-theta * detail::frontier_count(f) / r);
    } catch (const NumericError&) {
      xs[k] = detail::kNaN;
    }
  });
  return mean_vs_target(detail::drop_nan(xs), limit,
                        "csbp marginal t=" + std::to_string(t) +
                            " theta=" + std::to_string(theta),
                        std::abs(exact - limit));
}

// --- limit forest diagnostics ---------------------------------------------------

// Requires Grey's condition.  Grows the dyadic approximation of the limit
// forest, checks the Hausdorff ladder decays (from the fourth rung, where
// the log(mu)/sqrt(mu) decay dominates the small-ball fill-in), the ball
// height law against the limit tail, and two CSBP marginals.
inline std::vector<StatReport> suite_levy(const LevyFamilyParams& params,
                                          const SuiteOptions& opt) {
  if (params.mech.grey_condition() != Grey::kTrue)
    throw DomainError("levy suite requires Grey's condition");
  double lambda_max = opt.levels.back();
  double x = opt.radius / 2.0;
  int n = opt.reps;
  std::vector<std::vector<double>> rungs;
  std::vector<double> hits(n, detail::kNaN);
  std::vector<std::vector<double>> rung_slots(n);
  parallel_reps(opt.seed, n, [&](int k, Rng& rng) {
    try {
      auto [st, diag] = levy_forest_approx(params, lambda_max, opt.radius, rng,
                                           opt.node_budget);
      double h = 0.0;
      auto d = st.forest.depths();
      for (double dep : d) h = std::max(h, dep);
      hits[k] = h <= x ? 1.0 : 0.0;
      for (auto& [l, dist] : diag.ladder) rung_slots[k].push_back(dist);
    } catch (const NumericError&) {
      hits[k] = detail::kNaN;
      rung_slots[k].clear();
    }
  });
  std::size_t n_rungs = 0;
  for (auto& r : rung_slots) n_rungs = std::max(n_rungs, r.size());
  rungs.assign(n_rungs, {});
  for (auto& r : rung_slots)
    for (std::size_t j = 0; j < r.size(); ++j) rungs[j].push_back(r[j]);
  std::vector<double> med(n_rungs, 0.0);
  for (std::size_t j = 0; j < n_rungs; ++j) {
    auto v = rungs[j];
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    med[j] = v[v.size() / 2];
  }
  StatReport ladder;
  ladder.name = "hausdorff ladder decay";
  ladder.n = static_cast<std::size_t>(n);
  double worst = 0.0;
  bool ok = n_rungs >= 4;
  for (std::size_t j = 3; j + 1 < n_rungs; ++j) {
    worst = std::max(worst, med[j + 1] - med[j]);
    if (!(med[j] > med[j + 1])) ok = false;
  }
  ladder.statistic = worst;
  ladder.estimate = n_rungs ? med[n_rungs - 1] : 0.0;
  ladder.verdict = ok ? Verdict::kPass : Verdict::kFail;

  double v = params.mech.grey_v(x);
  double w = params.mech.gamma_root() +
             params.mech.finite_level_w(0.0, lambda_max, x);
  double target = std::exp(-params.a * v);
  double bias = std::abs(std::exp(-params.a * w) - target);
  std::vector<StatReport> out;
  out.push_back(ladder);
  out.push_back(mean_vs_target(detail::drop_nan(hits), target,
                               "limit height law", bias));
  out.push_back(csbp_marginal_check(params, lambda_max, 1.0, 1.0, n,
                                    opt.seed + 1, opt.node_budget));
  out.push_back(csbp_marginal_check(params, lambda_max, 2.0, 0.5, n,
                                    opt.seed + 2, opt.node_budget));
  return out;
}

// --- dispatch -------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "laws", "colouring", "dual", "chain", "excursions", "levy"};
  return names;
}

inline std::vector<StatReport> run_suite(const std::string& name,
                                         const LevyFamilyParams& params,
                                         const SuiteOptions& opt) {
  if (opt.levels.empty()) throw DomainError("suite needs at least one level");
  if (opt.reps < 100) throw DomainError("suites need reps >= 100");
  if (name == "laws") return suite_laws(params, opt);
  if (name == "colouring") return suite_colouring(params, opt);
  if (name == "dual") return suite_dual(params, opt);
  if (name == "chain") return suite_chain(params, opt);
  if (name == "excursions") return suite_excursions(params, opt);
  if (name == "levy") return suite_levy(params, opt);
  throw DomainError("unknown suite: " + name);
}

}  // namespace levygrow
