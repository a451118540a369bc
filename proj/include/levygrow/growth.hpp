// The psi-consistent family of Galton-Watson real forests: level offspring
// laws xi_lambda, red laws xi_{mu,lambda}, graft-count laws nu_l, the grafting
// operator Q^a_{mu,lambda} (direct and dual point-process form), the nested
// growth process, and the radius-capped Levy-forest approximation.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "levygrow/discrete.hpp"
#include "levygrow/mechanism.hpp"
#include "levygrow/realtree.hpp"
#include "levygrow/rng.hpp"

namespace levygrow {

struct LevyFamilyParams {
  BranchingMechanism mech;
  double a = 0.0;  // root immigration scale

  LevyFamilyParams(BranchingMechanism m, double a_in) : mech(std::move(m)), a(a_in) {
    if (a < 0) throw DomainError("immigration scale a must be >= 0");
  }
};

inline double a_lambda(const LevyFamilyParams& params, double lambda) {
  return params.a * params.mech.psi_inverse(lambda);
}

inline double c_lambda(const LevyFamilyParams& params, double lambda) {
  return params.mech.psi_derivative(params.mech.psi_inverse(lambda), 1);
}

// Level offspring mass xi_lambda(k) = r^{k-1} |psi^(k)(r)| / (k! psi'(r)) with
// r = psi^{-1}(lambda); xi_lambda(1) = 0.  At lambda = 0 this requires a
// supercritical mechanism (r = gamma > 0), where xi_0(0) = 0.
inline double xi_lambda(const LevyFamilyParams& params, double lambda,
                        std::size_t k) {
  if (lambda < 0) throw DomainError("xi_lambda requires lambda >= 0");
  double r = params.mech.psi_inverse(lambda);
  if (!(r > 0))
    throw DomainError("xi at level 0 is degenerate unless gamma > 0");
  if (k == 1) return 0.0;
  double q = params.mech.psi_derivative(r, 1);
  if (k == 0) return lambda / (r * q);  // psi(r) = lambda
  if (k >= 30) {
    // direct products overflow here; only the jump part contributes
    double lg = params.mech.log_levy_moment(r, static_cast<int>(k));
    if (!std::isfinite(lg)) return 0.0;
    return std::exp(static_cast<double>(k - 1) * std::log(r) + lg -
                    std::lgamma(static_cast<double>(k) + 1.0) - std::log(q));
  }
  double fac = 1.0;
  for (std::size_t j = 2; j <= k; ++j) fac *= static_cast<double>(j);
  return std::pow(r, static_cast<double>(k - 1)) *
         std::fabs(params.mech.psi_derivative(r, static_cast<int>(k))) /
         (fac * q);
}

// Red offspring mass xi_{mu,lambda}(k): subcritical for mu < lambda.
inline double xi_mu_lambda(const LevyFamilyParams& params, double mu,
                           double lambda, std::size_t k) {
  if (!(mu >= 0) || !(lambda > mu))
    throw DomainError("xi_mu_lambda requires 0 <= mu < lambda");
  double r_mu = params.mech.psi_inverse(mu);
  double r_la = params.mech.psi_inverse(lambda);
  double d = r_la - r_mu;
  double q = params.mech.psi_derivative(r_la, 1);
  if (k == 1) return 0.0;
  if (k == 0) return (lambda - mu) / (d * q);
  if (k >= 30) {
    double lg = params.mech.log_levy_moment(r_la, static_cast<int>(k));
    if (!std::isfinite(lg)) return 0.0;
    return std::exp(lg + static_cast<double>(k - 1) * std::log(d) -
                    std::lgamma(static_cast<double>(k) + 1.0) - std::log(q));
  }
  double fac = 1.0;
  for (std::size_t j = 2; j <= k; ++j) fac *= static_cast<double>(j);
  return std::fabs(params.mech.psi_derivative(r_la, static_cast<int>(k))) *
         std::pow(d, static_cast<double>(k - 1)) / (fac * q);
}

namespace detail {

// Tabulate a mass function; finite law when the head captures all but 1e-13
// of the mass (renormalized), lazy-tail law otherwise (heavy-tailed cases).
inline OffspringDistribution make_law(
    const std::function<double(std::size_t)>& mass_fn, std::size_t head_max = 256) {
  std::vector<double> head;
  double cum = 0.0;
  for (std::size_t k = 0; k < head_max; ++k) {
    double m = mass_fn(k);
    if (m < 0) throw DomainError("negative offspring mass");
    head.push_back(m);
    cum += m;
    if (k >= 2 && 1.0 - cum < 1e-10) {
      for (double& v : head) v /= cum;
      return OffspringDistribution(std::move(head));
    }
  }
  return OffspringDistribution(std::move(head), mass_fn);
}

}  // namespace detail

inline OffspringDistribution xi_lambda_law(const LevyFamilyParams& params,
                                           double lambda) {
  return detail::make_law(
      [params, lambda](std::size_t k) { return xi_lambda(params, lambda, k); });
}

inline OffspringDistribution xi_mu_lambda_law(const LevyFamilyParams& params,
                                              double mu, double lambda) {
  return detail::make_law([params, mu, lambda](std::size_t k) {
    return xi_mu_lambda(params, mu, lambda, k);
  });
}

// Raw graft-count mass nu_l^{mu,lambda}(k); the caller-facing law is nu_law.
inline double nu_mass(const LevyFamilyParams& params, double mu, double lambda,
                      int l, std::size_t k) {
  if (l < 1) throw DomainError("nu_law requires l >= 1");
  if (!(mu >= 0) || !(lambda > mu))
    throw DomainError("nu_law requires 0 <= mu < lambda");
  double r_mu = params.mech.psi_inverse(mu);
  double r_la = params.mech.psi_inverse(lambda);
  double d = r_la - r_mu;
  double norm;
  if (l == 1) {
    if (k == 0) return 0.0;
    norm = params.mech.psi_derivative(r_la, 1) -
           params.mech.psi_derivative(r_mu, 1);
  } else {
    norm = std::fabs(params.mech.psi_derivative(r_mu, l));
  }
  if (!(norm > 0)) throw DomainError("nu_law normalizer vanishes");
  if (l + k >= 30) {
    double lg = params.mech.log_levy_moment(r_la, l + static_cast<int>(k));
    if (!std::isfinite(lg)) return 0.0;
    return std::exp(lg + static_cast<double>(k) * std::log(d) -
                    std::lgamma(static_cast<double>(k) + 1.0) - std::log(norm));
  }
  double fac = 1.0;
  for (std::size_t j = 2; j <= k; ++j) fac *= static_cast<double>(j);
  return std::fabs(
             params.mech.psi_derivative(r_la, l + static_cast<int>(k))) *
         std::pow(d, static_cast<double>(k)) / (fac * norm);
}

inline OffspringDistribution nu_law(const LevyFamilyParams& params, double mu,
                                    double lambda, int l) {
  nu_mass(params, mu, lambda, l, l == 1 ? 1 : 0);  // validate arguments early
  return detail::make_law([params, mu, lambda, l](std::size_t k) {
    return nu_mass(params, mu, lambda, l, k);
  });
}

namespace detail {

// Append one GW(xi, edge-rate q)-real tree below `attach`: the first
// individual is an Exp(q) edge at the attach point, every individual begets
// xi-many children.  Growth stops at depth_budget from the attach point; cut
// edges end in frontier leaves.
inline void append_gw_real_tree(RealTree& out, int attach,
                                const OffspringDistribution& xi, double q,
                                double depth_budget, Rng& rng,
                                std::size_t node_budget) {
  struct Item {
    int parent;
    double remaining;
  };
  std::vector<Item> stack = {{attach, depth_budget}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    if (out.size() >= node_budget)
      throw NumericError("real-tree node budget exceeded");
    double len = rng.exponential(q);
    if (len >= it.remaining) {
      out.add_child(it.parent, it.remaining, true);
      continue;
    }
    int u = out.add_child(it.parent, len);
    std::size_t k = xi.sample(rng);
    for (std::size_t j = 0; j < k; ++j)
      stack.push_back({u, it.remaining - len});
  }
}

}  // namespace detail

// GW(xi_lambda, psi'(psi^{-1}(lambda)), a psi^{-1}(lambda))-real forest:
// Poisson(a_lambda) independent trees pasted at the root, truncated at metric
// radius radius_cap (cut points flagged frontier).
inline RealTree sample_gw_real_forest(const LevyFamilyParams& params,
                                      double lambda, Rng& rng,
                                      double radius_cap,
                                      std::size_t node_budget = 1u << 22) {
  if (!(radius_cap > 0)) throw DomainError("radius_cap must be > 0");
  RealTree out = RealTree::point_tree();
  long n = rng.poisson(a_lambda(params, lambda));
  if (n == 0) return out;
  OffspringDistribution xi = xi_lambda_law(params, lambda);
  double q = c_lambda(params, lambda);
  for (long i = 0; i < n; ++i)
    detail::append_gw_real_tree(out, 0, xi, q, radius_cap, rng, node_budget);
  return out;
}

namespace detail {

// Shared tail of both grafting samplers: attach the collected forests,
// each counted attachment spawning independent GW(xi_ml, q)-real trees
// capped at radius_cap from the global root.
inline RealTree graft_counted(const RealTree& base,
                              const std::vector<std::pair<TreePoint, long>>& spots,
                              const OffspringDistribution& xi_ml, double q,
                              double radius_cap, Rng& rng,
                              std::size_t node_budget) {
  auto d = base.depths();
  std::vector<std::pair<TreePoint, RealTree>> att;
  for (const auto& [pt, count] : spots) {
    if (count <= 0) continue;
    double depth = base.point_depth(pt, d);
    double budget = radius_cap - depth;
    if (!(budget > 0)) continue;  // attachment outside the ball of interest
    RealTree t = RealTree::point_tree();
    for (long i = 0; i < count; ++i)
      append_gw_real_tree(t, 0, xi_ml, q, budget, rng, node_budget);
    att.emplace_back(pt, std::move(t));
  }
  return graft(base, att);
}

}  // namespace detail

// Grafting operator Q^a_{mu,lambda}(T): Poisson points on the skeleton at
// rate psi'(r_lambda) - psi'(r_mu) each grafting nu_1-many trees; every
// branch point with l+1 neighbours grafts nu_l-many; the root grafts
// Poisson(a (r_lambda - r_mu)) trees.  All grafted trees are independent
// GW(xi_{mu,lambda}, psi'(r_lambda))-real trees.
inline RealTree graft_q(const LevyFamilyParams& params, const RealTree& T,
                        double mu, double lambda, double a, Rng& rng,
                        double radius_cap,
                        std::size_t node_budget = 1u << 22) {
  if (mu == lambda) return T;
  double r_mu = params.mech.psi_inverse(mu);
  double r_la = params.mech.psi_inverse(lambda);
  double delta = r_la - r_mu;
  double rate = params.mech.psi_derivative(r_la, 1) -
                params.mech.psi_derivative(r_mu, 1);
  OffspringDistribution xi_ml = xi_mu_lambda_law(params, mu, lambda);
  OffspringDistribution nu1 = nu_law(params, mu, lambda, 1);
  std::map<int, OffspringDistribution> nu_cache;

  std::vector<std::pair<TreePoint, long>> spots;
  std::vector<double> cum = edge_length_prefix(T);
  long n_pts = cum.back() > 0 ? rng.poisson(rate * cum.back()) : 0;
  for (long i = 0; i < n_pts; ++i)
    spots.emplace_back(length_measure_sample(T, rng, cum),
                       static_cast<long>(nu1.sample(rng)));
  for (std::size_t u = 1; u < T.size(); ++u) {
    int l = static_cast<int>(T.nodes[u].children.size());
    if (l < 2) continue;  // leaves, frontier cuts and degree-2 points
    auto it = nu_cache.find(l);
    if (it == nu_cache.end())
      it = nu_cache.emplace(l, nu_law(params, mu, lambda, l)).first;
    spots.emplace_back(T.node_point(static_cast<int>(u)),
                       static_cast<long>(it->second.sample(rng)));
  }
  spots.emplace_back(TreePoint{0, 0.0}, rng.poisson(a * delta));
  return detail::graft_counted(T, spots, xi_ml,
                               params.mech.psi_derivative(r_la, 1), radius_cap,
                               rng, node_budget);
}

// Branch-point mass law eta_{mu,l}: an atom at 0 of weight
// 2 beta 1_{l=2} / |psi^(l)(r_mu)| plus the density x^l e^{-x r_mu} Pi(dx)
// normalized by the same factor; a probability measure by construction.
struct EtaLaw {
  const BranchingMechanism* mech;
  double mu = 0.0;
  int l = 0;
  double atom_weight = 0.0;  // mass of the delta at 0
  double cont_weight = 0.0;  // mass of the jump-measure part

  double total_mass() const { return atom_weight + cont_weight; }

  double sample(Rng& rng) const {
    if (rng.uniform() * total_mass() < atom_weight) return 0.0;
    double r_mu = mech->psi_inverse(mu);
    if (auto* at = std::get_if<AtomicMeasure>(&mech->levy())) {
      double total = 0.0;
      std::vector<double> w;
      for (auto& [x, m] : at->atoms) {
        w.push_back(m * std::pow(x, l) * std::exp(-r_mu * x));
        total += w.back();
      }
      double u = rng.uniform() * total;
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (u < w[j]) return at->atoms[j].first;
        u -= w[j];
      }
      return at->atoms.back().first;
    }
    if (auto* st = std::get_if<StablePower>(&mech->levy())) {
      // x^l x^{-1-index} e^{-x r_mu} is a Gamma(l - index, r_mu) density
      if (!(r_mu > 0))
        throw DomainError("eta continuous part needs psi^{-1}(mu) > 0");
      return rng.gamma(static_cast<double>(l) - st->index, r_mu);
    }
    throw DomainError("eta law has no continuous part for this mechanism");
  }
};

inline EtaLaw eta_law(const LevyFamilyParams& params, double mu, int l) {
  if (l < 2) throw DomainError("eta law requires l >= 2");
  double r_mu = params.mech.psi_inverse(mu);
  double norm = std::fabs(params.mech.psi_derivative(r_mu, l));
  if (!(norm > 0)) throw DomainError("eta law normalizer vanishes");
  EtaLaw eta;
  eta.mech = &params.mech;
  eta.mu = mu;
  eta.l = l;
  eta.atom_weight = (l == 2 ? 2.0 * params.mech.beta() : 0.0) / norm;
  eta.cont_weight = params.mech.levy_moment(r_mu, l) / norm;
  return eta;
}

namespace detail {

// Jump size of the skeleton point process P1, conditioned on producing a
// non-trivial graft: density proportional to x e^{-r_mu x}(1 - e^{-delta x})
// against the jump measure.
inline double sample_p1_jump(const BranchingMechanism& mech, double r_mu,
                             double r_la, Rng& rng) {
  if (auto* at = std::get_if<AtomicMeasure>(&mech.levy())) {
    double total = 0.0;
    std::vector<double> w;
    for (auto& [x, m] : at->atoms) {
      w.push_back(m * x * std::exp(-r_mu * x) *
                  (1.0 - std::exp(-(r_la - r_mu) * x)));
      total += w.back();
    }
    double u = rng.uniform() * total;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (u < w[j]) return at->atoms[j].first;
      u -= w[j];
    }
    return at->atoms.back().first;
  }
  if (auto* st = std::get_if<StablePower>(&mech.levy())) {
    // write 1 - e^{-delta x} = x integral_{r_mu}^{r_la} e^{-(u - r_mu)x} du:
    // the mixing rate u has density proportional to u^{index-2} on
    // [r_mu, r_la] and x | u is Gamma(2 - index, u).
    double th = st->index;
    double lo = std::pow(r_mu, th - 1.0), hi = std::pow(r_la, th - 1.0);
    double u = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / (th - 1.0));
    return rng.gamma(2.0 - th, u);
  }
  throw DomainError("P1 jump sampling needs an atomic or stable jump measure");
}

// Poisson(mean) conditioned to be >= 1, by chop-down inversion.
inline long positive_poisson(double mean, Rng& rng) {
  if (!(mean > 0)) throw DomainError("positive_poisson requires mean > 0");
  double u = rng.uniform() * -std::expm1(-mean);
  long k = 1;
  double p = mean * std::exp(-mean);
  while (u >= p && k < (1L << 40)) {
    u -= p;
    ++k;
    p *= mean / static_cast<double>(k);
  }
  return k;
}

}  // namespace detail

// Dual form of the grafting operator: skeleton Poisson points at the same
// total rate draw either the quadratic-part mark (a single tree) or a
// conditioned jump mass x followed by a positive Poisson(delta x) number of
// trees; branch points draw masses from eta_{mu,l}; the root mass is a.
// Agrees in law with graft_q.
inline RealTree graft_q_dual(const LevyFamilyParams& params, const RealTree& T,
                             double mu, double lambda, double a, Rng& rng,
                             double radius_cap,
                             std::size_t node_budget = 1u << 22) {
  if (mu == lambda) return T;
  double r_mu = params.mech.psi_inverse(mu);
  double r_la = params.mech.psi_inverse(lambda);
  double delta = r_la - r_mu;
  double rate = params.mech.psi_derivative(r_la, 1) -
                params.mech.psi_derivative(r_mu, 1);
  double quad_rate = 2.0 * params.mech.beta() * delta;
  OffspringDistribution xi_ml = xi_mu_lambda_law(params, mu, lambda);

  std::vector<std::pair<TreePoint, long>> spots;
  std::vector<double> cum = edge_length_prefix(T);
  long n_pts = cum.back() > 0 ? rng.poisson(rate * cum.back()) : 0;
  for (long i = 0; i < n_pts; ++i) {
    TreePoint pt = length_measure_sample(T, rng, cum);
    long count;
    if (rng.uniform() * rate < quad_rate) {
      count = 1;  // quadratic-part points carry a single tree
    } else {
      double x = detail::sample_p1_jump(params.mech, r_mu, r_la, rng);
      count = detail::positive_poisson(delta * x, rng);
    }
    spots.emplace_back(pt, count);
  }
  std::map<int, EtaLaw> eta_cache;
  for (std::size_t u = 1; u < T.size(); ++u) {
    int l = static_cast<int>(T.nodes[u].children.size());
    if (l < 2) continue;
    auto it = eta_cache.find(l);
    if (it == eta_cache.end())
      it = eta_cache.emplace(l, eta_law(params, mu, l)).first;
    double mass = it->second.sample(rng);
    if (mass > 0)
      spots.emplace_back(T.node_point(static_cast<int>(u)),
                         rng.poisson(delta * mass));
  }
  spots.emplace_back(TreePoint{0, 0.0}, rng.poisson(delta * a));
  return detail::graft_counted(T, spots, xi_ml,
                               params.mech.psi_derivative(r_la, 1), radius_cap,
                               rng, node_budget);
}

// Growth process state: the final forest carries every intermediate level.
// birth_step[u] = 0 for nodes of the initial tree, s >= 1 for nodes added by
// the grafting step onto levels[s-1] (edge-subdivision points inherit the
// subdivided edge's step).  leaf_mark[u] is an independent uniform used to
// extract intermediate levels by thinning.
struct GrowthState {
  std::vector<double> levels;
  RealTree forest;
  std::vector<int> birth_step;
  std::vector<double> leaf_mark;
};

// Node mask of the forest after `step` grafting steps (step = 0 gives the
// initial tree); parent-closed by construction.
inline std::vector<char> mask_after_step(const GrowthState& st, int step) {
  std::vector<char> mask(st.forest.size());
  for (std::size_t u = 0; u < st.forest.size(); ++u)
    mask[u] = st.birth_step[u] <= step ? 1 : 0;
  return mask;
}

// Intermediate level between levels[step-1] and levels[step]: keep the
// forest after step-1 plus the root paths of step-`step` leaves whose mark
// is below frac = (lambda - levels[step-1]) / (levels[step] - levels[step-1]).
inline std::vector<char> mask_intermediate(const GrowthState& st, int step,
                                           double frac) {
  if (frac < 0 || frac > 1) throw DomainError("thinning fraction outside [0,1]");
  std::vector<char> mask = mask_after_step(st, step - 1);
  for (std::size_t u = 0; u < st.forest.size(); ++u) {
    if (st.birth_step[u] != step || !st.forest.is_leaf(static_cast<int>(u)))
      continue;
    if (st.forest.nodes[u].frontier || st.leaf_mark[u] > frac) continue;
    for (int v = static_cast<int>(u); v >= 0 && !mask[v];
         v = st.forest.nodes[v].parent)
      mask[v] = 1;
  }
  return mask;
}

// Induced subtree of a parent-closed node mask (degree-2 nodes retained;
// the metric is the restriction).  old_of_new maps new indices back.
inline RealTree masked_subtree(const RealTree& t, const std::vector<char>& mask,
                               std::vector<int>* old_of_new = nullptr) {
  if (mask.size() != t.size()) throw DomainError("mask size mismatch");
  if (!mask[0]) throw DomainError("mask must contain the root");
  RealTree out = RealTree::point_tree();
  out.nodes[0].frontier = t.nodes[0].frontier;
  if (old_of_new) old_of_new->assign(1, 0);
  std::vector<int> image(t.size(), -1);
  image[0] = 0;
  for (int u : t.dfs_order()) {
    if (u == 0 || !mask[u]) continue;
    int p = t.nodes[u].parent;
    if (image[p] < 0) throw DomainError("mask not parent-closed");
    image[u] = out.add_child(image[p], t.nodes[u].edge_length,
                             t.nodes[u].frontier);
    if (old_of_new) old_of_new->push_back(u);
  }
  return out;
}

// Iterated grafting through the given increasing levels, starting at T0 and
// mu = 0; records birth steps and leaf marks for intermediate extraction.
inline GrowthState grow(const LevyFamilyParams& params, const RealTree& T0,
                        const std::vector<double>& levels, Rng& rng,
                        double radius_cap, std::size_t node_budget = 1u << 22,
                        bool dual = false) {
  if (levels.empty()) throw DomainError("grow needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] < 0 || (i > 0 && !(levels[i] > levels[i - 1])))
      throw DomainError("levels must be increasing and >= 0");
  GrowthState st;
  st.levels = levels;
  st.forest = T0;
  st.birth_step.assign(T0.size(), 0);
  st.leaf_mark.assign(T0.size(), 0.0);
  double mu = 0.0;
  for (std::size_t s = 0; s < levels.size(); ++s) {
    std::size_t old_size = st.forest.size();
    st.forest = dual ? graft_q_dual(params, st.forest, mu, levels[s], params.a,
                                    rng, radius_cap, node_budget)
                     : graft_q(params, st.forest, mu, levels[s], params.a, rng,
                               radius_cap, node_budget);
    st.birth_step.resize(st.forest.size(), static_cast<int>(s) + 1);
    st.leaf_mark.resize(st.forest.size(), 0.0);
    for (std::size_t u = old_size; u < st.forest.size(); ++u)
      st.leaf_mark[u] = rng.uniform();
    // An appended node with a child of an earlier step is an edge-subdivision
    // point on the pre-existing skeleton and inherits that step.  On a
    // multiply-subdivided edge the subdivision nodes form a chain appended
    // shallowest-first, so a deepest-first sweep propagates the step up it.
    for (std::size_t u = st.forest.size(); u-- > old_size;)
      for (int c : st.forest.nodes[u].children)
        st.birth_step[u] = std::min(st.birth_step[u], st.birth_step[c]);
    mu = levels[s];
  }
  return st;
}

// Hausdorff distance within the radius-r ball between the forests after
// steps `step` and `step + 1` of a growth state.
inline double growth_step_hausdorff(const GrowthState& st, int step, double r) {
  std::vector<int> old;
  RealTree hi = masked_subtree(st.forest, mask_after_step(st, step + 1), &old);
  std::vector<char> in_lo(hi.size());
  for (std::size_t i = 0; i < hi.size(); ++i)
    in_lo[i] = st.birth_step[old[i]] <= step ? 1 : 0;
  return nested_hausdorff(hi, in_lo, r);
}

struct ForestDiagnostics {
  // (mu, Hausdorff distance in the r-ball between F_mu and F_{2 mu})
  std::vector<std::pair<double, double>> ladder;
  std::vector<double> levels;
};

// Radius-capped approximation of the limit forest: start from the leafless
// gamma-backbone (a point tree when gamma = 0), grow through dyadic levels
// up to lambda_max, and report the Hausdorff ladder between consecutive
// levels.  Requires Grey's condition (else the limit is not locally compact).
inline std::pair<GrowthState, ForestDiagnostics> levy_forest_approx(
    const LevyFamilyParams& params, double lambda_max, double r, Rng& rng,
    std::size_t node_budget = 1u << 22) {
  if (params.mech.grey_condition() != Grey::kTrue)
    throw DomainError("levy_forest_approx requires Grey's condition");
  if (!(lambda_max >= 1)) throw DomainError("lambda_max must be >= 1");
  RealTree f0 = params.mech.gamma_root() > 0
                    ? sample_gw_real_forest(params, 0.0, rng, r, node_budget)
                    : RealTree::point_tree();
  std::vector<double> levels;
  for (double l = 1.0; l < lambda_max; l *= 2.0) levels.push_back(l);
  levels.push_back(lambda_max);
  GrowthState st = grow(params, f0, levels, rng, r, node_budget);
  ForestDiagnostics diag;
  diag.levels = levels;
  for (std::size_t s = 0; s + 1 < levels.size(); ++s)
    diag.ladder.emplace_back(levels[s],
                             growth_step_hausdorff(st, static_cast<int>(s) + 1, r));
  return {std::move(st), std::move(diag)};
}

}  // namespace levygrow
