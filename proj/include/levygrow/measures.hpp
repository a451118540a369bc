#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "levygrow/growth.hpp"
#include "levygrow/stats.hpp"

namespace levygrow {

// ---------------------------------------------------------------------------
// Leaf mass measure
// ---------------------------------------------------------------------------

// The renormalized leaf measure of a stored level: one atom of mass 1/lambda
// at every non-initial leaf of F_lambda inside the ball of radius `radius`.
struct LeafMeasure {
  double lambda = 0.0;
  double radius = 0.0;
  // Atoms as points of the level forest the measure was computed from,
  // together with their root distances (all <= radius).
  std::vector<TreePoint> atoms;
  std::vector<double> atom_depths;

  double total_mass() const {
    return static_cast<double>(atoms.size()) / lambda;
  }

  // Mass inside the concentric ball of radius r <= radius.
  double mass_in_ball(double r) const {
    if (r > radius) throw DomainError("ball exceeds the certified radius");
    std::size_t n = 0;
    for (double d : atom_depths)
      if (d <= r) ++n;
    return static_cast<double>(n) / lambda;
  }
};

namespace detail {

// Index of the grafting step that produced level `lambda` (0 = initial tree).
inline int level_step(const GrowthState& st, double lambda) {
  if (lambda == 0.0) return 0;
  for (std::size_t s = 0; s < st.levels.size(); ++s)
    if (st.levels[s] == lambda) return static_cast<int>(s) + 1;
  throw DomainError("level not stored in the growth state");
}

}  // namespace detail

inline LeafMeasure leaf_measure(const GrowthState& st, double lambda,
                                double r) {
  if (!(lambda > 0)) throw DomainError("leaf_measure needs lambda > 0");
  if (!(r > 0)) throw DomainError("leaf_measure needs a radius > 0");
  int step = detail::level_step(st, lambda);
  std::vector<int> old;
  RealTree f = masked_subtree(st.forest, mask_after_step(st, step), &old);
  auto d = f.depths();
  LeafMeasure m;
  m.lambda = lambda;
  m.radius = r;
  for (std::size_t u = 1; u < f.size(); ++u) {
    if (f.nodes[u].frontier && d[u] < r)
      throw DomainError("ball reaches past the sampled region");
    if (!f.nodes[u].children.empty() || f.nodes[u].frontier) continue;
    if (d[u] > r) continue;
    if (st.birth_step[old[u]] == 0) continue;  // leaf of the initial tree
    m.atoms.push_back(f.node_point(static_cast<int>(u)));
    m.atom_depths.push_back(d[u]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Leaf thinning / spanning
// ---------------------------------------------------------------------------

// Subtree spanned by the given leaves together with the root.
inline RealTree leaf_span(const RealTree& t, const std::vector<int>& leaves,
                          std::vector<int>* old_of_new = nullptr) {
  std::vector<char> mask(t.size(), 0);
  mask[0] = 1;
  for (int u : leaves) {
    if (u < 0 || u >= static_cast<int>(t.size()))
      throw DomainError("leaf index out of range");
    for (int v = u; v != 0 && !mask[v]; v = t.nodes[v].parent) mask[v] = 1;
  }
  return masked_subtree(t, mask, old_of_new);
}

// Real (non-frontier) leaves of a tree, excluding the root.
inline std::vector<int> real_leaves(const RealTree& t) {
  std::vector<int> out;
  for (std::size_t u = 1; u < t.size(); ++u)
    if (t.nodes[u].children.empty() && !t.nodes[u].frontier)
      out.push_back(static_cast<int>(u));
  return out;
}

namespace detail {

struct SpanStats {
  double root_count = 0.0;
  double leaf_count = 0.0;
  double height = 0.0;
  double length = 0.0;
};

inline SpanStats span_stats(const RealTree& t) {
  SpanStats s;
  s.root_count = static_cast<double>(t.nodes[0].children.size());
  s.leaf_count = static_cast<double>(real_leaves(t).size());
  auto d = t.depths();
  for (std::size_t u = 1; u < t.size(); ++u) {
    s.height = std::max(s.height, d[u]);
    s.length += t.nodes[u].edge_length;
  }
  return s;
}

}  // namespace detail

// Thinning consistency of the leaf measures across levels: keep each leaf of
// a level-Lambda forest with probability lambda/Lambda and span with the
// root; the result has the law of the leaf span of a direct level-lambda
// forest.  Compares root counts (Poisson a psi^{-1}(lambda)) and the
// KS statistics of leaf count, height, total length and a root-count z-test.
inline std::vector<StatReport> poisson_resample_check(
    const LevyFamilyParams& params, double lambda_big, double lambda_small,
    int n_rep, double r, Rng& rng, std::size_t node_budget = 1u << 22) {
  if (!(lambda_big >= 100.0 * lambda_small))
    throw DomainError("poisson_resample_check needs lambda_big >> lambda_small");
  double keep = lambda_small / lambda_big;
  std::vector<double> roots_a, roots_b, leaves_a, leaves_b, h_a, h_b, len_a,
      len_b;
  for (int i = 0; i < n_rep; ++i) {
    RealTree big = sample_gw_real_forest(params, lambda_big, rng, r,
                                         node_budget);
    std::vector<int> kept;
    for (int u : real_leaves(big))
      if (rng.uniform() < keep) kept.push_back(u);
    detail::SpanStats a = detail::span_stats(leaf_span(big, kept));

    RealTree small = sample_gw_real_forest(params, lambda_small, rng, r,
                                           node_budget);
    detail::SpanStats b =
        detail::span_stats(leaf_span(small, real_leaves(small)));

    roots_a.push_back(a.root_count);
    roots_b.push_back(b.root_count);
    leaves_a.push_back(a.leaf_count);
    leaves_b.push_back(b.leaf_count);
    h_a.push_back(a.height);
    h_b.push_back(b.height);
    len_a.push_back(a.length);
    len_b.push_back(b.length);
  }
  double root_target =
      params.a * params.mech.psi_inverse(lambda_small);
  std::vector<StatReport> out;
  out.push_back(
      poisson_dispersion(roots_a, root_target, "resample root count"));
  out.push_back(poisson_dispersion(roots_b, root_target, "direct root count"));
  out.push_back(ks_two_sample(roots_a, roots_b, "resample root count KS"));
  out.push_back(ks_two_sample(leaves_a, leaves_b, "resample leaf count KS"));
  out.push_back(ks_two_sample(h_a, h_b, "resample height KS"));
  out.push_back(ks_two_sample(len_a, len_b, "resample length KS"));
  return out;
}

// ---------------------------------------------------------------------------
// Excursion decomposition at the root
// ---------------------------------------------------------------------------

struct ExcursionComponent {
  TreePoint attachment;  // always the root
  RealTree tree;         // the component with the root re-attached
  double height = 0.0;
};

inline std::vector<ExcursionComponent> excursion_components(
    const RealTree& t) {
  std::vector<ExcursionComponent> out;
  auto d = t.depths();
  for (int c : t.nodes[0].children) {
    std::vector<char> mask(t.size(), 0);
    mask[0] = 1;
    // descendants of c: a DFS from c
    std::vector<int> stack = {c};
    double h = 0.0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      mask[u] = 1;
      h = std::max(h, d[u]);
      for (int v : t.nodes[u].children) stack.push_back(v);
    }
    ExcursionComponent comp;
    comp.attachment = TreePoint{0, 0.0};
    comp.tree = masked_subtree(t, mask);
    comp.height = h;
    out.push_back(std::move(comp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tail of the excursion intensity
// ---------------------------------------------------------------------------

// Count root components of a level-lambda_max forest higher than each x in
// x_grid over n_rep replicates.  Exactly Poisson with mean
// a * finite_level_w(0, lambda_max, x); the limit intensity tail is
// a * grey_v(x), with the difference reported as an explicit bias bound.
// The smallest x doubles as the truncation scale for recovering the root
// mass a.
inline std::vector<StatReport> theta_tail_check(const LevyFamilyParams& params,
                                                double lambda_max,
                                                const std::vector<double>& x_grid,
                                                int n_rep, Rng& rng,
                                                std::size_t node_budget = 1u
                                                                          << 22) {
  if (params.mech.grey_condition() != Grey::kTrue)
    throw DomainError("theta_tail_check requires Grey's condition");
  if (x_grid.empty()) throw DomainError("theta_tail_check needs thresholds");
  for (double x : x_grid)
    if (!(x > 0)) throw DomainError("thresholds must be > 0");
  double x_max = *std::max_element(x_grid.begin(), x_grid.end());
  double x_min = *std::min_element(x_grid.begin(), x_grid.end());
  double cap = 1.125 * x_max;
  std::vector<std::vector<double>> counts(x_grid.size());
  for (int i = 0; i < n_rep; ++i) {
    RealTree f = sample_gw_real_forest(params, lambda_max, rng, cap,
                                       node_budget);
    auto d = f.depths();
    // height of the component below each root child
    std::vector<double> comp_h;
    std::vector<double> high(f.size(), 0.0);
    auto order = f.dfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int u = *it;
      high[u] = std::max(high[u], d[u]);
      if (u != 0) {
        int p = f.nodes[u].parent;
        high[p] = std::max(high[p], high[u]);
      }
    }
    for (int c : f.nodes[0].children) comp_h.push_back(high[c]);
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
      double n = 0.0;
      for (double h : comp_h)
        if (h > x_grid[j]) n += 1.0;
      counts[j].push_back(n);
    }
  }
  // Components surviving past any threshold: the Poisson(a gamma) backbone
  // trees plus the dying components that reach x, so the exact count is
  // Poisson(a (gamma + w)).
  double gamma = params.mech.gamma_root();
  std::vector<StatReport> out;
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    double x = x_grid[j];
    double w = gamma + params.mech.finite_level_w(0.0, lambda_max, x);
    double v = params.mech.grey_v(x);
    double bias = params.a * std::abs(w - v);
    out.push_back(mean_vs_target(counts[j], params.a * v,
                                 "component tail mean x=" + std::to_string(x),
                                 bias));
    out.push_back(poisson_dispersion(
        counts[j], params.a * w,
        "component tail dispersion x=" + std::to_string(x)));
  }
  // root-mass recovery from the most finely truncated count
  double w0 = gamma + params.mech.finite_level_w(0.0, lambda_max, x_min);
  std::vector<double> a_hat;
  std::size_t j_min = static_cast<std::size_t>(
      std::min_element(x_grid.begin(), x_grid.end()) - x_grid.begin());
  for (double c : counts[j_min]) a_hat.push_back(c / w0);
  out.push_back(mean_vs_target(a_hat, params.a, "root mass recovery"));
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition of F_lambda along F_mu0
// ---------------------------------------------------------------------------

enum class SiteClass { kJump, kQuadratic, kBranchPoint, kRoot };

inline const char* site_class_name(SiteClass c) {
  switch (c) {
    case SiteClass::kJump: return "jump";
    case SiteClass::kQuadratic: return "quadratic";
    case SiteClass::kBranchPoint: return "branch";
    default: return "root";
  }
}

struct GraftingSite {
  int node = 0;  // index in the full stored forest
  SiteClass cls = SiteClass::kRoot;
  int old_degree = 0;      // children count within F_mu0
  int n_components = 0;    // grafted components hanging at the site
  int n_tall = 0;          // components higher than eps
  double local_mass = 0.0;  // n_tall normalized by the eps-tail intensity
};

struct DecompositionReport {
  double mu0 = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  double normalizer = 0.0;       // eps-tail intensity per unit local mass
  double skeleton_length = 0.0;  // total length of F_mu0
  std::vector<GraftingSite> sites;
  double root_mass = 0.0;     // estimate of a
  double s2_intensity = 0.0;  // estimate of 2 beta from one-component sites
  bool resolved = true;  // false when eps leaves the site counts too sparse
};

// Classify the grafting sites of F_lambda \ F_mu0 using the birth-step
// bookkeeping of the growth state, and estimate the local mass at each site
// from the number of grafted components higher than eps.  Sites on edge
// interiors carry probability-one single attachments: with a quadratic term
// present a one-component site is quadratic, anything else is a jump site.
// Branch points and the root are listed even when nothing grafted there.
// A finite `radius` restricts the decomposition to sites within that root
// distance; the sampled region must extend at least eps past it so the
// eps-tall indicators are exact.
inline DecompositionReport decompose_at_level(const LevyFamilyParams& params,
                                              const GrowthState& st,
                                              double mu0, double lambda,
                                              double eps,
                                              double radius =
                                                  std::numeric_limits<
                                                      double>::infinity()) {
  if (!(eps > 0)) throw DomainError("decompose_at_level needs eps > 0");
  if (!(mu0 < lambda)) throw DomainError("decompose_at_level needs mu0 < lambda");
  int s0 = detail::level_step(st, mu0);
  int s1 = detail::level_step(st, lambda);
  if (s0 >= s1) throw DomainError("levels out of order in the state");

  const RealTree& f = st.forest;
  auto d = f.depths();
  // component height above each node among nodes born after step s0
  std::vector<double> high(f.size(), 0.0);
  auto order = f.dfs_order();
  std::vector<char> is_new(f.size(), 0);
  for (std::size_t u = 0; u < f.size(); ++u)
    is_new[u] = (st.birth_step[u] > s0 && st.birth_step[u] <= s1) ? 1 : 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int u = *it;
    if (!is_new[u]) continue;
    high[u] = std::max(high[u], d[u]);
    int p = f.nodes[u].parent;
    if (is_new[p])
      high[p] = std::max(high[p], high[u]);
  }

  DecompositionReport rep;
  rep.mu0 = mu0;
  rep.lambda = lambda;
  rep.eps = eps;
  rep.normalizer = params.mech.finite_level_w(mu0, lambda, eps);
  double beta = params.mech.beta();

  int s2_tall = 0;
  bool bounded = std::isfinite(radius);
  if (bounded) {
    for (std::size_t u = 0; u < f.size(); ++u)
      if (st.birth_step[u] <= s1 && f.nodes[u].frontier &&
          d[u] < radius + eps)
        throw DomainError("ball reaches past the sampled region");
  }
  for (std::size_t u = 0; u < f.size(); ++u) {
    if (st.birth_step[u] > s0) continue;  // not a point of F_mu0
    if (u != 0) {
      // skeleton length, clipped at the ball boundary
      double lo = std::min(d[f.nodes[u].parent], radius);
      double hi = std::min(d[u], radius);
      rep.skeleton_length += std::max(0.0, hi - lo);
    }
    if (bounded && d[u] > radius) continue;
    GraftingSite site;
    site.node = static_cast<int>(u);
    for (int c : f.nodes[u].children) {
      if (is_new[c]) {
        ++site.n_components;
        if (high[c] - d[u] > eps) ++site.n_tall;
      } else if (st.birth_step[c] <= s0) {
        ++site.old_degree;
      }
    }
    if (u == 0) {
      site.cls = SiteClass::kRoot;
    } else if (site.old_degree >= 2) {
      site.cls = SiteClass::kBranchPoint;
    } else if (site.n_components == 0) {
      continue;  // plain skeleton point, not a grafting site
    } else if (site.n_components == 1 && beta > 0) {
      site.cls = SiteClass::kQuadratic;
    } else {
      site.cls = SiteClass::kJump;
    }
    site.local_mass = static_cast<double>(site.n_tall) / rep.normalizer;
    if (site.cls == SiteClass::kQuadratic) s2_tall += site.n_tall;
    if (site.cls == SiteClass::kRoot) rep.root_mass = site.local_mass;
    rep.sites.push_back(site);
  }
  if (rep.skeleton_length > 0)
    rep.s2_intensity = static_cast<double>(s2_tall) /
                       (rep.skeleton_length * rep.normalizer);
  double expected_root = params.a * rep.normalizer;
  rep.resolved = expected_root >= 5.0;
  return rep;
}

}  // namespace levygrow
