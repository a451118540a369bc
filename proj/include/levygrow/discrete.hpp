// Discrete ordered rooted trees (Neveu words), Galton-Watson sampling,
// Bernoulli leaf colouring, and the exact black/red reconstruction laws.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "levygrow/mechanism.hpp"  // DomainError
#include "levygrow/rng.hpp"
#include "levygrow/stats.hpp"

namespace levygrow {

// Offspring distribution with finite or lazily extended support.  The lazy
// form covers heavy-tailed laws whose masses are cheap to compute one at a
// time but whose support cannot be tabulated up to machine precision.
class OffspringDistribution {
 public:
  explicit OffspringDistribution(std::vector<double> masses)
      : masses_(std::move(masses)) {
    double s = 0.0;
    for (double m : masses_) {
      if (m < 0) throw DomainError("negative offspring mass");
      s += m;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw DomainError("offspring masses must sum to 1");
    rebuild_cum();
  }

  // head holds xi(0..head.size()-1); tail(k) returns xi(k) for k >= head size.
  OffspringDistribution(std::vector<double> head,
                        std::function<double(std::size_t)> tail)
      : masses_(std::move(head)), tail_(std::move(tail)) {
    for (double m : masses_) {
      if (m < 0) throw DomainError("negative offspring mass");
    }
    rebuild_cum();
  }

  bool finite_support() const { return !tail_; }

  double mass(std::size_t k) const {
    if (k < masses_.size()) return masses_[k];
    if (!tail_) return 0.0;
    return tail_(k);
  }

  std::size_t tabulated_support() const { return masses_.size(); }

  bool proper() const { return mass(1) == 0.0; }
  bool has_leaves() const { return mass(0) > 0.0; }

  double mean() const {
    if (!tail_) {
      double m = 0.0;
      for (std::size_t k = 1; k < masses_.size(); ++k)
        m += static_cast<double>(k) * masses_[k];
      return m;
    }
    throw DomainError("mean() undefined for lazily extended support");
  }

  double pgf(double s) const { return pgf_derivative(s, 0); }

  // phi^(l)(s) = sum_{k>=l} xi(k) k!/(k-l)! s^{k-l}.  For lazy supports the
  // series is truncated once the running term drops below 1e-17 of the
  // accumulated value (requires s < 1 there).
  double pgf_derivative(double s, unsigned l) const {
    double acc = 0.0;
    std::size_t k = l;
    double stale = 0;
    while (true) {
      double m = mass(k);
      if (m > 0.0) {
        double ff = 1.0;
        for (unsigned j = 0; j < l; ++j) ff *= static_cast<double>(k - j);
        double term = m * ff * std::pow(s, static_cast<double>(k - l));
        acc += term;
        stale = (acc > 0 && term < 1e-17 * acc) ? stale + 1 : 0;
      } else {
        ++stale;
      }
      ++k;
      if (!tail_ && k >= masses_.size()) break;
      if (tail_) {
        if (k >= masses_.size() && s >= 1.0)
          throw DomainError("pgf_derivative at s>=1 needs finite support");
        if (stale >= 8 && k > masses_.size()) break;
        if (k > masses_.size() + 100000000)
          throw NumericError("pgf_derivative series stalled");
      }
    }
    return acc;
  }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < cum_.size(); ++k) {
      if (u < cum_[k]) return k;
    }
    acc = cum_.empty() ? 0.0 : cum_.back();
    if (!tail_) return cum_.size() ? cum_.size() - 1 : 0;
    // extend lazily until the draw is covered
    std::size_t k = cum_.size();
    while (acc < u) {
      double m = tail_(k);
      acc += m;
      if (acc >= u || k > (1u << 30)) return k;
      ++k;
    }
    return k;
  }

 private:
  void rebuild_cum() {
    cum_.clear();
    double acc = 0.0;
    for (double m : masses_) {
      acc += m;
      cum_.push_back(acc);
    }
  }

  std::vector<double> masses_;
  std::function<double(std::size_t)> tail_;
  std::vector<double> cum_;
};

// Ordered rooted tree; node 0 is the root.  Children vectors keep the Neveu
// order, so parent-closure and gap-freeness hold by construction.
struct DiscreteTree {
  struct Node {
    int parent = -1;
    std::vector<int> children;
  };
  std::vector<Node> nodes;

  static DiscreteTree single_node() {
    DiscreteTree t;
    t.nodes.push_back({});
    return t;
  }

  std::size_t size() const { return nodes.size(); }
  int child_count(int u) const { return static_cast<int>(nodes[u].children.size()); }
  bool is_leaf(int u) const { return nodes[u].children.empty(); }

  int leaf_count() const {
    int n = 0;
    for (const auto& nd : nodes) n += nd.children.empty() ? 1 : 0;
    return n;
  }

  int depth(int u) const {
    int d = 0;
    while (nodes[u].parent >= 0) {
      u = nodes[u].parent;
      ++d;
    }
    return d;
  }

  int height() const {
    int h = 0;
    for (int u = 0; u < static_cast<int>(nodes.size()); ++u)
      if (is_leaf(u)) h = std::max(h, depth(u));
    return h;
  }

  // Neveu word: child indices (1-based) joined by '.', empty for the root.
  std::string word(int u) const {
    std::vector<int> path;
    while (nodes[u].parent >= 0) {
      const auto& sib = nodes[nodes[u].parent].children;
      int idx = static_cast<int>(std::find(sib.begin(), sib.end(), u) - sib.begin());
      path.push_back(idx + 1);
      u = nodes[u].parent;
    }
    std::string w;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      if (!w.empty()) w += '.';
      w += std::to_string(*it);
    }
    return w;
  }

  bool valid() const {
    if (nodes.empty() || nodes[0].parent != -1) return false;
    std::vector<int> seen(nodes.size(), 0);
    for (int u = 0; u < static_cast<int>(nodes.size()); ++u) {
      for (int c : nodes[u].children) {
        if (c < 0 || c >= static_cast<int>(nodes.size())) return false;
        if (nodes[c].parent != u) return false;
        if (seen[c]++) return false;
      }
    }
    for (int u = 1; u < static_cast<int>(nodes.size()); ++u)
      if (!seen[u]) return false;
    return true;
  }

  std::string to_text(const std::vector<uint8_t>* colour = nullptr) const {
    std::vector<std::pair<std::string, std::string>> lines;
    for (int u = 0; u < static_cast<int>(nodes.size()); ++u) {
      std::string line = std::to_string(child_count(u));
      if (colour) line += '\t' + std::to_string(static_cast<int>((*colour)[u]));
      lines.emplace_back(word(u), std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (auto& [w, rest] : lines) out += w + '\t' + rest + '\n';
    return out;
  }

  static DiscreteTree from_text(const std::string& text,
                                std::vector<uint8_t>* colour = nullptr) {
    std::map<std::string, std::pair<int, int>> entries;  // word -> (k, c)
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string word, kf, cf;
      std::getline(ls, word, '\t');
      std::getline(ls, kf, '\t');
      std::getline(ls, cf, '\t');
      entries[word] = {std::stoi(kf), cf.empty() ? -1 : std::stoi(cf)};
    }
    if (!entries.count("")) throw DomainError("tree text missing root");
    DiscreteTree t;
    if (colour) colour->clear();
    std::map<std::string, int> index;
    // build recursively in word order starting at the root
    std::function<int(const std::string&, int)> build =
        [&](const std::string& w, int parent) -> int {
      auto it = entries.find(w);
      if (it == entries.end()) throw DomainError("tree text has gaps");
      int u = static_cast<int>(t.nodes.size());
      t.nodes.push_back({parent, {}});
      if (colour) colour->push_back(it->second.second == 1 ? 1 : 0);
      int k = it->second.first;
      for (int j = 1; j <= k; ++j) {
        std::string cw = w.empty() ? std::to_string(j) : w + '.' + std::to_string(j);
        int c = build(cw, u);
        t.nodes[u].children.push_back(c);
      }
      return u;
    };
    build("", -1);
    if (t.size() != entries.size()) throw DomainError("tree text has orphans");
    return t;
  }
};

struct TwoColourTree {
  DiscreteTree tree;
  std::vector<uint8_t> black;  // 1 = black, 0 = red

  // every node's mark equals the max over its leaf descendants
  bool closure_valid() const {
    for (int u = static_cast<int>(tree.size()) - 1; u >= 0; --u) {
      if (tree.is_leaf(u)) continue;
      uint8_t expect = 0;
      for (int c : tree.nodes[u].children) expect = std::max(expect, black[c]);
      if (black[u] != expect) return false;
    }
    return true;
  }
};

using DiscreteForest = std::vector<DiscreteTree>;

// Breadth-first GW sampling; returns nullopt when node_budget is exceeded so
// the caller can reject or retry (supercritical laws without xi(0) mass will
// always overflow).
inline std::optional<DiscreteTree> sample_gw_tree(const OffspringDistribution& xi,
                                                  Rng& rng,
                                                  std::size_t node_budget) {
  if (node_budget == 0) throw DomainError("node_budget must be positive");
  DiscreteTree t = DiscreteTree::single_node();
  std::vector<int> frontier = {0};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier) {
      std::size_t k = xi.sample(rng);
      for (std::size_t j = 0; j < k; ++j) {
        if (t.size() >= node_budget) return std::nullopt;
        int c = static_cast<int>(t.size());
        t.nodes.push_back({u, {}});
        t.nodes[u].children.push_back(c);
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return t;
}

// Leaves independently red with probability p; internal marks are the
// ancestral closure (black iff some leaf descendant is black).
inline TwoColourTree colour_leaves(const DiscreteTree& tree, double p, Rng& rng) {
  if (p < 0 || p > 1) throw DomainError("colour probability outside [0,1]");
  TwoColourTree tc;
  tc.tree = tree;
  tc.black.assign(tree.size(), 0);
  // children always have larger index than their parent (BFS/DFS builders)
  for (int u = static_cast<int>(tree.size()) - 1; u >= 0; --u) {
    if (tree.is_leaf(u)) {
      tc.black[u] = rng.uniform() < p ? 0 : 1;
    } else {
      uint8_t b = 0;
      for (int c : tree.nodes[u].children) b = std::max(b, tc.black[c]);
      tc.black[u] = b;
    }
  }
  return tc;
}

namespace detail {
inline int copy_induced(const DiscreteTree& src, int u,
                        const std::function<bool(int)>& keep, DiscreteTree& dst,
                        int dst_parent) {
  int v = static_cast<int>(dst.nodes.size());
  dst.nodes.push_back({dst_parent, {}});
  for (int c : src.nodes[u].children) {
    if (!keep(c)) continue;
    int w = copy_induced(src, c, keep, dst, v);
    dst.nodes[v].children.push_back(w);
  }
  return v;
}
}  // namespace detail

// Induced tree on the black vertices, relabelled order-preservingly.
inline DiscreteTree black_subtree(const TwoColourTree& tc) {
  if (!tc.black[0]) throw DomainError("black_subtree of an all-red tree");
  DiscreteTree out;
  detail::copy_induced(tc.tree, 0,
                       [&](int u) { return tc.black[u] != 0; }, out, -1);
  return out;
}

// Contract unary chains of the black subtree: keep the root and every vertex
// with child count != 1, joined along the ancestral order.
inline DiscreteTree black_tree(const TwoColourTree& tc) {
  DiscreteTree sub = black_subtree(tc);
  DiscreteTree out;
  std::function<int(int, int)> build = [&](int u, int dst_parent) -> int {
    int v = static_cast<int>(out.nodes.size());
    out.nodes.push_back({dst_parent, {}});
    for (int c : sub.nodes[u].children) {
      int w = c;
      while (sub.child_count(w) == 1) w = sub.nodes[w].children[0];
      int built = build(w, v);  // may reallocate out.nodes
      out.nodes[v].children.push_back(built);
    }
    return v;
  };
  build(0, -1);
  return out;
}

// Smallest fixed point of g = phi(g) - xi(0)(1-p) via monotone iteration.
inline double g_of_p(const OffspringDistribution& xi, double p) {
  if (!xi.has_leaves()) throw DomainError("g_of_p requires xi(0) > 0");
  double g = 0.0;
  for (int it = 0; it < 1000000; ++it) {
    double next = xi.pgf(g) - xi.mass(0) * (1.0 - p);
    if (std::abs(next - g) < 1e-15) return next;
    g = next;
  }
  return g;
}

struct BlackRedLaws {
  double g = 0.0;            // all-red probability
  double geom_param = 0.0;   // phi'(g): line-tree edge count is Geometric(.)
  OffspringDistribution xi_b;
  OffspringDistribution xi_r;
  // nu(l) defined for l >= 1: number of red vertices grafted at a node with
  // l black children
  std::function<OffspringDistribution(unsigned)> nu;
};

inline BlackRedLaws derive_black_red_laws(const OffspringDistribution& xi,
                                          double p) {
  if (!xi.proper() || !xi.has_leaves())
    throw DomainError("colouring laws need xi(1) = 0 and xi(0) > 0");
  if (!(p > 0 && p < 1)) throw DomainError("p must lie in (0,1)");
  if (!xi.finite_support())
    throw DomainError("colouring laws need finite offspring support");
  double g = g_of_p(xi, p);
  double phi1 = xi.pgf_derivative(g, 1);
  std::size_t kmax = xi.tabulated_support();  // masses 0..kmax-1

  std::vector<double> xb(kmax, 0.0);
  xb[0] = xi.mass(0) * (1.0 - p) / ((1.0 - g) * (1.0 - phi1));
  for (std::size_t l = 2; l < kmax; ++l) {
    double fac = 1.0;
    for (std::size_t j = 2; j <= l; ++j) fac *= static_cast<double>(j);
    xb[l] = xi.pgf_derivative(g, static_cast<unsigned>(l)) *
            std::pow(1.0 - g, static_cast<double>(l - 1)) / (fac * (1.0 - phi1));
  }
  double sb = 0.0;
  for (double v : xb) sb += v;
  for (double& v : xb) v /= sb;  // remove rounding drift; sb = 1 analytically

  std::vector<double> xr(kmax, 0.0);
  xr[0] = xi.mass(0) * p / g;
  for (std::size_t l = 2; l < kmax; ++l)
    xr[l] = xi.mass(l) * std::pow(g, static_cast<double>(l - 1));
  double sr = 0.0;
  for (double v : xr) sr += v;
  for (double& v : xr) v /= sr;

  BlackRedLaws laws{g, phi1, OffspringDistribution(xb),
                    OffspringDistribution(xr), {}};
  laws.nu = [xi, g](unsigned l) {
    if (l == 0) throw DomainError("nu_l needs l >= 1");
    double norm = xi.pgf_derivative(g, l);
    std::size_t kmax_nu = xi.tabulated_support();
    std::vector<double> masses;
    for (std::size_t k = 0; l + k < kmax_nu; ++k) {
      double ff = 1.0;  // (l+k)!/k!
      for (unsigned j = 1; j <= l; ++j) ff *= static_cast<double>(k + j);
      masses.push_back(xi.mass(l + k) * ff *
                       std::pow(g, static_cast<double>(k)) / norm);
    }
    if (masses.empty()) masses.push_back(1.0);
    double s = 0.0;
    for (double v : masses) s += v;
    for (double& v : masses) v /= s;
    return OffspringDistribution(masses);
  };
  return laws;
}

// Reconstruction: Step 1 inserts Geometric(phi'(g)) line-trees on every edge
// of the black tree and on the root; Step 2 grafts nu_l-many red vertices per
// vertex with l children, uniformly interleaved, each carrying an independent
// red GW(xi_r) subtree.  Returns nullopt on node-budget overflow.
inline std::optional<TwoColourTree> reconstruct(const DiscreteTree& black,
                                                const OffspringDistribution& xi,
                                                double p, Rng& rng,
                                                std::size_t node_budget) {
  BlackRedLaws laws = derive_black_red_laws(xi, p);
  auto geometric = [&]() {
    std::size_t k = 0;
    while (rng.uniform() < laws.geom_param) ++k;
    return k;
  };

  TwoColourTree out;
  auto add_node = [&](int parent, uint8_t colour) -> int {
    int u = static_cast<int>(out.tree.nodes.size());
    out.tree.nodes.push_back({parent, {}});
    out.black.push_back(colour);
    if (parent >= 0) out.tree.nodes[parent].children.push_back(u);
    return u;
  };

  // Step 1: copy the black tree, expanding each edge (and the root) by a
  // geometric chain of unary black vertices.
  std::vector<int> image(black.size(), -1);
  {
    int cur = add_node(-1, 1);
    for (std::size_t j = geometric(); j > 0; --j) cur = add_node(cur, 1);
    image[0] = cur;
  }
  for (int u = 1; u < static_cast<int>(black.size()); ++u) {
    if (out.tree.size() > node_budget) return std::nullopt;
    int cur = image[black.nodes[u].parent];
    for (std::size_t j = geometric(); j > 0; --j) cur = add_node(cur, 1);
    image[u] = add_node(cur, 1);
  }

  // Step 2: on every vertex with l >= 1 children graft nu_l red vertices,
  // interleaved uniformly among the black children, each carrying a red
  // GW(xi_r) tree.
  int step1_nodes = static_cast<int>(out.tree.size());
  for (int u = 0; u < step1_nodes; ++u) {
    unsigned l = static_cast<unsigned>(out.tree.child_count(u));
    if (l == 0) continue;
    std::size_t n_red = laws.nu(l).sample(rng);
    if (n_red == 0) continue;
    // choose which of the l + n_red ordered slots are red
    std::vector<int> red_slots = rng.sample_slots(
        static_cast<int>(n_red), static_cast<int>(l + n_red));
    std::vector<int> blacks = out.tree.nodes[u].children;
    std::vector<int> merged;
    std::size_t bi = 0, ri = 0;
    for (std::size_t s = 0; s < l + n_red; ++s) {
      if (ri < red_slots.size() && red_slots[ri] == static_cast<int>(s)) {
        ++ri;
        auto red = sample_gw_tree(laws.xi_r, rng,
                                  node_budget > out.tree.size()
                                      ? node_budget - out.tree.size()
                                      : 1);
        if (!red) return std::nullopt;
        // splice the red tree under u
        int base = add_node(u, 0);
        out.tree.nodes[u].children.pop_back();  // re-ordered below
        merged.push_back(base);
        std::vector<int> map(red->size());
        map[0] = base;
        for (int w = 1; w < static_cast<int>(red->size()); ++w)
          map[w] = add_node(map[red->nodes[w].parent], 0);
      } else {
        merged.push_back(blacks[bi++]);
      }
    }
    out.tree.nodes[u].children = merged;
    if (out.tree.size() > node_budget) return std::nullopt;
  }
  return out;
}

// Number of red trees grafted on the black subtree (1 when completely red).
inline std::size_t count_red_trees(const TwoColourTree& tc) {
  if (!tc.black[0]) return 1;
  std::size_t n = 0;
  for (int u = 1; u < static_cast<int>(tc.tree.size()); ++u)
    if (!tc.black[u] && tc.black[tc.tree.nodes[u].parent]) ++n;
  return n;
}

// MC check of the generating-function identity
//   phi(kappa(s)) - kappa(s) = phi(s g) - s g - (phi(g) - g)
// where kappa(s) = E[s^N].  Reports the worst standardized deviation of the
// MC estimate of kappa(s) from the equation's root over an s-grid.
inline StatReport kappa_check(const OffspringDistribution& xi, double p,
                              std::size_t n_samples, Rng& rng,
                              std::size_t node_budget = 1u << 20) {
  double g = g_of_p(xi, p);
  std::vector<double> grid = {0.25, 0.5, 0.75};
  double worst_z = 0.0, worst_est = 0.0, worst_target = 0.0;
  std::size_t worst_n = 0;
  std::vector<std::vector<double>> vals(grid.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto t = sample_gw_tree(xi, rng, node_budget);
    if (!t) continue;
    auto tc = colour_leaves(*t, p, rng);
    auto n_red = static_cast<double>(count_red_trees(tc));
    for (std::size_t j = 0; j < grid.size(); ++j)
      vals[j].push_back(std::pow(grid[j], n_red));
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double s = grid[j];
    double rhs = xi.pgf(s * g) - s * g - (xi.pgf(g) - g);
    // phi(x) - x is decreasing for x below the point where phi' = 1; the
    // root of phi(x) - x = rhs + (phi(g) - g) ... solve directly on [0, 1]
    auto f = [&](double x) { return -(xi.pgf(x) - x); };  // increasing
    double target = bisect_increasing(
        [&](double x) { return f(x) + rhs; }, 0.0, 1.0, 1e-14);
    double mean = 0.0;
    for (double v : vals[j]) mean += v;
    mean /= static_cast<double>(vals[j].size());
    double ss = 0.0;
    for (double v : vals[j]) ss += (v - mean) * (v - mean);
    double se = std::sqrt(ss / static_cast<double>(vals[j].size() - 1) /
                          static_cast<double>(vals[j].size()));
    double z = se > 0 ? (mean - target) / se : 0.0;
    if (std::abs(z) >= std::abs(worst_z)) {
      worst_z = z;
      worst_est = mean;
      worst_target = target;
      worst_n = vals[j].size();
    }
  }
  StatReport r;
  r.name = "red-tree-count generating function";
  r.n = worst_n;
  r.statistic = worst_z;
  r.estimate = worst_est;
  r.std_error = worst_z != 0.0 ? (worst_est - worst_target) / worst_z : 0.0;
  r.target = worst_target;
  r.p_value = std::min(1.0, static_cast<double>(grid.size()) *
                                normal_two_sided_p(worst_z));
  r.verdict = std::abs(worst_z) < 3.0 ? Verdict::kPass : Verdict::kFail;
  return r;
}

}  // namespace levygrow
