// Rooted real trees with positive edge lengths: path metric, grafting,
// balls, nested Hausdorff distance, Gromov-Hausdorff bounds, l1 embedding,
// length measure, and serialization (line dump + Newick export).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "levygrow/discrete.hpp"
#include "levygrow/mechanism.hpp"  // DomainError
#include "levygrow/rng.hpp"

namespace levygrow {

// Point addressed as (edge-id, offset from the parent endpoint).  The node v
// itself is the canonical point {v, edge_length(v)}; the root is {0, 0}.
struct TreePoint {
  int edge = 0;
  double offset = 0.0;
};

struct RealTree {
  struct Node {
    int parent = -1;
    double edge_length = 0.0;  // length of the edge to the parent; 0 for root
    std::vector<int> children;
    bool frontier = false;  // true when the node is a radius-cap cut point
  };
  std::vector<Node> nodes;  // index 0 = root

  static RealTree point_tree() {
    RealTree t;
    t.nodes.push_back({});
    return t;
  }

  std::size_t size() const { return nodes.size(); }
  bool is_leaf(int u) const { return nodes[u].children.empty(); }

  int add_child(int parent, double length, bool frontier = false) {
    if (!(length > 0)) throw DomainError("edge length must be positive");
    int u = static_cast<int>(nodes.size());
    nodes.push_back({parent, length, {}, frontier});
    nodes[parent].children.push_back(u);
    return u;
  }

  // nodes in root-first (DFS) order; node indices need not be topological
  // because grafting subdivides edges in place
  std::vector<int> dfs_order() const {
    std::vector<int> order;
    order.reserve(nodes.size());
    std::vector<int> stack = {0};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (auto it = nodes[u].children.rbegin(); it != nodes[u].children.rend(); ++it)
        stack.push_back(*it);
    }
    return order;
  }

  // distance from the root to every node
  std::vector<double> depths() const {
    std::vector<double> d(nodes.size(), 0.0);
    for (int u : dfs_order())
      if (u != 0) d[u] = d[nodes[u].parent] + nodes[u].edge_length;
    return d;
  }

  double height() const {
    auto d = depths();
    return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
  }

  double total_length() const {
    double s = 0.0;
    for (const auto& nd : nodes) s += nd.edge_length;
    return s;
  }

  int lca(int u, int v, const std::vector<int>& node_depth) const {
    while (u != v) {
      if (node_depth[u] < node_depth[v])
        v = nodes[v].parent;
      else
        u = nodes[u].parent;
    }
    return u;
  }

  std::vector<int> hop_depths() const {
    std::vector<int> d(nodes.size(), 0);
    for (int u : dfs_order())
      if (u != 0) d[u] = d[nodes[u].parent] + 1;
    return d;
  }

  bool is_ancestor(int a, int u, const std::vector<int>& hop) const {
    while (hop[u] > hop[a]) u = nodes[u].parent;
    return u == a;
  }

  double point_depth(const TreePoint& p, const std::vector<double>& d) const {
    if (p.edge == 0) return p.offset;  // == 0 for the canonical root point
    return d[nodes[p.edge].parent] + p.offset;
  }

  double distance(const TreePoint& p, const TreePoint& q,
                  const std::vector<double>& d,
                  const std::vector<int>& hop) const {
    if (p.edge == q.edge) return std::abs(p.offset - q.offset);
    double dp = point_depth(p, d), dq = point_depth(q, d);
    int w = lca(p.edge, q.edge, hop);
    if (w == p.edge && is_ancestor(p.edge, nodes[q.edge].parent, hop))
      return dq - dp;
    if (w == q.edge && is_ancestor(q.edge, nodes[p.edge].parent, hop))
      return dp - dq;
    return dp + dq - 2.0 * d[w];
  }

  double distance(const TreePoint& p, const TreePoint& q) const {
    return distance(p, q, depths(), hop_depths());
  }

  TreePoint node_point(int u) const { return {u, nodes[u].edge_length}; }

  // --- serialization ---------------------------------------------------------

  // lossless line dump: header "root <id> nodes <n>", then "id parent length"
  std::string to_dump() const {
    std::ostringstream os;
    os.precision(17);
    os << "root 0 nodes " << nodes.size() << '\n';
    for (std::size_t u = 0; u < nodes.size(); ++u)
      os << u << ' ' << nodes[u].parent << ' ' << nodes[u].edge_length << '\n';
    return os.str();
  }

  static RealTree from_dump(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::size_t n = 0;
    int root = -1;
    in >> word >> root >> word >> n;
    if (root != 0 || n == 0) throw DomainError("bad real-tree dump header");
    RealTree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t id;
      int parent;
      double len;
      if (!(in >> id >> parent >> len) || id != i)
        throw DomainError("bad real-tree dump row");
      t.nodes[i].parent = parent;
      t.nodes[i].edge_length = len;
      if (parent >= 0) t.nodes[parent].children.push_back(static_cast<int>(i));
    }
    return t;
  }

  std::string to_newick() const {
    std::ostringstream os;
    os.precision(17);
    std::function<void(int)> rec = [&](int u) {
      if (!nodes[u].children.empty()) {
        os << '(';
        for (std::size_t i = 0; i < nodes[u].children.size(); ++i) {
          if (i) os << ',';
          rec(nodes[u].children[i]);
        }
        os << ')';
      }
      os << 'n' << u;
      if (u != 0) os << ':' << nodes[u].edge_length;
    };
    rec(0);
    os << ';';
    return os.str();
  }
};

// Real tree from a discrete tree with positive edge marks (mark of the root
// is ignored); zero marks collapse the child into its parent.
inline RealTree from_marked_tree(const DiscreteTree& t,
                                 const std::vector<double>& marks) {
  if (marks.size() != t.size()) throw DomainError("one mark per node required");
  RealTree out;
  out.nodes.push_back({});
  std::vector<int> image(t.size(), -1);
  image[0] = 0;
  // DiscreteTree builders emit children after parents
  for (std::size_t u = 1; u < t.size(); ++u) {
    if (marks[u] < 0) throw DomainError("negative edge mark");
    int p = image[t.nodes[u].parent];
    image[u] = marks[u] == 0.0 ? p : out.add_child(p, marks[u]);
  }
  return out;
}

// Graft attached trees at the given points of base.  Interior points become
// new degree-3 nodes by exact edge subdivision; the attached tree's root is
// identified with the attachment point.
inline RealTree graft(const RealTree& base,
                      const std::vector<std::pair<TreePoint, RealTree>>& att) {
  RealTree out = base;
  // group interior subdivision requests by edge, deepest offset first
  std::map<int, std::vector<std::pair<double, int>>> by_edge;  // offset, att-idx
  std::vector<int> att_node(att.size(), -1);
  for (std::size_t i = 0; i < att.size(); ++i) {
    const auto& p = att[i].first;
    if (p.edge < 0 || p.edge >= static_cast<int>(base.size()))
      throw DomainError("attachment edge out of range");
    double len = base.nodes[p.edge].edge_length;
    if (p.offset < 0 || p.offset > len) throw DomainError("attachment offset out of range");
    if (p.edge == 0 || p.offset == len) {
      att_node[i] = p.edge;  // attach at an existing node (root included)
    } else {
      by_edge[p.edge].push_back({p.offset, static_cast<int>(i)});
    }
  }
  for (auto& [edge, reqs] : by_edge) {
    std::sort(reqs.begin(), reqs.end());
    // walk from the parent end, inserting subdivision nodes
    int upper = out.nodes[edge].parent;
    double consumed = 0.0;
    double total = out.nodes[edge].edge_length;
    for (auto& [off, idx] : reqs) {
      if (off == consumed && upper != out.nodes[edge].parent) {
        att_node[idx] = upper;  // same offset as the previous subdivision
        continue;
      }
      int mid = static_cast<int>(out.nodes.size());
      out.nodes.push_back({upper, off - consumed, {}, false});
      // splice: upper loses `edge` (or previous mid) as child, gains mid
      auto& ch = out.nodes[upper].children;
      std::replace(ch.begin(), ch.end(), edge, mid);
      out.nodes[mid].children.push_back(edge);
      out.nodes[edge].parent = mid;
      att_node[idx] = mid;
      upper = mid;
      consumed = off;
    }
    out.nodes[edge].edge_length = total - consumed;
  }
  // paste the attached trees
  for (std::size_t i = 0; i < att.size(); ++i) {
    const RealTree& t = att[i].second;
    std::vector<int> image(t.size(), -1);
    image[0] = att_node[i];
    for (int u : t.dfs_order()) {
      if (u == 0) continue;
      image[u] = out.add_child(image[t.nodes[u].parent], t.nodes[u].edge_length,
                               t.nodes[u].frontier);
    }
  }
  return out;
}

// Closed ball of radius r around the root; cut points become frontier leaves.
inline RealTree ball(const RealTree& tree, double r) {
  if (r < 0) throw DomainError("ball radius must be >= 0");
  RealTree out;
  out.nodes.push_back({});
  auto d = tree.depths();
  std::vector<int> image(tree.size(), -1);
  image[0] = 0;
  for (int u : tree.dfs_order()) {
    if (u == 0) continue;
    int p = tree.nodes[u].parent;
    if (image[p] < 0) continue;           // parent already outside
    if (out.nodes[image[p]].frontier) continue;  // parent is a cut point
    double pd = d[p];
    if (d[u] <= r) {
      image[u] = out.add_child(image[p], tree.nodes[u].edge_length,
                               tree.nodes[u].frontier);
    } else if (pd < r) {
      image[u] = out.add_child(image[p], r - pd, true);
    }
  }
  return out;
}

// Hausdorff distance between the r-balls of a tree and of a parent-closed
// subtree of it, given the membership mask.  Exact for nested trees: each
// component of super minus sub attached at depth D <= r contributes
// min(height of component, r - D).
inline double nested_hausdorff(const RealTree& super,
                               const std::vector<char>& in_sub, double r) {
  if (in_sub.size() != super.size()) throw DomainError("mask size mismatch");
  if (!in_sub[0]) throw DomainError("subtree must contain the root");
  auto d = super.depths();
  for (std::size_t u = 1; u < super.size(); ++u)
    if (in_sub[u] && !in_sub[super.nodes[u].parent])
      throw DomainError("subtree mask not parent-closed");
  // peak depth reachable below each node (within out-of-sub components)
  std::vector<double> peak(super.size());
  for (std::size_t u = 0; u < super.size(); ++u) peak[u] = d[u];
  auto order = super.dfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int u = *it;
    if (u == 0) continue;
    int p = super.nodes[u].parent;
    if (!in_sub[u]) peak[p] = std::max(peak[p], peak[u]);
  }
  double best = 0.0;
  for (std::size_t u = 1; u < super.size(); ++u) {
    if (in_sub[u] || !in_sub[super.nodes[u].parent]) continue;
    double attach = d[super.nodes[u].parent];
    if (attach > r) continue;
    best = std::max(best, std::min(peak[u] - attach, r - attach));
  }
  return best;
}

namespace detail {

// Upper bound on the Hausdorff distance between two subtrees in a common
// root-aligned embedding; children matched by exhaustive assignment when few,
// by height-sorted pairing otherwise.
inline double align_upper(const RealTree& a, int ua, const RealTree& b, int ub,
                          const std::vector<double>& ha,
                          const std::vector<double>& hb) {
  const auto& ca = a.nodes[ua].children;
  const auto& cb = b.nodes[ub].children;
  std::size_t na = ca.size(), nb = cb.size();
  auto drop_cost = [&](const RealTree& t, int c,
                       const std::vector<double>& h) {
    return t.nodes[c].edge_length + h[c];
  };
  auto pair_cost = [&](int c1, int c2) {
    return std::abs(a.nodes[c1].edge_length - b.nodes[c2].edge_length) +
           align_upper(a, c1, b, c2, ha, hb);
  };
  if (na == 0 && nb == 0) return 0.0;
  if (na <= 6 && nb <= 6) {
    // exhaustive assignment over the smaller side's injections
    const bool a_small = na <= nb;
    std::size_t ns = a_small ? na : nb, nl = a_small ? nb : na;
    std::vector<int> perm(nl);
    for (std::size_t i = 0; i < nl; ++i) perm[i] = static_cast<int>(i);
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        int c1 = a_small ? ca[i] : ca[perm[i]];
        int c2 = a_small ? cb[perm[i]] : cb[i];
        cost = std::max(cost, pair_cost(c1, c2));
      }
      for (std::size_t i = ns; i < nl; ++i) {
        int c = a_small ? cb[perm[i]] : ca[perm[i]];
        cost = std::max(cost, a_small ? drop_cost(b, c, hb) : drop_cost(a, c, ha));
      }
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // greedy: sort both sides by subtree height + edge length, pair in order
  auto order = [&](const RealTree& t, const std::vector<int>& cs,
                   const std::vector<double>& h) {
    std::vector<int> o(cs);
    std::sort(o.begin(), o.end(), [&](int x, int y) {
      return t.nodes[x].edge_length + h[x] > t.nodes[y].edge_length + h[y];
    });
    return o;
  };
  auto oa = order(a, ca, ha), ob = order(b, cb, hb);
  double cost = 0.0;
  std::size_t i = 0;
  for (; i < oa.size() && i < ob.size(); ++i)
    cost = std::max(cost, pair_cost(oa[i], ob[i]));
  for (; i < oa.size(); ++i) cost = std::max(cost, drop_cost(a, oa[i], ha));
  for (; i < ob.size(); ++i) cost = std::max(cost, drop_cost(b, ob[i], hb));
  return cost;
}

inline std::vector<double> subtree_heights(const RealTree& t) {
  std::vector<double> h(t.size(), 0.0);
  auto order = t.dfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int u = *it;
    if (u == 0) continue;
    int p = t.nodes[u].parent;
    h[p] = std::max(h[p], h[u] + t.nodes[u].edge_length);
  }
  return h;
}

}  // namespace detail

// Certified bracket for the pointed Gromov-Hausdorff distance
// sum_k 2^{-k} (1 ^ d_GH(ball(t1,k), ball(t2,k))): the lower bound uses the
// height-profile witness |h1 - h2|/2 per ball, the upper bound a common
// root-aligned embedding; the series tail beyond k_max is bounded by the
// overall height.
inline std::pair<double, double> gh_distance_bounds(const RealTree& t1,
                                                    const RealTree& t2,
                                                    int k_max) {
  if (k_max < 1) throw DomainError("k_max must be >= 1");
  double lower = 0.0, upper = 0.0;
  double h_all = std::max(t1.height(), t2.height());
  for (int k = 1; k <= k_max; ++k) {
    RealTree b1 = ball(t1, k), b2 = ball(t2, k);
    double lo = 0.5 * std::abs(b1.height() - b2.height());
    auto h1 = detail::subtree_heights(b1), h2 = detail::subtree_heights(b2);
    double up = detail::align_upper(b1, 0, b2, 0, h1, h2);
    up = std::max(up, lo);
    lower += std::pow(0.5, k) * std::min(1.0, lo);
    upper += std::pow(0.5, k) * std::min(1.0, up);
  }
  upper += std::pow(0.5, k_max) * std::min(1.0, h_all);
  return {lower, upper};
}

// Four-point condition on random quadruples of length-measure points.
// A raw-metric hook is exposed for negative controls.
inline bool four_point_metric(const std::function<double(int, int)>& d, int n,
                              double tol = 1e-9) {
  for (int s1 = 0; s1 < n; ++s1)
    for (int s2 = s1; s2 < n; ++s2)
      for (int s3 = s2; s3 < n; ++s3)
        for (int s4 = s3; s4 < n; ++s4) {
          double a = d(s1, s2) + d(s3, s4);
          double b = d(s1, s3) + d(s2, s4);
          double c = d(s1, s4) + d(s2, s3);
          if (a > std::max(b, c) + tol) return false;
          if (b > std::max(a, c) + tol) return false;
          if (c > std::max(a, b) + tol) return false;
        }
  return true;
}

// Cumulative edge lengths in node order; entry u is the total length of
// edges 1..u, so entry size()-1 equals total_length().
inline std::vector<double> edge_length_prefix(const RealTree& tree) {
  std::vector<double> cum(tree.size(), 0.0);
  for (std::size_t u = 1; u < tree.size(); ++u)
    cum[u] = cum[u - 1] + tree.nodes[u].edge_length;
  return cum;
}

inline TreePoint length_measure_sample(const RealTree& tree, Rng& rng,
                                       const std::vector<double>& cum) {
  double total = cum.back();
  if (!(total > 0)) throw DomainError("length measure of a point tree is zero");
  double x = rng.uniform() * total;
  auto it = std::upper_bound(cum.begin(), cum.end(), x);
  int u = static_cast<int>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                    tree.size() - 1));
  double off = std::min(x - cum[u - 1], tree.nodes[u].edge_length);
  return {u, off};
}

inline TreePoint length_measure_sample(const RealTree& tree, Rng& rng) {
  return length_measure_sample(tree, rng, edge_length_prefix(tree));
}

inline bool four_point_check(const RealTree& tree, int n_quadruples, Rng& rng,
                             double tol = 1e-9) {
  auto d = tree.depths();
  auto hop = tree.hop_depths();
  bool has_length = tree.total_length() > 0;
  for (int q = 0; q < n_quadruples; ++q) {
    TreePoint pts[4];
    for (auto& p : pts) {
      if (has_length && rng.uniform() < 0.8) {
        p = length_measure_sample(tree, rng);
      } else {
        p = tree.node_point(static_cast<int>(rng.next_u64() % tree.size()));
      }
    }
    auto dist = [&](int i, int j) {
      return tree.distance(pts[i], pts[j], d, hop);
    };
    if (!four_point_metric(dist, 4, tol)) return false;
  }
  return true;
}

// Isometric embedding into l1: one fresh coordinate per edge in node order;
// f(node) = f(parent) + edge_length * e_node.
struct L1Embedding {
  const RealTree* tree;

  std::map<int, double> coords(const TreePoint& p) const {
    std::map<int, double> v;
    if (p.edge == 0) return v;
    v[p.edge] = p.offset;
    int u = tree->nodes[p.edge].parent;
    while (u != 0) {
      v[u] = tree->nodes[u].edge_length;
      u = tree->nodes[u].parent;
    }
    return v;
  }

  double l1_distance(const TreePoint& p, const TreePoint& q) const {
    auto a = coords(p), b = coords(q);
    double s = 0.0;
    for (auto& [k, v] : a) {
      auto it = b.find(k);
      s += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (auto& [k, v] : b)
      if (!a.count(k)) s += v;
    return s;
  }
};

inline L1Embedding embed_l1(const RealTree& tree) { return {&tree}; }

}  // namespace levygrow
